"""Standard normal density, distribution and quantile functions.

All functions accept scalars or numpy arrays and return the same shape.
The quantile uses Wichura's AS241 (PPND16) rational approximation, which
is accurate to about 1e-16 relative over the full open unit interval.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

__all__ = ["norm_pdf", "norm_cdf", "norm_sf", "norm_ppf", "Z975"]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_INV_SQRT_2 = 1.0 / math.sqrt(2.0)

# AS241 coefficients, highest degree last.
_A = (
    3.3871328727963666080e0,
    1.3314166789178437745e2,
    1.9715909503065514427e3,
    1.3731693765509461125e4,
    4.5921953931549871457e4,
    6.7265770927008700853e4,
    3.3430575583588128105e4,
    2.5090809287301226727e3,
)
_B = (
    1.0,
    4.2313330701600911252e1,
    6.8718700749205790830e2,
    5.3941960214247511077e3,
    2.1213794301586595867e4,
    3.9307895800092710610e4,
    2.8729085735721942674e4,
    5.2264952788528545610e3,
)
_C = (
    1.42343711074968357734e0,
    4.63033784615654529590e0,
    5.76949722146069140550e0,
    3.64784832476320460504e0,
    1.27045825245236838258e0,
    2.41780725177450611770e-1,
    2.27238449892691845833e-2,
    7.74545014278341407640e-4,
)
_D = (
    1.0,
    2.05319162663775882187e0,
    1.67638483018380384940e0,
    6.89767334985100004550e-1,
    1.48103976427480074590e-1,
    1.51986665636164571966e-2,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
)
_E = (
    6.65790464350110377720e0,
    5.46378491116411436990e0,
    1.78482653991729133580e0,
    2.96560571828504891230e-1,
    2.65321895265761230930e-2,
    1.24266094738807843860e-3,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
)
_F = (
    1.0,
    5.99832206555887937690e-1,
    1.36929880922735805310e-1,
    1.48753612908506148525e-2,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
)


def _poly(coef, x):
    # Horner evaluation, coefficients in ascending order.
    out = np.full_like(x, coef[-1])
    for c in reversed(coef[:-1]):
        out = out * x + c
    return out


def _unwrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


def norm_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    return _unwrap(x, _INV_SQRT_2PI * np.exp(-0.5 * x * x))


def norm_cdf(x):
    x = np.asarray(x, dtype=np.float64)
    return _unwrap(x, 0.5 * erfc(-x * _INV_SQRT_2))


def norm_sf(x):
    """Upper tail ``1 - Phi(x)`` without cancellation for large ``x``."""
    x = np.asarray(x, dtype=np.float64)
    return _unwrap(x, 0.5 * erfc(x * _INV_SQRT_2))


def norm_ppf(p):
    """Inverse of the standard normal CDF.

    Returns -inf at 0, +inf at 1 and nan outside [0, 1].
    """
    p = np.asarray(p, dtype=np.float64)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    q = p - 0.5
    out = np.empty_like(p)

    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _poly(_A, r) / _poly(_B, r)

    tail = ~central
    if tail.any():
        pt = p[tail]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.sqrt(-np.log(np.minimum(pt, 1.0 - pt)))
            val = np.where(
                r <= 5.0,
                _poly(_C, r - 1.6) / _poly(_D, r - 1.6),
                _poly(_E, r - 5.0) / _poly(_F, r - 5.0),
            )
        val = np.where(q[tail] < 0.0, -val, val)
        val = np.where(pt == 0.0, -np.inf, val)
        val = np.where(pt == 1.0, np.inf, val)
        out[tail] = val

    out[(p < 0.0) | (p > 1.0) | np.isnan(p)] = np.nan
    return float(out[0]) if scalar else out


Z975 = norm_ppf(0.975)
