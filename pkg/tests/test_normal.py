import math

import mpmath
import numpy as np
import pytest

from samplesplit.normal import Z975, norm_cdf, norm_pdf, norm_ppf, norm_sf

mpmath.mp.dps = 40


def _mp_ppf(p):
    # Root of ncdf(x) = p; avoids the cancellation in erfinv(1 - 2p) at small p.
    p = mpmath.mpf(p)
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -_mp_ppf(1 - p)
    start = -mpmath.sqrt(-2 * mpmath.log(p))
    return float(mpmath.findroot(lambda x: mpmath.log(mpmath.ncdf(x)) - mpmath.log(p), start))


def test_z975_matches_high_precision_quantile():
    assert Z975 == pytest.approx(_mp_ppf(0.975), rel=1e-15)
    assert abs(Z975 - 1.959964) < 1e-6


@pytest.mark.parametrize("p", [1e-300, 1e-20, 1e-8, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.975, 0.99, 1 - 1e-12])
def test_ppf_against_mpmath(p):
    assert norm_ppf(p) == pytest.approx(_mp_ppf(p), rel=1e-13, abs=1e-300)


def test_ppf_relative_accuracy_on_dense_grid():
    p = np.linspace(1e-6, 1 - 1e-6, 2001)
    got = norm_ppf(p)
    want = np.array([_mp_ppf(x) for x in p])
    mask = np.abs(want) > 1e-3
    assert np.max(np.abs(got[mask] - want[mask]) / np.abs(want[mask])) < 1e-12
    assert np.max(np.abs(got[~mask] - want[~mask])) < 1e-15


def test_cdf_and_pdf_against_mpmath():
    for x in (-30.0, -8.0, -1.5, 0.0, 0.3, 2.0, 7.5):
        assert norm_cdf(x) == pytest.approx(float(mpmath.ncdf(x)), rel=1e-14)
        assert norm_sf(x) == pytest.approx(float(mpmath.ncdf(-x)), rel=1e-14)
        assert norm_pdf(x) == pytest.approx(float(mpmath.npdf(x)), rel=1e-14)


def test_round_trip_cdf_of_ppf():
    p = np.concatenate([np.logspace(-15, -1, 50), np.linspace(0.1, 0.9, 50)])
    assert np.max(np.abs(norm_cdf(norm_ppf(p)) - p) / p) < 1e-12


def test_edges_and_scalars():
    assert norm_ppf(0.0) == -math.inf
    assert norm_ppf(1.0) == math.inf
    assert math.isnan(norm_ppf(1.5))
    assert norm_ppf(0.5) == 0.0
    assert isinstance(norm_ppf(0.3), float)
    assert norm_ppf(np.array([0.5])).shape == (1,)


def test_symmetry():
    p = np.linspace(0.001, 0.499, 300)
    np.testing.assert_allclose(norm_ppf(p), -norm_ppf(1 - p), rtol=1e-12)
