"""Counter-based random streams.

Every random quantity in the package is a pure function of
``(master_seed, domain, replication, test, slot)``.  The mapping is the
Philox4x64-10 block cipher applied to the counter ``(slot_block, test,
replication, 0)`` under the key ``(master_seed, domain)``, so any subset of
draws can be regenerated in any order, on any worker, with identical bits.

Uniforms use the top 53 bits of each output word, offset by half a unit so
they lie strictly inside (0, 1); normals are obtained by inversion.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from .normal import norm_ppf

__all__ = [
    "Domain",
    "philox4x64",
    "uniforms",
    "normals",
    "generator",
]

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_SHIFT11 = np.uint64(11)
_ROUNDS = 10
_LANES = 4
_UINT64_MAX = (1 << 64) - 1


class Domain(IntEnum):
    """Separates independent uses of the same master seed."""

    TRUE_EFFECT = 1
    VARIANCE_NOISE = 2
    ESTIMATE_NOISE = 3
    SPLIT = 4
    UNIT_OUTCOME = 5
    UNIT_PARTITION = 6
    VALIDATION = 7


def _mulhilo(a, b):
    a_lo = a & _MASK32
    a_hi = a >> _SHIFT32
    b_lo = b & _MASK32
    b_hi = b >> _SHIFT32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _SHIFT32) + (lh & _MASK32) + (hl & _MASK32)
    hi = hh + (lh >> _SHIFT32) + (hl >> _SHIFT32) + (mid >> _SHIFT32)
    return hi, a * b


def philox4x64(counter, key):
    """Philox4x64-10 on a batch of counters.

    ``counter`` is a sequence of four uint64 arrays (broadcastable against
    each other), ``key`` a pair of integers.  Returns four uint64 arrays.
    """
    c0, c1, c2, c3 = np.broadcast_arrays(*(np.asarray(c, dtype=np.uint64) for c in counter))
    k0 = np.uint64(key[0])
    k1 = np.uint64(key[1])
    with np.errstate(over="ignore"):
        for r in range(_ROUNDS):
            hi0, lo0 = _mulhilo(_M0, c0)
            hi1, lo1 = _mulhilo(_M1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            if r < _ROUNDS - 1:
                k0 = k0 + _W0
                k1 = k1 + _W1
    return c0, c1, c2, c3


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= _UINT64_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def uniforms(seed, domain, replication, tests, width):
    """Uniforms of shape ``(len(tests), width)`` in the open interval (0, 1).

    Column ``j`` of the row for test ``t`` depends only on ``(seed, domain,
    replication, t, j)``, never on which other tests or columns are requested.
    """
    seed = _check_seed(seed)
    tests = np.asarray(tests, dtype=np.uint64).reshape(-1, 1)
    n_blocks = -(-int(width) // _LANES)
    blocks = np.arange(n_blocks, dtype=np.uint64).reshape(1, -1)
    words = philox4x64((blocks, tests, np.uint64(replication), np.uint64(0)), (seed, int(domain)))
    raw = np.stack(words, axis=-1).reshape(tests.shape[0], n_blocks * _LANES)[:, :width]
    return ((raw >> _SHIFT11).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed, domain, replication, tests, width):
    """Standard normals with the same indexing contract as :func:`uniforms`."""
    return norm_ppf(uniforms(seed, domain, replication, tests, width))


def generator(seed, domain, *indices):
    """A numpy Generator on a Philox stream keyed by ``(seed, domain)``.

    Up to three indices select the stream through the upper counter words;
    word 0 is left to run.  Used where a sequential stream is more convenient
    than indexed draws (shuffles, unit outcomes).  Domains used here must not
    also be used with :func:`uniforms`.
    """
    seed = _check_seed(seed)
    if len(indices) > 3:
        raise ValueError("at most three stream indices are supported")
    idx = [int(i) for i in indices] + [0] * (3 - len(indices))
    bit_gen = np.random.Philox(counter=[0, *idx], key=[seed, int(domain)])
    return np.random.Generator(bit_gen)
