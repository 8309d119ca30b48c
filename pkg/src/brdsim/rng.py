"""Keyed, counter-based random numbers.

Every payoff draw is a pure function of ``(seed, a, b, stream)``: a 64-bit key is
derived from the seed and the two indices with the SplitMix64 finalizer, and each
sub-stream of that key is hashed once more.  No generator state is shared, so
draws can be made in any order, on any worker, and always agree.

Both a scalar (Python int) and a vectorized (numpy uint64) form are provided; the
compiled kernels implement the same arithmetic and must stay bit-identical.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
ROW_MULT = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0

# sub-streams of a profile key
STREAM_UA = 0
STREAM_UB = 1
STREAM_COIN = 2
STREAM_REDRAW = 3  # tie redraws use STREAM_REDRAW + 2*j (pay_a) and +2*j+1 (pay_b)


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def seed_key(seed):
    return mix64(seed)


def derive_key(seed, i, j):
    """Key for the pair ``(i, j)`` under ``seed``.

    Used both for payoff profiles ``(a, b)`` and for per-trial seeds
    ``(grid_index, trial_index)``.
    """
    k = mix64(seed_key(seed) + i * GOLDEN)
    return mix64(k + j * ROW_MULT)


def stream_bits(key, stream):
    return mix64(key + (stream + 1) * GOLDEN)


def to_unit(bits):
    """Top 53 bits as a float in [0, 1)."""
    return (bits >> 11) * INV_2_53


def draw(seed, a, b, stream):
    return to_unit(stream_bits(derive_key(seed, a, b), stream))


# -- vectorized -------------------------------------------------------------

_U = np.uint64


def mix64_np(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U(30))) * _U(_M1)
        z = (z ^ (z >> _U(27))) * _U(_M2)
    return z ^ (z >> _U(31))


def derive_key_np(seed, i, j):
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    with np.errstate(over="ignore"):
        k = mix64_np(_U(seed_key(seed)) + i * _U(GOLDEN))
        return mix64_np(k + j * _U(ROW_MULT))


def stream_bits_np(key, stream):
    with np.errstate(over="ignore"):
        return mix64_np(key + _U(((stream + 1) * GOLDEN) & MASK64))


def to_unit_np(bits):
    return (bits >> _U(11)).astype(np.float64) * INV_2_53


def draw_np(seed, a, b, stream):
    return to_unit_np(stream_bits_np(derive_key_np(seed, a, b), stream))
