"""Deterministic 64-bit PRNG used by the simulator.

xoshiro256** with splitmix64 seeding. All state lives in a caller-owned
uint64[4] array so the same stream can be consumed from Python code and
from jitted kernels, in the same order, with bit-identical results on
any platform. Floats only ever appear as U[0,1) doubles built from the
top 53 bits, so threshold comparisons are reproducible too.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64

_SPLITMIX_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)


@njit(cache=True)
def splitmix64(seed):
    """One splitmix64 output for the given counter value."""
    z = U64(seed) + _SPLITMIX_GAMMA
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True)
def seed_state(seed):
    """Fill a fresh xoshiro256** state from a 64-bit seed via splitmix64."""
    state = np.empty(4, dtype=np.uint64)
    s = U64(seed)
    for i in range(4):
        s = s + _SPLITMIX_GAMMA
        z = s
        z = (z ^ (z >> U64(30))) * _MIX1
        z = (z ^ (z >> U64(27))) * _MIX2
        state[i] = z ^ (z >> U64(31))
    return state


@njit(cache=True)
def next_u64(state):
    s1 = state[1]
    r = s1 * U64(5)
    r = ((r << U64(7)) | (r >> U64(57))) * U64(9)
    t = s1 << U64(17)
    state[2] ^= state[0]
    state[3] ^= s1
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    s3 = state[3]
    state[3] = (s3 << U64(45)) | (s3 >> U64(19))
    return r


@njit(cache=True)
def next_double(state):
    """Uniform double in [0, 1) from the top 53 bits."""
    return (next_u64(state) >> U64(11)) * 1.1102230246251565e-16  # 2**-53


@njit(cache=True)
def next_below(state, n):
    """Uniform integer in [0, n). Floor of u*n, guarded against rounding to n."""
    k = int(next_double(state) * n)
    if k >= n:
        k = n - 1
    return k


_MASK = (1 << 64) - 1


def derive_seed(base_seed, index):
    """Seed for sweep cell `index`: the index-th splitmix64 output after base.

    Pure-python mirror of splitmix64 (masked to 64 bits) so callers can
    derive seeds without touching numba types.
    """
    s = base_seed & _MASK
    out = 0
    for _ in range(index + 1):
        s = (s + 0x9E3779B97F4A7C15) & _MASK
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        out = z ^ (z >> 31)
    return out
