"""Counter-based random streams shared by the compiled and numpy kernels.

Every uniform is a pure function of (master key, packet, counter), so a
packet's draws never depend on which worker ran it or in what order. The
mixing function is the SplitMix64 finalizer; uniforms keep the top 53 bits,
which makes the double conversion exact in C and in numpy alike.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
UNIT = 2.0 ** -53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def master_key(seed: int) -> int:
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return mix64(seed + GOLDEN)


def derive_seed(seed: int, *labels: int) -> int:
    """Independent child seed for a labelled sub-run (e.g. one grid cell)."""
    z = master_key(seed)
    for label in labels:
        z = mix64(z ^ mix64(label + GOLDEN))
    return z


def packet_key(key: int, packet: int) -> int:
    return mix64(key + (packet + 1) * GOLDEN)


def uniform(pkey: int, counter: int) -> float:
    """The ``counter``-th uniform of a packet stream, in [0, 1)."""
    return (mix64(pkey + (counter + 1) * GOLDEN) >> 11) * UNIT


# numpy versions; uint64 arithmetic wraps modulo 2**64
_G = np.uint64(GOLDEN)
_M1 = np.uint64(MIX1)
_M2 = np.uint64(MIX2)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def packet_keys_array(key: int, first: int, count: int) -> np.ndarray:
    idx = np.arange(first + 1, first + count + 1, dtype=np.uint64)
    return mix64_array(np.uint64(key) + idx * _G)


def uniforms_array(pkeys: np.ndarray, n_draws: int) -> np.ndarray:
    """Uniforms for counters 0..n_draws-1 of each packet; shape (len(pkeys), n_draws)."""
    offsets = np.arange(1, n_draws + 1, dtype=np.uint64) * _G
    z = mix64_array(pkeys[:, None] + offsets[None, :])
    return (z >> _S11).astype(np.float64) * UNIT
