"""Counter-based random bits.

Every random decision in a simulation is a pure function of
(master seed, stream id, decision counter), so results are bit-reproducible
regardless of execution order or worker count.  The mixer is the splitmix64
finalizer; streams are opened by jumping the seed by multiples of the golden
ratio increment.
"""

import numba
import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix64_py(x: int) -> int:
    """splitmix64 finalizer (pure python, 64-bit wrapping)."""
    x &= _MASK
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK
    return (x ^ (x >> 31)) & _MASK


def stream_key_py(master_seed: int, stream: int) -> int:
    """Key of the `stream`-th decision stream under a master seed."""
    return mix64_py(mix64_py(master_seed) + ((stream + 1) * GOLDEN & _MASK))


def bits_py(key: int, counter: int) -> int:
    """64 random bits for one decision."""
    return mix64_py(key + ((counter + 1) * GOLDEN & _MASK))


def coin_py(key: int, counter: int) -> int:
    """Fair bit in {0, 1}."""
    return bits_py(key, counter) >> 63


def uniform_py(key: int, counter: int) -> float:
    """Uniform double in [0, 1) with 53 random bits."""
    return (bits_py(key, counter) >> 11) * 2.0 ** -53


# numba twins; uint64 arithmetic wraps natively.

@numba.njit(numba.uint64(numba.uint64), cache=True, inline="always")
def mix64(x):
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@numba.njit(numba.uint64(numba.uint64, numba.uint64), cache=True, inline="always")
def stream_key(master_seed, stream):
    return mix64(mix64(master_seed) + (stream + np.uint64(1)) * np.uint64(GOLDEN))


@numba.njit(numba.uint64(numba.uint64, numba.uint64), cache=True, inline="always")
def bits(key, counter):
    return mix64(key + (counter + np.uint64(1)) * np.uint64(GOLDEN))


@numba.njit(numba.uint64(numba.uint64, numba.uint64), cache=True, inline="always")
def coin(key, counter):
    return bits(key, counter) >> np.uint64(63)


@numba.njit(numba.float64(numba.uint64, numba.uint64), cache=True, inline="always")
def uniform(key, counter):
    return (bits(key, counter) >> np.uint64(11)) * 2.0 ** -53
