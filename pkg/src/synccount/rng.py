"""Counter-based deterministic randomness.

Every random choice in this package (adversary messages, initial states,
sampling pools, per-run seeds) is derived by hashing a small tuple of
integer coordinates with a splitmix64-style mixer.  This gives three
properties the simulation harness relies on:

* runs are reproducible from (seed, coordinates) alone, with no hidden
  generator state;
* the scalar reference implementations and the numpy batch engine draw
  bit-identical values, so their traces can be compared exactly;
* any sub-matrix of an experiment (one cell, one trial) can be re-derived
  independently, which is what the CLI's seed splitter and the replay verb
  use.

Draws are mapped to a bounded range with a plain modulo.  The bias is
2**-64 * bound, irrelevant for the bounds used here (< 2**32).
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

# Stream tags keep unrelated draw families (inits, adversary messages,
# sampling pools, seed splitting) in disjoint hash streams.
TAG_SPLIT = 0x5EED
TAG_INIT = 0x1217
TAG_ADV = 0xADFE
TAG_POOL = 0xF00D
TAG_FIXED_POOL = 0xF1BE


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK
    return z ^ (z >> 31)


def fold(seed: int, *parts: int) -> int:
    """Hash (seed, parts...) to a uniform 64-bit value."""
    h = _mix((int(seed) + _GAMMA) & _MASK)
    for p in parts:
        h = _mix(((h ^ (int(p) & _MASK)) + _GAMMA) & _MASK)
    return h


def draw_below(bound: int, seed: int, *parts: int) -> int:
    """Uniform draw in [0, bound) keyed by (seed, parts...)."""
    return fold(seed, *parts) % bound


def split_seed(master: int, *parts: int) -> int:
    """Derive an independent sub-seed; used by the experiment driver.

    Masked to 63 bits so derived seeds fit signed integer arrays.
    """
    return fold(master, TAG_SPLIT, *parts) & (_MASK >> 1)


_U = np.uint64


def _vec_mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _U(_MUL1)
    z = (z ^ (z >> _U(27))) * _U(_MUL2)
    return z ^ (z >> _U(31))


def vec_fold(seed, *parts) -> np.ndarray:
    """Vectorized fold(); broadcasting counterpart of the scalar version.

    `seed` and each part may be ints or integer arrays; results follow
    numpy broadcasting.  Bit-identical to fold() element by element.
    """
    with np.errstate(over="ignore"):  # modular uint64 wraparound is intended
        h = _vec_mix(np.asarray(seed, dtype=_U) + _U(_GAMMA))
        for p in parts:
            h = _vec_mix((h ^ np.asarray(p, dtype=_U)) + _U(_GAMMA))
    return h


def vec_draw_below(bound: int, seed, *parts) -> np.ndarray:
    """Vectorized draw_below(); returns int64 values in [0, bound)."""
    return (vec_fold(seed, *parts) % _U(bound)).astype(np.int64)
