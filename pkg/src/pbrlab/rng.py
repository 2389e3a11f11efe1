"""Counter-based random streams for reproducible simulation.

Every run of a simulated experiment owns a fixed number of draws, and draw j
of run i is a pure function of (seed, i, j): the splitmix64 output at counter
position i * draws_per_run + j.  Because no generator state is shared between
runs, any partition of the run indices across workers reproduces the
sequential result bit for bit.

splitmix64 reference: state advances by the 64-bit golden-ratio constant and
the output is the Stafford mix13 finalizer of the state.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

# Two uint64 outputs per double would waste half the stream; one 53-bit
# mantissa per uint64 matches the usual convention.
_INV_2_53 = 2.0**-53


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
    return z ^ (z >> 31)


def splitmix64(seed: int, counter: int) -> int:
    """The counter-th output of the splitmix64 stream with the given seed."""
    return _mix64((seed + (counter + 1) * _GAMMA) & _MASK)


def validate_seed(seed: int) -> int:
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= seed < (1 << 64):
        raise ValidationError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def uniform(seed: int, run_index: int, draw_index: int, draws_per_run: int) -> float:
    """Draw j of run i, as a float in [0, 1). Scalar reference path."""
    counter = run_index * draws_per_run + draw_index
    return (splitmix64(seed, counter) >> 11) * _INV_2_53


def run_uniforms(seed: int, run_lo: int, run_hi: int, draws_per_run: int) -> np.ndarray:
    """Uniform draws for runs [run_lo, run_hi), shape (run_hi - run_lo, draws_per_run).

    Row k holds the draws of run run_lo + k; identical to calling
    :func:`uniform` entrywise, but vectorized.
    """
    validate_seed(seed)
    if run_hi < run_lo or run_lo < 0:
        raise ValidationError(f"bad run range [{run_lo}, {run_hi})")
    n = run_hi - run_lo
    runs = np.arange(run_lo, run_hi, dtype=np.uint64)[:, None]
    draws = np.arange(draws_per_run, dtype=np.uint64)[None, :]
    counter = runs * np.uint64(draws_per_run) + draws
    state = (np.uint64(seed) + (counter + np.uint64(1)) * np.uint64(_GAMMA))
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
    z = z ^ (z >> np.uint64(31))
    out = (z >> np.uint64(11)).astype(np.float64) * _INV_2_53
    assert out.shape == (n, draws_per_run)
    return out
