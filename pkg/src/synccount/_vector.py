"""Vectorized kernels shared by the batch engine and the counter classes.

Conventions:
* a-values are carried numerically with INF represented as C + 1, so that
  min(C, value) and equality tests work in plain integer arithmetic and
  the transient value C increments to 1 via (C + 1) mod C;
* majority and smallest-supported-value scans sort along the population
  axis instead of materializing a per-candidate count table: a value held
  by more than half the population must sit at the sorted midpoint, and a
  value with at least t occurrences shows up as a sorted run of length t.
  This keeps the cost independent of the value range (inner layers count
  mod large moduli).

These kernels are the single implementation used both by the boosted
counter's batched transition and by the exhaustive agreement checks, and
they are equality-tested against the scalar functions in phase_king.py
and boosting.py.
"""

from __future__ import annotations

import numpy as np


def majority_small(values: np.ndarray) -> np.ndarray:
    """Majority over the last axis (strictly more than half), default 0."""
    population = values.shape[-1]
    if population == 1:
        return values[..., 0].copy()
    candidate = np.sort(values, axis=-1)[..., population // 2]
    count = (values == candidate[..., None]).sum(axis=-1)
    return np.where(2 * count > population, candidate, 0)


def inc_numeric(a: np.ndarray, c_out: int) -> np.ndarray:
    """Increment mod c_out in the numeric domain (INF = c_out + 1 absorbs)."""
    return np.where(a == c_out + 1, c_out + 1, (a + 1) % c_out)


def min_supported_value(msg_a: np.ndarray, c_out: int, threshold: int) -> np.ndarray:
    """Smallest value in [0, c_out) occurring at least `threshold` times
    along the last axis; c_out + 1 (INF) when none does."""
    inf = c_out + 1
    population = msg_a.shape[-1]
    if threshold > population:
        return np.full(msg_a.shape[:-1], inf, dtype=np.int64)
    ordered = np.sort(msg_a, axis=-1)
    lead = ordered[..., :population - threshold + 1]
    runs = (lead == ordered[..., threshold - 1:]) & (lead < c_out)
    return np.where(runs, lead, inf).min(axis=-1)


def phase_king_round(own_a: np.ndarray, own_d: np.ndarray, msg_a: np.ndarray,
                     offset: np.ndarray, king_a: np.ndarray, c_out: int,
                     keep_threshold, support_threshold) -> tuple[np.ndarray, np.ndarray]:
    """One phase-king instruction set, vectorized.

    own_a, own_d, offset, king_a: [...]; msg_a: [..., U] received a-values.
    All a-values numeric with INF = c_out + 1.  keep_threshold is the
    minimum count for "enough nodes sent my value" (N - F, or the
    two-thirds sample bound); support_threshold is the minimum count for
    "value has support beyond the faulty" (F + 1, or the one-third sample
    bound).  Returns (new_a, new_d).
    """
    inf = c_out + 1
    # when every lane runs the same instruction set, skip the other branches
    wanted = {int(offset)} if np.ndim(offset) == 0 else {0, 1, 2}

    if wanted & {0, 1}:
        z_own = (msg_a == own_a[..., None]).sum(axis=-1)
        keep = z_own >= keep_threshold
    if 0 in wanted:
        # offset 0: reset weakly supported values, then increment
        a0 = inc_numeric(np.where(keep, own_a, inf), c_out)
        d0 = own_d
    if 1 in wanted:
        # offset 1: recompute confidence, adopt smallest supported value
        d1 = keep.astype(np.int64)
        a1 = inc_numeric(min_supported_value(msg_a, c_out,
                                             int(support_threshold)), c_out)
    if 2 in wanted:
        # offset 2: unconfident nodes adopt min(C, king); everyone sets d = 1
        adopt = (own_a == inf) | (own_d == 0)
        a2 = inc_numeric(np.where(adopt, np.minimum(c_out, king_a), own_a),
                         c_out)

    if wanted == {0}:
        return a0, d0.copy()
    if wanted == {1}:
        return a1, d1
    if wanted == {2}:
        return a2, np.ones_like(own_d)
    new_a = np.where(offset == 0, a0, np.where(offset == 1, a1, a2))
    new_d = np.where(offset == 0, d0, np.where(offset == 1, d1, 1))
    return new_a, new_d
