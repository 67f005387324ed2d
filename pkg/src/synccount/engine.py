"""Vectorized batch runner.

Runs many independent executions of one counter (same fault set and
adversary kind, different seeds / initial states) in lockstep as numpy
arrays.  Semantics are identical to sim.run: the adversary draws come
from the same counter-based hashes, so a batch of size one reproduces the
scalar trace bit for bit (tests enforce this).  The batch path exists
because the acceptance matrices run tens of thousands of multi-thousand-
round executions.

Stabilization is detected online: the detector tracks, per run, the start
of the current streak of rounds whose correct outputs agree and increment
mod c.  For deterministic counters agreement is persistent once the
confidence bits lock in, so a streak of the required window certifies the
run and the batch can stop early; probabilistic (sampled) runs are always
driven to the full horizon because a later sampling failure could still
break the streak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .boosting import BoostedCounter
from .counters import CounterAlgorithm
from .sim import ConfigurationError

_NO_STREAK = np.iinfo(np.int64).max


def random_init_batch(algo: CounterAlgorithm, count: int, seed: int) -> np.ndarray:
    """Batch of uniform joint initial states, identical to
    sim.enumerate_initial_states(algo, 'random', count, seed)."""
    trials = np.arange(count, dtype=np.int64)[:, None]
    nodes = np.arange(algo.n, dtype=np.int64)[None, :]
    return rng.vec_draw_below(algo.state_size, seed, rng.TAG_INIT, trials, nodes)


# ---------------------------------------------------------------------------
# vectorized adversary messages (must mirror sim.py's scalar adversaries)
# ---------------------------------------------------------------------------

def _adversary_batch(kind: str, algo: CounterAlgorithm, t: int,
                     states: np.ndarray, sender: int, seeds: np.ndarray,
                     faulty: list, offset: int = 1) -> np.ndarray:
    """Messages [B, N] the faulty `sender` presents to each recipient."""
    batch, n = states.shape
    recipients = np.arange(n, dtype=np.int64)[None, :]
    lin = (t * n + sender) * n + recipients  # matches sim._adv_linear
    if kind == "crash":
        return np.zeros((batch, n), dtype=np.int64)
    if kind == "random":
        return rng.vec_draw_below(algo.state_size, seeds[:, None], rng.TAG_ADV, lin)
    anchor = min(u for u in range(n) if u not in faulty)
    if kind == "split":
        base = states[:, anchor]
        bumped = algo.shift_output_batch(base, 1)
        return np.where(recipients < n // 2, base[:, None], bumped[:, None])
    if kind == "mimic":
        return np.broadcast_to(
            algo.shift_output_batch(states[:, anchor], offset)[:, None],
            (batch, n)).copy()
    if kind == "king_attack":
        if not isinstance(algo, BoostedCounter):
            return rng.vec_draw_below(algo.state_size, seeds[:, None],
                                      rng.TAG_ADV, lin)
        _, round_counter = algo.observer_view_batch(states)
        king = round_counter // 3
        attack = np.isin(king, faulty)
        inner = states[:, anchor] // algo._pk_radix
        codes = np.broadcast_to(recipients % 2, (batch, n))
        attack_msg = (inner[:, None] * (algo.params.C + 1) + codes) * 2
        random_msg = rng.vec_draw_below(algo.state_size, seeds[:, None],
                                        rng.TAG_ADV, lin)
        return np.where(attack[:, None], attack_msg, random_msg)
    raise ConfigurationError(f"unknown adversary kind {kind!r}")


# ---------------------------------------------------------------------------
# online streak detection
# ---------------------------------------------------------------------------

class _StreakDetector:
    """Tracks the start of the live agreed+incrementing output streak."""

    def __init__(self, batch: int, c: int, min_window: int):
        self.c = c
        self.min_window = min_window
        self.start = np.full(batch, _NO_STREAK, dtype=np.int64)
        self.first_start = np.full(batch, -1, dtype=np.int64)
        self.breaks_after_first = np.zeros(batch, dtype=np.int64)
        self._prev_ok = np.zeros(batch, dtype=bool)
        self._prev_val = np.zeros(batch, dtype=np.int64)

    def update(self, t: int, outputs: np.ndarray):
        eq = (outputs == outputs[:, :1]).all(axis=1)
        val = outputs[:, 0]
        if t == 0:
            self.start = np.where(eq, 0, _NO_STREAK)
        else:
            cont = eq & self._prev_ok & (val == (self._prev_val + 1) % self.c)
            self.start = np.where(cont, self.start,
                                  np.where(eq, t, _NO_STREAK))
        live = self.start != _NO_STREAK
        qualifies = live & (t - self.start + 1 >= self.min_window)
        self.first_start = np.where((self.first_start < 0) & qualifies,
                                    self.start, self.first_start)
        self.breaks_after_first += ((self.first_start >= 0) & ~eq)
        self._prev_ok = eq
        self._prev_val = val

    def all_certified(self, t: int, bound: int | None, stop_window: int) -> bool:
        live = self.start != _NO_STREAK
        long_enough = live & (t - self.start + 1 >= stop_window)
        if bound is not None:
            long_enough &= self.start <= bound
        return bool(long_enough.all())


# ---------------------------------------------------------------------------
# batch execution
# ---------------------------------------------------------------------------

@dataclass
class BatchResult:
    """Per-run stabilization summary for one batch."""

    horizon: int
    t_stab: np.ndarray          # [B]; -1 when not stabilized
    stabilized: np.ndarray      # [B] bool
    window: np.ndarray          # [B] rounds verified after t_stab
    first_streak: np.ndarray    # [B] earliest start of a qualifying streak
    breaks_after_first: np.ndarray
    max_pulls: int | None = None        # sampled-level pulls, worst node-round
    first_agreement: np.ndarray | None = None  # register agreement round
    breaks_after_agreement: np.ndarray | None = None

    @property
    def stabilized_count(self) -> int:
        return int(self.stabilized.sum())

    def max_t_stab(self) -> int | None:
        if not self.stabilized.any():
            return None
        return int(self.t_stab[self.stabilized].max())


def _agreement_mask(algo: BoostedCounter, states: np.ndarray,
                    correct: np.ndarray) -> np.ndarray:
    """Runs whose correct nodes all hold one non-reset a with d = 1."""
    sub = states[:, correct]
    _, a_code, d = algo._decode_batch(sub)
    return ((a_code == a_code[:, :1]).all(axis=1)
            & (a_code[:, 0] != algo.params.C) & (d == 1).all(axis=1))


def run_batch(algo: CounterAlgorithm, faults, adversary_kind: str,
              init_states: np.ndarray, horizon: int, seeds,
              min_window: int | None = None, bound: int | None = None,
              early_stop: bool = True, stop_window: int | None = None,
              adversary_offset: int = 1,
              track_agreement: bool = False) -> BatchResult:
    """Run a batch of executions; see sim.run for the semantics of one.

    init_states: [B, N]; seeds: per-run adversary/sampling seeds [B].
    When early_stop is on (deterministic counters only), the batch stops
    once every run has a streak of stop_window rounds (default
    min_window) starting at or before `bound`.
    """
    faulty = sorted(frozenset(faults or ()))
    n = algo.n
    init_states = np.asarray(init_states, dtype=np.int64)
    batch = init_states.shape[0]
    if init_states.shape != (batch, n):
        raise ConfigurationError(f"init batch must be [B, {n}]")
    seeds = np.asarray(seeds, dtype=np.int64)
    if seeds.shape != (batch,):
        raise ConfigurationError("need one seed per run")
    if min_window is None:
        min_window = 2 * algo.c
    if stop_window is None:
        stop_window = min_window
    sampled = hasattr(algo, "step_batch_ctx") and getattr(algo, "sampling_active", False)
    if sampled:
        early_stop = False  # a later sampling failure could break any streak

    correct = np.array([u for u in range(n) if u not in faulty], dtype=np.int64)
    node_ids = np.arange(n, dtype=np.int64)
    detector = _StreakDetector(batch, algo.c, min_window)
    states = init_states.copy()
    frozen = init_states[:, faulty].copy() if faulty else None

    track_agreement = track_agreement and isinstance(algo, BoostedCounter)
    first_agree = np.full(batch, -1, dtype=np.int64) if track_agreement else None
    breaks_after_agree = np.zeros(batch, dtype=np.int64) if track_agreement else None

    fixed_pools = None
    if sampled and algo.cfg.mode == "fixed_pseudo_random":
        fixed_pools = algo.draw_pools_batch(seeds, round_index=None)

    max_pulls = 0
    effective_horizon = horizon
    for t in range(horizon):
        outputs = algo.output_batch(states)[:, correct]
        detector.update(t, outputs)
        if track_agreement:
            agree = _agreement_mask(algo, states, correct)
            first_agree = np.where((first_agree < 0) & agree, t, first_agree)
            eq = (outputs == outputs[:, :1]).all(axis=1)
            breaks_after_agree += (first_agree >= 0) & (first_agree < t) & ~agree
        if early_stop and detector.all_certified(t, bound, stop_window):
            effective_horizon = t + 1
            break
        if t == horizon - 1:
            break

        msg = np.repeat(states[:, None, :], n, axis=1)
        for u in faulty:
            msg[:, :, u] = _adversary_batch(adversary_kind, algo, t, states, u,
                                            seeds, faulty, offset=adversary_offset)
        if sampled:
            new_states, pulls = algo.step_batch_ctx(
                node_ids, msg, round_index=t, seeds=seeds, pools=fixed_pools)
            max_pulls = max(max_pulls, int(pulls.max()))
        else:
            new_states = algo.step_batch(node_ids, msg)
        if faulty:
            new_states[:, faulty] = frozen
        states = new_states

    live = detector.start != _NO_STREAK
    stabilized = live & (effective_horizon - detector.start >= min_window)
    t_stab = np.where(stabilized, detector.start, -1)
    window = np.where(stabilized, effective_horizon - detector.start, 0)
    return BatchResult(horizon=effective_horizon, t_stab=t_stab,
                       stabilized=stabilized, window=window,
                       first_streak=detector.first_start,
                       breaks_after_first=detector.breaks_after_first,
                       max_pulls=max_pulls if sampled else None,
                       first_agreement=first_agree,
                       breaks_after_agreement=breaks_after_agree)
