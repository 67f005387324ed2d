"""Pulling-model variant: sampled reads instead of full broadcasts.

In the pulling model a node pays for every state it requests.  The
sampled counter keeps the boosted construction but replaces its two
full-population reads at the top level:

* leader view: one pool of M uniform draws (with repetition) per block
  supplies the blockwise pointer majorities; the elected block's own pool
  is reused to majority-read its round counter R;
* phase king: one network-wide pool of M draws replaces the tallies, with
  the population thresholds mapped to sample fractions: "at least N - F"
  becomes "at least 2/3 of M" and "more than F" becomes "more than 1/3 of
  M".  The king's value is read with a single direct pull in offset-2
  rounds (those rounds need no tally), so a node pulls at most (k+1) * M
  states per round at the sampled level.

Sampling modes: 'broadcast' disables sampling (round-for-round identical
to the deterministic counter), 'fresh_random' redraws every pool every
round, 'fixed_pseudo_random' draws every pool once from the seed and
reuses it forever; against an obliviously chosen fault set, good fixed
pools make maintenance fully deterministic after stabilization.  Levels
whose population is below `level_threshold` fall back to broadcast.

This buys a per-round failure probability: a pool can misrepresent the
population.  threshold_stats() measures those event frequencies under a
neutral equivocation model (each faulty response matches the probed value
with probability 1/2; directional worst cases are the simulator's job).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .boosting import BoostedCounter, BoostParams, majority
from .counters import CounterAlgorithm
from .phase_king import TallyVector, PhaseKingRegisters, exec_instruction
from ._vector import majority_small, phase_king_round

MODES = ("broadcast", "fresh_random", "fixed_pseudo_random")


class SamplingGuardError(ValueError):
    """Sampling requires resilience strictly below N / (3 + gamma)."""


def default_sample_count(eta: int) -> int:
    """Default pool size for a system of eta nodes: max(16, ceil(8 ln eta))."""
    return max(16, math.ceil(8 * math.log(eta)))


@dataclass(frozen=True)
class SamplingConfig:
    """Pool size, guard slack, mode and seed for a sampled counter.

    gamma > 0 guards the resilience margin F < N / (3 + gamma); kappa is
    the target error exponent, carried for reporting only.  eta is the
    system-wide node count the failure probability is quoted against.
    """

    M: int
    gamma: float = 0.5
    kappa: float = 1.0
    eta: int | None = None
    mode: str = "fresh_random"
    level_threshold: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise SamplingGuardError(f"pool size must be >= 1, got {self.M}")
        if not self.gamma > 0:
            raise SamplingGuardError(f"gamma must be > 0, got {self.gamma}")
        if self.mode not in MODES:
            raise SamplingGuardError(
                f"unknown sampling mode {self.mode!r}; known: {', '.join(MODES)}")


@dataclass
class PullTrace:
    """Pulls issued at the sampled level: (round, node, pulls) records."""

    records: list = field(default_factory=list)

    def to_csv(self, stream):
        stream.write("round,node,pulls\n")
        for t, node, pulls in self.records:
            stream.write(f"{t},{node},{pulls}\n")


def sample_pool(block, M: int, seed: int, *coords) -> list:
    """M uniform draws with repetition from `block` (a range of node ids).

    Reproducible from (seed, coords): coordinate tuples are hashed per
    slot, so the same coordinates always yield the same pool.
    """
    ids = list(block)
    return [ids[rng.draw_below(len(ids), seed, *coords, s)] for s in range(M)]


def sampled_majority(samples):
    """Value held by more than half of the sample, default 0."""
    return majority(samples)


@dataclass(frozen=True)
class SampledTally:
    """Tally over a sample with the two-thirds / one-third thresholds."""

    tally: TallyVector
    M: int

    def keeps(self, value) -> bool:
        """Sample analogue of 'at least N - F sent value'."""
        return 3 * self.tally.count(value) >= 2 * self.M

    def supports(self, value) -> bool:
        """Sample analogue of 'more than F sent value'."""
        return 3 * self.tally.count(value) > self.M

    @property
    def keep_threshold(self) -> int:
        return self.M - self.M // 3

    @property
    def support_threshold(self) -> int:
        return self.M // 3 + 1


def sampled_phase_tally(samples) -> SampledTally:
    """Tally a phase-king sample; |samples| must be the pool size M."""
    vals = list(samples)
    return SampledTally(tally=TallyVector.from_values(vals), M=len(vals))


class PulledCounter(BoostedCounter):
    """Boosted counter whose top level reads sampled pools.

    Same stabilization bound and state encoding as the deterministic
    counter; what changes is that correctness after the bound holds with
    high probability instead of certainty.  Transitions need the round
    index and run seed, so they go through transition_ctx / step_batch_ctx.
    """

    def __init__(self, inner: CounterAlgorithm, params: BoostParams,
                 cfg: SamplingConfig):
        super().__init__(inner, params)
        self.cfg = cfg
        self.sampling_active = (cfg.mode != "broadcast"
                                and params.N >= cfg.level_threshold)

    # -- pool coordinates ---------------------------------------------------
    # Pools are addressed by a single linear coordinate
    #   ((round * N + node) * (k + 1) + pool) * M + slot
    # hashed with the mode's stream tag; fixed pools drop the round term,
    # which is what makes them identical every round.  Pool index k is the
    # network-wide phase pool, 0..k-1 the per-block pools.

    def _pool_tag_round(self, round_index: int):
        if self.cfg.mode == "fixed_pseudo_random":
            return rng.TAG_FIXED_POOL, 0
        return rng.TAG_POOL, round_index

    def _pool_linear(self, round_index, node, pool, slot):
        params, M = self.params, self.cfg.M
        return ((round_index * params.N + node) * (params.k + 1) + pool) * M + slot

    def _block_pool(self, round_index: int, node: int, block: int, seed: int):
        tag, rnd = self._pool_tag_round(round_index)
        n, M = self.params.n, self.cfg.M
        return [block * n + rng.draw_below(n, seed, tag,
                                           self._pool_linear(rnd, node, block, s))
                for s in range(M)]

    def _phase_pool(self, round_index: int, node: int, seed: int):
        tag, rnd = self._pool_tag_round(round_index)
        params, M = self.params, self.cfg.M
        return [rng.draw_below(params.N, seed, tag,
                               self._pool_linear(rnd, node, params.k, s))
                for s in range(M)]

    # -- scalar semantics ----------------------------------------------------
    def transition_ctx(self, node, received, ctx):
        if not self.sampling_active:
            return super().transition(node, received)
        params = self.params
        n, k, c_out, M = params.n, params.k, params.C, self.cfg.M
        decoded = [self.unpack(s) for s in received]

        block, slot = divmod(node, n)
        new_inner = self.inner.transition(
            slot, [decoded[block * n + j].inner for j in range(n)])

        values = [self.inner.output(u % n, decoded[u].inner) % self._sender_level_mod[u]
                  for u in range(params.N)]
        r = [v % params.tau for v in values]
        pointers = [(values[u] // params.tau) // (2 * params.m) ** (u // n) % params.m
                    for u in range(params.N)]

        pools = [self._block_pool(ctx.round_index, node, b, ctx.seed)
                 for b in range(k)]
        b_hat = [sampled_majority([pointers[u] for u in pools[b]]) for b in range(k)]
        elected = majority(b_hat, k)
        round_counter = sampled_majority([r[u] for u in pools[elected]])
        king, offset = divmod(round_counter, 3)

        own = decoded[node]
        regs = PhaseKingRegisters(a=own.a, d=own.d)
        if offset == 2:
            regs = exec_instruction(regs, 2, None, decoded[king].a,
                                    params.N, params.F, c_out)
            pulls = k * M + 1  # block pools plus one direct king read
        else:
            phase_pool = self._phase_pool(ctx.round_index, node, ctx.seed)
            samp = sampled_phase_tally([decoded[u].a for u in phase_pool])
            # the 2/3 and 1/3 sample bounds are exactly the population
            # thresholds of a phantom population M with M // 3 faults
            regs = exec_instruction(regs, offset, samp.tally, None,
                                    M, M // 3, c_out)
            pulls = k * M + M
        if ctx.pull_log is not None:
            ctx.pull_log.append((ctx.round_index, node, pulls))
        return self.pack(new_inner, regs.a, regs.d)

    # -- vectorized semantics -------------------------------------------------
    def draw_pools_batch(self, seeds, round_index):
        """Pools for every (run, recipient): block pools [B, N, k, M] of
        global node ids and the phase pool [B, N, M]."""
        params, M = self.params, self.cfg.M
        tag, rnd = self._pool_tag_round(round_index if round_index is not None else 0)
        seeds = np.asarray(seeds, dtype=np.int64)
        b_seeds = seeds[:, None, None, None]
        v = np.arange(params.N, dtype=np.int64)[None, :, None, None]
        p = np.arange(params.k, dtype=np.int64)[None, None, :, None]
        s = np.arange(M, dtype=np.int64)[None, None, None, :]
        lin = self._pool_linear(rnd, v, p, s)
        block_pools = p * params.n + rng.vec_draw_below(params.n, b_seeds, tag, lin)
        lin_phase = self._pool_linear(rnd, v[..., 0, :], params.k, s[..., 0, :])
        phase_pool = rng.vec_draw_below(params.N, b_seeds[..., 0, :], tag, lin_phase)
        return block_pools, phase_pool

    def step_batch_ctx(self, node_ids, received, *, round_index, seeds, pools=None):
        """Batched sampled transition; returns (new_states, pulls [B, V])."""
        if not self.sampling_active:
            new_states = super().step_batch(node_ids, received)
            return new_states, np.zeros(new_states.shape, dtype=np.int64)
        params = self.params
        c_out, M, k = params.C, self.cfg.M, params.k
        inner_states, a_code, d = self._decode_batch(received)
        new_inner = self._inner_step_batch(node_ids, inner_states)

        values = self._values_batch(inner_states)
        r = values % params.tau
        pointers = (values // params.tau) // self._pointer_div % params.m

        if pools is None:
            pools = self.draw_pools_batch(seeds, round_index)
        block_pools, phase_pool = pools

        b_samp = np.take_along_axis(pointers[:, :, None, :], block_pools, axis=-1)
        b_hat = majority_small(b_samp)
        elected = majority_small(b_hat)
        elected_pool = np.take_along_axis(
            block_pools, elected[:, :, None, None], axis=2)[:, :, 0, :]
        r_samp = np.take_along_axis(r, elected_pool, axis=-1)
        round_counter = majority_small(r_samp)
        king, offset = round_counter // 3, round_counter % 3

        a_num = np.where(a_code == c_out, c_out + 1, a_code)
        own_a = self._own_registers_batch(a_num, node_ids)
        own_d = self._own_registers_batch(d, node_ids)
        king_a = np.take_along_axis(a_num, king[..., None], axis=-1)[..., 0]
        phase_samp = np.take_along_axis(a_num, phase_pool, axis=-1)
        new_a, new_d = phase_king_round(own_a, own_d, phase_samp, offset, king_a,
                                        c_out, M - M // 3, M // 3 + 1)
        new_code = np.minimum(new_a, c_out)
        pulls = k * M + np.where(offset <= 1, M, 1)
        return (new_inner * self._a_codes + new_code) * 2 + new_d, pulls

    def __repr__(self):
        p = self.params
        return (f"PulledCounter(N={p.N}, F={p.F}, C={p.C}, M={self.cfg.M}, "
                f"mode={self.cfg.mode})")


def pulled_boost(algo: CounterAlgorithm, params: BoostParams,
                 cfg: SamplingConfig) -> PulledCounter:
    """Sampled boosting layer; requires F < N / (3 + gamma) and N <= eta."""
    if params.F * (3 + cfg.gamma) >= params.N:
        raise SamplingGuardError(
            f"sampling needs F < N/(3+gamma) = {params.N / (3 + cfg.gamma):.3f}, "
            f"got F={params.F}")
    if cfg.eta is not None and params.N > cfg.eta:
        raise SamplingGuardError(
            f"layer population {params.N} exceeds system size eta={cfg.eta}")
    return PulledCounter(algo, params, cfg)


# ---------------------------------------------------------------------------
# threshold statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdStats:
    """Monte-Carlo frequencies of the sampling threshold events.

    freq_keep_agreed: value held by all correct nodes clears the 2/3 bound
    (sample analogue of keeping a unanimously supported value).
    freq_support_majority: value held by the given fraction of correct
    nodes clears the 1/3 bound.
    freq_keep_no_majority: the 2/3 bound fires although the value has no
    correct majority (should be rare; its contrapositive is what makes a
    cleared 2/3 bound evidence of a real majority).
    """

    M: int
    trials: int
    correct_fraction: float
    value_fraction: float
    freq_keep_agreed: float
    freq_support_majority: float
    freq_keep_no_majority: float
    delta: float | None = None

    def to_text(self) -> str:
        lines = [f"threshold statistics: M={self.M} trials={self.trials} "
                 f"correct_fraction={self.correct_fraction} "
                 f"value_fraction={self.value_fraction}",
                 f"  keep_agreed (>= 2/3 of M): {self.freq_keep_agreed:.4f}",
                 f"  support_majority (> 1/3 of M): {self.freq_support_majority:.4f}",
                 f"  keep_no_majority (>= 2/3 of M): {self.freq_keep_no_majority:.4f}"]
        if self.delta is not None:
            lines.append(f"  concentration slack delta: {self.delta:.6f}")
        return "\n".join(lines)


def threshold_stats(M: int, correct_fraction: float, value_fraction: float,
                    trials: int, seed: int = 0,
                    gamma: float | None = None) -> ThresholdStats:
    """Estimate the threshold event frequencies by Monte Carlo.

    Each trial draws M samples with repetition: a sample hits a correct
    node with probability correct_fraction; correct nodes show the probed
    value with probability value_fraction, faulty ones with probability
    1/2 (neutral equivocation; directional adversaries are exercised in
    the simulator, these statistics size the noise margin).

    freq_keep_agreed and freq_support_majority are quoted for the given
    value_fraction; freq_keep_no_majority caps the correct fraction
    showing the value at 1/2, the worst case consistent with "no correct
    majority holds it".
    """
    gen = np.random.default_rng(seed)
    n_correct = gen.binomial(M, correct_fraction, size=trials)
    from_faulty = gen.binomial(M - n_correct, 0.5)

    z = gen.binomial(n_correct, value_fraction) + from_faulty
    freq_keep = float((3 * z >= 2 * M).mean())
    freq_support = float((3 * z > M).mean())

    z_cap = gen.binomial(n_correct, min(value_fraction, 0.5)) + from_faulty
    freq_false_keep = float((3 * z_cap >= 2 * M).mean())

    delta = None
    if gamma is not None:
        delta = 1 - (2 / 3) * (3 + gamma) / (2 + gamma)
    return ThresholdStats(M=M, trials=trials, correct_fraction=correct_fraction,
                          value_fraction=value_fraction,
                          freq_keep_agreed=freq_keep,
                          freq_support_majority=freq_support,
                          freq_keep_no_majority=freq_false_keep, delta=delta)
