"""Resilience boosting: many low-resilience counters into one stronger one.

Given a counter A on n nodes tolerating f faults, the boosted counter B
runs k copies of A, one per block of n nodes, and tolerates F < (f+1) *
ceil(k/2) faults among N = k*n nodes while counting mod a chosen C.  The
inner modulus must be c = alpha * 3(F+2) * (2m)^k with m = ceil(k/2).

Per round each node (i, j) consumes the single received vector of all N
start-of-round states three ways:

1. it feeds the inner-state fields of its own block to A's transition;
2. it derives a leader view: each node's inner counter value, reduced mod
   the block's level modulus c_i = tau*(2m)^(i+1) with tau = 3(F+2), is
   read as (r, y) = (value mod tau, value div tau), and y div (2m)^i mod m
   points at a candidate leader block.  Blockwise majorities of those
   pointers elect a leader block B_hat, whose round counter r is majority-
   read as R.  Because level i's pointer dwells 2m times longer than level
   i-1's, all stabilized blocks eventually point at each candidate
   together for at least tau consecutive rounds;
3. it executes the phase-king instruction set indexed by R (king = node
   floor(R/3), offsets cycle 0,1,2) on its (a, d) registers, using the
   a-fields of the same received vector.

Output is a when a != INF, else 0.  The certified bound adds tau*(2m)^k
rounds to A's, and the state encoding adds ceil(log2(C+1)) + 1 bits.

Majorities default to 0 when no value exceeds half the population, and
undecodable received bit patterns canonicalize to the all-zero state, so
every step is total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counters import CounterAlgorithm, ceil_log2
from .phase_king import (INF, PhaseKingRegisters, TallyVector, DomainError,
                         exec_instruction, instruction_index)
from ._vector import majority_small, phase_king_round


class BoostParamError(ValueError):
    """Boost parameters violate a construction constraint."""


class CompositionError(ValueError):
    """Counter and boost parameters do not fit together."""


@dataclass(frozen=True)
class BoostParams:
    """One application of the boosting construction.

    n, f, c: inner counter shape; k: blocks; F, C: target resilience and
    output modulus.  Derived: N = k*n, m = ceil(k/2), tau = 3(F+2),
    c_levels[i] = tau*(2m)^(i+1), alpha = c / (tau*(2m)^k).
    """

    n: int
    f: int
    k: int
    F: int
    C: int
    c: int
    m: int
    N: int
    tau: int
    alpha: int
    c_levels: tuple

    @property
    def round_time(self) -> int:
        """Rounds this layer adds to the stabilization bound: tau*(2m)^k."""
        return self.tau * (2 * self.m) ** self.k


def validate_boost_params(n: int, f: int, k: int, F: int, C: int, c: int) -> BoostParams:
    """Check all constraints of the construction; raise a distinct
    diagnostic for each violated one."""
    if n < 1 or f < 0:
        raise BoostParamError(f"inner counter shape invalid: n={n}, f={f}")
    if k < 3:
        raise BoostParamError(f"block count k must be >= 3, got k={k}")
    m = (k + 1) // 2
    if F >= (f + 1) * m:
        raise BoostParamError(
            f"resilience bound violated: need F < (f+1)*ceil(k/2) = {(f + 1) * m}, got F={F}"
        )
    if C <= 1:
        raise BoostParamError(f"output modulus must exceed 1, got C={C}")
    tau = 3 * (F + 2)
    base = tau * (2 * m) ** k
    if c % base != 0 or c < base:
        raise BoostParamError(
            f"inner modulus must be a positive multiple of 3(F+2)(2m)^k = {base}, got c={c}"
        )
    c_levels = tuple(tau * (2 * m) ** (i + 1) for i in range(k))
    return BoostParams(n=n, f=f, k=k, F=F, C=C, c=c, m=m, N=k * n, tau=tau,
                       alpha=c // base, c_levels=c_levels)


def decode_counter(value: int, tau: int) -> tuple[int, int]:
    """Split a counter value into (r, y) = (value mod tau, value div tau)."""
    if value < 0:
        raise DomainError(f"counter value must be non-negative, got {value}")
    return value % tau, value // tau


def block_pointer(y: int, level: int, m: int) -> int:
    """Leader-block pointer floor(y / (2m)^level) mod m."""
    if y < 0:
        raise DomainError(f"phase value must be non-negative, got {y}")
    return (y // (2 * m) ** level) % m


def majority(values, population: int | None = None):
    """Value occurring more than population/2 times, else the default 0.

    population defaults to len(values); a node's own broadcast counts as
    one of the population.
    """
    vals = list(values)
    if population is None:
        population = len(vals)
    best, count = 0, 0
    seen = {}
    for v in vals:
        seen[v] = seen.get(v, 0) + 1
        if seen[v] > count:
            best, count = v, seen[v]
    return best if 2 * count > population else 0


@dataclass(frozen=True)
class LeaderView:
    """Blockwise leader votes, elected leader block, and its round counter."""

    b_hat: tuple
    B: int
    R: int


def leader_view(values, params: BoostParams) -> LeaderView:
    """Compute the leader view from per-node counter values.

    values[u] must be node u's inner counter value reduced mod the level
    modulus of u's block (c_levels[u // n]).  Byzantine senders contribute
    whatever value their state decodes to.
    """
    n, k, m, tau = params.n, params.k, params.m, params.tau
    r = [v % tau for v in values]
    b = [block_pointer(values[u] // tau, u // n, m) for u in range(params.N)]
    b_hat = tuple(majority(b[i * n:(i + 1) * n], n) for i in range(k))
    elected = majority(b_hat, k)
    round_counter = majority(r[elected * n:(elected + 1) * n], n)
    return LeaderView(b_hat=b_hat, B=elected, R=round_counter)


@dataclass(frozen=True)
class BoostedState:
    """Unpacked node state: inner-counter state plus phase-king registers."""

    inner: int
    a: int | float
    d: int


class BoostedCounter(CounterAlgorithm):
    """Counter produced by one boosting layer over an inner counter."""

    def __init__(self, inner: CounterAlgorithm, params: BoostParams):
        if (inner.n, inner.f, inner.c) != (params.n, params.f, params.c):
            raise CompositionError(
                f"inner counter (n={inner.n}, f={inner.f}, c={inner.c}) does not match "
                f"boost parameters (n={params.n}, f={params.f}, c={params.c})"
            )
        self.inner = inner
        self.params = params
        self.n = params.N
        self.f = params.F
        self.c = params.C
        self.t_bound = inner.t_bound + params.round_time
        self._a_codes = params.C + 1          # a in [C] plus the INF code C
        self._pk_radix = 2 * self._a_codes
        self.state_size = inner.state_size * self._pk_radix
        self._a_width = ceil_log2(self._a_codes)
        self.state_bits = inner.state_bits + self._a_width + 1
        # per-sender decode tables for the leader view
        self._sender_level_mod = tuple(params.c_levels[u // params.n]
                                       for u in range(params.N))
        self._sender_level_mod_vec = np.array(self._sender_level_mod, dtype=np.int64)
        self._pointer_div = np.array(
            [(2 * params.m) ** (u // params.n) for u in range(params.N)], dtype=np.int64)

    # -- state packing -----------------------------------------------------
    def pack(self, inner_state: int, a, d: int) -> int:
        a_code = self.params.C if a == INF else a
        return (inner_state * self._a_codes + a_code) * 2 + d

    def unpack(self, state: int) -> BoostedState:
        d = state % 2
        a_code = (state // 2) % self._a_codes
        inner_state = state // self._pk_radix
        return BoostedState(inner=inner_state,
                            a=INF if a_code == self.params.C else a_code, d=d)

    # -- scalar semantics ----------------------------------------------------
    def transition(self, node, received):
        params = self.params
        n = params.n
        block, slot = divmod(node, n)
        decoded = [self.unpack(s) for s in received]

        new_inner = self.inner.transition(
            slot, [decoded[block * n + j].inner for j in range(n)])

        values = [self.inner.output(u % n, decoded[u].inner) % self._sender_level_mod[u]
                  for u in range(params.N)]
        view = leader_view(values, params)
        king, offset = instruction_index(view.R, params.tau)

        a_values = [decoded[u].a for u in range(params.N)]
        own = decoded[node]
        regs = exec_instruction(
            PhaseKingRegisters(a=own.a, d=own.d), offset,
            TallyVector.from_values(a_values), a_values[king],
            params.N, params.F, params.C)
        return self.pack(new_inner, regs.a, regs.d)

    def output(self, node, state):
        a_code = (state // 2) % self._a_codes
        return 0 if a_code == self.params.C else a_code

    def leader_view_states(self, states) -> LeaderView:
        """Leader view computed from a full vector of packed states."""
        values = [self.inner.output(u % self.params.n, self.unpack(s).inner)
                  % self._sender_level_mod[u] for u, s in enumerate(states)]
        return leader_view(values, self.params)

    # -- bit encoding ----------------------------------------------------
    def encode_bits(self, state):
        s = self.unpack(state)
        a_code = self.params.C if s.a == INF else s.a
        return ((self.inner.encode_bits(s.inner) << (self._a_width + 1))
                | (a_code << 1) | s.d)

    def _decode_bits_checked(self, pattern):
        if pattern < 0 or pattern >= 1 << self.state_bits:
            return None
        d = pattern & 1
        a_code = (pattern >> 1) & ((1 << self._a_width) - 1)
        if a_code > self.params.C:
            return None
        inner_state = self.inner._decode_bits_checked(pattern >> (self._a_width + 1))
        if inner_state is None:
            return None
        return (inner_state * self._a_codes + a_code) * 2 + d

    # -- vectorized semantics ---------------------------------------------
    def _decode_batch(self, states):
        d = states % 2
        a_code = (states // 2) % self._a_codes
        inner_states = states // self._pk_radix
        return inner_states, a_code, d

    def output_batch(self, states):
        a_code = (states // 2) % self._a_codes
        return np.where(a_code == self.params.C, 0, a_code)

    def _leader_view_batch(self, values):
        """values: [..., N] per-sender level-reduced counter values.
        Returns (b_hat [..., k], elected [...], round_counter [...])."""
        params = self.params
        r = values % params.tau
        pointers = (values // params.tau) // self._pointer_div % params.m
        blockwise = pointers.reshape(pointers.shape[:-1] + (params.k, params.n))
        b_hat = majority_small(blockwise)
        elected = majority_small(b_hat)
        cols = elected[..., None] * params.n + np.arange(params.n, dtype=np.int64)
        r_leader = np.take_along_axis(r, cols, axis=-1)
        round_counter = majority_small(r_leader)
        return b_hat, elected, round_counter

    def observer_view_batch(self, states):
        """Leader view an omniscient observer computes from true states
        [..., N]; used by the king-attack adversary."""
        inner_states, _, _ = self._decode_batch(states)
        values = self.inner.output_batch(inner_states) % self._sender_level_mod_vec
        _, elected, round_counter = self._leader_view_batch(values)
        return elected, round_counter

    def _inner_step_batch(self, node_ids, inner_states):
        """Transition each recipient's inner counter on its own block's
        inner-state sub-vector."""
        n = self.params.n
        own_cols = (node_ids // n)[:, None] * n + np.arange(n, dtype=np.int64)[None, :]
        own_cols = np.broadcast_to(own_cols, inner_states.shape[:-2] + own_cols.shape)
        inner_received = np.take_along_axis(inner_states, own_cols, axis=-1)
        return self.inner.step_batch(node_ids % n, inner_received)

    def _values_batch(self, inner_states):
        """Per-sender counter values reduced mod the sender block's level
        modulus; the raw material of the leader view."""
        return self.inner.output_batch(inner_states) % self._sender_level_mod_vec

    def _own_registers_batch(self, field, node_ids):
        nid = np.broadcast_to(node_ids, field.shape[:-1])
        return np.take_along_axis(field, nid[..., None], axis=-1)[..., 0]

    def step_batch(self, node_ids, received):
        params = self.params
        c_out = params.C
        inner_states, a_code, d = self._decode_batch(received)
        new_inner = self._inner_step_batch(node_ids, inner_states)

        _, _, round_counter = self._leader_view_batch(self._values_batch(inner_states))
        king, offset = round_counter // 3, round_counter % 3

        a_num = np.where(a_code == c_out, c_out + 1, a_code)
        own_a = self._own_registers_batch(a_num, node_ids)
        own_d = self._own_registers_batch(d, node_ids)
        king_a = np.take_along_axis(a_num, king[..., None], axis=-1)[..., 0]
        new_a, new_d = phase_king_round(own_a, own_d, a_num, offset, king_a,
                                        c_out, params.N - params.F, params.F + 1)
        new_code = np.minimum(new_a, c_out)
        return (new_inner * self._a_codes + new_code) * 2 + new_d

    # -- adversary support -------------------------------------------------
    def shift_output(self, state, delta):
        s = self.unpack(state)
        a = s.a if s.a == INF else (s.a + delta) % self.params.C
        return self.pack(s.inner, a, s.d)

    def shift_output_batch(self, states, delta):
        inner_states, a_code, d = self._decode_batch(states)
        shifted = np.where(a_code == self.params.C, a_code,
                           (a_code + delta) % self.params.C)
        return (inner_states * self._a_codes + shifted) * 2 + d

    def __repr__(self):
        p = self.params
        return (f"BoostedCounter(N={p.N}, F={p.F}, C={p.C}, k={p.k}, "
                f"inner={self.inner!r})")


def boost(algo: CounterAlgorithm, params: BoostParams) -> BoostedCounter:
    """Boost `algo` per `params` (params must match algo's n, f, c)."""
    return BoostedCounter(algo, params)
