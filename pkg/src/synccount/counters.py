"""Synchronous counter primitives.

A counter algorithm runs on n nodes in lockstep rounds.  Each round every
node broadcasts its state, receives the length-n vector of states (its own
included; Byzantine senders may put anything in their slot), applies a
transition, and maps its new state to an output in [0, c).  A counter is
self-stabilizing with resilience f if, from any initial states and under
any behaviour of up to f faulty nodes, the outputs of non-faulty nodes
eventually agree and increment mod c every round.

States are integer ranks in [0, state_size).  Each algorithm also defines
a fixed-width bit encoding of its states; `state_bits` is the width of
that encoding and is the quantity the space accounting tests measure
exactly.  Received bit patterns that do not decode to a valid state are
canonicalized to state 0, keeping the transition total.

This module provides the two primitives everything else composes: the
single-node counter (n=1, f=0) and the modulus-reduced view of an
existing counter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidModulusError(ValueError):
    """Counter modulus outside its legal range."""


class DivisibilityError(ValueError):
    """Requested view modulus does not divide the counter's modulus."""


def ceil_log2(x: int) -> int:
    """Exact ceil(log2(x)) for x >= 1, via bit_length."""
    if x < 1:
        raise ValueError(f"ceil_log2 requires x >= 1, got {x}")
    return (x - 1).bit_length()


@dataclass(frozen=True)
class NodeId:
    """Global node index, optionally with (block, slot) coordinates.

    Inside a boosted counter with inner size n, node (i, j) is the j-th
    node of block i and has flat index i * n + j.
    """

    index: int
    block: int | None = None
    slot: int | None = None

    @classmethod
    def from_block(cls, block: int, slot: int, inner_n: int) -> "NodeId":
        return cls(index=block * inner_n + slot, block=block, slot=slot)


class CounterAlgorithm:
    """Base class: metadata plus the transition/output contract.

    Attributes
    ----------
    n : number of nodes
    f : resilience (maximum Byzantine nodes tolerated)
    c : output modulus
    t_bound : certified stabilization bound in rounds
    state_size : number of valid states per node (ranks are [0, state_size))
    state_bits : width of the per-node bit encoding
    """

    n: int
    f: int
    c: int
    t_bound: int
    state_size: int
    state_bits: int

    # -- scalar contract -------------------------------------------------
    def transition(self, node: int, received) -> int:
        raise NotImplementedError

    def output(self, node: int, state: int) -> int:
        raise NotImplementedError

    def transition_ctx(self, node: int, received, ctx) -> int:
        """Transition with round context; deterministic counters ignore it."""
        return self.transition(node, received)

    # -- bit encoding ----------------------------------------------------
    def encode_bits(self, state: int) -> int:
        raise NotImplementedError

    def decode_bits(self, pattern: int) -> int:
        """Decode a bit pattern; invalid patterns canonicalize to state 0."""
        state = self._decode_bits_checked(pattern)
        return 0 if state is None else state

    def _decode_bits_checked(self, pattern: int):
        raise NotImplementedError

    # -- vectorized contract (numpy batch engine) ------------------------
    def output_batch(self, states: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def step_batch(self, node_ids: np.ndarray, received: np.ndarray) -> np.ndarray:
        """Batched transition.

        node_ids: int array [V] of node indices.
        received: int array [..., V, n]; received[..., v, :] is the state
        vector node_ids[v] received.  Returns new states [..., V].
        """
        raise NotImplementedError

    # -- adversary support -----------------------------------------------
    def shift_output(self, state: int, delta: int) -> int:
        """Copy of `state` with its output register advanced by delta."""
        raise NotImplementedError

    def shift_output_batch(self, states: np.ndarray, delta: int) -> np.ndarray:
        raise NotImplementedError


class TrivialCounter(CounterAlgorithm):
    """Single-node counter: state v in [c], outputs v, steps to (v+1) mod c.

    Correct from round 0 onward (t_bound = 0): there is nothing to
    synchronize with and no fault to tolerate.
    """

    def __init__(self, c: int):
        if c < 2:
            raise InvalidModulusError(f"counter modulus must be >= 2, got {c}")
        self.n = 1
        self.f = 0
        self.c = c
        self.t_bound = 0
        self.state_size = c
        self.state_bits = ceil_log2(c)

    def transition(self, node, received):
        return (received[0] + 1) % self.c

    def output(self, node, state):
        return state

    def encode_bits(self, state):
        return state

    def _decode_bits_checked(self, pattern):
        return pattern if 0 <= pattern < self.c else None

    def output_batch(self, states):
        return states

    def step_batch(self, node_ids, received):
        return (received[..., 0] + 1) % self.c

    def shift_output(self, state, delta):
        return (state + delta) % self.c

    def shift_output_batch(self, states, delta):
        return (states + delta) % self.c

    def __repr__(self):
        return f"TrivialCounter(c={self.c})"


class ModViewCounter(CounterAlgorithm):
    """Same states and transition as `base`, outputs reduced mod a divisor.

    Stabilization bound and state encoding are untouched: the view only
    reinterprets outputs, so a counter that counts correctly mod c also
    counts correctly mod any divisor of c.
    """

    def __init__(self, base: CounterAlgorithm, c_view: int):
        if c_view < 2:
            raise InvalidModulusError(f"view modulus must be >= 2, got {c_view}")
        if base.c % c_view != 0:
            raise DivisibilityError(
                f"view modulus {c_view} does not divide counter modulus {base.c}"
            )
        if isinstance(base, ModViewCounter):
            base = base.base  # flattening keeps delegation one level deep
        self.base = base
        self.n = base.n
        self.f = base.f
        self.c = c_view
        self.t_bound = base.t_bound
        self.state_size = base.state_size
        self.state_bits = base.state_bits

    def transition(self, node, received):
        return self.base.transition(node, received)

    def output(self, node, state):
        return self.base.output(node, state) % self.c

    def encode_bits(self, state):
        return self.base.encode_bits(state)

    def _decode_bits_checked(self, pattern):
        return self.base._decode_bits_checked(pattern)

    def output_batch(self, states):
        return self.base.output_batch(states) % self.c

    def step_batch(self, node_ids, received):
        return self.base.step_batch(node_ids, received)

    def shift_output(self, state, delta):
        return self.base.shift_output(state, delta)

    def shift_output_batch(self, states, delta):
        return self.base.shift_output_batch(states, delta)

    def __repr__(self):
        return f"ModViewCounter({self.base!r}, c={self.c})"


def trivial_counter(c: int) -> TrivialCounter:
    """Single-node counter mod c (requires c >= 2)."""
    return TrivialCounter(c)


def mod_view(algo: CounterAlgorithm, c_view: int) -> ModViewCounter:
    """View of `algo` whose outputs are reduced mod c_view (c_view | algo.c)."""
    return ModViewCounter(algo, c_view)


def state_bits(algo: CounterAlgorithm) -> int:
    """Bits needed to store one node's state under the declared encoding."""
    return algo.state_bits


def stabilization_bound(algo: CounterAlgorithm) -> int:
    """Certified worst-case rounds until outputs count correctly."""
    return algo.t_bound
