"""Lockstep synchronous-network simulator with Byzantine adversaries.

Each round, every non-faulty node receives a length-n vector holding the
true start-of-round states of non-faulty senders and, per recipient, an
adversary-chosen state for each faulty sender (Byzantine nodes may send
different values to different recipients).  All transitions are then
applied synchronously.  The adversary sees the full current system state
every round (adaptive and information-unbounded, the strongest behaviour
the broadcast model admits) but is deterministic given its seed, so every
run is exactly reproducible.

Faulty nodes' own state slots are frozen at their initial values; they
are never treated as truth: traces record them masked ('*').

This module is the scalar reference implementation; engine.py runs the
same semantics vectorized over many runs and is equality-tested against
this one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import rng
from .boosting import BoostedCounter
from .counters import CounterAlgorithm


class ConfigurationError(ValueError):
    """Run inputs that do not fit the algorithm."""


@dataclass
class RunContext:
    """Per-round context passed to context-aware transitions."""

    round_index: int
    seed: int
    pull_log: list | None = None


# ---------------------------------------------------------------------------
# adversaries
# ---------------------------------------------------------------------------

class Adversary:
    """Deterministic message chooser for faulty senders.

    message(round_index, states, recipient, sender) returns the state rank
    the faulty `sender` presents to `recipient` this round.  `states` is
    the full current state vector (faulty slots frozen at their initial
    values).  prepare() binds the algorithm and fault set before a run.
    """

    kind = "abstract"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.algo: CounterAlgorithm | None = None
        self.faulty: frozenset = frozenset()

    def prepare(self, algo: CounterAlgorithm, faulty: frozenset):
        self.algo = algo
        self.faulty = faulty

    def message(self, round_index: int, states, recipient: int, sender: int) -> int:
        raise NotImplementedError


class CrashAdversary(Adversary):
    """Sends the all-zero state to everyone, every round."""

    kind = "crash"

    def message(self, round_index, states, recipient, sender):
        return 0


def _adv_linear(n: int, round_index: int, sender: int, recipient: int) -> int:
    """Linear hash coordinate for one adversary message slot."""
    return (round_index * n + sender) * n + recipient


class RandomAdversary(Adversary):
    """Sends an independent uniform valid state per recipient per round."""

    kind = "random"

    def message(self, round_index, states, recipient, sender):
        return rng.draw_below(self.algo.state_size, self.seed, rng.TAG_ADV,
                              _adv_linear(self.algo.n, round_index, sender, recipient))


class SplitAdversary(Adversary):
    """Sends one value to the low half of recipients and a second value,
    with the voted output register bumped, to the high half."""

    kind = "split"

    def _anchor(self, states):
        anchor = min(u for u in range(self.algo.n) if u not in self.faulty)
        return states[anchor]

    def message(self, round_index, states, recipient, sender):
        base = self._anchor(states)
        if recipient < self.algo.n // 2:
            return base
        return self.algo.shift_output(base, 1)


class MimicAdversary(Adversary):
    """Copies the lowest-indexed correct node's state, output register
    shifted by a configurable offset; identical to all recipients."""

    kind = "mimic"

    def __init__(self, seed: int = 0, offset: int = 1):
        super().__init__(seed)
        self.offset = offset

    def message(self, round_index, states, recipient, sender):
        anchor = min(u for u in range(self.algo.n) if u not in self.faulty)
        return self.algo.shift_output(states[anchor], self.offset)


class KingAttackAdversary(Adversary):
    """Targets rounds whose elected king is faulty.

    Computes the leader view an omniscient observer would derive from the
    true states; when the indexed king is faulty it sends recipient-
    dependent output-register values (alternating 0/1 with confidence
    cleared) to split any adoption, otherwise it behaves like the random
    adversary.  Falls back to random messages on non-boosted counters.
    """

    kind = "king_attack"

    def message(self, round_index, states, recipient, sender):
        algo = self.algo
        if isinstance(algo, BoostedCounter):
            view = algo.leader_view_states(states)
            if view.R // 3 in self.faulty:
                anchor = min(u for u in range(algo.n) if u not in self.faulty)
                inner = algo.unpack(states[anchor]).inner
                return algo.pack(inner, recipient % 2, 0)
        return rng.draw_below(algo.state_size, self.seed, rng.TAG_ADV,
                              _adv_linear(algo.n, round_index, sender, recipient))


_ADVERSARIES = {
    "crash": CrashAdversary,
    "random": RandomAdversary,
    "split": SplitAdversary,
    "mimic": MimicAdversary,
    "king_attack": KingAttackAdversary,
}

ADVERSARY_KINDS = tuple(sorted(_ADVERSARIES))


def make_adversary(kind: str, seed: int = 0, **kwargs) -> Adversary:
    """Instantiate a catalog adversary by kind."""
    try:
        cls = _ADVERSARIES[kind]
    except KeyError:
        raise ConfigurationError(
            f"unknown adversary kind {kind!r}; known: {', '.join(ADVERSARY_KINDS)}"
        ) from None
    return cls(seed=seed, **kwargs)


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

@dataclass
class Trace:
    """Recorded execution: per-round masked configurations and outputs.

    states[t][u] is node u's state rank at round t, or None for faulty
    nodes (their state is never treated as truth).  outputs likewise.
    digests[t] folds the adversary messages of round t into one value,
    so traces can be compared cheaply.
    """

    n: int
    c: int
    faulty: frozenset
    seed: int
    adversary_kind: str
    states: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    digests: list = field(default_factory=list)
    pulls: list = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.outputs)

    def configuration(self, t: int) -> tuple:
        """Projected configuration at round t: '*' for faulty slots."""
        return tuple("*" if s is None else s for s in self.states[t])

    def to_csv(self, stream):
        """Columns: round, node, output, state_rank, is_faulty."""
        stream.write("round,node,output,state_rank,is_faulty\n")
        for t in range(self.horizon):
            for u in range(self.n):
                if u in self.faulty:
                    stream.write(f"{t},{u},*,*,1\n")
                else:
                    stream.write(
                        f"{t},{u},{self.outputs[t][u]},{self.states[t][u]},0\n")


@dataclass(frozen=True)
class StabilizationReport:
    """Earliest detected stabilization round and the verified window."""

    stabilized: bool
    t_stab: int | None
    verified_window: int
    bound: int | None
    within_bound: bool

    def to_text(self) -> str:
        lines = ["stabilization report",
                 f"  stabilized: {self.stabilized}",
                 f"  t_stab: {self.t_stab if self.t_stab is not None else '-'}",
                 f"  verified_window: {self.verified_window}",
                 f"  bound: {self.bound if self.bound is not None else '-'}",
                 f"  within_bound: {self.within_bound}"]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def run(algo: CounterAlgorithm, faults, adversary: Adversary | None, init,
        horizon: int, seed: int = 0) -> Trace:
    """Execute `algo` for `horizon` rounds and record the trace.

    init: initial state rank per node (length algo.n).  faults: iterable
    of faulty node ids.  Deterministic given (init, seed): the adversary
    and any sampling draws derive from seeds alone.
    """
    faulty = frozenset(faults or ())
    n = algo.n
    if len(init) != n:
        raise ConfigurationError(f"need {n} initial states, got {len(init)}")
    if any(not 0 <= u < n for u in faulty):
        raise ConfigurationError(f"fault set {sorted(faulty)} outside [0, {n})")
    if horizon < 1:
        raise ConfigurationError(f"horizon must be >= 1, got {horizon}")
    if adversary is None:
        adversary = CrashAdversary(seed=seed)
    adversary.prepare(algo, faulty)

    states = list(init)
    trace = Trace(n=n, c=algo.c, faulty=faulty, seed=seed,
                  adversary_kind=adversary.kind)
    correct = [u for u in range(n) if u not in faulty]

    for t in range(horizon):
        trace.states.append(tuple(None if u in faulty else states[u]
                                  for u in range(n)))
        trace.outputs.append(tuple(None if u in faulty else algo.output(u, states[u])
                                   for u in range(n)))
        if t == horizon - 1:
            trace.digests.append(0)
            break

        digest = 0
        ctx = RunContext(round_index=t, seed=seed, pull_log=trace.pulls)
        new_states = list(states)
        for v in correct:
            received = list(states)
            for u in faulty:
                msg = adversary.message(t, states, v, u)
                received[u] = msg
                digest = rng.fold(digest, t, v, u, msg)
            new_states[v] = algo.transition_ctx(v, received, ctx)
        trace.digests.append(digest)
        states = new_states  # faulty slots stay frozen at their init values
    return trace


# ---------------------------------------------------------------------------
# stabilization detection
# ---------------------------------------------------------------------------

def detect_from_outputs(outputs, c: int, min_window: int | None = None,
                        bound: int | None = None) -> StabilizationReport:
    """Detect stabilization in a matrix of per-round correct outputs.

    outputs: sequence over rounds of sequences of the correct nodes'
    outputs.  t_stab is the earliest t such that from t through the end
    all outputs agree and successive rounds increment by 1 mod c; the run
    counts as stabilized when at least min_window rounds (default 2c)
    remain after t_stab.
    """
    if min_window is None:
        min_window = 2 * c
    horizon = len(outputs)
    if horizon == 0:
        raise ConfigurationError("empty trace")

    start = None  # start of the agreed+incrementing streak reaching the end
    prev_ok = False
    prev_val = None
    for t in range(horizon):
        row = outputs[t]
        ok = all(v == row[0] for v in row)
        if ok:
            if prev_ok and start is not None and row[0] == (prev_val + 1) % c:
                pass  # streak continues
            else:
                start = t
            prev_val = row[0]
        else:
            start = None
        prev_ok = ok

    stabilized = start is not None and horizon - start >= min_window
    t_stab = start if stabilized else None
    window = horizon - start if start is not None else 0
    within = bool(stabilized and (bound is None or t_stab <= bound))
    return StabilizationReport(stabilized=stabilized, t_stab=t_stab,
                               verified_window=window if stabilized else 0,
                               bound=bound, within_bound=within)


def detect_stabilization(trace: Trace, c: int | None = None,
                         min_window: int | None = None,
                         bound: int | None = None) -> StabilizationReport:
    """Detect stabilization in a recorded trace (correct nodes only)."""
    c = trace.c if c is None else c
    correct = [u for u in range(trace.n) if u not in trace.faulty]
    outputs = [[trace.outputs[t][u] for u in correct]
               for t in range(trace.horizon)]
    return detect_from_outputs(outputs, c, min_window=min_window, bound=bound)


# ---------------------------------------------------------------------------
# initial states
# ---------------------------------------------------------------------------

def enumerate_initial_states(algo: CounterAlgorithm, mode: str = "exhaustive",
                             count: int | None = None, seed: int = 0,
                             cap: int = 1 << 16):
    """Yield joint initial states.

    mode='exhaustive': every joint state, provided state_size**n <= cap.
    mode='random': `count` uniform i.i.d. joint states, reproducible per
    seed (the same derivation the batch engine uses).
    """
    n, size = algo.n, algo.state_size
    if mode == "exhaustive":
        total = size ** n
        if total > cap:
            raise ConfigurationError(
                f"exhaustive enumeration needs {total} states, above cap {cap}")
        yield from itertools.product(range(size), repeat=n)
    elif mode == "random":
        if count is None:
            raise ConfigurationError("random mode needs a count")
        for trial in range(count):
            yield tuple(rng.draw_below(size, seed, rng.TAG_INIT, trial, u)
                        for u in range(n))
    else:
        raise ConfigurationError(f"unknown init mode {mode!r}")
