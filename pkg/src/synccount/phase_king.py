"""Phase-king round functions.

The boosted counter drives a rotating-king agreement protocol over an
output register a in [C] union {INF} and a confidence bit d.  INF is the
reset state.  Rounds are grouped in triples indexed by a king ell: the
instruction sets are

  offset 0 (exec_I0): reset a to INF unless at least N - F of the N
      received a-values equal own a; then increment.
  offset 1 (exec_I1): set d to 1 iff at least N - F received values equal
      own a, else 0; set a to the smallest numeric value supported by
      more than F received values (INF when none is); then increment.
  offset 2 (exec_I2): nodes with a = INF or d = 0 adopt min(C, king's a);
      everyone sets d to 1 and increments.

Two properties make the overlay work, and both are checked exhaustively
in the tests at small scale:

* establishment: three consecutive rounds with offsets 0, 1, 2 under a
  correct king and fewer than N/3 faults leave all correct nodes with
  equal non-INF a and d = 1, whatever the faulty nodes send;
* persistence: once all correct nodes hold the same a in [C] with d = 1,
  any single instruction set under any faulty messages leaves them agreed
  on (a + 1) mod C with d = 1.

Increment treats the transient value C (possible only between adoption of
min(C, INF) and the increment inside offset 2) literally: (C + 1) mod C
is 1.  Adoption is uniform across adopters, so agreement is unaffected.

All functions are pure; registers are returned, never mutated.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping

INF = float("inf")


class DomainError(ValueError):
    """Value outside the domain an operation is defined on."""


@dataclass(frozen=True)
class PhaseKingRegisters:
    """Output register a in [C] union {INF} and confidence bit d."""

    a: int | float
    d: int


@dataclass(frozen=True)
class TallyVector:
    """Occurrence counts of received a-values (own value included)."""

    counts: Mapping
    total: int

    @classmethod
    def from_values(cls, values) -> "TallyVector":
        vals = list(values)
        return cls(counts=Counter(vals), total=len(vals))

    def count(self, value) -> int:
        return self.counts.get(value, 0)


def inc(a, c_out: int):
    """Increment mod c_out; INF is absorbing, transient c_out maps to 1."""
    if a == INF:
        return INF
    return (a + 1) % c_out


def instruction_index(r: int, tau: int) -> tuple[int, int]:
    """Map a round-counter value r in [tau] to (king index, offset)."""
    if not 0 <= r < tau:
        raise DomainError(f"round counter {r} outside [0, {tau})")
    return divmod(r, 3)


def exec_I0(regs: PhaseKingRegisters, tally: TallyVector, n_nodes: int,
            f_max: int, c_out: int) -> PhaseKingRegisters:
    """Offset-0 instruction set: reset weakly supported values, increment."""
    a = regs.a if tally.count(regs.a) >= n_nodes - f_max else INF
    return PhaseKingRegisters(a=inc(a, c_out), d=regs.d)


def exec_I1(regs: PhaseKingRegisters, tally: TallyVector, n_nodes: int,
            f_max: int, c_out: int) -> PhaseKingRegisters:
    """Offset-1 instruction set: recompute confidence, pick supported min."""
    d = 1 if tally.count(regs.a) >= n_nodes - f_max else 0
    supported = [j for j in range(c_out) if tally.count(j) > f_max]
    a = min(supported) if supported else INF
    return PhaseKingRegisters(a=inc(a, c_out), d=d)


def exec_I2(regs: PhaseKingRegisters, king_value, c_out: int) -> PhaseKingRegisters:
    """Offset-2 instruction set: unconfident nodes adopt the king's value."""
    a = regs.a
    if a == INF or regs.d == 0:
        a = min(c_out, king_value)  # king INF adopts the transient value C
    return PhaseKingRegisters(a=inc(a, c_out), d=1)


def exec_instruction(regs: PhaseKingRegisters, offset: int, tally: TallyVector,
                     king_value, n_nodes: int, f_max: int,
                     c_out: int) -> PhaseKingRegisters:
    """Dispatch one instruction set by offset in {0, 1, 2}."""
    if offset == 0:
        return exec_I0(regs, tally, n_nodes, f_max, c_out)
    if offset == 1:
        return exec_I1(regs, tally, n_nodes, f_max, c_out)
    if offset == 2:
        return exec_I2(regs, king_value, c_out)
    raise DomainError(f"instruction offset must be 0, 1 or 2, got {offset}")
