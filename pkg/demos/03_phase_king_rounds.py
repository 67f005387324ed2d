#!/usr/bin/env python3
"""The phase-king overlay in isolation: establishment and persistence.

The overlay's registers are an output value a in [C] union {INF} and a
confidence bit d.  Instruction sets come in triples indexed by a king
node: a filtering round, a support-counting round, and a king round in
which unconfident nodes adopt the king's value.

Part 1 walks one triple from a maximally disagreeing start and shows the
registers converging.  Part 2 hammers an agreed state with adversarial
messages under every instruction set and shows agreement never breaks.
"""

import itertools

from synccount import (INF, PhaseKingRegisters, TallyVector, exec_instruction,
                       instruction_index)

N, F, C = 4, 1, 3
TAU = 3 * (F + 2)


def show(label, regs):
    pretty = ", ".join(f"(a={'INF' if r.a == INF else r.a}, d={r.d})" for r in regs)
    print(f"  {label}: {pretty}")


print("part 1: one triple with king node 0 (correct), faulty node 3")
regs = [PhaseKingRegisters(0, 0), PhaseKingRegisters(2, 1), PhaseKingRegisters(INF, 0)]
show("start", regs)
adversary_values = {0: [1, 2, INF], 1: [2, INF, 0], 2: [0, 0, 0]}
for offset in range(3):
    king_value = regs[0].a  # node 0 is correct: everyone reads its true a
    new = []
    for v in range(3):
        received = [regs[0].a, regs[1].a, regs[2].a, adversary_values[offset][v]]
        new.append(exec_instruction(regs[v], offset,
                                    TallyVector.from_values(received),
                                    king_value, N, F, C))
    regs = new
    show(f"after offset-{offset} round", regs)

print()
print("part 2: agreed state (a=1, d=1) survives every instruction set and")
print("every faulty value combination; outputs advance mod C each round")
x = 1
violations = 0
for r in range(TAU):
    king, offset = instruction_index(r, TAU)
    for adv in itertools.product([0, 1, 2, INF], repeat=3):
        for v in range(3):
            received = [x, x, x, adv[v]]
            king_value = x if king < 3 else adv[v]
            out = exec_instruction(PhaseKingRegisters(x, 1), offset,
                                   TallyVector.from_values(received),
                                   king_value, N, F, C)
            if out.a != (x + 1) % C or out.d != 1:
                violations += 1
print(f"  checked {TAU * 4 ** 3 * 3} register updates, violations: {violations}")
