#!/usr/bin/env python3
"""Build the smallest non-trivial self-stabilizing counter and watch it
converge under a Byzantine node.

Four nodes, each running a private mod-2304 counter, are wired together
by leader voting and a phase-king overlay into a counter mod 3 that
tolerates one Byzantine node.  We start it from a random joint state,
let node 3 equivocate (different messages to different recipients), and
print the output matrix around the detected stabilization round.
"""

from synccount import (base_plan, detect_stabilization, make_adversary,
                       plan_report, realize, run)

plan = base_plan(1, 3)
print(plan_report(plan))
print()

algo = realize(plan)
print(f"counter: {algo.n} nodes, modulus {algo.c}, tolerates {algo.f} fault,")
print(f"certified bound {algo.t_bound} rounds, {algo.state_bits} state bits/node")
print()

faulty = {3}
adversary = make_adversary("random", seed=7)
init = [13164, 13464, 6044, 18162]  # arbitrary corrupted start
trace = run(algo, faulty, adversary, init, horizon=algo.t_bound + 40, seed=7)
report = detect_stabilization(trace, bound=algo.t_bound)
print(report.to_text())
print()

t0 = max(0, report.t_stab - 4)
print(f"outputs around stabilization (rounds {t0}..{report.t_stab + 8}):")
print("round | " + " ".join(f"n{u}" for u in range(algo.n)))
for t in range(t0, report.t_stab + 9):
    row = " ".join("*" if o is None else str(o) for o in trace.outputs[t])
    mark = "  <- stabilized" if t == report.t_stab else ""
    print(f"{t:5d} | {row}{mark}")
