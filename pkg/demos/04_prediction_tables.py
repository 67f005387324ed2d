#!/usr/bin/env python3
"""Recursion schedules beyond what can be simulated: exact predictions.

Plans can be evaluated without being run: node count, resilience,
stabilization bound and state bits are exact integer folds over the
layers.  Two families:

* fixed block count (k = 2h, every layer multiplies resilience by h):
  simple, but the per-layer time factor (2h)^k is paid at full size on
  every layer;
* adaptive phases (block counts shrink geometrically, 2 * 2^(P-p) layers
  in phase p): arranges the big block counts at small node counts, and
  keeps the node overhead at exactly N/F = 4 * 2^(2(2^P - 1)).

The state-bit column is the point: resilience grows by orders of
magnitude while per-node memory grows by a handful of bits per layer.
"""

from fractions import Fraction

from synccount import adaptive_plan, fixed_k_plan, plan_report, predict

print("fixed block count, epsilon = 1/2 (k = 8):")
print(plan_report(fixed_k_plan(Fraction(1, 2), 16, 3)))
print()

print("adaptive phase schedules:")
print(f"{'P':>2} {'N':>42} {'F':>32} {'N/F':>14} {'state bits':>10}")
for phases in range(1, 5):
    plan = adaptive_plan(phases, 3)
    n, f, t, s = predict(plan)
    print(f"{phases:>2} {n:>42} {f:>32} {n // f:>14} {s:>10}")
print()
print("overhead identity: N/F = 4 * 2^(2(2^P - 1)) ->",
      [4 * 2 ** (2 * (2 ** p - 1)) for p in range(1, 5)])
