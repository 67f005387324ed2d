"""Recursion schedules: planning stacks of boosting layers.

A Plan is an ordered list of boosting layers over a single-node base
counter.  Layer moduli chain bottom-up: each layer's inner modulus is
exactly 3(F+2)(2m)^k (the smallest legal choice, alpha = 1), and the
layer below is built to output precisely that modulus; the topmost layer
outputs the caller's requested modulus.  Predicted node count, resilience,
stabilization time and state bits are computed exactly in integer
arithmetic, so plans far beyond what can be simulated (the fixed-k and
adaptive families) still yield exact prediction tables.

Three plan families:

* base_plan: one layer of k = 3f+1 single-node blocks; optimal resilience
  f < n/3 at the price of a bound that grows like f^O(f).
* fixed_k_plan: repeated boosting with a constant block count k = 2h,
  multiplying resilience by h per layer; h is the smallest integer with
  log2(h) >= 1/epsilon, giving resilience Omega(n^(1-epsilon)).
* adaptive_plan: P phases with geometrically shrinking block counts
  k_p = 4 * 2^(P-p) and 2 * 2^(P-p) layers per phase, each layer
  multiplying resilience by k_p/2; the node overhead works out to
  N/F = 4 * 2^(2(2^P - 1)) exactly.

realize() folds boost() bottom-up into an executable counter; it refuses
plans whose node count exceeds a cap, since base-construction bounds blow
up far too fast for simulation beyond desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .boosting import BoostParamError, CompositionError, boost, validate_boost_params
from .counters import CounterAlgorithm, ceil_log2, trivial_counter


@dataclass(frozen=True)
class PlanLayer:
    """One boosting layer: inner shape (n, f, c), blocks k, targets (F, C)."""

    n: int
    f: int
    k: int
    F: int
    C: int
    c: int

    @property
    def m(self) -> int:
        return (self.k + 1) // 2

    @property
    def tau(self) -> int:
        return 3 * (self.F + 2)

    @property
    def round_time(self) -> int:
        return self.tau * (2 * self.m) ** self.k

    @property
    def extra_bits(self) -> int:
        return ceil_log2(self.C + 1) + 1


@dataclass(frozen=True)
class Plan:
    """A stack of boosting layers over a trivial base counter."""

    base_modulus: int
    layers: tuple
    predicted_N: int
    predicted_F: int
    predicted_T: int
    predicted_S: int
    notes: tuple = field(default=())


def predict(plan: Plan) -> tuple[int, int, int, int]:
    """Exact (N, F, T, S) for a plan, recomputed from its layers."""
    nodes, resilience, time = 1, 0, 0
    bits = ceil_log2(plan.base_modulus)
    for layer in plan.layers:
        nodes *= layer.k
        resilience = layer.F
        time += layer.round_time
        bits += layer.extra_bits
    return nodes, resilience, time, bits


def _assemble(base_modulus: int, layers: list, notes=()) -> Plan:
    plan = Plan(base_modulus=base_modulus, layers=tuple(layers),
                predicted_N=0, predicted_F=0, predicted_T=0, predicted_S=0,
                notes=tuple(notes))
    n, f, t, s = predict(plan)
    return Plan(base_modulus=base_modulus, layers=tuple(layers),
                predicted_N=n, predicted_F=f, predicted_T=t, predicted_S=s,
                notes=tuple(notes))


def _chain_layers(shapes: list, modulus: int) -> list:
    """Assign output moduli top-down: each layer feeds the one above its
    exact required inner modulus; the top layer outputs `modulus`."""
    layers = []
    next_c = modulus
    for n, f, k, F in reversed(shapes):
        m = (k + 1) // 2
        inner_c = 3 * (F + 2) * (2 * m) ** k  # smallest legal inner modulus
        layers.append(PlanLayer(n=n, f=f, k=k, F=F, C=next_c, c=inner_c))
        next_c = inner_c
    layers.reverse()
    return layers


def base_plan(f_target: int, modulus: int) -> Plan:
    """Single boosting layer over k = 3f+1 single-node blocks."""
    if f_target < 1:
        raise BoostParamError(f"target resilience must be >= 1, got {f_target}")
    if modulus <= 1:
        raise BoostParamError(f"output modulus must exceed 1, got {modulus}")
    k = 3 * f_target + 1
    layers = _chain_layers([(1, 0, k, f_target)], modulus)
    return _assemble(layers[0].c, layers)


def stack_layer(plan: Plan, k: int, F: int, C: int) -> Plan:
    """Add one boosting layer on top of a plan.

    The plan's current output modulus becomes the new layer's inner
    modulus and must be a multiple of 3(F+2)(2m)^k.
    """
    n, f, _, _ = predict(plan)
    top_c = plan.layers[-1].C if plan.layers else plan.base_modulus
    layer = PlanLayer(n=n, f=f, k=k, F=F, C=C, c=top_c)
    validate_boost_params(n, f, k, F, C, top_c)
    return _assemble(plan.base_modulus, list(plan.layers) + [layer],
                     notes=plan.notes)


def fixed_k_plan(epsilon, f_target: int, modulus: int) -> Plan:
    """Constant-block-count recursion reaching resilience >= f_target.

    epsilon in (0, 1) (Fraction preferred for exactness).  Uses k = 2h
    blocks per layer where h is the smallest integer >= 2 with
    log2(h) >= 1/epsilon; every layer multiplies resilience by h.
    """
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise BoostParamError(f"epsilon must lie in (0, 1), got {epsilon}")
    if f_target < 1:
        raise BoostParamError(f"target resilience must be >= 1, got {f_target}")
    # log2(h) >= 1/eps  <=>  h**p >= 2**q for eps = p/q, exactly in integers
    p, q = eps.numerator, eps.denominator
    h = 2
    while h ** p < 2 ** q:
        h += 1
    k = 2 * h
    notes = []
    shapes = [(1, 0, 4, 1)]  # the 4-node, 1-resilient base construction
    n, resilience = 4, 1
    while resilience < f_target:
        shapes.append((n, resilience, k, resilience * h))
        n, resilience = n * k, resilience * h
    if resilience != f_target:
        notes.append(f"resilience rounded up to {resilience} (layer growth x{h})")
    layers = _chain_layers(shapes, modulus)
    return _assemble(layers[0].c, layers, notes=notes)


def adaptive_plan(phases: int, modulus: int) -> Plan:
    """Phase schedule with shrinking block counts.

    Phase p of P uses k_p = 4 * 2^(P-p) blocks per layer for 2 * 2^(P-p)
    layers, each multiplying resilience by k_p/2.  The layer counts make
    the node overhead exact: N/F = 4 * 2^(2(2^P - 1)).
    """
    if phases < 1:
        raise BoostParamError(f"phase count must be >= 1, got {phases}")
    shapes = [(1, 0, 4, 1)]
    n, resilience = 4, 1
    for p in range(1, phases + 1):
        k_p = 4 * 2 ** (phases - p)
        for _ in range(2 * 2 ** (phases - p)):
            shapes.append((n, resilience, k_p, resilience * k_p // 2))
            n, resilience = n * k_p, resilience * k_p // 2
    layers = _chain_layers(shapes, modulus)
    return _assemble(layers[0].c, layers)


def realize(plan: Plan, node_cap: int = 64) -> CounterAlgorithm:
    """Fold the plan bottom-up into an executable counter.

    Validates every layer, then checks the realized counter's measured
    state bits and stabilization bound against the plan's predictions.
    node_cap guards against realizing constructions whose bounds make
    simulation hopeless.
    """
    if plan.predicted_N > node_cap:
        raise CompositionError(
            f"plan needs {plan.predicted_N} nodes, above the cap {node_cap}; "
            f"use predict() for large plans")
    counter = trivial_counter(plan.base_modulus)
    for layer in plan.layers:
        params = validate_boost_params(counter.n, counter.f, layer.k,
                                       layer.F, layer.C, counter.c)
        counter = boost(counter, params)
    if counter.state_bits != plan.predicted_S or counter.t_bound != plan.predicted_T:
        raise CompositionError(
            f"realized counter disagrees with plan predictions: "
            f"bits {counter.state_bits} vs {plan.predicted_S}, "
            f"bound {counter.t_bound} vs {plan.predicted_T}")
    return counter


def plan_report(plan: Plan) -> str:
    """Plain-text prediction table: one line per layer plus totals."""
    lines = ["layer  k  N  F  C  c  layer_T  cumulative_S"]
    nodes, bits = 1, ceil_log2(plan.base_modulus)
    lines.append(f"base  -  1  0  {plan.base_modulus}  -  0  {bits}")
    for idx, layer in enumerate(plan.layers):
        nodes *= layer.k
        bits += layer.extra_bits
        lines.append(
            f"{idx}  {layer.k}  {nodes}  {layer.F}  {layer.C}  {layer.c}  "
            f"{layer.round_time}  {bits}")
    lines.append(
        f"total  N={plan.predicted_N}  F={plan.predicted_F}  "
        f"T={plan.predicted_T}  S={plan.predicted_S}")
    for note in plan.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines)
