"""Experiment driver.

Reads a declarative plain-text config (INI sections, documented in the
README), builds a plan, realizes it, runs a fault-placement x adversary x
initial-state matrix, and writes a prediction table, a summary, and
optional per-run trace CSVs.  Exit codes: 0 all bound assertions hold,
1 an assertion failed, 2 the config is invalid.

Verbs:
  plan    print the prediction table for the configured plan
  run     execute the matrix (honours --predict-only)
  stats   Monte-Carlo threshold statistics harness
  replay  re-run one cell/trial of a previous experiment and dump its trace

Reproducibility: a master seed fans out counter-based to per-cell seeds
and from there to per-run seeds and initial states, so any single run can
be replayed in isolation; reruns with the same config and seed produce
byte-identical summaries.
"""

from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool

import numpy as np

from . import engine, rng, sim
from .boosting import BoostParamError, CompositionError
from .counters import InvalidModulusError, DivisibilityError
from .pulling import SamplingConfig, SamplingGuardError, pulled_boost, threshold_stats
from .schedule import (Plan, adaptive_plan, base_plan, fixed_k_plan,
                       plan_report, realize, stack_layer)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


_SETUP_ERRORS = (ConfigError, BoostParamError, CompositionError,
                 InvalidModulusError, DivisibilityError, SamplingGuardError,
                 sim.ConfigurationError)


@dataclass
class ExperimentConfig:
    """Resolved experiment description; see README for the file grammar."""

    plan: Plan
    fault_sets: list
    adversaries: list
    trials: int
    horizon: int | None          # None = auto (t_bound + 2C + 16)
    min_window: int | None       # None = auto (2c)
    seed: int
    sampling: SamplingConfig | None
    gate: float
    traces: str = "none"
    predict_only: bool = False


def _parse_layers(text: str):
    layers = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        fields = dict(kv.split("=") for kv in part.split())
        try:
            layers.append((int(fields["k"]), int(fields["F"]), int(fields["C"])))
        except KeyError as missing:
            raise ConfigError(f"layer spec {part!r} missing {missing}") from None
    return layers


def _build_plan(section) -> Plan:
    kind = section.get("kind", "base")
    modulus = section.getint("modulus", fallback=3)
    if kind == "base":
        plan = base_plan(section.getint("f_target", fallback=1), modulus)
    elif kind == "fixed_k":
        plan = fixed_k_plan(Fraction(section.get("epsilon", "1/2")),
                            section.getint("f_target", fallback=4), modulus)
    elif kind == "adaptive":
        plan = adaptive_plan(section.getint("phases", fallback=1), modulus)
    else:
        raise ConfigError(f"unknown plan kind {kind!r}")
    for k, F, C in _parse_layers(section.get("layers", "")):
        plan = stack_layer(plan, k, F, C)
    return plan


def _resolve_faults(section, n: int, resilience: int, seed: int):
    mode = section.get("mode", "all") if section is not None else "all"
    if mode == "none":
        return [frozenset()]
    if mode == "all":
        # fault-free plus every subset of size <= resilience (desk scale)
        import itertools
        import math
        total = sum(math.comb(n, s) for s in range(1, resilience + 1))
        if total > 10_000:
            raise ConfigError(
                f"'all' fault placements would enumerate {total} sets; "
                f"use explicit or random mode")
        sets = [frozenset()]
        for size in range(1, resilience + 1):
            sets.extend(frozenset(c) for c in itertools.combinations(range(n), size))
        return sets
    if mode == "explicit":
        sets = []
        for part in filter(None, (p.strip() for p in section.get("sets", "").split(";"))):
            if part == "none":
                sets.append(frozenset())
                continue
            ids = frozenset(int(x) for x in part.split())
            if any(not 0 <= u < n for u in ids):
                raise ConfigError(f"fault set {sorted(ids)} outside [0, {n})")
            sets.append(ids)
        if not sets:
            raise ConfigError("explicit fault mode needs a 'sets' entry")
        return sets
    if mode == "random":
        count = section.getint("count", fallback=5)
        sets = []
        for i in range(count):
            picked = set()
            j = 0
            while len(picked) < resilience:
                picked.add(rng.draw_below(n, seed, 0xFA, i, j))
                j += 1
            sets.append(frozenset(picked))
        return sets
    raise ConfigError(f"unknown fault mode {mode!r}")


def parse_config(path: str, predict_only: bool = False,
                 seed_override: int | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    if "plan" not in parser:
        raise ConfigError("config needs a [plan] section")
    plan = _build_plan(parser["plan"])

    seed = seed_override if seed_override is not None else (
        parser["run"].getint("seed", fallback=1) if "run" in parser else 1)
    trials = parser["run"].getint("trials", fallback=100) if "run" in parser else 100
    horizon = None
    min_window = None
    if "run" in parser:
        h = parser["run"].get("horizon", "auto")
        horizon = None if h == "auto" else int(h)
        w = parser["run"].get("min_window", "auto")
        min_window = None if w == "auto" else int(w)

    sampling = None
    gate = 0.95
    if "sampling" in parser:
        s = parser["sampling"]
        sampling = SamplingConfig(
            M=s.getint("m", fallback=64),
            gamma=s.getfloat("gamma", fallback=0.5),
            mode=s.get("mode", "fresh_random"),
            level_threshold=s.getint("level_threshold", fallback=8),
            seed=seed)
        gate = s.getfloat("gate", fallback=0.95)

    fault_sets = [] if predict_only else _resolve_faults(
        parser["faults"] if "faults" in parser else None,
        plan.predicted_N, plan.predicted_F, seed)
    kinds_text = (parser["adversaries"].get("kinds", "crash random")
                  if "adversaries" in parser else "crash random")
    adversaries = kinds_text.replace(",", " ").split()
    for kind in adversaries:
        if kind not in sim.ADVERSARY_KINDS:
            raise ConfigError(f"unknown adversary kind {kind!r}; "
                              f"known: {', '.join(sim.ADVERSARY_KINDS)}")

    traces = parser["output"].get("traces", "none") if "output" in parser else "none"
    if traces not in ("none", "all", "failures"):
        raise ConfigError(f"unknown traces mode {traces!r}")
    return ExperimentConfig(plan=plan, fault_sets=fault_sets,
                            adversaries=adversaries, trials=trials,
                            horizon=horizon, min_window=min_window, seed=seed,
                            sampling=sampling, gate=gate, traces=traces,
                            predict_only=predict_only)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _cell_key(fault_set: frozenset, adversary: str) -> str:
    ids = ",".join(str(u) for u in sorted(fault_set)) if fault_set else "none"
    return f"faults={ids}/adv={adversary}"


def _build_algo(config: ExperimentConfig):
    algo = realize(config.plan)
    if config.sampling is not None:
        algo = pulled_boost(algo.inner, algo.params, config.sampling)
    return algo


def _run_cell(args):
    config, cell_index, fault_set, adversary = args
    algo = _build_algo(config)
    horizon = (config.horizon if config.horizon is not None
               else algo.t_bound + 2 * algo.c + 16)
    min_window = (config.min_window if config.min_window is not None
                  else 2 * algo.c)
    cell_seed = rng.split_seed(config.seed, cell_index)
    inits = engine.random_init_batch(algo, config.trials, cell_seed)
    seeds = np.array([rng.split_seed(cell_seed, b) for b in range(config.trials)],
                     dtype=np.int64)
    result = engine.run_batch(algo, fault_set, adversary, inits, horizon, seeds,
                              min_window=min_window, bound=algo.t_bound,
                              early_stop=config.sampling is None)
    within = result.stabilized & (result.t_stab <= algo.t_bound)
    return {
        "key": _cell_key(fault_set, adversary),
        "cell_index": cell_index,
        "runs": config.trials,
        "stabilized": result.stabilized_count,
        "within_bound": int(within.sum()),
        "max_t_stab": result.max_t_stab(),
        "bound": algo.t_bound,
        "horizon": result.horizon,
        "max_pulls": result.max_pulls,
        "failed_trials": [int(b) for b in np.nonzero(~within)[0][:20]],
    }


@dataclass
class ExperimentSummary:
    plan_text: str
    cells: list
    gate: float
    sampling: bool
    assertions: list = field(default_factory=list)

    def to_text(self) -> str:
        out = io.StringIO()
        out.write("# plan\n")
        out.write(self.plan_text + "\n")
        out.write("# matrix\n")
        for cell in sorted(self.cells, key=lambda c: c["key"]):
            out.write(
                f"cell={cell['key']} runs={cell['runs']} "
                f"stabilized={cell['stabilized']} within_bound={cell['within_bound']} "
                f"max_t_stab={cell['max_t_stab']} bound={cell['bound']} "
                f"horizon={cell['horizon']}")
            if cell["max_pulls"] is not None:
                out.write(f" max_pulls={cell['max_pulls']}")
            out.write("\n")
        out.write("# verdict\n")
        for name, ok, detail in self.assertions:
            out.write(f"assert {name}: {'pass' if ok else 'FAIL'} ({detail})\n")
        return out.getvalue()

    @property
    def all_pass(self) -> bool:
        return all(ok for _, ok, _ in self.assertions)


def verify_bounds(summary: ExperimentSummary) -> list:
    """Per-cell assertions: every run within the certified bound, or, in
    sampling mode, stabilization rate at or above the configured gate."""
    assertions = []
    for cell in sorted(summary.cells, key=lambda c: c["key"]):
        if summary.sampling:
            rate = cell["within_bound"] / cell["runs"]
            ok = rate >= summary.gate
            assertions.append((f"{cell['key']} rate>={summary.gate}", ok,
                               f"rate={rate:.3f}"))
        else:
            ok = cell["within_bound"] == cell["runs"]
            assertions.append((f"{cell['key']} all within bound", ok,
                               f"{cell['within_bound']}/{cell['runs']}"))
    summary.assertions = assertions
    return assertions


def run_experiment(config: ExperimentConfig, out_dir: str | None,
                   jobs: int = 1) -> ExperimentSummary:
    plan_text = plan_report(config.plan)
    summary = ExperimentSummary(plan_text=plan_text, cells=[], gate=config.gate,
                                sampling=config.sampling is not None)
    if config.predict_only:
        summary.assertions = [("predict-only", True, "no runs requested")]
    else:
        tasks = []
        cell_index = 0
        for fault_set in config.fault_sets:
            for adversary in config.adversaries:
                tasks.append((config, cell_index, fault_set, adversary))
                cell_index += 1
        if jobs > 1:
            with Pool(jobs) as pool:
                summary.cells = pool.map(_run_cell, tasks)
        else:
            summary.cells = [_run_cell(t) for t in tasks]
        verify_bounds(summary)

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "plan.txt"), "w") as fh:
            fh.write(plan_text + "\n")
        with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
            fh.write(summary.to_text())
        if not config.predict_only and config.traces != "none":
            _write_traces(config, summary, out_dir)
    return summary


def _replay_one(config: ExperimentConfig, cell_index: int, fault_set, adversary,
                trial: int):
    algo = _build_algo(config)
    horizon = (config.horizon if config.horizon is not None
               else algo.t_bound + 2 * algo.c + 16)
    cell_seed = rng.split_seed(config.seed, cell_index)
    init = engine.random_init_batch(algo, config.trials, cell_seed)[trial]
    run_seed = rng.split_seed(cell_seed, trial)
    adv = sim.make_adversary(adversary, seed=run_seed)
    return sim.run(algo, fault_set, adv, [int(s) for s in init], horizon,
                   seed=run_seed)


def _write_traces(config: ExperimentConfig, summary: ExperimentSummary,
                  out_dir: str):
    trace_dir = os.path.join(out_dir, "traces")
    os.makedirs(trace_dir, exist_ok=True)
    cells = {c["cell_index"]: c for c in summary.cells}
    cell_index = 0
    for fault_set in config.fault_sets:
        for adversary in config.adversaries:
            cell = cells[cell_index]
            if config.traces == "all":
                wanted = range(config.trials)
            else:
                wanted = cell["failed_trials"]
            for trial in wanted:
                trace = _replay_one(config, cell_index, fault_set, adversary, trial)
                name = f"cell{cell_index:03d}_trial{trial:04d}.csv"
                with open(os.path.join(trace_dir, name), "w") as fh:
                    trace.to_csv(fh)
            cell_index += 1


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def _cmd_plan(args) -> int:
    config = parse_config(args.config, predict_only=True,
                          seed_override=args.seed)
    text = plan_report(config.plan)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "plan.txt"), "w") as fh:
            fh.write(text + "\n")
    return 0


def _cmd_run(args) -> int:
    config = parse_config(args.config, predict_only=args.predict_only,
                          seed_override=args.seed)
    summary = run_experiment(config, args.out, jobs=args.jobs)
    print(summary.to_text(), end="")
    return 0 if summary.all_pass else 1


def _cmd_stats(args) -> int:
    stats = threshold_stats(args.m, args.correct_fraction, args.value_fraction,
                            args.trials, seed=args.seed, gamma=args.gamma)
    text = stats.to_text()
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "stats.txt"), "w") as fh:
            fh.write(text + "\n")
    return 0


def _cmd_replay(args) -> int:
    config = parse_config(args.config, seed_override=args.seed)
    keys = {}
    cell_index = 0
    for fault_set in config.fault_sets:
        for adversary in config.adversaries:
            keys[_cell_key(fault_set, adversary)] = (cell_index, fault_set, adversary)
            cell_index += 1
    if args.cell not in keys:
        raise ConfigError(f"unknown cell {args.cell!r}; "
                          f"cells: {', '.join(sorted(keys))}")
    if not 0 <= args.trial < config.trials:
        raise ConfigError(f"trial {args.trial} outside [0, {config.trials})")
    cell_index, fault_set, adversary = keys[args.cell]
    trace = _replay_one(config, cell_index, fault_set, adversary, args.trial)
    report = sim.detect_stabilization(trace, bound=_build_algo(config).t_bound)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"replay_cell{cell_index:03d}_trial{args.trial:04d}.csv")
        with open(path, "w") as fh:
            trace.to_csv(fh)
        with open(os.path.join(args.out, "replay_report.txt"), "w") as fh:
            fh.write(report.to_text() + "\n")
    print(report.to_text())
    return 0 if report.within_bound else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synccount",
        description="Experiment driver for self-stabilizing Byzantine-tolerant counters")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_plan = sub.add_parser("plan", help="print the prediction table")
    p_plan.add_argument("--config", required=True)
    p_plan.add_argument("--out", default=None)
    p_plan.add_argument("--seed", type=int, default=None)
    p_plan.set_defaults(fn=_cmd_plan)

    p_run = sub.add_parser("run", help="execute the experiment matrix")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--predict-only", action="store_true")
    p_run.set_defaults(fn=_cmd_run)

    p_stats = sub.add_parser("stats", help="threshold statistics harness")
    p_stats.add_argument("--m", type=int, default=64)
    p_stats.add_argument("--correct-fraction", type=float, default=0.75)
    p_stats.add_argument("--value-fraction", type=float, default=1.0)
    p_stats.add_argument("--trials", type=int, default=10000)
    p_stats.add_argument("--seed", type=int, default=0)
    p_stats.add_argument("--gamma", type=float, default=None)
    p_stats.add_argument("--out", default=None)
    p_stats.set_defaults(fn=_cmd_stats)

    p_replay = sub.add_parser("replay", help="re-run one cell/trial, dump its trace")
    p_replay.add_argument("--config", required=True)
    p_replay.add_argument("--cell", required=True)
    p_replay.add_argument("--trial", type=int, required=True)
    p_replay.add_argument("--out", default=None)
    p_replay.add_argument("--seed", type=int, default=None)
    p_replay.set_defaults(fn=_cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _SETUP_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
