import numpy as np
import pytest

from synccount import (ADVERSARY_KINDS, base_plan, detect_from_outputs,
                       enumerate_initial_states, make_adversary,
                       random_init_batch, realize, run, run_batch, stack_layer)
from synccount.engine import _StreakDetector
from synccount import rng


def _scalar_reference(algo, faults, kind, init, horizon, seed):
    trace = run(algo, faults, make_adversary(kind, seed=seed), init, horizon,
                seed=seed)
    correct = [u for u in range(algo.n) if u not in faults]
    return [[trace.outputs[t][u] for u in correct] for t in range(horizon)]


@pytest.mark.parametrize("kind", ADVERSARY_KINDS)
def test_batch_matches_scalar_base_counter(kind):
    algo = realize(base_plan(1, 3))
    faults = frozenset({3})
    horizon = 150
    init = [int(x) for x in random_init_batch(algo, 1, seed=13)[0]]
    expected = _scalar_reference(algo, faults, kind, init, horizon, seed=21)

    states = np.array([init])
    frozen = states[:, sorted(faults)].copy()
    from synccount.engine import _adversary_batch
    for t in range(horizon):
        outs = algo.output_batch(states)
        got = [int(outs[0, u]) for u in range(4) if u not in faults]
        assert got == expected[t], (kind, t)
        if t == horizon - 1:
            break
        msg = np.repeat(states[:, None, :], 4, axis=1)
        for u in sorted(faults):
            msg[:, :, u] = _adversary_batch(kind, algo, t, states, u,
                                            np.array([21]), sorted(faults))
        states = algo.step_batch(np.arange(4), msg)
        states[:, sorted(faults)] = frozen


@pytest.mark.parametrize("kind", ["crash", "random", "king_attack"])
def test_batch_matches_scalar_two_level(kind):
    algo = realize(stack_layer(base_plan(1, 960), 3, 3, 10))
    faults = frozenset({0, 5, 9})
    horizon = 80
    init = [int(x) for x in random_init_batch(algo, 1, seed=3)[0]]
    expected = _scalar_reference(algo, faults, kind, init, horizon, seed=8)

    from synccount.engine import _adversary_batch
    states = np.array([init])
    frozen = states[:, sorted(faults)].copy()
    for t in range(horizon):
        outs = algo.output_batch(states)
        got = [int(outs[0, u]) for u in range(12) if u not in faults]
        assert got == expected[t], (kind, t)
        if t == horizon - 1:
            break
        msg = np.repeat(states[:, None, :], 12, axis=1)
        for u in sorted(faults):
            msg[:, :, u] = _adversary_batch(kind, algo, t, states, u,
                                            np.array([8]), sorted(faults))
        states = algo.step_batch(np.arange(12), msg)
        states[:, sorted(faults)] = frozen


def test_random_init_batch_matches_enumerate():
    algo = realize(base_plan(1, 3))
    batch = random_init_batch(algo, 7, seed=99)
    stream = list(enumerate_initial_states(algo, "random", count=7, seed=99))
    assert [tuple(int(x) for x in row) for row in batch] == stream


def test_online_detector_matches_offline():
    gen = np.random.default_rng(4)
    c = 5
    for _ in range(40):
        horizon = int(gen.integers(3, 40))
        outs = gen.integers(0, c, size=(horizon, 3))
        if gen.random() < 0.7:
            start = int(gen.integers(0, horizon - 1))
            base = int(gen.integers(0, c))
            for t in range(start, horizon):
                outs[t] = (base + t - start) % c
        det = _StreakDetector(1, c=c, min_window=4)
        for t in range(horizon):
            det.update(t, outs[t][None, :])
        offline = detect_from_outputs([list(r) for r in outs], c=c, min_window=4)
        live = det.start[0] != np.iinfo(np.int64).max
        stabilized = live and horizon - det.start[0] >= 4
        assert stabilized == offline.stabilized
        if offline.stabilized:
            assert det.start[0] == offline.t_stab


def test_run_batch_full_matrix_against_scalar_reports():
    algo = realize(base_plan(1, 3))
    faults = frozenset({1})
    seeds = np.array([rng.split_seed(5, i) for i in range(6)])
    inits = random_init_batch(algo, 6, seed=5)
    horizon = algo.t_bound + 40
    res = run_batch(algo, faults, "random", inits, horizon, seeds,
                    min_window=30, bound=algo.t_bound, early_stop=False)
    for i in range(6):
        trace = run(algo, faults, make_adversary("random", seed=int(seeds[i])),
                    [int(x) for x in inits[i]], horizon, seed=int(seeds[i]))
        from synccount import detect_stabilization
        report = detect_stabilization(trace, min_window=30, bound=algo.t_bound)
        assert bool(res.stabilized[i]) == report.stabilized
        if report.stabilized:
            assert int(res.t_stab[i]) == report.t_stab


def test_early_stop_certifies_same_start():
    algo = realize(base_plan(1, 3))
    inits = random_init_batch(algo, 10, seed=6)
    seeds = np.arange(10) + 4
    fast = run_batch(algo, frozenset({2}), "crash", inits, algo.t_bound + 140,
                     seeds, min_window=60, bound=algo.t_bound, stop_window=60)
    slow = run_batch(algo, frozenset({2}), "crash", inits, algo.t_bound + 140,
                     seeds, min_window=60, bound=algo.t_bound, early_stop=False)
    assert fast.horizon <= slow.horizon
    assert (fast.t_stab == slow.t_stab).all()


def test_fault_free_two_level_stabilizes():
    algo = realize(stack_layer(base_plan(1, 960), 3, 3, 10))
    inits = random_init_batch(algo, 12, seed=44)
    seeds = np.arange(12) + 2
    res = run_batch(algo, frozenset(), "crash", inits, algo.t_bound + 60,
                    seeds, min_window=40, bound=algo.t_bound, stop_window=40)
    assert bool((res.stabilized & (res.t_stab <= algo.t_bound)).all())
