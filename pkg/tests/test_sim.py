import io

import pytest

from synccount import (ConfigurationError, base_plan, detect_from_outputs,
                       detect_stabilization, enumerate_initial_states,
                       make_adversary, realize, run, trivial_counter)


def test_trivial_run_outputs():
    trace = run(trivial_counter(3), frozenset(), None, [2], horizon=4)
    assert [o[0] for o in trace.outputs] == [2, 0, 1, 2]


def test_run_validates_inputs():
    algo = trivial_counter(3)
    with pytest.raises(ConfigurationError):
        run(algo, frozenset(), None, [0, 1], horizon=3)
    with pytest.raises(ConfigurationError):
        run(algo, {5}, None, [0], horizon=3)
    with pytest.raises(ConfigurationError):
        run(algo, frozenset(), None, [0], horizon=0)


def test_run_deterministic():
    algo = realize(base_plan(1, 3))
    init = [5, 6, 7, 8]
    a = run(algo, {1}, make_adversary("random", seed=3), init, 60, seed=3)
    b = run(algo, {1}, make_adversary("random", seed=3), init, 60, seed=3)
    assert a.outputs == b.outputs
    assert a.states == b.states
    assert a.digests == b.digests
    c = run(algo, {1}, make_adversary("random", seed=4), init, 60, seed=4)
    assert a.outputs != c.outputs or a.digests != c.digests


def test_trace_masks_faulty_nodes():
    algo = realize(base_plan(1, 3))
    trace = run(algo, {2}, make_adversary("crash", seed=0), [1, 2, 3, 4], 10)
    for t in range(trace.horizon):
        assert trace.states[t][2] is None
        assert trace.outputs[t][2] is None
        assert trace.configuration(t)[2] == "*"


def test_trace_csv_masks_faulty():
    algo = realize(base_plan(1, 3))
    trace = run(algo, {2}, make_adversary("crash", seed=0), [1, 2, 3, 4], 3)
    out = io.StringIO()
    trace.to_csv(out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "round,node,output,state_rank,is_faulty"
    assert "0,2,*,*,1" in lines
    assert len(lines) == 1 + 3 * 4


def test_crash_adversary_constant():
    algo = realize(base_plan(1, 3))
    adv = make_adversary("crash", seed=1)
    adv.prepare(algo, frozenset({0}))
    states = [9, 9, 9, 9]
    msgs = {adv.message(t, states, v, 0) for t in range(5) for v in range(4)}
    assert msgs == {0}


def test_split_adversary_two_camps():
    algo = realize(base_plan(1, 3))
    adv = make_adversary("split", seed=1)
    adv.prepare(algo, frozenset({3}))
    states = [algo.pack(10, 1, 1)] * 4
    msgs = [adv.message(0, states, v, 3) for v in range(4)]
    assert len(set(msgs)) == 2
    assert msgs[0] == msgs[1] and msgs[2] == msgs[3]


def test_mimic_adversary_shifts_output_register():
    algo = realize(base_plan(1, 3))
    adv = make_adversary("mimic", seed=1, offset=1)
    adv.prepare(algo, frozenset({3}))
    states = [algo.pack(10, 1, 1)] * 4
    msg = adv.message(0, states, 2, 3)
    assert algo.unpack(msg).a == 2
    assert algo.unpack(msg).inner == 10


def test_unknown_adversary_kind():
    with pytest.raises(ConfigurationError):
        make_adversary("gremlin")


def test_detect_trivial_from_round_zero():
    trace = run(trivial_counter(3), frozenset(), None, [0], horizon=12)
    report = detect_stabilization(trace)
    assert report.stabilized and report.t_stab == 0


def test_detect_agreeing_but_frozen_is_not_counting():
    outputs = [[1, 1, 1]] * 30
    report = detect_from_outputs(outputs, c=3)
    assert not report.stabilized


def test_detect_agreement_from_round_five():
    # three correct nodes chaotic for five rounds, then counting mod 3
    rows = [[2, 0, 0], [2, 2, 0], [0, 0, 2], [2, 1, 0], [0, 0, 2]]
    rows += [[(r % 3)] * 3 for r in range(12)]
    report = detect_from_outputs(rows, c=3, min_window=6)
    assert report.stabilized and report.t_stab == 5


def test_detect_requires_window():
    rows = [[0, 1]] * 20 + [[(r % 3)] * 2 for r in range(3)]
    report = detect_from_outputs(rows, c=3, min_window=6)
    assert not report.stabilized


def test_detect_bound_flag():
    rows = [[(r % 5)] * 2 for r in range(30)]
    assert detect_from_outputs(rows, c=5, bound=0).within_bound
    late = [[1, 2]] + [[(r % 5)] * 2 for r in range(29)]
    report = detect_from_outputs(late, c=5, bound=0)
    assert report.stabilized and not report.within_bound


def test_enumerate_exhaustive_small():
    states = list(enumerate_initial_states(trivial_counter(3)))
    assert states == [(0,), (1,), (2,)]


def test_enumerate_exhaustive_cap():
    algo = realize(base_plan(1, 3))
    with pytest.raises(ConfigurationError):
        list(enumerate_initial_states(algo, "exhaustive"))


def test_enumerate_random_reproducible():
    algo = realize(base_plan(1, 3))
    a = list(enumerate_initial_states(algo, "random", count=5, seed=9))
    b = list(enumerate_initial_states(algo, "random", count=5, seed=9))
    c = list(enumerate_initial_states(algo, "random", count=5, seed=10))
    assert a == b != c
    assert all(0 <= s < algo.state_size for joint in a for s in joint)


def test_king_attack_cannot_block_stabilization():
    # the attacked king rounds can only stall while the faulty node is the
    # indexed king; two correct kings remain in every full rotation
    algo = realize(base_plan(1, 3))
    adv = make_adversary("king_attack", seed=5)
    trace = run(algo, {0}, adv, [100, 200, 300, 400], algo.t_bound + 20, seed=5)
    report = detect_stabilization(trace, bound=algo.t_bound, min_window=10)
    assert report.stabilized and report.within_bound
