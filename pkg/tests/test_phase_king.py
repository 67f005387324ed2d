import itertools

import pytest

from synccount import (INF, DomainError, PhaseKingRegisters, TallyVector,
                       exec_I0, exec_I1, exec_I2, exec_instruction, inc,
                       instruction_index)


def regs(a, d=1):
    return PhaseKingRegisters(a=a, d=d)


def tally(values):
    return TallyVector.from_values(values)


def test_inc_reset_state_absorbs():
    assert inc(INF, 3) == INF


def test_inc_wraps():
    assert inc(2, 3) == 0


def test_inc_transient_value():
    # min(C, INF) adoption can leave the transient value C; literal
    # arithmetic sends it to 1
    assert inc(3, 3) == 1


def test_instruction_index():
    assert instruction_index(0, 9) == (0, 0)
    assert instruction_index(7, 9) == (2, 1)
    assert instruction_index(8, 9) == (2, 2)  # last triple: king F+1, offset 2
    with pytest.raises(DomainError):
        instruction_index(9, 9)
    with pytest.raises(DomainError):
        instruction_index(-1, 9)


def test_exec_I0_keeps_well_supported_value():
    out = exec_I0(regs(5), tally([5, 5, 5, 5]), 4, 1, 9)
    assert out.a == 6


def test_exec_I0_resets_weak_value():
    out = exec_I0(regs(5), tally([5, 5, 0, 1]), 4, 1, 9)
    assert out.a == INF


def test_exec_I0_reset_state_stays():
    out = exec_I0(regs(INF), tally([0, 1, 2, 0]), 4, 1, 9)
    assert out.a == INF


def test_exec_I1_confident_path():
    out = exec_I1(regs(5), tally([5, 5, 5, INF]), 4, 1, 9)
    assert (out.a, out.d) == (6, 1)


def test_exec_I1_no_supported_value():
    # INF has support but the minimum ranges over numeric values only
    out = exec_I1(regs(1), tally([1, 2, INF, INF]), 4, 1, 9)
    assert (out.a, out.d) == (INF, 0)


def test_exec_I1_adopts_smallest_supported():
    out = exec_I1(regs(7), tally([0, 0, 7, 7]), 4, 1, 9)
    assert (out.a, out.d) == (1, 0)


def test_exec_I2_adopts_king_when_reset():
    out = exec_I2(regs(INF, d=1), 4, 9)
    assert (out.a, out.d) == (5, 1)


def test_exec_I2_confident_node_ignores_king():
    out = exec_I2(regs(2, d=1), 7, 9)
    assert (out.a, out.d) == (3, 1)


def test_exec_I2_king_reset_value_gives_transient():
    out = exec_I2(regs(INF, d=1), INF, 9)
    assert (out.a, out.d) == (1, 1)  # adopts C = 9, increments to 1


def test_no_two_distinct_values_after_reset_round():
    # after the offset-0 instruction with fewer than a third faulty, no two
    # correct nodes can hold distinct numeric values: keeping needs N - F
    # matching messages and there are too few correct nodes to back two
    n_nodes, f_max, c_out = 4, 1, 3
    domain = [0, 1, 2, INF]
    for own in itertools.product(domain, repeat=3):
        for adv in itertools.product(domain, repeat=3):
            kept = []
            for v in range(3):
                received = list(own) + [adv[v]]
                out = exec_I0(regs(own[v]), tally(received), n_nodes, f_max, c_out)
                kept.append(out.a)
            numeric = [a for a in kept if a != INF]
            assert len(set(numeric)) <= 1, (own, adv, kept)


def test_agreement_persists_one_round_spot():
    # all correct nodes agreed with full confidence: any instruction set,
    # any adversary value -> everyone moves to (x + 1) mod C together
    n_nodes, f_max, c_out = 4, 1, 3
    for x in range(c_out):
        for r in range(9):
            for adv in itertools.product([0, 1, 2, INF], repeat=3):
                king, offset = instruction_index(r, 9)
                after = []
                for v in range(3):
                    received = [x, x, x, adv[v]]
                    king_value = x if king < 3 else adv[v]
                    out = exec_instruction(regs(x, d=1), offset, tally(received),
                                           king_value, n_nodes, f_max, c_out)
                    after.append(out)
                assert all(o.a == (x + 1) % c_out and o.d == 1 for o in after)


def test_tally_counts_include_reset_values():
    t = tally([1, 1, INF, INF])
    assert t.count(1) == 2
    assert t.count(INF) == 2
    assert t.count(0) == 0
    assert t.total == 4


def test_vector_kernel_matches_scalar_instructions():
    # the batched kernel (both the per-lane and the uniform-offset paths)
    # agrees with the scalar instruction functions on random inputs
    import numpy as np
    from synccount._vector import phase_king_round

    gen = np.random.default_rng(7)
    c_out, n_nodes, f_max = 5, 7, 2
    inf_code = c_out + 1
    for _ in range(300):
        own_a = int(gen.integers(0, c_out + 1))
        own_a = inf_code if own_a == c_out else own_a
        own_d = int(gen.integers(0, 2))
        msg = gen.integers(0, c_out + 2, size=n_nodes)
        msg = np.where(msg == c_out, inf_code, msg)  # skip the transient value
        king = int(msg[int(gen.integers(0, n_nodes))])
        offset = int(gen.integers(0, 3))

        scalar_regs = regs(INF if own_a == inf_code else own_a, d=own_d)
        values = [INF if int(v) == inf_code else int(v) for v in msg]
        king_scalar = INF if king == inf_code else king
        expect = exec_instruction(scalar_regs, offset, tally(values),
                                  king_scalar, n_nodes, f_max, c_out)
        expect_a = inf_code if expect.a == INF else expect.a

        for off_arg in (offset, np.array([offset])):
            a, d = phase_king_round(np.array([own_a]), np.array([own_d]),
                                    msg[None, :], off_arg, np.array([king]),
                                    c_out, n_nodes - f_max, f_max + 1)
            assert int(a[0]) == expect_a and int(d[0]) == expect.d
