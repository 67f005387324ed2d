import numpy as np

from synccount import rng


def test_fold_deterministic():
    assert rng.fold(1, 2, 3) == rng.fold(1, 2, 3)
    assert rng.fold(1, 2, 3) != rng.fold(1, 2, 4)
    assert rng.fold(1, 2, 3) != rng.fold(2, 2, 3)


def test_fold_accepts_numpy_ints():
    assert rng.fold(np.int64(5), np.int64(7)) == rng.fold(5, 7)


def test_vec_fold_matches_scalar():
    seeds = [0, 1, 17, 2**40 + 3]
    parts = np.arange(50, dtype=np.int64)
    for seed in seeds:
        vec = rng.vec_fold(seed, 0xAB, parts)
        for i in range(50):
            assert int(vec[i]) == rng.fold(seed, 0xAB, int(parts[i]))


def test_vec_draw_below_matches_scalar():
    draws = rng.vec_draw_below(12, 9, 5, np.arange(100, dtype=np.int64))
    for i in range(100):
        assert int(draws[i]) == rng.draw_below(12, 9, 5, i)
    assert draws.min() >= 0 and draws.max() < 12


def test_split_seed_independent_streams():
    seeds = {rng.split_seed(42, cell, trial)
             for cell in range(10) for trial in range(10)}
    assert len(seeds) == 100
