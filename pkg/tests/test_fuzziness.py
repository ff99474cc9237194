import numpy as np
import pytest

from flg.fuzziness import (
    FuzzinessRecord,
    build_table,
    categorize,
    matrix_fuzziness,
    sample_fuzziness,
    select_candidates,
)


def rec(fuzz, pool_index, actual=1, predicted=1):
    return FuzzinessRecord(fuzziness=fuzz, coord=(0, pool_index),
                           actual=actual, predicted=predicted, pool_index=pool_index)


class TestSampleFuzziness:
    def test_crisp_row_is_zero(self):
        assert sample_fuzziness([1.0, 0.0]) == 0.0

    def test_binary_uniform_is_one(self):
        assert sample_fuzziness([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)

    def test_three_class_uniform(self):
        # -(1/3) * 3 * [ (1/3)log2(1/3) + (2/3)log2(2/3) ] = 0.91830
        assert sample_fuzziness([1 / 3] * 3) == pytest.approx(0.9183, abs=1e-4)

    def test_entry_outside_unit_interval(self):
        with pytest.raises(ValueError):
            sample_fuzziness([1.2, -0.2])

    def test_zero_iff_one_hot(self):
        assert sample_fuzziness([0.0, 1.0, 0.0]) == 0.0
        assert sample_fuzziness([0.9, 0.1, 0.0]) > 0.0

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            row = rng.dirichlet(np.ones(4))
            assert sample_fuzziness(row) == pytest.approx(
                sample_fuzziness(row[::-1]), abs=1e-12
            )

    def test_maximum_at_uniform_grid_search(self):
        # Sweep the simplex for C=2 and C=3; nothing beats the uniform row.
        best2 = sample_fuzziness([0.5, 0.5])
        for p in np.linspace(0, 1, 201):
            assert sample_fuzziness([p, 1 - p]) <= best2 + 1e-12
        best3 = sample_fuzziness([1 / 3] * 3)
        grid = np.linspace(0, 1, 41)
        for p in grid:
            for q in grid:
                if p + q <= 1:
                    r = max(0.0, 1.0 - p - q)
                    assert sample_fuzziness([p, q, r]) <= best3 + 1e-12

    def test_matrix_matches_scalar(self):
        rng = np.random.default_rng(1)
        m = rng.dirichlet(np.ones(5), size=30)
        vec = matrix_fuzziness(m)
        for i in range(30):
            assert vec[i] == pytest.approx(sample_fuzziness(m[i]), abs=1e-12)


class TestBuildTable:
    def test_one_hot_records(self):
        m = np.eye(3)
        records = build_table(m, actual=[1, 2, 3], coords=[(0, 0), (0, 1), (0, 2)])
        assert len(records) == 3
        for r in records:
            assert r.fuzziness == 0.0
            assert r.predicted == r.actual

    def test_uniform_rows(self):
        m = np.full((2, 4), 0.25)
        records = build_table(m, actual=[1, 2], coords=[(0, 0), (1, 1)])
        for r in records:
            assert r.fuzziness == pytest.approx(sample_fuzziness([0.25] * 4), abs=1e-12)

    def test_random_matrix_recomputation(self):
        rng = np.random.default_rng(2)
        m = rng.dirichlet(np.ones(3), size=25)
        coords = [(i // 5, i % 5) for i in range(25)]
        actual = rng.integers(1, 4, size=25)
        records = build_table(m, actual, coords)
        for i, r in enumerate(records):
            assert r.pool_index == i
            assert r.fuzziness == pytest.approx(sample_fuzziness(m[i]), abs=1e-12)
            assert r.predicted == int(np.argmax(m[i])) + 1
            assert r.actual == int(actual[i])
            assert r.coord == coords[i]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            build_table(np.eye(2), actual=[1], coords=[(0, 0), (0, 1)])


class TestCategorize:
    def test_hand_medians(self):
        records = [rec(0.1, 0), rec(0.4, 1), rec(0.9, 2)]
        groups = categorize(records)
        assert [r.fuzziness for r in groups.low] == [0.4, 0.1]
        assert [r.fuzziness for r in groups.high] == [0.9]
        assert groups.q1 == pytest.approx(0.25)
        assert groups.q2 == pytest.approx(0.9)

    def test_all_zero_fuzziness(self):
        groups = categorize([rec(0.0, i) for i in range(4)])
        assert groups.high == []
        assert groups.q2 is None
        assert groups.q1 == 0.0

    def test_odd_median_middle_element(self):
        groups = categorize([rec(0.6, 0), rec(0.7, 1), rec(0.8, 2)])
        assert groups.q2 == pytest.approx(0.7)

    def test_exact_half_goes_low(self):
        groups = categorize([rec(0.5, 0), rec(0.6, 1)])
        assert [r.pool_index for r in groups.low] == [0]
        assert [r.pool_index for r in groups.high] == [1]

    def test_partition_and_sort_order(self):
        rng = np.random.default_rng(3)
        records = [rec(float(f), i) for i, f in enumerate(rng.random(40))]
        groups = categorize(records)
        assert len(groups.low) + len(groups.high) == 40
        for group in (groups.low, groups.high):
            keys = [(-r.fuzziness, r.pool_index) for r in group]
            assert keys == sorted(keys)

    def test_tie_break_by_pool_index(self):
        records = [rec(0.3, 5), rec(0.3, 2), rec(0.3, 9)]
        groups = categorize(records)
        assert [r.pool_index for r in groups.low] == [2, 5, 9]


class TestSelectCandidates:
    def test_ordering_and_caps(self):
        records = [
            rec(0.9, 0, actual=1, predicted=2),
            rec(0.8, 1, actual=1, predicted=2),
            rec(0.7, 2, actual=1, predicted=2),
            rec(0.6, 3, actual=1, predicted=1),
            rec(0.4, 4, actual=2, predicted=1),
            rec(0.3, 5, actual=2, predicted=2),
            rec(0.2, 6, actual=2, predicted=1),
        ]
        groups = categorize(records)
        picked = select_candidates(groups, 2)
        assert [r.pool_index for r in picked] == [0, 1, 4, 6]

    def test_all_correct_gives_empty(self):
        groups = categorize([rec(0.4, i, actual=1, predicted=1) for i in range(5)])
        assert select_candidates(groups, 3) == []

    def test_every_candidate_misclassified(self):
        rng = np.random.default_rng(4)
        records = [
            rec(float(rng.random()), i,
                actual=int(rng.integers(1, 4)), predicted=int(rng.integers(1, 4)))
            for i in range(200)
        ]
        picked = select_candidates(categorize(records), 10)
        assert len(picked) <= 20
        assert all(r.predicted != r.actual for r in picked)

    def test_high_only_switch(self):
        records = [
            rec(0.9, 0, actual=1, predicted=2),
            rec(0.2, 1, actual=1, predicted=2),
        ]
        picked = select_candidates(categorize(records), 5, high_only=True)
        assert [r.pool_index for r in picked] == [0]
