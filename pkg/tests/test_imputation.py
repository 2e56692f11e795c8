import logging

import numpy as np
import numpy.testing as npt
import pandas as pd
import pytest

from misslogit.errors import EmptyPoolError, ImputationError
from misslogit.imputation.pools import DonorPool, PoolLevel, build_donor_index, fallback_report, resolve_pool
from misslogit.imputation.sampler import impute, sample_block
from misslogit.models.record import Level


# ------------------------------------------------------------
# Brute-force pool oracle
# ------------------------------------------------------------

def same_stratum(dataset, i, j):
    return (
        dataset.y[i] == dataset.y[j]
        and tuple(dataset.z[i]) == tuple(dataset.z[j])
        and tuple(dataset.w[i]) == tuple(dataset.w[j])
    )


def oracle_donors(dataset, i, method, block):
    """(level, donors) by scanning every record."""
    delta = dataset.delta
    n = dataset.n
    complete = [j for j in range(n) if delta[j] == 1]

    if method == "MI1" and block in ("x1", "x2"):
        other = dataset.x2 if block == "x1" else dataset.x1
        chain = [
            (PoolLevel.PRIMARY, [j for j in complete if same_stratum(dataset, i, j) and tuple(other[j]) == tuple(other[i])]),
            (PoolLevel.STRATUM, [j for j in complete if same_stratum(dataset, i, j)]),
            (PoolLevel.OUTCOME, [j for j in complete if dataset.y[j] == dataset.y[i]]),
        ]
    elif block == "joint":
        chain = [
            (PoolLevel.PRIMARY, [j for j in complete if same_stratum(dataset, i, j)]),
            (PoolLevel.OUTCOME, [j for j in complete if dataset.y[j] == dataset.y[i]]),
        ]
    else:
        has = (1, 3) if block == "x1" else (1, 2)
        eligible = [j for j in range(n) if delta[j] in has]
        chain = [
            (PoolLevel.PRIMARY, [j for j in eligible if same_stratum(dataset, i, j)]),
            (PoolLevel.OUTCOME, [j for j in eligible if dataset.y[j] == dataset.y[i]]),
        ]

    for level, donors in chain:
        if donors:
            return level, donors
    return None, []


NEEDS = {2: "x1", 3: "x2", 4: "joint"}


class TestDonorPool:

    def test_inverse_cdf_pick(self):
        pool = DonorPool.uniform(np.array([9, 2, 7, 5]), "x1", "test")

        npt.assert_array_equal(pool.donors, [2, 5, 7, 9])
        npt.assert_array_equal(pool.pick(np.array([0.1, 0.25, 0.26, 0.75, 1.0])), [2, 2, 5, 7, 9])

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            DonorPool(np.array([0, 1]), np.array([0.5, 0.4]), "x1", "test")

    def test_empty_pool_raises_on_pick(self):
        with pytest.raises(EmptyPoolError):
            DonorPool.empty("x1", "nothing").pick(np.array([0.5]))

    def test_sample_block_returns_levels(self, small_dataset):
        index = build_donor_index(small_dataset)
        rng = np.random.default_rng(0)

        x1 = sample_block(resolve_pool(index, 3, "MI1", "x1").pool, rng, small_dataset)
        assert x1 in {(Level("0"),), (Level("1"),)}

        x1, x2 = sample_block(resolve_pool(index, 5, "MI1", "joint").pool, rng, small_dataset)
        assert (x1, x2) in {
            ((Level("0"),), (Level("1"),)),
            ((Level("1"),), (Level("1"),)),
            ((Level("1"),), (Level("-1"),)),
        }

    def test_two_donor_frequencies(self, small_dataset):
        # Records 0 and 1 carry x1 = 0 and x1 = 1
        pool = DonorPool.uniform(np.array([0, 1]), "x1", "test")
        rng = np.random.default_rng(2718)
        draws = 10_000

        zeros = sum(sample_block(pool, rng, small_dataset) == (Level("0"),) for _ in range(draws))

        assert abs(zeros - draws / 2) <= 3 * np.sqrt(draws * 0.25)


class TestPools:

    def test_mi1_conditional_pool(self, small_dataset):
        index = build_donor_index(small_dataset)

        # Record 3: y=1, x2=1 in stratum (1, 0, 0); complete donors with x2=1 are 0 and 1
        resolution = resolve_pool(index, 3, "MI1", "x1")
        assert resolution.level is PoolLevel.PRIMARY
        npt.assert_array_equal(resolution.pool.donors, [0, 1])
        npt.assert_allclose(resolution.pool.weights, [0.5, 0.5])

    def test_mi2_pool_uses_partially_observed_donors(self, small_dataset):
        index = build_donor_index(small_dataset)

        # X1 observed in stratum (1, 0, 0): complete 0, 1, 2 and pattern-3 record 4
        resolution = resolve_pool(index, 3, "MI2", "x1")
        npt.assert_array_equal(resolution.pool.donors, [0, 1, 2, 4])

    def test_stratum_fallback(self, small_dataset):
        index = build_donor_index(small_dataset)

        # Record 4 has x1=2; no complete case in its stratum shares it
        resolution = resolve_pool(index, 4, "MI1", "x2")
        assert resolution.level is PoolLevel.STRATUM
        npt.assert_array_equal(resolution.pool.donors, [0, 1, 2])

    def test_outcome_fallback_and_report(self, make_dataset):
        dataset = make_dataset([
            (1, 0, 1, 0, 0),
            (1, 1, -1, 0, 0),
            (0, 0, 1, 1, 1),
            (1, None, None, 1, 0),
            (0, None, 1, 0, 1),
        ])
        index = build_donor_index(dataset)

        joint = resolve_pool(index, 3, "MI1", "joint")
        assert joint.level is PoolLevel.OUTCOME
        npt.assert_array_equal(joint.pool.donors, [0, 1])

        events = fallback_report(index)
        assert {(e.record, e.method, e.block, e.level) for e in events} == {
            (3, "MI1", "joint", PoolLevel.OUTCOME),
            (3, "MI2", "joint", PoolLevel.OUTCOME),
            (4, "MI1", "x1", PoolLevel.OUTCOME),
            (4, "MI2", "x1", PoolLevel.OUTCOME),
        }

    def test_empty_chain_raises(self, make_dataset):
        dataset = make_dataset([
            (0, 0, 1, 0, 0),
            (0, 1, 1, 0, 0),
            (1, None, None, 0, 0),
        ])
        index = build_donor_index(dataset)
        with pytest.raises(EmptyPoolError) as info:
            resolve_pool(index, 2, "MI1", "joint")
        assert info.value.record == 2

    def test_exhausted_chain_is_reported(self, make_dataset, caplog):
        dataset = make_dataset([
            (1, 0, 1, 0, 0),
            (1, 1, -1, 0, 0),
            (1, 1, 1, 1, 0),
            (1, 0, -1, 1, 1),
            (0, None, 1, 0, 0),
            (1, None, 1, 0, 0),
        ])
        index = build_donor_index(dataset)

        with caplog.at_level(logging.WARNING, logger="misslogit.imputation.pools"):
            events = fallback_report(index)

        assert {(e.record, e.method, e.block, e.level) for e in events} == {
            (4, "MI1", "x1", PoolLevel.EXHAUSTED),
            (4, "MI2", "x1", PoolLevel.EXHAUSTED),
        }
        assert all(e.to_dict()["level"] == "exhausted" for e in events)
        assert "exhausted=2" in caplog.text

    def test_report_logs_a_warning(self, small_dataset, caplog):
        with caplog.at_level(logging.WARNING, logger="misslogit.imputation.pools"):
            events = fallback_report(build_donor_index(small_dataset))

        assert events
        assert f"events={len(events)}" in caplog.text

    def test_complete_data_has_no_fallbacks(self, random_dataset):
        dataset = random_dataset(np.random.default_rng(4), 40, complete=True)
        assert fallback_report(build_donor_index(dataset)) == []

    @pytest.mark.parametrize("seed", range(40))
    def test_pools_match_brute_force(self, random_dataset, seed):
        rng = np.random.default_rng(100 + seed)
        dataset = random_dataset(rng, int(rng.integers(10, 51)))
        index = build_donor_index(dataset)

        for i in range(dataset.n):
            delta = int(dataset.delta[i])
            blocks = [NEEDS[delta]] if delta != 1 else []
            if delta == 2:
                blocks.append("joint")
            for method in ("MI1", "MI2"):
                for block in blocks:
                    level, donors = oracle_donors(dataset, i, method, block)
                    if level is None:
                        with pytest.raises(EmptyPoolError):
                            resolve_pool(index, i, method, block)
                        continue
                    resolution = resolve_pool(index, i, method, block)
                    assert resolution.level is level
                    npt.assert_array_equal(resolution.pool.donors, donors)


class TestImpute:

    def test_requires_two_imputations(self, small_dataset):
        index = build_donor_index(small_dataset)
        with pytest.raises(ImputationError):
            impute(small_dataset, index, "MI1", 1, seed=0)

    def test_unknown_method(self, small_dataset):
        index = build_donor_index(small_dataset)
        with pytest.raises(ImputationError):
            impute(small_dataset, index, "MI3", 5, seed=0)

    def test_complete_records_untouched(self, small_dataset):
        completed = impute(small_dataset, build_donor_index(small_dataset), "MI1", 6, seed=1)
        complete = small_dataset.complete_mask

        assert completed.designs.shape == (6, 14, 4)
        for v in range(6):
            npt.assert_array_equal(completed.designs[v, complete], small_dataset.design[complete])
        assert np.all(completed.donors[complete] == -1)
        assert np.all(np.isfinite(completed.designs))

    def test_donors_come_from_resolved_pool(self, random_dataset):
        dataset = random_dataset(np.random.default_rng(9), 80)
        index = build_donor_index(dataset)

        for method in ("MI1", "MI2"):
            completed = impute(dataset, index, method, 7, seed=3)
            for i in np.flatnonzero(dataset.delta != 1):
                block = NEEDS[int(dataset.delta[i])]
                pool = resolve_pool(index, int(i), method, block).pool
                assert set(completed.donors[i]) <= set(pool.donors.tolist())

                x1s, x2s = dataset.x1_slice, dataset.x2_slice
                for v in range(7):
                    donor = completed.donors[i, v]
                    if block in ("x1", "joint"):
                        npt.assert_array_equal(completed.designs[v, i, x1s], dataset.design[donor, x1s])
                    if block in ("x2", "joint"):
                        npt.assert_array_equal(completed.designs[v, i, x2s], dataset.design[donor, x2s])

    def test_seed_determinism(self, random_dataset):
        dataset = random_dataset(np.random.default_rng(12), 60)
        index = build_donor_index(dataset)

        first = impute(dataset, index, "MI2", 5, seed=77)
        second = impute(dataset, index, "MI2", 5, seed=77)
        other = impute(dataset, index, "MI2", 5, seed=78)

        npt.assert_array_equal(first.donors, second.donors)
        assert not np.array_equal(first.donors, other.donors)

    def test_joint_imputations_shared_between_methods(self, random_dataset):
        dataset = random_dataset(np.random.default_rng(13), 80)
        index = build_donor_index(dataset)

        mi1 = impute(dataset, index, "MI1", 5, seed=21)
        mi2 = impute(dataset, index, "MI2", 5, seed=21)

        both_missing = dataset.delta == 4
        npt.assert_array_equal(mi1.donors[both_missing], mi2.donors[both_missing])

    def test_completed_dataset_view(self, small_dataset):
        completed = impute(small_dataset, build_donor_index(small_dataset), "MI1", 3, seed=5)
        view = completed.completed_dataset(small_dataset, 2)

        assert view.pattern_counts() == {1: 14, 2: 0, 3: 0, 4: 0}
        npt.assert_array_equal(view.design, completed.designs[2])

    def test_write_completed_dataset(self, small_dataset, tmp_path):
        completed = impute(small_dataset, build_donor_index(small_dataset), "MI2", 3, seed=5)
        path = tmp_path / "imputation1.csv"
        completed.write_csv(small_dataset, 1, path)

        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        view = completed.completed_dataset(small_dataset, 1)

        assert len(frame) == small_dataset.n
        assert not (frame == "NA").any().any()
        npt.assert_array_equal(frame["x1"].to_numpy(), view.x1[:, 0])
        npt.assert_array_equal(frame["x2"].to_numpy(), view.x2[:, 0])
