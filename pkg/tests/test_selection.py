import numpy as np
import numpy.testing as npt
import pytest

from misslogit.errors import SelectionLookupError
from misslogit.models.record import Level, StratumKey
from misslogit.selection.diagnostics import mar_check
from misslogit.selection.table import estimate_selection_probs, lookup


def key(y, z, w):
    return StratumKey(y, (Level.of(z), Level.of(w)))


def brute_force_probs(dataset):
    """pi_j(Y_i, V_i) by counting every record's stratum mates."""
    out = np.zeros((dataset.n, 4))
    for i in range(dataset.n):
        mates = [
            j for j in range(dataset.n)
            if dataset.y[j] == dataset.y[i]
            and tuple(dataset.z[j]) == tuple(dataset.z[i])
            and tuple(dataset.w[j]) == tuple(dataset.w[i])
        ]
        for k in range(4):
            out[i, k] = sum(dataset.delta[j] == k + 1 for j in mates) / len(mates)
    return out


class TestSelectionTable:

    def test_hand_counts(self, small_dataset):
        table = estimate_selection_probs(small_dataset)

        assert len(table) == 5
        assert table.stratum_counts(key(1, 0, 0)) == (3, 1, 1, 1, 6)
        assert table[key(1, 0, 0)] == (0.5, 1 / 6, 1 / 6, 1 / 6)
        assert table[key(0, 1, 1)] == (0.4, 0.2, 0.2, 0.2)
        assert table[key(0, 0, 1)] == (1.0, 0.0, 0.0, 0.0)

    def test_rows_sum_to_one(self, small_dataset):
        probs = estimate_selection_probs(small_dataset).probs
        npt.assert_allclose(probs.sum(axis=1), 1.0)

    def test_unseen_stratum(self, small_dataset):
        table = estimate_selection_probs(small_dataset)
        missing = key(1, 5, 5)

        assert missing not in table
        with pytest.raises(SelectionLookupError):
            lookup(table, missing)
        with pytest.raises(KeyError):
            table[missing]

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_brute_force(self, random_dataset, seed):
        rng = np.random.default_rng(seed)
        dataset = random_dataset(rng, int(rng.integers(12, 51)))

        table = estimate_selection_probs(dataset)
        npt.assert_array_equal(table.record_probs(dataset), brute_force_probs(dataset))

    def test_frame_dump(self, small_dataset, tmp_path):
        table = estimate_selection_probs(small_dataset)
        frame = table.to_frame(["z", "w"])

        assert list(frame.columns[:3]) == ["y", "z", "w"]
        assert frame["n_total"].sum() == small_dataset.n

        path = tmp_path / "selection.csv"
        table.write_csv(path, ["z", "w"])
        assert path.read_text().startswith("y,z,w,n1")


class TestMarCheck:

    def test_constant_indicator(self, random_dataset):
        dataset = random_dataset(np.random.default_rng(0), 60, complete=True)
        check = mar_check(dataset)

        assert check.llr_pvalue is None
        assert check.complete_fraction == 1.0
        assert "constant" in check.note

    def test_detects_outcome_dependent_selection(self, make_dataset):
        rng = np.random.default_rng(42)
        rows = []
        for _ in range(600):
            y = int(rng.random() < 0.5)
            z = int(rng.integers(0, 2))
            w = int(rng.integers(0, 2))
            observed = rng.random() < (0.9 if y == 0 else 0.3)
            rows.append((y, 1 if observed else None, 0, z, w))

        check = mar_check(make_dataset(rows))

        assert {"const", "y", "z", "w"} <= set(check.coefficients.index)
        assert check.coefficients.loc["y", "est"] < 0
        assert check.llr_pvalue < 1e-6
