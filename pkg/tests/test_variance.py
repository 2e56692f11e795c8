import numpy as np
import numpy.testing as npt
import pytest

from misslogit.core.logit import inv_logit, inv_logit_deriv, score_rows
from misslogit.errors import VarianceError
from misslogit.estimators.point import fit_mi, mi_score
from misslogit.imputation.pools import build_donor_index
from misslogit.imputation.sampler import CompletedSets, impute
from misslogit.selection.table import estimate_selection_probs
from misslogit.variance.gradient import g_matrix
from misslogit.variance.influence import eta_hat, eta_values, phi_hat, psi_hat, sstar_mi1, sstar_mi2
from misslogit.variance.proposed import proposed_variance
from misslogit.variance.rubin import rubin_variance


# ------------------------------------------------------------
# Brute-force oracles
# ------------------------------------------------------------

def score(x, y, beta):
    return x * (y - 1 / (1 + np.exp(-(x @ beta))))


def stratum_mates(dataset, i, eligible):
    return [
        j for j in range(dataset.n)
        if eligible(j)
        and dataset.y[j] == dataset.y[i]
        and tuple(dataset.z[j]) == tuple(dataset.z[i])
        and tuple(dataset.w[j]) == tuple(dataset.w[i])
    ]


def conditional_donors(dataset, i, block):
    """Donors of the MI1 pool (with fallbacks) for S*_2 (x1), S*_3 (x2) or S*_4 (joint)."""
    complete = lambda j: dataset.delta[j] == 1
    chain = []
    if block != "joint":
        other = dataset.x2 if block == "x1" else dataset.x1
        chain.append(stratum_mates(dataset, i, lambda j: complete(j) and tuple(other[j]) == tuple(other[i])))
    chain.append(stratum_mates(dataset, i, complete))
    chain.append([j for j in range(dataset.n) if complete(j) and dataset.y[j] == dataset.y[i]])
    return next(donors for donors in chain if donors)


def oracle_sstar(dataset, beta):
    design = dataset.design
    d = dataset.n_coef
    out = np.zeros((dataset.n, 3, d))
    needs = {"x1": (1, 2), "x2": (1, 3), "joint": (1, 2, 3, 4)}

    for i in range(dataset.n):
        for k, block in enumerate(("x1", "x2", "joint")):
            if dataset.delta[i] not in needs[block]:
                continue
            donors = conditional_donors(dataset, i, block)
            total = np.zeros(d)
            for j in donors:
                x = design[i].copy()
                if block in ("x1", "joint"):
                    x[dataset.x1_slice] = design[j, dataset.x1_slice]
                if block in ("x2", "joint"):
                    x[dataset.x2_slice] = design[j, dataset.x2_slice]
                total += score(x, dataset.y[i], beta)
            out[i, k] = total / len(donors)
    return out


def oracle_probs(dataset):
    probs = np.zeros((dataset.n, 4))
    for i in range(dataset.n):
        mates = stratum_mates(dataset, i, lambda j: True)
        for k in range(4):
            probs[i, k] = sum(dataset.delta[j] == k + 1 for j in mates) / len(mates)
    return probs


def oracle_eta(delta, pi):
    d1, d2, d3 = delta == 1, delta == 2, delta == 3
    eta = 0.0
    if d1 or d3:
        eta += pi[1] / (pi[0] + pi[2])
    if d1 or d2:
        eta += pi[2] / (pi[0] + pi[1])
    if d1:
        eta += pi[3] / pi[0]
    return eta


def has_both_outcomes_complete(dataset):
    return set(dataset.y[dataset.complete_mask].tolist()) == {0, 1}


def random_beta(rng, d):
    return rng.normal(scale=0.7, size=d)


# ------------------------------------------------------------
# Tests
# ------------------------------------------------------------

class TestGradient:

    @pytest.mark.parametrize("seed", range(20))
    def test_g_matrix_matches_finite_differences(self, random_dataset, seed):
        rng = np.random.default_rng(seed)
        dataset = random_dataset(rng, 150)
        completed = impute(dataset, build_donor_index(dataset), "MI1" if seed % 2 else "MI2", 4, seed=seed)
        beta = random_beta(rng, dataset.n_coef)

        h = 1e-5
        numeric = np.zeros((dataset.n_coef, dataset.n_coef))
        for k in range(dataset.n_coef):
            step = np.zeros(dataset.n_coef)
            step[k] = h
            numeric[:, k] = -(mi_score(completed, beta + step) - mi_score(completed, beta - step)) / (2 * h * dataset.n)

        npt.assert_allclose(g_matrix(completed, beta), numeric, atol=1e-5)

    def test_g_matrix_loops(self, random_dataset):
        rng = np.random.default_rng(77)
        dataset = random_dataset(rng, 40)
        completed = impute(dataset, build_donor_index(dataset), "MI1", 3, seed=1)
        beta = random_beta(rng, dataset.n_coef)

        expected = np.zeros((dataset.n_coef, dataset.n_coef))
        for v in range(3):
            for i in range(dataset.n):
                x = completed.designs[v, i]
                expected += inv_logit_deriv(x @ beta) * np.outer(x, x)
        expected /= 3 * dataset.n

        npt.assert_allclose(g_matrix(completed, beta), expected, atol=1e-12)


class TestRubin:

    def test_matches_loop_formula(self, random_dataset):
        rng = np.random.default_rng(5)
        dataset = random_dataset(rng, 60)
        M = 4
        completed = impute(dataset, build_donor_index(dataset), "MI2", M, seed=2)
        beta = random_beta(rng, dataset.n_coef)
        n, d = dataset.n, dataset.n_coef

        within = np.zeros((d, d))
        between = np.zeros((d, d))
        for v in range(M):
            total = np.zeros(d)
            for i in range(n):
                u = score(completed.designs[v, i], dataset.y[i], beta)
                within += np.outer(u, u) / (M * n)
                total += u
            between += np.outer(total, total) / (n * (M - 1))

        g_inv = np.linalg.inv(g_matrix(completed, beta))
        expected = g_inv @ (within + (1 + 1 / M) * between) @ g_inv.T / n

        npt.assert_allclose(rubin_variance(completed, beta), expected, rtol=1e-9, atol=1e-14)

    def test_needs_two_imputations(self, small_dataset):
        design = small_dataset.design.copy()
        design[np.isnan(design)] = 0.0
        completed = CompletedSets(
            method="MI1",
            designs=design[None],
            y=small_dataset.y.astype(float),
            delta=small_dataset.delta,
            donors=np.full((small_dataset.n, 1), -1),
            levels=(),
        )
        with pytest.raises(VarianceError):
            rubin_variance(completed, np.zeros(4))

    def test_complete_data_has_no_between_term(self, random_dataset):
        dataset = random_dataset(np.random.default_rng(31), 120, complete=True)
        M = 3
        completed = impute(dataset, build_donor_index(dataset), "MI1", M, seed=4)
        beta = fit_mi(completed).beta_hat

        scores = score_rows(beta, dataset.design, dataset.y.astype(float))
        g_inv = np.linalg.inv(g_matrix(completed, beta))
        expected = g_inv @ (scores.T @ scores / dataset.n) @ g_inv.T / dataset.n

        npt.assert_allclose(rubin_variance(completed, beta), expected, rtol=0, atol=1e-12)

    def test_intercept_only_hand_values(self):
        # u_i = y_i - 1/2 at beta = 0: W = 1/4, U_v = 1/2, B = 1/6, G = 1/4
        y = np.array([1.0, 1.0, 0.0])
        completed = CompletedSets(
            method="MI2",
            designs=np.ones((2, 3, 1)),
            y=y,
            delta=np.ones(3, dtype=np.int8),
            donors=np.full((3, 2), -1),
            levels=(),
        )
        cov = rubin_variance(completed, np.zeros(1))
        assert cov.shape == (1, 1)
        assert cov[0, 0] == pytest.approx(8.0 / 3.0, rel=1e-12)


class TestEta:

    def test_hand_values(self, make_dataset):
        dataset = make_dataset([
            (1, 0, 1, 0, 0),
            (1, 1, 1, 0, 0),
            (1, None, 1, 0, 0),
            (0, 1, -1, 1, 1),
            (0, 0, 1, 1, 1),
            (0, None, None, 1, 1),
            (0, None, None, 1, 1),
            (0, 2, 1, 0, 0),
        ])
        table = estimate_selection_probs(dataset)

        npt.assert_allclose(eta_values(dataset, table), [0.5, 0.5, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0])
        assert eta_hat(dataset.record(0), table) == pytest.approx(0.5)
        assert eta_hat(dataset.record(3), table) == pytest.approx(1.0)
        assert eta_hat(dataset.record(7), table) == 0.0


class TestInfluence:

    @pytest.mark.parametrize("seed", range(30))
    def test_sstar_phi_psi_match_brute_force(self, random_dataset, seed):
        rng = np.random.default_rng(500 + seed)
        dataset = random_dataset(rng, int(rng.integers(20, 51)))
        if not has_both_outcomes_complete(dataset):
            pytest.skip("sample lacks complete cases of one outcome")

        beta = random_beta(rng, dataset.n_coef)
        index = build_donor_index(dataset)
        table = estimate_selection_probs(dataset)

        sstar = sstar_mi1(dataset, beta, index)
        expected_sstar = oracle_sstar(dataset, beta)
        npt.assert_allclose(sstar.values, expected_sstar, atol=1e-12)
        npt.assert_allclose(sstar_mi2(dataset, beta, index), expected_sstar[:, 2], atol=1e-12)

        probs = oracle_probs(dataset)
        eta = np.array([oracle_eta(dataset.delta[i], probs[i]) for i in range(dataset.n)])
        npt.assert_allclose(eta_values(dataset, table), eta, atol=1e-12)

        # phi: d1 S / pi1 + sum_k S*_k (d_k - d1 pi_k / pi1)
        design = dataset.design
        phi = np.zeros((dataset.n, dataset.n_coef))
        for i in range(dataset.n):
            delta = dataset.delta[i]
            d1 = float(delta == 1)
            if d1:
                phi[i] += score(design[i], dataset.y[i], beta) / probs[i, 0]
            for k in (2, 3, 4):
                coefficient = float(delta == k) - (d1 * probs[i, k - 1] / probs[i, 0] if d1 else 0.0)
                phi[i] += expected_sstar[i, k - 2] * coefficient
        npt.assert_allclose(phi_hat(dataset, beta, table, index=index).values, phi, atol=1e-12)

        # psi: d1 S + (1 - d1) S* + (S~ - S*) eta
        completed = impute(dataset, index, "MI2", 4, seed=seed)
        psi = np.zeros((dataset.n, dataset.n_coef))
        for i in range(dataset.n):
            s_star = expected_sstar[i, 2]
            if dataset.delta[i] == 1:
                s_tilde = score(design[i], dataset.y[i], beta)
                psi[i] = s_tilde
            else:
                s_tilde = np.mean([score(completed.designs[v, i], dataset.y[i], beta) for v in range(4)], axis=0)
                psi[i] = s_star
            psi[i] += (s_tilde - s_star) * eta[i]
        npt.assert_allclose(psi_hat(dataset, completed, beta, table, index=index).values, psi, atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_ipw_reduction_without_single_block_missingness(self, random_dataset, seed):
        rng = np.random.default_rng(900 + seed)
        dataset = random_dataset(rng, 120, pattern_probs=(0.6, 0.0, 0.0, 0.4))
        table = estimate_selection_probs(dataset)
        probs = table.record_probs(dataset)
        assert np.all(probs[:, 1:3] == 0.0)

        beta = random_beta(rng, dataset.n_coef)
        index = build_donor_index(dataset)
        completed = impute(dataset, index, "MI2", 5, seed=seed)

        residual = completed.y[None, :] - inv_logit(completed.designs @ beta)
        s_tilde = np.einsum("vn,vnd->nd", residual, completed.designs) / 5
        s_star = sstar_mi2(dataset, beta, index)
        complete = dataset.complete_mask
        ratio = np.zeros(dataset.n)
        ratio[complete] = 1.0 / probs[complete, 0]

        expected = ratio[:, None] * s_tilde + (1 - ratio)[:, None] * s_star
        npt.assert_allclose(psi_hat(dataset, completed, beta, table, index=index).values, expected, atol=1e-12)

    def test_complete_data_influence_is_score(self, random_dataset):
        rng = np.random.default_rng(31)
        dataset = random_dataset(rng, 80, complete=True)
        beta = random_beta(rng, dataset.n_coef)
        table = estimate_selection_probs(dataset)
        completed = impute(dataset, build_donor_index(dataset), "MI2", 3, seed=0)

        scores = np.array([score(dataset.design[i], dataset.y[i], beta) for i in range(dataset.n)])
        npt.assert_allclose(phi_hat(dataset, beta, table).values, scores, atol=1e-12)
        npt.assert_allclose(psi_hat(dataset, completed, beta, table).values, scores, atol=1e-12)


class TestProposed:

    @pytest.mark.parametrize("method", ["MI1", "MI2"])
    def test_symmetric_positive_semidefinite(self, random_dataset, method):
        rng = np.random.default_rng(17)
        dataset = random_dataset(rng, 300)
        index = build_donor_index(dataset)
        completed = impute(dataset, index, method, 5, seed=4)
        beta = random_beta(rng, dataset.n_coef)

        cov = proposed_variance(dataset, completed, beta, estimate_selection_probs(dataset), method, index=index)

        npt.assert_allclose(cov, cov.T)
        assert np.linalg.eigvalsh(cov).min() > -1e-12

    def test_unknown_method(self, small_dataset):
        completed = impute(small_dataset, build_donor_index(small_dataset), "MI1", 2, seed=0)
        with pytest.raises(ValueError):
            proposed_variance(small_dataset, completed, np.zeros(4), estimate_selection_probs(small_dataset), "MI3")
