import numpy as np
import numpy.testing as npt
import pytest
import statsmodels.api as sm

from misslogit.config import EstimationConfig, SolverConfig
from misslogit.core.linalg import guarded_inverse, sandwich
from misslogit.core.logit import information, inv_logit, inv_logit_deriv, score_contrib, score_rows
from misslogit.core.maximum_likelihood import fit_full_ml, fit_logistic
from misslogit.core.solver import solve_estimating_eq
from misslogit.errors import ConfigError, DatasetValidationError, VarianceError
from misslogit.models.record import DesignVector


class TestLink:

    def test_inv_logit_is_overflow_safe(self):
        values = inv_logit(np.array([-800.0, 0.0, 800.0]))
        npt.assert_allclose(values, [0.0, 0.5, 1.0])
        assert np.all(np.isfinite(values))

    def test_inv_logit_symmetry(self):
        u = np.random.default_rng(9).normal(scale=20.0, size=200)
        npt.assert_allclose(inv_logit(u) + inv_logit(-u), 1.0, atol=1e-15)

    def test_inv_logit_hand_values(self):
        assert inv_logit(np.log(3.0)) == pytest.approx(0.75)
        tail = inv_logit(-50.0)
        assert tail > 0.0
        assert tail == pytest.approx(1.9287498479639178e-22, rel=1e-9)

    def test_derivative_peaks_at_zero(self):
        assert inv_logit_deriv(0.0) == pytest.approx(0.25)
        assert inv_logit_deriv(3.0) < 0.25

    @pytest.mark.parametrize("u", [-4.0, -0.7, 0.0, 2.0, 9.0])
    def test_derivative_matches_finite_differences(self, u):
        h = 1e-5
        numeric = (inv_logit(u + h) - inv_logit(u - h)) / (2 * h)
        assert inv_logit_deriv(u) == pytest.approx(numeric, abs=1e-8)
        assert inv_logit_deriv(u) == pytest.approx(inv_logit_deriv(-u), rel=1e-12)

    def test_score_contrib(self):
        beta = np.array([0.5, -1.0])
        x = np.array([1.0, 2.0])
        expected = x * (1 - 1 / (1 + np.exp(1.5)))
        npt.assert_allclose(score_contrib(beta, x, 1), expected)

    def test_score_contrib_dimension_mismatch(self):
        with pytest.raises(ValueError):
            score_contrib(np.zeros(3), np.ones(2), 0)

    def test_score_rows_match_single_contributions(self):
        rng = np.random.default_rng(3)
        design = np.column_stack([np.ones(6), rng.normal(size=(6, 2))])
        y = rng.integers(0, 2, 6)
        beta = rng.normal(size=3)
        expected = np.array([score_contrib(beta, design[i], y[i]) for i in range(6)])
        npt.assert_allclose(score_rows(beta, design, y), expected)

    def test_design_vector_from_record(self, small_dataset):
        beta = np.array([0.3, -0.5, 0.8, 0.2])
        complete = np.flatnonzero(small_dataset.complete_mask)
        for i in complete:
            vector = DesignVector.from_record(small_dataset.record(int(i)))
            npt.assert_array_equal(np.asarray(vector), small_dataset.design[i])
            npt.assert_allclose(
                score_contrib(beta, vector, int(small_dataset.y[i])),
                score_rows(beta, small_dataset.design[i][None], small_dataset.y[i : i + 1])[0],
            )

    def test_design_vector_needs_both_blocks(self, small_dataset):
        incomplete = int(np.flatnonzero(~small_dataset.complete_mask)[0])
        with pytest.raises(ValueError):
            DesignVector.from_record(small_dataset.record(incomplete))


class TestSolver:

    def test_intercept_only(self):
        design = np.ones((4, 1))
        y = np.array([1, 1, 1, 0])
        report, _ = fit_logistic(design, y)
        assert report.converged
        assert report.beta_hat[0] == pytest.approx(np.log(3.0), abs=1e-10)

    def test_intercept_only_balanced(self):
        report, _ = fit_logistic(np.ones((2, 1)), np.array([1, 0]))
        assert report.converged
        assert report.beta_hat[0] == pytest.approx(0.0, abs=1e-12)

    def test_start_point_does_not_change_root(self):
        rng = np.random.default_rng(21)
        n = 300
        design = np.column_stack([np.ones(n), rng.choice([0.0, 1.0, 2.0], n), rng.choice([-1.0, 1.0], n)])
        y = (rng.random(n) < inv_logit(design @ np.array([-0.3, 0.6, -0.5]))).astype(float)

        score = lambda b: score_rows(b, design, y).sum(axis=0)
        jacobian = lambda b: information(b, design)

        from_zero = solve_estimating_eq(score, jacobian, np.zeros(3), tol=1e-12)
        from_shifted = solve_estimating_eq(score, jacobian, rng.normal(scale=0.5, size=3), tol=1e-12)

        assert from_zero.converged and from_shifted.converged
        npt.assert_allclose(from_zero.beta_hat, from_shifted.beta_hat, atol=1e-8)

    def test_matches_statsmodels_glm(self):
        rng = np.random.default_rng(11)
        n = 400
        design = np.column_stack([np.ones(n), rng.choice([-1.0, 0.2, 1.3], n), rng.integers(0, 2, n)])
        y = (rng.random(n) < inv_logit(design @ np.array([-0.4, 0.9, 0.7]))).astype(float)

        report, info = fit_logistic(design, y)
        glm = sm.GLM(y, design, family=sm.families.Binomial()).fit()

        assert report.converged
        npt.assert_allclose(report.beta_hat, glm.params, atol=1e-6)
        npt.assert_allclose(np.sqrt(np.diag(np.linalg.inv(info))), glm.bse, rtol=1e-6)

    def test_weighted_fit_matches_glm_frequency_weights(self):
        rng = np.random.default_rng(5)
        n = 200
        design = np.column_stack([np.ones(n), rng.normal(size=n)])
        y = (rng.random(n) < inv_logit(design @ np.array([0.2, -0.8]))).astype(float)
        weights = rng.choice([1.0, 2.0, 3.0], n)

        report, _ = fit_logistic(design, y, weights=weights)
        glm = sm.GLM(y, design, family=sm.families.Binomial(), freq_weights=weights).fit()
        npt.assert_allclose(report.beta_hat, glm.params, atol=1e-6)

    def test_separation_is_not_convergence(self):
        design = np.column_stack([np.ones(6), [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]])
        y = np.array([0, 0, 0, 1, 1, 1])
        report, _ = fit_logistic(design, y)
        assert not report.converged
        assert report.separation

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            solve_estimating_eq(lambda b: b, lambda b: np.eye(1), np.zeros(1), tol=0.0)

    def test_linear_equation_solved_in_one_step(self):
        target = np.array([1.0, -2.0])
        report = solve_estimating_eq(lambda b: target - b, lambda b: np.eye(2), np.zeros(2))
        assert report.converged
        assert report.iterations == 1
        npt.assert_allclose(report.beta_hat, target)


class TestFullMl:

    def test_requires_complete_data(self, small_dataset):
        with pytest.raises(DatasetValidationError):
            fit_full_ml(small_dataset)

    def test_information_covariance(self, random_dataset):
        dataset = random_dataset(np.random.default_rng(2), 300, complete=True)
        result = fit_full_ml(dataset)

        assert result.converged
        assert result.variance_method == "INFORMATION"
        info = information(result.beta_hat, dataset.design)
        npt.assert_allclose(result.cov, np.linalg.inv(info), rtol=1e-8)


class TestLinalg:

    def test_guarded_inverse_rejects_singular(self):
        with pytest.raises(VarianceError):
            guarded_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_guarded_inverse_rejects_nan(self):
        with pytest.raises(VarianceError):
            guarded_inverse(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_sandwich_is_symmetric(self):
        bread = np.array([[2.0, 0.3], [0.1, 1.0]])
        meat = np.array([[1.0, 0.2], [0.2, 0.5]])
        cov = sandwich(bread, meat, n=10)
        npt.assert_allclose(cov, cov.T)
        inv = np.linalg.inv(bread)
        npt.assert_allclose(cov, 0.5 * (inv @ meat @ inv.T + (inv @ meat @ inv.T).T) / 10)


class TestConfig:

    @pytest.mark.parametrize("kwargs,field", [
        ({"tol": 0.0}, "tol"),
        ({"max_iter": 0}, "max_iter"),
        ({"cond_limit": 1.0}, "cond_limit"),
    ])
    def test_solver_config_validation(self, kwargs, field):
        with pytest.raises(ConfigError) as info:
            SolverConfig(**kwargs)
        assert info.value.field == field

    def test_mi_needs_two_imputations(self):
        with pytest.raises(ConfigError):
            EstimationConfig(imputations=1, estimators=("MI1",))

    def test_variance_choice(self):
        config = EstimationConfig(variance="rubin")
        assert config.wants_rubin and not config.wants_proposed
        with pytest.raises(ConfigError):
            EstimationConfig(variance="jackknife")
