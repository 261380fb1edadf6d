"""OLS fitting, significance, stepwise selection, and dummy encoding."""
import numpy as np
import pytest
from scipy import stats as sps

from regfuzz.regression import (
    DesignMatrix,
    RankDeficiencyError,
    encode_dummies,
    fit_ols,
    predict_ols,
    predict_ols_many,
    stepwise_select,
)


@pytest.fixture
def planted():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 2))
    y = 3.0 + 1.0 * X[:, 0] + 2.0 * X[:, 1]
    return DesignMatrix(("u", "w"), X), y


class TestDesignMatrix:
    def test_shape_checked(self):
        with pytest.raises(ValueError):
            DesignMatrix(("a",), np.zeros((3,)))

    def test_name_count_checked(self):
        with pytest.raises(ValueError):
            DesignMatrix(("a", "b"), np.zeros((3, 1)))

    def test_finite_checked(self):
        with pytest.raises(ValueError):
            DesignMatrix(("a",), np.array([[1.0], [np.nan]]))

    def test_take_subsets_by_name(self):
        dm = DesignMatrix(("a", "b", "c"), np.arange(12.0).reshape(4, 3))
        sub = dm.take(("c", "a"))
        assert sub.columns == ("c", "a")
        assert np.array_equal(sub.values[:, 0], dm.values[:, 2])

    def test_n_rows(self):
        assert DesignMatrix(("a",), np.zeros((7, 1))).n_rows == 7


class TestFitOls:
    def test_planted_coefficients_recovered(self, planted):
        X, y = planted
        fit = fit_ols(X, y)
        assert fit.coefficients == pytest.approx([3.0, 1.0, 2.0], abs=1e-10)
        # columns name the predictors; coefficients[0] is always the intercept
        assert fit.columns == ("u", "w")
        assert len(fit.coefficients) == len(fit.columns) + 1

    def test_perfect_fit_r2(self, planted):
        X, y = planted
        fit = fit_ols(X, y)
        assert fit.r2 == pytest.approx(1.0)
        assert np.max(np.abs(fit.residuals)) < 1e-9

    def test_residuals_orthogonal_to_design(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(60, 3))
        y = rng.normal(size=60)
        fit = fit_ols(DesignMatrix(("a", "b", "c"), X), y)
        A = np.column_stack([np.ones(60), X])
        dots = A.T @ fit.residuals
        scale = np.abs(A).sum(axis=0) * np.abs(y).max()
        assert np.all(np.abs(dots) / scale < 1e-10)

    def test_pvalues_match_t_distribution(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(30, 2))
        y = 1.0 + 0.5 * X[:, 0] + rng.normal(scale=0.3, size=30)
        fit = fit_ols(DesignMatrix(("x1", "x2"), X), y)
        ref = 2.0 * sps.t.sf(np.abs(fit.tstats), fit.df_resid)
        assert fit.pvalues == pytest.approx(ref, abs=1e-12)

    def test_df_and_sigma2(self, planted):
        X, y = planted
        fit = fit_ols(X, y)
        assert fit.df_resid == 40 - 3

    def test_duplicate_column_rejected_with_name(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=40)
        X = np.column_stack([x, 2.0 * x, rng.normal(size=40)])
        with pytest.raises(RankDeficiencyError) as exc:
            fit_ols(DesignMatrix(("a", "b", "c"), X), np.ones(40))
        msg = str(exc.value)
        assert "rank deficient" in msg
        assert ("a" in msg.split(":")[-1]) or ("b" in msg.split(":")[-1])

    def test_constant_column_vs_intercept_rejected(self):
        X = np.column_stack([np.ones(10), np.arange(10.0)])
        with pytest.raises(RankDeficiencyError):
            fit_ols(DesignMatrix(("const", "t"), X), np.arange(10.0))

    def test_too_few_rows_rejected(self):
        with pytest.raises(ValueError, match="rows"):
            fit_ols(DesignMatrix(("a", "b"), np.ones((2, 2))), np.ones(2))

    def test_constant_target_r2_defined(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(12, 1))
        fit = fit_ols(DesignMatrix(("x",), X), np.full(12, 5.0))
        assert fit.r2 == pytest.approx(1.0)
        assert fit.coefficients[0] == pytest.approx(5.0)

    def test_matches_lstsq(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(50, 4))
        y = rng.normal(size=50)
        fit = fit_ols(DesignMatrix(tuple("abcd"), X), y)
        A = np.column_stack([np.ones(50), X])
        ref, *_ = np.linalg.lstsq(A, y, rcond=None)
        assert fit.coefficients == pytest.approx(ref, abs=1e-10)


class TestPredict:
    def test_scalar_and_batch_agree(self, planted):
        X, y = planted
        fit = fit_ols(X, y)
        pts = np.array([[1.0, 1.0], [0.0, 0.0], [-2.0, 3.5]])
        batch = predict_ols_many(fit, pts)
        scalar = [predict_ols(fit, p) for p in pts]
        assert batch == pytest.approx(scalar)
        assert predict_ols(fit, [1.0, 1.0]) == pytest.approx(6.0)

    def test_arity_checked(self, planted):
        X, y = planted
        fit = fit_ols(X, y)
        with pytest.raises(ValueError):
            predict_ols(fit, [1.0])


class TestStepwise:
    def test_selects_real_predictor_only(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(30, 2))
        y = 1.0 + 0.5 * X[:, 0] + rng.normal(scale=0.3, size=30)
        selected, fit = stepwise_select(DesignMatrix(("x1", "x2"), X), y)
        assert selected == ("x1",)
        assert fit.columns == ("x1",)

    def test_pure_noise_selects_nothing(self):
        rng = np.random.default_rng(3)
        selected, fit = stepwise_select(
            DesignMatrix(("n1",), rng.normal(size=(30, 1))), rng.normal(size=30)
        )
        assert selected == ()
        assert fit.columns == ()
        assert len(fit.coefficients) == 1  # intercept-only model

    def test_keeps_declaration_order(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(80, 3))
        y = 2.0 * X[:, 0] + 1.0 * X[:, 1] + 3.0 * X[:, 2] + rng.normal(
            scale=0.1, size=80
        )
        selected, _ = stepwise_select(DesignMatrix(("a", "b", "c"), X), y)
        assert selected == ("a", "b", "c")

    def test_backward_pass_drops_shadowed_column(self):
        # x2 is x1 plus noise: once x1 enters, x2 cannot stay significant
        rng = np.random.default_rng(17)
        x1 = rng.normal(size=100)
        x2 = x1 + rng.normal(scale=0.5, size=100)
        y = 2.0 * x1 + rng.normal(scale=0.2, size=100)
        selected, _ = stepwise_select(
            DesignMatrix(("x1", "x2"), np.column_stack([x1, x2])), y
        )
        assert selected == ("x1",)

    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError):
            stepwise_select(
                DesignMatrix(("a",), np.zeros((10, 1))),
                np.zeros(10),
                p_enter=0.2,
                p_remove=0.1,
            )

    def test_collinear_candidate_skipped(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=40)
        y = 3.0 * x + rng.normal(scale=0.1, size=40)
        X = np.column_stack([x, x])  # twin would be rank deficient once x enters
        selected, _ = stepwise_select(DesignMatrix(("x", "twin"), X), y)
        assert selected == ("x",)


class TestDummies:
    def test_baseline_excluded(self):
        dm = encode_dummies([1.0, 2.0, 4.0, 2.0, 1.0], baseline=2.0)
        assert dm.columns == ("ResourceLevel1", "ResourceLevel4")
        expected = np.array(
            [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0], [1.0, 0.0]]
        )
        assert np.array_equal(dm.values, expected)

    def test_rows_sum_at_most_one(self):
        dm = encode_dummies([1, 2, 3, 4, 1, 3], baseline=1)
        assert np.all(dm.values.sum(axis=1) <= 1.0)

    def test_missing_baseline_rejected(self):
        with pytest.raises(ValueError):
            encode_dummies([1.0, 2.0], baseline=9.0)

    def test_single_category_rejected(self):
        with pytest.raises(ValueError):
            encode_dummies([1.0, 1.0, 1.0], baseline=1.0)

    def test_custom_prefix(self):
        dm = encode_dummies([1, 2], baseline=1, prefix="Level")
        assert dm.columns == ("Level2",)
