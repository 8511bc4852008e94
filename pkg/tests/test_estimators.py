from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from mumle.errors import (
    BracketingError,
    NumericError,
    ParameterDomainError,
    UnsupportedOperationError,
    UsageError,
)
from mumle.estimators import (
    INV_SQRT_PSI_PRIOR,
    EstimatorKind,
    InfoSource,
    PriorKind,
    PriorSpec,
    decomposition_residual,
    estimate,
    firth_corrected_estimate,
    firth_objective,
    fisher_information_determinant,
    golden_section_maximize,
    mml87_estimate,
    mml87_objective,
    mumle_equivalent_prior,
    solve_score_root,
)
from mumle.models import (
    CLOSED_FORM_FAMILIES,
    DataSet,
    Family,
    ParameterPoint,
    get_family,
    nuisance_mle,
    psi_mle,
    psi_mumle,
    updated_statistic,
)
from mumle.montecarlo import block_generator, sample

FLAT = DataSet.flat
P = ParameterPoint


def _dataset(family, n=12, seed=3, m=3, psi=1.3):
    theta = {"normal": 0.5, "neyman-scott": 0.0, "shifted-exponential": 2.0,
             "pareto-rate": 1.5, "pareto-scale": 1.5, "gamma-two-param": 2.5}[Family(family).value]
    return sample(family, P((theta,), psi), n, block_generator(seed, 0), m=m)


class TestPriorSpec:
    def test_parse(self):
        assert PriorSpec.parse("flat").kind is PriorKind.FLAT
        assert PriorSpec.parse("firth").kind is PriorKind.FIRTH_INFORMATION
        assert PriorSpec.parse("power=-0.5") == INV_SQRT_PSI_PRIOR
        assert PriorSpec.parse("psi^-0.5") == INV_SQRT_PSI_PRIOR

    def test_parse_rejects_garbage(self):
        with pytest.raises(UsageError):
            PriorSpec.parse("jeffreys-ish")

    def test_label_round_trip(self):
        for text in ("flat", "firth", "psi^-2"):
            spec = PriorSpec.parse(text)
            assert PriorSpec.parse(spec.label) == spec


class TestSolveScoreRoot:
    def test_closed_form_root(self):
        root = solve_score_root(lambda p: (-2 * p + 2) / (2 * p * p), 0.1)
        assert root == pytest.approx(1.0, rel=1e-12)

    def test_pareto_rate_root_matches_closed_form(self):
        data = FLAT([1, 2, 4])
        fam = get_family(Family.PARETO_RATE)
        root = solve_score_root(lambda p: float(fam.score(data.values, np.array([1.0]), p)), 5.0)
        assert root == pytest.approx(psi_mle(fam, data), rel=1e-10)

    def test_no_sign_change(self):
        with pytest.raises(BracketingError):
            solve_score_root(lambda p: 1.0, 1.0)

    def test_nonfinite_score(self):
        with pytest.raises(NumericError):
            solve_score_root(lambda p: float("nan"), 1.0)

    def test_bad_hint(self):
        with pytest.raises(ParameterDomainError):
            solve_score_root(lambda p: 1 - p, -1.0)


class TestGoldenSection:
    def test_quadratic(self):
        x, _, _ = golden_section_maximize(lambda t: -(t - 0.3) ** 2, -2.0, 3.0, tol=1e-10)
        assert x == pytest.approx(0.3, abs=1e-8)


class TestFisherInformation:
    def test_normal_values(self):
        assert fisher_information_determinant(Family.NORMAL, 10, P((0.0,), 2.0)).determinant == pytest.approx(50.0)
        assert fisher_information_determinant(Family.NORMAL, 1, P((0.0,), 1.0)).determinant == pytest.approx(2.0)

    def test_gamma_finite_difference_matches_trigamma(self):
        info = fisher_information_determinant(Family.GAMMA, 50, P((3.0,), 2.0))
        assert info.source is InfoSource.FINITE_DIFFERENCE
        want = oracles.gamma_info_det(3.0, 2.0, 50)
        assert abs(info.determinant - want) / want < 1e-3

    def test_scale_identity(self):
        # |I| scales as psi^-2 for a scale family, up to finite-difference noise
        a = fisher_information_determinant(Family.GAMMA, 10, P((1.7,), 1.0)).determinant
        b = fisher_information_determinant(Family.GAMMA, 10, P((1.7,), 3.0)).determinant
        assert b == pytest.approx(a / 9.0, rel=1e-6)

    def test_threshold_family_uses_psi_block(self):
        info = fisher_information_determinant(Family.SHIFTED_EXPONENTIAL, 8, P((0.0,), 2.0))
        assert info.determinant == pytest.approx(8 / 4.0)


class TestMML87:
    def test_normal_two_points(self):
        rep = mml87_estimate(Family.NORMAL, FLAT([0, 2]), INV_SQRT_PSI_PRIOR)
        assert rep.value == pytest.approx(2.0, rel=1e-12)
        assert rep.converged

    def test_inverse_sqrt_prior_reproduces_mumle_for_normal(self):
        for seed in range(20):
            data = _dataset("normal", n=7, seed=seed)
            rep = mml87_estimate(Family.NORMAL, data, INV_SQRT_PSI_PRIOR)
            assert rep.value == pytest.approx(psi_mumle(Family.NORMAL, data), rel=1e-10)

    @pytest.mark.parametrize("family", [f.value for f in CLOSED_FORM_FAMILIES])
    def test_equivalent_prior_reproduces_mumle(self, family):
        data = _dataset(family)
        prior = mumle_equivalent_prior(family, data.n, data.m)
        rep = mml87_estimate(family, data, prior)
        assert rep.value == pytest.approx(psi_mumle(family, data), rel=1e-10)

    def test_objective_is_maximised(self):
        data = FLAT([0.1, 1.9, 3.4, -0.7, 2.2])
        rep = mml87_estimate(Family.NORMAL, data, PriorSpec.flat())
        theta = nuisance_mle(Family.NORMAL, data)
        at = mml87_objective(Family.NORMAL, data, PriorSpec.flat(), P(theta, rep.value))
        for step in (0.97, 1.03):
            assert mml87_objective(Family.NORMAL, data, PriorSpec.flat(), P(theta, rep.value * step)) < at

    def test_flat_prior_normal_closed_form(self):
        # log f - 1/2 log(2 n^2 / psi^2) is stationary at Y / (n - 2)
        data = FLAT([0, 2, 3, 7])
        rep = mml87_estimate(Family.NORMAL, data, PriorSpec.flat())
        assert rep.value == pytest.approx(26 / 2, rel=1e-10)

    def test_gamma_flat_prior_recovers_truth(self):
        data = sample(Family.GAMMA, P((3.0,), 2.0), 200, block_generator(0, 0))
        rep = mml87_estimate(Family.GAMMA, data, PriorSpec.flat())
        assert abs(rep.value - 2.0) / 2.0 < 0.15
        assert abs(rep.theta[0] - 3.0) / 3.0 < 0.15

    def test_known_theta(self):
        rep = mml87_estimate(Family.PARETO_RATE, FLAT([1, 2, 4]), PriorSpec.flat(), theta=(1.0,))
        assert rep.theta == (1.0,)
        assert rep.value > 0

    def test_custom_prior(self):
        prior = PriorSpec.custom(lambda theta, psi: -0.5 * math.log(psi))
        data = FLAT([0.0, 1.0, 5.0, 2.0])
        rep = mml87_estimate(Family.NORMAL, data, prior)
        assert rep.value == pytest.approx(psi_mumle(Family.NORMAL, data), rel=1e-7)


class TestFirth:
    def test_normal_matches_symbolic_root(self):
        data = FLAT([0, 2, 3, 7])
        rep = firth_corrected_estimate(Family.NORMAL, data)
        assert rep.value == pytest.approx(oracles.firth_normal_root(4, 26.0), rel=1e-10)
        assert rep.value == pytest.approx(26 / 6, rel=1e-10)

    def test_identical_to_mml87_with_information_prior(self):
        data = _dataset("shifted-exponential", n=9)
        a = firth_corrected_estimate(Family.SHIFTED_EXPONENTIAL, data)
        b = mml87_estimate(Family.SHIFTED_EXPONENTIAL, data, PriorSpec.firth())
        assert a.value == b.value
        theta = nuisance_mle(Family.SHIFTED_EXPONENTIAL, data)
        params = P(theta, 1.3)
        assert firth_objective(Family.SHIFTED_EXPONENTIAL, data, params) == mml87_objective(
            Family.SHIFTED_EXPONENTIAL, data, PriorSpec.firth(), params
        )

    def test_neyman_scott_small_instance(self):
        rep = firth_corrected_estimate(Family.NEYMAN_SCOTT, DataSet.grouped([[0, 2], [1, 3], [0.5, -1]]))
        assert math.isfinite(rep.value) and rep.value > 0

    def test_exponential_rate_known_threshold_is_unbiased_form(self):
        # with theta known, log(X/theta) is exponential and the estimate is (n-1)/sum
        x = np.array([1.3, 2.0, 5.5, 1.1, 3.0])
        rep = firth_corrected_estimate(Family.PARETO_RATE, FLAT(x), theta=(1.0,))
        assert rep.value == pytest.approx((x.size - 1) / np.log(x).sum(), rel=1e-10)


class TestDecomposition:
    def test_normal_declared_exponent(self):
        data = FLAT([0.3, 1.1, -0.4, 2.2, 0.9])
        assert decomposition_residual(Family.NORMAL, data, [0.5, 1, 2, 4]) < 1e-10

    def test_wrong_exponent_control(self):
        data = FLAT([0.3, 1.1, -0.4, 2.2, 0.9])
        assert decomposition_residual(Family.NORMAL, data, [0.5, 1, 2, 4], exponent=-1.0) > 0.1

    def test_constant_grid(self):
        assert decomposition_residual(Family.NORMAL, FLAT([0, 2, 3]), [1, 1, 1]) == 0.0

    @pytest.mark.parametrize("family", [f.value for f in CLOSED_FORM_FAMILIES])
    def test_every_closed_form_family(self, family):
        data = _dataset(family, n=6)
        assert decomposition_residual(family, data, [0.3, 0.9, 2.7, 8.1]) < 1e-10

    def test_gamma_has_no_declared_exponent(self):
        with pytest.raises(UnsupportedOperationError):
            decomposition_residual(Family.GAMMA, FLAT([1, 2, 3]), [1, 2, 3])


class TestEstimateDispatch:
    @pytest.mark.parametrize("kind", list(EstimatorKind))
    def test_reports_carry_kind(self, kind):
        rep = estimate(Family.NORMAL, FLAT([0, 2, 3, 7]), kind)
        assert rep.estimator is kind
        assert rep.value > 0

    def test_mumle_with_known_theta_rejected(self):
        with pytest.raises(UnsupportedOperationError):
            estimate(Family.NORMAL, FLAT([0, 2]), EstimatorKind.MUMLE, theta=(0.0,))

    def test_stat_helper_consistency(self):
        data = FLAT([1, 2, 4])
        assert estimate(Family.PARETO_RATE, data, "mle").value == psi_mle(Family.PARETO_RATE, data)
        assert updated_statistic(Family.PARETO_RATE, data).y > 0
