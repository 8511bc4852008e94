"""Bias-pathology diagnostics and the closed-form bias/variance catalogue.

A family is psi-regular when the score has mean zero at the true parameters.
Plugging in the nuisance MLE generally breaks that, and for a score linear in
psi the mean of the plugged-in score is exactly ``-C`` times the estimator's
bias. The checks here estimate both means by simulation and apply a fixed
four-standard-error rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MomentDomainError, UnsupportedOperationError, UsageError
from .estimators import EstimatorKind
from .models import Family, ParameterPoint, get_family
from .montecarlo import BLOCK_SIZE, block_generator, nuisance_vector, sample_batch

SIGNIFICANCE_SE = 4.0
MIN_REPLICATES = 10_000


@dataclass(frozen=True)
class BiasVarianceFormula:
    family: Family
    estimator: EstimatorKind
    bias: Callable
    variance: Callable
    bias_min_n: int
    variance_min_n: int


def _catalogue():
    mle, mu = EstimatorKind.MLE, EstimatorKind.MUMLE
    entries = [
        BiasVarianceFormula(Family.NORMAL, mle,
                            lambda n, m, p: -p / n,
                            lambda n, m, p: 2 * (n - 1) * p * p / (n * n), 2, 2),
        BiasVarianceFormula(Family.NORMAL, mu,
                            lambda n, m, p: 0 * p,
                            lambda n, m, p: 2 * p * p / (n - 1), 2, 2),
        BiasVarianceFormula(Family.NEYMAN_SCOTT, mle,
                            lambda n, m, p: -p / m,
                            lambda n, m, p: 2 * (m - 1) * p * p / (n * m * m), 1, 1),
        BiasVarianceFormula(Family.NEYMAN_SCOTT, mu,
                            lambda n, m, p: 0 * p,
                            lambda n, m, p: 2 * p * p / (n * (m - 1)), 1, 1),
        BiasVarianceFormula(Family.PARETO_RATE, mle,
                            lambda n, m, p: 2 * p / (n - 2),
                            lambda n, m, p: n * n * p * p / ((n - 2) ** 2 * (n - 3)), 3, 4),
        BiasVarianceFormula(Family.PARETO_RATE, mu,
                            lambda n, m, p: p / (n - 2),
                            lambda n, m, p: (n - 1) ** 2 * p * p / ((n - 2) ** 2 * (n - 3)), 3, 4),
    ]
    # Y ~ Gamma(n - 1, scale psi) for both of these.
    for fam in (Family.SHIFTED_EXPONENTIAL, Family.PARETO_SCALE):
        entries += [
            BiasVarianceFormula(fam, mle,
                                lambda n, m, p: -p / n,
                                lambda n, m, p: (n - 1) * p * p / (n * n), 2, 2),
            BiasVarianceFormula(fam, mu,
                                lambda n, m, p: 0 * p,
                                lambda n, m, p: p * p / (n - 1), 2, 2),
        ]
    return {(e.family, e.estimator): e for e in entries}


CATALOGUE = _catalogue()


def bias_variance_formula(family, estimator) -> BiasVarianceFormula:
    key = (get_family(family).id, EstimatorKind(estimator))
    try:
        return CATALOGUE[key]
    except KeyError:
        raise UnsupportedOperationError(f"no closed-form bias/variance for {key[0].value}/{key[1].value}") from None


def analytic_bias_variance(family, estimator, n: int, m: int = 2, psi=1.0):
    """Exact ``(bias, variance)`` of the MLE or MUMLE of psi.

    Works with ``fractions.Fraction`` arguments for exact rational results.
    ``m`` only matters for Neyman-Scott.

    Raises
    ------
    MomentDomainError
        ``n`` is too small for the moment to be finite.
    """
    f = bias_variance_formula(family, estimator)
    if n < f.bias_min_n:
        raise MomentDomainError(f"bias of {f.estimator.value} for {f.family.value} is infinite for n < {f.bias_min_n}")
    if n < f.variance_min_n:
        raise MomentDomainError(
            f"variance of {f.estimator.value} for {f.family.value} is infinite for n < {f.variance_min_n}"
        )
    if f.family is Family.NEYMAN_SCOTT and m < 2:
        raise MomentDomainError("neyman-scott needs m >= 2")
    return f.bias(n, m, psi), f.variance(n, m, psi)


@dataclass(frozen=True)
class PathologyReport:
    mean_score_at_true_theta: float
    se_true_theta: float
    regularity_pass: bool
    replicates: int
    mean_score_at_theta_hat: float | None = None
    se_theta_hat: float | None = None
    pathology_detected: bool | None = None
    predicted_sign: int | None = None
    theta_known: bool = False

    @property
    def sign_matches(self) -> bool | None:
        if self.mean_score_at_theta_hat is None or not self.predicted_sign:
            return None
        return int(np.sign(self.mean_score_at_theta_hat)) == self.predicted_sign

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["sign_matches"] = self.sign_matches
        return d


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    k = values.size
    mean = math.fsum(values) / k
    dev = values - mean
    return mean, math.sqrt(math.fsum(dev * dev) / (k - 1) / k)


def _score_draws(family, params: ParameterPoint, n: int, replicates: int, seed: int, m: int,
                 plug_in: bool, known_theta: bool):
    fam = get_family(family)
    theta_true = nuisance_vector(fam, params, n)
    true_scores = np.empty(replicates)
    hat_scores = np.empty(replicates) if plug_in else None
    for block in range(-(-replicates // BLOCK_SIZE)):
        start = block * BLOCK_SIZE
        count = min(BLOCK_SIZE, replicates - start)
        x = sample_batch(fam, params, n, block_generator(seed, block), BLOCK_SIZE, m)[:count]
        theta = np.broadcast_to(theta_true, (count,) + theta_true.shape)
        true_scores[start:start + count] = fam.score(x, theta, params.psi)
        if plug_in:
            theta_used = theta if known_theta else fam.theta_hat(x)
            hat_scores[start:start + count] = fam.score(x, theta_used, params.psi)
    return true_scores, hat_scores


def _check_replicates(replicates):
    if replicates < MIN_REPLICATES:
        raise UsageError(f"need at least {MIN_REPLICATES} replicates, got {replicates}")


def check_regularity(family, params: ParameterPoint, n: int, replicates: int, seed: int,
                     m: int = 2) -> PathologyReport:
    """Mean score at the true parameters; passes when within 4 SE of zero."""
    _check_replicates(replicates)
    true_scores, _ = _score_draws(family, params, n, replicates, seed, m, False, False)
    mean, se = _mean_se(true_scores)
    return PathologyReport(mean, se, abs(mean) <= SIGNIFICANCE_SE * se, replicates)


def check_pathology(family, params: ParameterPoint, n: int, replicates: int, seed: int,
                    m: int = 2, known_theta: bool = False) -> PathologyReport:
    """Regularity check plus the mean score with the nuisance MLE plugged in.

    ``pathology_detected`` when the plug-in mean is more than 4 SE from zero.
    With ``known_theta`` the true nuisance is used in place of the MLE, which
    must remove the effect.
    """
    fam = get_family(family)
    if not fam.closed_form:
        raise UnsupportedOperationError(f"{fam.id.value} has no closed-form nuisance MLE to plug in")
    _check_replicates(replicates)
    true_scores, hat_scores = _score_draws(fam, params, n, replicates, seed, m, True, known_theta)
    mean_t, se_t = _mean_se(true_scores)
    mean_h, se_h = _mean_se(hat_scores)
    return PathologyReport(
        mean_score_at_true_theta=mean_t,
        se_true_theta=se_t,
        regularity_pass=abs(mean_t) <= SIGNIFICANCE_SE * se_t,
        replicates=replicates,
        mean_score_at_theta_hat=mean_h,
        se_theta_hat=se_h,
        pathology_detected=abs(mean_h) > SIGNIFICANCE_SE * se_h,
        predicted_sign=fam.pathology_sign,
        theta_known=known_theta,
    )
