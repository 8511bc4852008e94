"""Generic estimation: score roots, MML87 penalised likelihood, Firth.

The MML87 objective for parameters ``(theta, psi)`` with prior ``h`` is::

    log h(theta, psi) + log f(x | theta, psi) - 0.5 log |I(theta, psi)|

For the closed-form families the nuisance MLE maximises ``f`` for every
``psi`` and neither the priors nor the information depend on ``theta``, so
``theta`` is profiled out first and ``psi`` solves a 1-D stationarity
equation. The Gamma family has no such separation; its shape is optimised by
golden section over the profiled objective.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .errors import (
    BracketingError,
    ConvergenceError,
    NumericError,
    ParameterDomainError,
    SingularInformationError,
    UnsupportedOperationError,
    UsageError,
)
from .models import (
    DataSet,
    Family,
    ModelFamily,
    ParameterPoint,
    _prepare,
    get_family,
    psi_mle,
    psi_mumle,
    updated_statistic,
    y_log_likelihood,
)

EPS = np.finfo(float).eps
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class EstimatorKind(str, enum.Enum):
    MLE = "mle"
    MUMLE = "mumle"
    MML87 = "mml87"
    FIRTH = "firth"


class PriorKind(str, enum.Enum):
    FIRTH_INFORMATION = "firth"
    PSI_POWER_LAW = "power"
    FLAT = "flat"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PriorSpec:
    """Prior ``h`` for the MML87 objective.

    ``PSI_POWER_LAW`` means ``h proportional to psi ** exponent``;
    ``FIRTH_INFORMATION`` means ``h proportional to |I|``; ``CUSTOM`` takes a
    callable ``log_prior(theta, psi)``.
    """

    kind: PriorKind
    exponent: float = 0.0
    log_prior: Callable[[np.ndarray, float], float] | None = field(default=None, compare=False)

    @classmethod
    def flat(cls):
        return cls(PriorKind.FLAT)

    @classmethod
    def firth(cls):
        return cls(PriorKind.FIRTH_INFORMATION)

    @classmethod
    def psi_power(cls, exponent: float):
        return cls(PriorKind.PSI_POWER_LAW, float(exponent))

    @classmethod
    def custom(cls, log_prior):
        return cls(PriorKind.CUSTOM, log_prior=log_prior)

    @classmethod
    def parse(cls, text: str) -> "PriorSpec":
        """``flat``, ``firth``, ``power=-0.5`` or ``psi^-0.5``."""
        t = text.strip().lower()
        if t == "flat":
            return cls.flat()
        if t == "firth":
            return cls.firth()
        for prefix in ("power=", "psi^", "psi**"):
            if t.startswith(prefix):
                try:
                    return cls.psi_power(float(t[len(prefix):]))
                except ValueError:
                    break
        raise UsageError(f"cannot parse prior {text!r}; use flat, firth or power=<exponent>")

    @property
    def label(self) -> str:
        if self.kind is PriorKind.PSI_POWER_LAW:
            return f"psi^{self.exponent:g}"
        return self.kind.value


INV_SQRT_PSI_PRIOR = PriorSpec.psi_power(-0.5)


class InfoSource(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class FisherInfo:
    determinant: float
    source: InfoSource

    @property
    def log_determinant(self) -> float:
        return math.log(self.determinant)


@dataclass(frozen=True)
class EstimateReport:
    estimator: EstimatorKind
    value: float
    theta: tuple[float, ...] = ()
    iterations: int = 0
    converged: bool = True
    objective_at_solution: float = float("nan")
    prior: str | None = None
    gradient: float = 0.0

    @property
    def label(self) -> str:
        if self.estimator is EstimatorKind.MML87 and self.prior:
            return f"mml87[{self.prior}]"
        return self.estimator.value

    def as_dict(self) -> dict:
        return {
            "estimator": self.label,
            "value": self.value,
            "theta": list(self.theta),
            "iterations": self.iterations,
            "converged": self.converged,
            "objective_at_solution": self.objective_at_solution,
            "gradient": self.gradient,
        }


# ---------------------------------------------------------------------------
# Root finding and golden section
# ---------------------------------------------------------------------------


def _finite(value: float, where: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NumericError(f"score is not finite at psi={where!r}")
    return value


def _bracket(score, hint: float, max_doublings: int):
    """Expand geometrically around ``hint`` until the sign changes.

    Returns ``(a, b, f(a), f(b), evaluations)`` with ``a < b``.
    """
    if not (hint > 0.0 and math.isfinite(hint)):
        raise ParameterDomainError(f"bracket hint must be positive, got {hint!r}")
    f0 = _finite(score(hint), hint)
    evals = 1
    if f0 == 0.0:
        return hint, hint, f0, f0, evals
    lo, flo = hint, f0
    hi, fhi = hint, f0
    for _ in range(max_doublings):
        new_lo = lo * 0.5
        f_new = _finite(score(new_lo), new_lo)
        evals += 1
        if f_new == 0.0 or (f_new > 0) != (flo > 0):
            return new_lo, lo, f_new, flo, evals
        lo, flo = new_lo, f_new

        new_hi = hi * 2.0
        f_new = _finite(score(new_hi), new_hi)
        evals += 1
        if f_new == 0.0 or (f_new > 0) != (fhi > 0):
            return hi, new_hi, fhi, f_new, evals
        hi, fhi = new_hi, f_new
    raise BracketingError(
        f"no sign change in [{lo:.3g}, {hi:.3g}] after {max_doublings} doublings from {hint!r}"
    )


@dataclass(frozen=True)
class RootResult:
    root: float
    evaluations: int
    lower_value: float
    upper_value: float


def _solve_root(score, hint, tol, max_doublings=60) -> RootResult:
    a, b, fa, fb, evals = _bracket(score, hint, max_doublings)
    if a == b:
        return RootResult(a, evals, fa, fb)
    if fa == 0.0:
        return RootResult(a, evals, fa, fb)
    if fb == 0.0:
        return RootResult(b, evals, fa, fb)
    try:
        root, info = optimize.brentq(
            score, a, b, xtol=1e-200, rtol=4.0 * EPS,
            maxiter=500, full_output=True,
        )
    except ValueError as exc:  # brentq raises on nan
        raise NumericError(str(exc)) from exc
    evals += info.function_calls
    value = _finite(score(root), root)
    if abs(value) > tol:
        raise ConvergenceError(
            f"|score| = {abs(value):.3g} exceeds tol {tol:.3g} at psi={root!r}",
            {"root": root, "score": value, "evaluations": evals},
        )
    return RootResult(root, evals, fa, fb)


def solve_score_root(score: Callable[[float], float], bracket_hint: float, tol: float = 1e-10) -> float:
    """Root of a 1-D score on ``(0, inf)``.

    The bracket grows from ``bracket_hint`` by factors of two (at most 60
    doublings each way) until the score changes sign, then Brent's method
    narrows it to a few ulps.

    Raises
    ------
    BracketingError
        No sign change was found.
    NumericError
        The score returned a non-finite value.
    ConvergenceError
        The score at the returned point still exceeds ``tol``.
    """
    return _solve_root(score, float(bracket_hint), float(tol)).root


def golden_section_maximize(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 500):
    """Maximise a unimodal ``f`` on ``[a, b]``. Returns ``(x, f(x), iterations)``."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while abs(b - a) > tol * (1.0 + abs(c) + abs(d)) and it < max_iter:
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    if fc >= fd:
        return c, fc, it
    return d, fd, it


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------


def _quantile(fam: ModelFamily, u: np.ndarray, theta: np.ndarray, psi: float) -> np.ndarray:
    if fam.id is Family.GAMMA:
        return stats.gamma.ppf(u, theta[0], scale=psi)
    raise UnsupportedOperationError(f"no finite-difference information for {fam.id.value}")


def _expected_loglik_hessian(fam: ModelFamily, theta, psi, seed: int, points: int) -> np.ndarray:
    """Central-difference Hessian of the per-observation expected log-likelihood.

    The expectation is a randomly shifted stratified Monte Carlo average over
    ``points`` quantiles of the model at ``(theta, psi)``.
    """
    shift = np.random.default_rng(seed).random()
    u = (np.arange(points) + shift) / points
    x = _quantile(fam, u, np.asarray(theta, dtype=float), psi)
    eta0 = np.append(np.asarray(theta, dtype=float), psi)
    steps = 1e-4 * np.maximum(np.abs(eta0), 1e-3)

    def mean_ll(eta):
        return float(fam.loglik(x, eta[:-1], eta[-1])) / points

    k = eta0.size
    f0 = mean_ll(eta0)
    hess = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        hess[i, i] = (mean_ll(eta0 + ei) - 2.0 * f0 + mean_ll(eta0 - ei)) / steps[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = steps[j]
            hess[i, j] = hess[j, i] = (
                mean_ll(eta0 + ei + ej)
                - mean_ll(eta0 + ei - ej)
                - mean_ll(eta0 - ei + ej)
                + mean_ll(eta0 - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    return hess


def fisher_information_determinant(
    family,
    n: int,
    params: ParameterPoint,
    m: int = 1,
    seed: int = 0,
    points: int = 2**16,
) -> FisherInfo:
    """Determinant of the information of a sample of size ``n``.

    Closed form where the family declares one; otherwise ``n^p`` times the
    determinant of the negated finite-difference Hessian of the expected
    per-observation log-likelihood (Gamma).
    """
    fam = get_family(family)
    if n < 1 or m < 1:
        raise ParameterDomainError("sample size must be positive")
    theta = params.theta_array
    log_det = fam.log_info_det(n, m, theta, params.psi)
    if log_det is not None:
        det = math.exp(float(log_det))
        source = InfoSource.CLOSED_FORM
    else:
        hess = _expected_loglik_hessian(fam, theta, params.psi, seed, points)
        det = float(np.linalg.det(-n * hess))
        source = InfoSource.FINITE_DIFFERENCE
    if not (math.isfinite(det) and det > 0.0):
        raise SingularInformationError(f"information determinant {det!r} is not positive")
    return FisherInfo(det, source)


@lru_cache(maxsize=4096)
def _unit_scale_log_det(family_id: Family, shape: float, n: int, seed: int) -> float:
    info = fisher_information_determinant(family_id, n, ParameterPoint((shape,), 1.0), seed=seed)
    return info.log_determinant


def _log_info_det(fam: ModelFamily, n, m, theta, psi, seed=0):
    closed = fam.log_info_det(n, m, theta, psi)
    if closed is not None:
        return closed
    if fam.scale_family:
        # |I| scales as psi^-2 in (shape, scale) coordinates.
        return _unit_scale_log_det(fam.id, float(theta[0]), n, seed) - 2.0 * np.log(psi)
    return fisher_information_determinant(fam, n, ParameterPoint(tuple(theta), psi), m, seed).log_determinant


def _d_log_info_det(fam: ModelFamily, n, m, theta, psi, seed=0):
    closed = fam.d_log_info_det(n, m, theta, psi)
    if closed is not None:
        return closed
    if fam.scale_family:
        return -2.0 / psi
    h = 1e-5 * (1.0 + abs(psi))
    return (_log_info_det(fam, n, m, theta, psi + h, seed) - _log_info_det(fam, n, m, theta, psi - h, seed)) / (2 * h)


# ---------------------------------------------------------------------------
# MML87 objective
# ---------------------------------------------------------------------------


def _net_prior(fam, n, m, prior: PriorSpec, theta, psi, seed=0):
    """``log h - 0.5 log|I|``, written so that the Firth prior reduces to
    ``+0.5 log|I|`` with no cancelling arithmetic."""
    log_det = _log_info_det(fam, n, m, theta, psi, seed)
    if prior.kind is PriorKind.FIRTH_INFORMATION:
        return 0.5 * log_det
    if prior.kind is PriorKind.FLAT:
        return -0.5 * log_det
    if prior.kind is PriorKind.PSI_POWER_LAW:
        return prior.exponent * np.log(psi) - 0.5 * log_det
    return prior.log_prior(np.asarray(theta), psi) - 0.5 * log_det


def _net_prior_slope(fam, n, m, prior: PriorSpec, theta, psi, seed=0):
    d_log_det = _d_log_info_det(fam, n, m, theta, psi, seed)
    if prior.kind is PriorKind.FIRTH_INFORMATION:
        return 0.5 * d_log_det
    if prior.kind is PriorKind.FLAT:
        return -0.5 * d_log_det
    if prior.kind is PriorKind.PSI_POWER_LAW:
        return prior.exponent / psi - 0.5 * d_log_det
    h = 1e-5 * (1.0 + abs(psi))
    th = np.asarray(theta)
    slope = (prior.log_prior(th, psi + h) - prior.log_prior(th, psi - h)) / (2.0 * h)
    return slope - 0.5 * d_log_det


def mml87_objective(family, data: DataSet, prior: PriorSpec, params: ParameterPoint, seed: int = 0) -> float:
    fam, x, theta = _prepare(family, data, params)
    n, m = fam.sizes(x)
    ll = float(fam.loglik(x, theta, params.psi))
    return ll + float(_net_prior(fam, n, m, prior, theta, params.psi, seed))


def firth_objective(family, data: DataSet, params: ParameterPoint, seed: int = 0) -> float:
    """``log f + 0.5 log|I|``."""
    return mml87_objective(family, data, PriorSpec.firth(), params, seed)


def _psi_stationary(fam, x, theta, prior, seed, tol):
    """Maximise the objective over psi at fixed theta via its derivative."""
    n, m = fam.sizes(x)
    scale = float(x.size)

    # Normalised by psi / (number of observations) so tol is dimensionless.
    def g(psi):
        return (float(fam.score(x, theta, psi)) + float(_net_prior_slope(fam, n, m, prior, theta, psi, seed))) * psi / scale

    hint = _moment_hint(fam, x, theta)
    res = _solve_root(g, hint, tol)
    if not res.lower_value >= 0.0 >= res.upper_value:
        raise ConvergenceError(
            "stationary point of the MML87 objective is not a maximum",
            {"root": res.root, "lower": res.lower_value, "upper": res.upper_value},
        )
    return res.root, res.evaluations, g(res.root)


def _moment_hint(fam: ModelFamily, x: np.ndarray, theta) -> float:
    n, m = fam.sizes(x)
    if fam.closed_form:
        d = float(fam.form_d(x, theta))
        if d > 0.0:
            return float(fam.mle_from_y(d, n, m))
        return 1.0
    # Gamma: scale = mean / shape
    return float(np.mean(x)) / float(theta[0])


def mml87_estimate(
    family,
    data: DataSet,
    prior: PriorSpec = INV_SQRT_PSI_PRIOR,
    theta: Sequence[float] | None = None,
    tol: float = 1e-10,
    seed: int = 0,
) -> EstimateReport:
    """Maximise the MML87 objective over ``(theta, psi)``.

    Parameters
    ----------
    prior : PriorSpec
        Defaults to ``psi^-1/2``.
    theta : sequence of float, optional
        Known nuisance value; when omitted the nuisance is estimated.
    tol : float
        Tolerance on the normalised psi-derivative (and, for the Gamma shape,
        on the golden-section bracket in log-shape).
    seed : int
        Seed for finite-difference information (Gamma only).
    """
    fam, x, _ = _prepare(family, data)
    n, m = fam.sizes(x)
    if theta is not None:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        fam.validate_theta(theta, x.shape)
    elif fam.closed_form:
        theta = np.asarray(fam.theta_hat(x), dtype=float)

    if theta is not None:
        psi, evals, grad = _psi_stationary(fam, x, theta, prior, seed, tol)
        iterations = evals
    else:
        psi, theta, iterations, grad = _profile_shape(fam, x, prior, seed, tol)

    params = ParameterPoint(tuple(theta), psi)
    objective = mml87_objective(fam, DataSet(x), prior, params, seed)
    kind = EstimatorKind.FIRTH if prior.kind is PriorKind.FIRTH_INFORMATION else EstimatorKind.MML87
    return EstimateReport(
        estimator=kind,
        value=float(psi),
        theta=params.theta,
        iterations=int(iterations),
        converged=abs(grad) <= tol,
        objective_at_solution=objective,
        prior=prior.label,
        gradient=float(grad),
    )


def _profile_shape(fam: ModelFamily, x, prior, seed, tol, max_shifts=20):
    """Golden section in log-shape on the psi-profiled objective."""
    n, m = fam.sizes(x)
    mean, var = float(np.mean(x)), float(np.var(x))
    if not var > 0.0:
        raise ConvergenceError("cannot start shape search on constant data")
    center = math.log(mean * mean / var)
    cache: dict[float, tuple[float, float]] = {}

    def profile(log_k):
        theta = np.array([math.exp(log_k)])
        psi, _, _ = _psi_stationary(fam, x, theta, prior, seed, tol)
        value = float(fam.loglik(x, theta, psi)) + float(_net_prior(fam, n, m, prior, theta, psi, seed))
        cache[log_k] = (psi, value)
        return value

    half_width = 2.5
    total = 0
    for _ in range(max_shifts):
        a, b = center - half_width, center + half_width
        best, _, it = golden_section_maximize(profile, a, b, tol=max(tol, 1e-12))
        total += it
        if best - a > 1e-3 and b - best > 1e-3:
            break
        center = best
    else:
        raise ConvergenceError("shape search kept hitting the bracket edge", {"log_shape": best})
    theta = np.array([math.exp(best)])
    psi, _, grad = _psi_stationary(fam, x, theta, prior, seed, tol)
    return psi, theta, total, grad


def firth_corrected_estimate(family, data: DataSet, theta=None, tol: float = 1e-10, seed: int = 0) -> EstimateReport:
    """Maximiser of ``log f + 0.5 log|I|`` in the family's own parametrisation."""
    return mml87_estimate(family, data, PriorSpec.firth(), theta=theta, tol=tol, seed=seed)


def mumle_equivalent_prior(family, n: int, m: int = 1) -> PriorSpec:
    """Power-law prior ``|I|^{1/2} / phi(psi)`` under which MML87 reproduces MUMLE.

    Needs ``log|I|`` of the form ``c - q log psi`` and ``phi = psi^e``;
    the exponent is ``-q/2 - e``.
    """
    fam = get_family(family)
    d = fam.d_log_info_det(n, m, None, 1.0)
    if d is None or not fam.closed_form:
        raise UnsupportedOperationError(f"{fam.id.value} has no closed-form information and phi")
    q = -float(d)
    return PriorSpec.psi_power(-0.5 * q - fam.decomposition_exponent(n, m))


def decomposition_residual(family, data: DataSet, psi_grid: Sequence[float], exponent: float | None = None) -> float:
    """Spread over ``psi_grid`` of ``log f(x|theta_hat,psi) - log g_Y(y|psi) - log phi(psi)``.

    ``phi(psi) = psi^exponent``; by default the family's declared exponent.
    A spread near zero certifies that the difference depends on the data only.
    """
    fam, x, _ = _prepare(family, data)
    grid = np.asarray(psi_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise UsageError("psi grid needs at least three points")
    if np.any(grid <= 0.0):
        raise ParameterDomainError("psi grid must be positive")
    n, m = fam.sizes(x)
    if exponent is None:
        exponent = fam.decomposition_exponent(n, m)
    stat = updated_statistic(fam, DataSet(x))
    theta_hat = np.asarray(fam.theta_hat(x))
    r = [
        float(fam.loglik(x, theta_hat, psi)) - y_log_likelihood(stat, psi) - exponent * math.log(psi)
        for psi in grid
    ]
    return max(r) - min(r)


# ---------------------------------------------------------------------------
# Convenience front door
# ---------------------------------------------------------------------------


def estimate(family, data: DataSet, kind: EstimatorKind | str, prior: PriorSpec | None = None,
             theta=None, seed: int = 0) -> EstimateReport:
    """One estimator as an :class:`EstimateReport`."""
    kind = EstimatorKind(kind)
    fam = get_family(family)
    if kind is EstimatorKind.MLE:
        value = psi_mle(fam, data, theta)
        th = np.atleast_1d(theta) if theta is not None else fam.theta_hat(data.values)
        params = ParameterPoint(tuple(np.asarray(th, dtype=float)), value)
        return EstimateReport(kind, value, params.theta, 0, True,
                              float(fam.loglik(data.values, params.theta_array, value)))
    if kind is EstimatorKind.MUMLE:
        if theta is not None:
            raise UnsupportedOperationError("MUMLE is defined for an estimated nuisance only")
        value = psi_mumle(fam, data)
        stat = updated_statistic(fam, data)
        return EstimateReport(kind, value, tuple(np.asarray(fam.theta_hat(data.values), dtype=float)), 0, True,
                              y_log_likelihood(stat, value))
    if kind is EstimatorKind.FIRTH:
        return firth_corrected_estimate(fam, data, theta=theta, seed=seed)
    return mml87_estimate(fam, data, prior or INV_SQRT_PSI_PRIOR, theta=theta, seed=seed)


# ---------------------------------------------------------------------------
# Batched psi solve for Monte Carlo blocks
# ---------------------------------------------------------------------------


def batch_stationary_psi(fam: ModelFamily, d: np.ndarray, n: int, m: int, prior: PriorSpec,
                         iterations: int = 200) -> np.ndarray:
    """Vectorised MML87 psi for closed-form families from the score statistic.

    ``d`` is ``D(x, theta)`` per replicate (``Y`` when theta is estimated).
    Geometric bisection on the normalised derivative; entries without a sign
    change come back as nan.
    """
    if not fam.closed_form or prior.kind is PriorKind.CUSTOM:
        raise UnsupportedOperationError("batched solve needs a closed-form family and a non-custom prior")
    d = np.asarray(d, dtype=float)
    scale = float(n * m)

    def g(psi):
        slope = _net_prior_slope(fam, n, m, prior, None, psi)
        return (fam.profile_score(d, n, m, psi) + slope) * psi / scale

    with np.errstate(divide="ignore", invalid="ignore"):
        start = fam.mle_from_y(d, n, m)
        lo = start.copy()
        hi = start.copy()
        for _ in range(60):
            need = ~(g(lo) > 0.0)
            if not need.any():
                break
            lo = np.where(need, lo * 0.5, lo)
        for _ in range(60):
            need = ~(g(hi) < 0.0)
            if not need.any():
                break
            hi = np.where(need, hi * 2.0, hi)
        ok = (g(lo) > 0.0) & (g(hi) < 0.0) & np.isfinite(start) & (d > 0.0)
        for _ in range(iterations):
            mid = np.sqrt(lo * hi)
            gm = g(mid)
            lo = np.where(gm > 0.0, mid, lo)
            hi = np.where(gm > 0.0, hi, mid)
            if np.all((hi - lo) <= 2.0 * EPS * hi):
                break
        result = np.where(np.abs(g(lo)) <= np.abs(g(hi)), lo, hi)
    return np.where(ok, result, np.nan)
