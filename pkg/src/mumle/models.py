"""Likelihood machinery for the six model families.

Every family works on numpy arrays whose trailing axes hold one sample:
``(..., n)`` for flat data and ``(..., n, m)`` for grouped data. Leading axes
are batch axes, which is how the Monte Carlo engine evaluates a whole block of
replicates at once. The public functions at the bottom of the module accept a
single :class:`DataSet` and return plain floats.

Parameter naming: ``theta`` is the nuisance vector, ``psi`` the positive
interest parameter (a variance, scale or rate depending on the family).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import (
    DataShapeError,
    DegenerateSampleError,
    ParameterDomainError,
    SupportError,
    UnsupportedOperationError,
)

LOG_2PI = math.log(2.0 * math.pi)


class Family(str, enum.Enum):
    NORMAL = "normal"
    NEYMAN_SCOTT = "neyman-scott"
    SHIFTED_EXPONENTIAL = "shifted-exponential"
    PARETO_RATE = "pareto-rate"
    PARETO_SCALE = "pareto-scale"
    GAMMA = "gamma-two-param"


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterPoint:
    """Nuisance vector ``theta`` and interest parameter ``psi > 0``."""

    theta: tuple[float, ...]
    psi: float

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if theta.ndim != 1 or theta.size == 0:
            raise ParameterDomainError("theta must be a non-empty vector")
        if not np.all(np.isfinite(theta)):
            raise ParameterDomainError("theta must be finite")
        psi = float(self.psi)
        if not math.isfinite(psi) or psi <= 0.0:
            raise ParameterDomainError(f"psi must be positive and finite, got {self.psi!r}")
        object.__setattr__(self, "theta", tuple(float(t) for t in theta))
        object.__setattr__(self, "psi", psi)

    @property
    def theta_array(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)

    def with_psi(self, psi: float) -> "ParameterPoint":
        return ParameterPoint(self.theta, psi)


@dataclass(frozen=True, eq=False)
class DataSet:
    """Flat ``(n,)`` or grouped ``(n, m)`` observations, stored read-only."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim not in (1, 2):
            raise DataShapeError("data must be a vector or a list of equal-size groups")
        if values.size == 0:
            raise DataShapeError("data is empty")
        if not np.all(np.isfinite(values)):
            raise DataShapeError("data contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def flat(cls, observations: Sequence[float]) -> "DataSet":
        values = np.asarray(observations, dtype=float)
        if values.ndim != 1:
            raise DataShapeError("flat data must be one-dimensional")
        return cls(values)

    @classmethod
    def grouped(cls, groups: Sequence[Sequence[float]]) -> "DataSet":
        sizes = {len(g) for g in groups}
        if len(groups) == 0:
            raise DataShapeError("no groups given")
        if len(sizes) != 1:
            raise DataShapeError(f"groups must share one size, got sizes {sorted(sizes)}")
        return cls(np.asarray([list(g) for g in groups], dtype=float))

    @property
    def is_grouped(self) -> bool:
        return self.values.ndim == 2

    @property
    def n(self) -> int:
        """Number of observations (flat) or of groups (grouped)."""
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1] if self.is_grouped else 1

    def __len__(self):
        return self.values.size

    def __repr__(self):
        layout = f"grouped {self.n}x{self.m}" if self.is_grouped else f"flat n={self.n}"
        return f"DataSet({layout})"


@dataclass(frozen=True)
class LinearScoreForm:
    """Coefficients of a score of the form ``(C psi + D) / (A psi^2)``.

    ``C`` is a negative constant (``-n`` or ``-n m``), ``D`` a nonnegative
    data statistic evaluated at a given ``theta``. The data-only term of the
    log-density never enters estimation.
    """

    A: float
    C: float
    D: float

    def score(self, psi):
        return (self.C * psi + self.D) / (self.A * psi * psi)

    def log_density_kernel(self, psi):
        return (self.C / self.A) * np.log(psi) - self.D / (self.A * psi)


class YModelKind(str, enum.Enum):
    SCALED_CHI_SQUARE = "scaled-chi-square"
    GAMMA_SHAPE_SCALE = "gamma-shape-scale"
    GAMMA_SHAPE_RATE = "gamma-shape-rate"


@dataclass(frozen=True)
class YModel:
    """Exact one-parameter law of the updated statistic.

    ``shape`` is the degrees of freedom ``k`` for the scaled chi-square
    (``Y = psi * chi2_k``) and the Gamma shape otherwise.
    """

    kind: YModelKind
    shape: float

    def logpdf(self, y, psi):
        y = np.asarray(y, dtype=float)
        psi = np.asarray(psi, dtype=float)
        a = self.shape
        if self.kind is YModelKind.SCALED_CHI_SQUARE:
            half = 0.5 * a
            return (
                -half * math.log(2.0)
                - gammaln(half)
                + (half - 1.0) * np.log(y)
                - y / (2.0 * psi)
                - half * np.log(psi)
            )
        if self.kind is YModelKind.GAMMA_SHAPE_SCALE:
            return -gammaln(a) - a * np.log(psi) + (a - 1.0) * np.log(y) - y / psi
        return -gammaln(a) + a * np.log(psi) + (a - 1.0) * np.log(y) - psi * y

    def score(self, y, psi):
        """Derivative of :meth:`logpdf` in ``psi``."""
        a = self.shape
        if self.kind is YModelKind.SCALED_CHI_SQUARE:
            return (-a * psi + y) / (2.0 * psi * psi)
        if self.kind is YModelKind.GAMMA_SHAPE_SCALE:
            return (-a * psi + y) / (psi * psi)
        return a / psi - y

    def argmax(self, y):
        if self.kind is YModelKind.GAMMA_SHAPE_RATE:
            return self.shape / y
        return y / self.shape

    def mean(self, psi: float) -> float:
        if self.kind is YModelKind.GAMMA_SHAPE_RATE:
            return self.shape / psi
        return self.shape * psi

    def variance(self, psi: float) -> float:
        a = self.shape
        if self.kind is YModelKind.SCALED_CHI_SQUARE:
            return 2.0 * a * psi * psi
        if self.kind is YModelKind.GAMMA_SHAPE_SCALE:
            return a * psi * psi
        return a / (psi * psi)


@dataclass(frozen=True)
class UpdatedStatistic:
    y: float
    dof_or_shape: float
    y_model: YModel


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


class ModelFamily:
    """Base class. Subclasses implement the array-level methods.

    Attributes
    ----------
    id : Family
    grouped : bool
        Whether data come as ``n`` groups of ``m``.
    min_n : int
        Minimum number of observations (flat) or groups (grouped).
    closed_form : bool
        Closed-form nuisance MLE, psi-MLE, Y statistic and Y model exist.
    has_score_form : bool
        The psi-score is ``(C psi + D) / (A psi^2)``.
    pathology_sign : int
        Sign of ``E U_psi(x, theta_hat, psi)`` under the family's own score.
    decomposition_exponent
        ``e`` such that ``log f(x|theta_hat, psi) - log g_Y(y|psi)`` equals
        ``e log psi`` plus a data-only term.
    """

    id: Family
    grouped = False
    min_n = 2
    closed_form = True
    has_score_form = True
    pathology_sign = -1
    scale_family = False
    A: float = 1.0

    # -- validation -------------------------------------------------------

    def validate_values(self, x: np.ndarray, for_estimation: bool = True) -> None:
        """Shape and support checks; the minimum size applies only to estimation."""
        if self.grouped:
            if x.ndim != 2:
                raise DataShapeError(f"{self.id.value} needs grouped data (blank-line separated blocks)")
            if x.shape[0] < 1 or x.shape[1] < 2:
                raise DataShapeError(f"{self.id.value} needs at least one group of size >= 2")
        else:
            if x.ndim != 1:
                raise DataShapeError(f"{self.id.value} needs flat data")
            if for_estimation and x.shape[0] < self.min_n:
                raise DataShapeError(
                    f"{self.id.value} needs at least {self.min_n} observations, got {x.shape[0]}"
                )
        self._check_support(x)

    def _check_support(self, x: np.ndarray) -> None:
        pass

    def validate_theta(self, theta: np.ndarray, x_shape: tuple[int, ...] | None = None) -> None:
        if theta.shape != (1,):
            raise ParameterDomainError(f"{self.id.value} takes a scalar theta, got length {theta.size}")

    def sizes(self, x: np.ndarray) -> tuple[int, int]:
        if self.grouped:
            return x.shape[-2], x.shape[-1]
        return x.shape[-1], 1

    def nuisance_dim(self, n: int) -> int:
        return 1

    # -- likelihood -------------------------------------------------------

    def loglik(self, x, theta, psi):
        raise NotImplementedError

    def score(self, x, theta, psi):
        raise NotImplementedError

    def support_ok(self, x, theta):
        sample_axes = 2 if self.grouped else 1
        return np.ones(np.shape(x)[:-sample_axes], dtype=bool)

    def theta_hat(self, x):
        raise UnsupportedOperationError(f"{self.id.value} has no closed-form nuisance MLE")

    def form_d(self, x, theta):
        raise UnsupportedOperationError(f"{self.id.value} has no linear score form")

    def form_c(self, n: int, m: int) -> float:
        raise UnsupportedOperationError(f"{self.id.value} has no linear score form")

    # -- updated statistic ---------------------------------------------------

    def y_stat(self, x):
        return self.form_d(x, self.theta_hat(x))

    def y_model(self, n: int, m: int) -> YModel:
        raise UnsupportedOperationError(f"{self.id.value} has no closed-form Y model")

    def mle_from_y(self, y, n: int, m: int):
        return y / (-self.form_c(n, m))

    def profile_score(self, y, n: int, m: int, psi):
        """psi-score at the nuisance MLE, written through ``y`` alone."""
        return (self.form_c(n, m) * psi + y) / (self.A * psi * psi)

    def decomposition_exponent(self, n: int, m: int) -> float:
        raise UnsupportedOperationError(f"{self.id.value} has no declared phi(psi)")

    # -- information ----------------------------------------------------------

    def log_info_det(self, n: int, m: int, theta, psi):
        """Closed-form log-determinant of the information, or None."""
        return None

    def d_log_info_det(self, n: int, m: int, theta, psi):
        """Derivative of :meth:`log_info_det` in ``psi``."""
        return None


class NormalMeanVar(ModelFamily):
    """i.i.d. N(theta, psi); psi is the variance."""

    id = Family.NORMAL
    A = 2.0

    def loglik(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)
        r = x - np.asarray(theta)[..., 0:1]
        terms = -0.5 * LOG_2PI - 0.5 * np.log(psi)[..., None] - r * r / (2.0 * psi[..., None])
        return np.sum(terms, axis=-1)

    def score(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        r = x - np.asarray(theta)[..., 0:1]
        return np.sum(-0.5 / psi + r * r / (2.0 * psi * psi), axis=-1)

    def theta_hat(self, x):
        return np.mean(x, axis=-1)[..., None]

    def form_d(self, x, theta):
        r = x - np.asarray(theta)[..., 0:1]
        return np.sum(r * r, axis=-1)

    def form_c(self, n, m):
        return -float(n)

    def y_model(self, n, m):
        return YModel(YModelKind.SCALED_CHI_SQUARE, n - 1.0)

    def decomposition_exponent(self, n, m):
        return -0.5

    # Determinant in (mean, standard deviation) coordinates: (n/psi)(2n/psi).
    def log_info_det(self, n, m, theta, psi):
        return math.log(2.0) + 2.0 * math.log(n) - 2.0 * np.log(psi)

    def d_log_info_det(self, n, m, theta, psi):
        return -2.0 / psi


class NeymanScott(ModelFamily):
    """n groups of m normals; group means theta_i, common variance psi."""

    id = Family.NEYMAN_SCOTT
    grouped = True
    min_n = 1
    A = 2.0

    def validate_theta(self, theta, x_shape=None):
        if x_shape is not None and theta.shape != (x_shape[0],):
            raise ParameterDomainError(
                f"neyman-scott needs one theta per group ({x_shape[0]}), got {theta.size}"
            )

    def nuisance_dim(self, n):
        return n

    def loglik(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None, None]
        r = x - np.asarray(theta)[..., :, None]
        terms = -0.5 * LOG_2PI - 0.5 * np.log(psi) - r * r / (2.0 * psi)
        return np.sum(np.sum(terms, axis=-1), axis=-1)

    def score(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None, None]
        r = x - np.asarray(theta)[..., :, None]
        return np.sum(np.sum(-0.5 / psi + r * r / (2.0 * psi * psi), axis=-1), axis=-1)

    def theta_hat(self, x):
        return np.mean(x, axis=-1)

    def form_d(self, x, theta):
        r = x - np.asarray(theta)[..., :, None]
        return np.sum(np.sum(r * r, axis=-1), axis=-1)

    def form_c(self, n, m):
        return -float(n * m)

    def y_model(self, n, m):
        return YModel(YModelKind.SCALED_CHI_SQUARE, float(n * (m - 1)))

    def decomposition_exponent(self, n, m):
        return -0.5 * n

    # Same (mean, standard deviation) coordinates as NormalMeanVar:
    # (m/psi)^n for the group means times 2nm/psi for the deviation.
    def log_info_det(self, n, m, theta, psi):
        return n * math.log(m) + math.log(2.0 * n * m) - (n + 1.0) * np.log(psi)

    def d_log_info_det(self, n, m, theta, psi):
        return -(n + 1.0) / psi


class _ThresholdFamily(ModelFamily):
    """Families whose support starts at theta; theta_hat is the sample minimum.

    The information here is the psi-block only: theta is a support endpoint
    and has no regular Fisher information.
    """

    def support_ok(self, x, theta):
        return np.all(x >= np.asarray(theta)[..., 0:1], axis=-1)

    def theta_hat(self, x):
        return np.min(x, axis=-1)[..., None]

    def log_info_det(self, n, m, theta, psi):
        return math.log(n) - 2.0 * np.log(psi)

    def d_log_info_det(self, n, m, theta, psi):
        return -2.0 / psi


class ShiftedExponential(_ThresholdFamily):
    """Density psi^-1 exp(-(w - theta)/psi) on [theta, inf); theta real."""

    id = Family.SHIFTED_EXPONENTIAL

    def loglik(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)
        r = x - np.asarray(theta)[..., 0:1]
        value = np.sum(-np.log(psi)[..., None] - r / psi[..., None], axis=-1)
        return np.where(self.support_ok(x, theta), value, -np.inf)

    def score(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        r = x - np.asarray(theta)[..., 0:1]
        return np.sum(-1.0 / psi + r / (psi * psi), axis=-1)

    def form_d(self, x, theta):
        return np.sum(x - np.asarray(theta)[..., 0:1], axis=-1)

    def form_c(self, n, m):
        return -float(n)

    def y_model(self, n, m):
        return YModel(YModelKind.GAMMA_SHAPE_SCALE, n - 1.0)

    def decomposition_exponent(self, n, m):
        return -1.0


class _ParetoBase(_ThresholdFamily):
    def _check_support(self, x):
        if np.any(x <= 0.0):
            raise SupportError(f"{self.id.value} observations must be strictly positive")

    def validate_theta(self, theta, x_shape=None):
        super().validate_theta(theta, x_shape)
        if theta[0] <= 0.0:
            raise ParameterDomainError(f"{self.id.value} needs theta > 0, got {theta[0]!r}")

    def form_d(self, x, theta):
        return np.sum(np.log(x / np.asarray(theta)[..., 0:1]), axis=-1)


class ParetoRate(_ParetoBase):
    """Pareto with scale theta and shape (tail index) psi."""

    id = Family.PARETO_RATE
    has_score_form = False
    pathology_sign = 1

    def loglik(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        log_theta = np.log(np.asarray(theta)[..., 0:1])
        value = np.sum(np.log(psi) + psi * log_theta - (psi + 1.0) * np.log(x), axis=-1)
        return np.where(self.support_ok(x, theta), value, -np.inf)

    def score(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        log_theta = np.log(np.asarray(theta)[..., 0:1])
        return np.sum(1.0 / psi + log_theta - np.log(x), axis=-1)

    def form_c(self, n, m):
        raise UnsupportedOperationError("pareto-rate score is n/psi - D, not a linear form")

    def y_model(self, n, m):
        return YModel(YModelKind.GAMMA_SHAPE_RATE, n - 1.0)

    def mle_from_y(self, y, n, m):
        return n / y

    def profile_score(self, y, n, m, psi):
        return n / psi - y

    def decomposition_exponent(self, n, m):
        return 1.0


class ParetoScaleParam(_ParetoBase):
    """Pareto parametrised by psi* = 1 / shape."""

    id = Family.PARETO_SCALE

    def loglik(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        log_theta = np.log(np.asarray(theta)[..., 0:1])
        inv = 1.0 / psi
        value = np.sum(-np.log(psi) + inv * log_theta - (inv + 1.0) * np.log(x), axis=-1)
        return np.where(self.support_ok(x, theta), value, -np.inf)

    def score(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        log_theta = np.log(np.asarray(theta)[..., 0:1])
        return np.sum(-1.0 / psi + (np.log(x) - log_theta) / (psi * psi), axis=-1)

    def form_c(self, n, m):
        return -float(n)

    def y_model(self, n, m):
        return YModel(YModelKind.GAMMA_SHAPE_SCALE, n - 1.0)

    def decomposition_exponent(self, n, m):
        return -1.0


class GammaTwoParam(ModelFamily):
    """Gamma with shape theta and scale psi; no Y model, numeric paths only."""

    id = Family.GAMMA
    closed_form = False
    has_score_form = False
    pathology_sign = 0
    scale_family = True

    def _check_support(self, x):
        if np.any(x <= 0.0):
            raise SupportError("gamma-two-param observations must be strictly positive")

    def validate_theta(self, theta, x_shape=None):
        super().validate_theta(theta, x_shape)
        if theta[0] <= 0.0:
            raise ParameterDomainError(f"gamma shape must be positive, got {theta[0]!r}")

    def loglik(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        k = np.asarray(theta)[..., 0:1]
        terms = -gammaln(k) - k * np.log(psi) + (k - 1.0) * np.log(x) - x / psi
        return np.sum(terms, axis=-1)

    def score(self, x, theta, psi):
        psi = np.asarray(psi, dtype=float)[..., None]
        k = np.asarray(theta)[..., 0:1]
        return np.sum(-k / psi + x / (psi * psi), axis=-1)

    def y_stat(self, x):
        raise UnsupportedOperationError("gamma-two-param has no accessible updated statistic")

    def mle_from_y(self, y, n, m):
        raise UnsupportedOperationError("gamma-two-param has no closed-form MLE")

    def profile_score(self, y, n, m, psi):
        raise UnsupportedOperationError("gamma-two-param has no profile score in Y")


FAMILIES: dict[Family, ModelFamily] = {
    f.id: f
    for f in (
        NormalMeanVar(),
        NeymanScott(),
        ShiftedExponential(),
        ParetoRate(),
        ParetoScaleParam(),
        GammaTwoParam(),
    )
}

LINEAR_FORM_FAMILIES = tuple(f for f, fam in FAMILIES.items() if fam.has_score_form)
CLOSED_FORM_FAMILIES = tuple(f for f, fam in FAMILIES.items() if fam.closed_form)


def get_family(family: Family | str | ModelFamily) -> ModelFamily:
    if isinstance(family, ModelFamily):
        return family
    try:
        return FAMILIES[Family(family)]
    except ValueError:
        names = ", ".join(f.value for f in Family)
        raise UnsupportedOperationError(f"unknown family {family!r}; choose one of {names}") from None


# ---------------------------------------------------------------------------
# Public scalar API
# ---------------------------------------------------------------------------


def _prepare(family, data: DataSet, params: ParameterPoint | None = None):
    fam = get_family(family)
    if not isinstance(data, DataSet):
        data = DataSet(data)
    x = data.values
    fam.validate_values(x, for_estimation=params is None)
    theta = None
    if params is not None:
        theta = params.theta_array
        fam.validate_theta(theta, x.shape)
    return fam, x, theta


def log_likelihood(family, data: DataSet, params: ParameterPoint) -> float:
    """Exact log-density of the whole sample, normalising constants included.

    Returns ``-inf`` when an observation falls outside the support implied by
    ``params`` (for example a Pareto observation below ``theta``).
    """
    fam, x, theta = _prepare(family, data, params)
    return float(fam.loglik(x, theta, params.psi))


def psi_score(family, data: DataSet, params: ParameterPoint) -> float:
    fam, x, theta = _prepare(family, data, params)
    if not bool(fam.support_ok(x, theta)):
        raise SupportError("score undefined: an observation lies below theta")
    return float(fam.score(x, theta, params.psi))


def nuisance_mle(family, data: DataSet) -> np.ndarray:
    fam, x, _ = _prepare(family, data)
    return np.asarray(fam.theta_hat(x), dtype=float)


def linear_score_form(family, data: DataSet, theta: Sequence[float]) -> LinearScoreForm:
    fam, x, _ = _prepare(family, data)
    if not fam.has_score_form:
        raise UnsupportedOperationError(f"{fam.id.value} has no linear score form")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    fam.validate_theta(theta, x.shape)
    n, m = fam.sizes(x)
    return LinearScoreForm(A=fam.A, C=fam.form_c(n, m), D=float(fam.form_d(x, theta)))


def _nondegenerate_y(fam: ModelFamily, x: np.ndarray) -> float:
    y = float(fam.y_stat(x))
    if not y > 0.0:
        raise DegenerateSampleError("updated statistic is zero: all observations are equal")
    return y


def updated_statistic(family, data: DataSet) -> UpdatedStatistic:
    fam, x, _ = _prepare(family, data)
    if not fam.closed_form:
        raise UnsupportedOperationError(f"{fam.id.value} has no accessible updated statistic")
    y = _nondegenerate_y(fam, x)
    model = fam.y_model(*fam.sizes(x))
    return UpdatedStatistic(y=y, dof_or_shape=model.shape, y_model=model)


def y_log_likelihood(stat: UpdatedStatistic, psi: float) -> float:
    if not psi > 0.0:
        raise ParameterDomainError(f"psi must be positive, got {psi!r}")
    return float(stat.y_model.logpdf(stat.y, psi))


def y_score(stat: UpdatedStatistic, psi: float) -> float:
    if not psi > 0.0:
        raise ParameterDomainError(f"psi must be positive, got {psi!r}")
    return float(stat.y_model.score(stat.y, psi))


def psi_mle(family, data: DataSet, theta: Sequence[float] | None = None) -> float:
    """Closed-form first-stage MLE of psi.

    With ``theta`` given the nuisance is treated as known and the MLE solves
    the score equation at that value instead of at the nuisance MLE.
    """
    fam, x, _ = _prepare(family, data)
    if not fam.closed_form:
        raise UnsupportedOperationError(f"{fam.id.value} has no closed-form MLE")
    n, m = fam.sizes(x)
    if theta is None:
        d = _nondegenerate_y(fam, x)
    else:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        fam.validate_theta(theta, x.shape)
        if not bool(fam.support_ok(x, theta)):
            raise SupportError("an observation lies below the known theta")
        d = float(fam.form_d(x, theta))
        if not d > 0.0:
            raise DegenerateSampleError("score statistic is zero at the known theta")
    return float(fam.mle_from_y(d, n, m))


def psi_mumle(family, data: DataSet) -> float:
    """Maximiser of the exact likelihood of the updated statistic."""
    stat = updated_statistic(family, data)
    return float(stat.y_model.argmax(stat.y))
