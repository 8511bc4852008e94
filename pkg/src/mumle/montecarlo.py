"""Exact samplers and the replication engine.

Reproducibility scheme: replicate ``r`` belongs to block ``r // BLOCK_SIZE``
and is row ``r % BLOCK_SIZE`` of that block's draw. Each block owns a Philox
stream keyed by ``SeedSequence(seed, spawn_key=(block,))``, every block draws
a full ``BLOCK_SIZE`` rows, and estimates are written back by replicate index.
A replicate's data therefore depend only on ``(seed, r)``, never on the
number of replicates requested, the number of workers or their scheduling.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ExperimentIntegrityError,
    MumleError,
    ParameterDomainError,
    UnsupportedOperationError,
    UsageError,
)
from .estimators import (
    EstimatorKind,
    PriorKind,
    PriorSpec,
    INV_SQRT_PSI_PRIOR,
    batch_stationary_psi,
    mml87_estimate,
)
from .models import DataSet, Family, ModelFamily, ParameterPoint, get_family

BLOCK_SIZE = 1024
MAX_FAILURE_FRACTION = 0.01


def block_generator(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def shifted_exponential_from_uniform(u, theta, psi):
    return theta - psi * np.log(u)


def pareto_rate_from_uniform(u, theta, psi):
    return theta * u ** (-1.0 / psi)


def pareto_scale_from_uniform(u, theta, psi_star):
    return theta * u ** (-psi_star)


_INVERSE_CDF = {
    Family.SHIFTED_EXPONENTIAL: shifted_exponential_from_uniform,
    Family.PARETO_RATE: pareto_rate_from_uniform,
    Family.PARETO_SCALE: pareto_scale_from_uniform,
}


def _group_means(theta: np.ndarray, n: int) -> np.ndarray:
    if theta.size == 1:
        return np.full(n, theta[0])
    if theta.size != n:
        raise ParameterDomainError(f"neyman-scott needs 1 or {n} group means, got {theta.size}")
    return theta


def nuisance_vector(family, params: ParameterPoint, n: int) -> np.ndarray:
    """True nuisance vector for a sample of size ``n`` (group means broadcast)."""
    fam = get_family(family)
    theta = params.theta_array
    if fam.id is Family.NEYMAN_SCOTT:
        return _group_means(theta, n)
    fam.validate_theta(theta)
    return theta


def sample_batch(family, params: ParameterPoint, n: int, rng: np.random.Generator,
                 size: int, m: int = 2) -> np.ndarray:
    """``size`` independent samples stacked along a leading axis."""
    fam = get_family(family)
    if n < fam.min_n:
        raise UsageError(f"{fam.id.value} needs n >= {fam.min_n}")
    theta = nuisance_vector(fam, params, n)
    psi = params.psi
    if fam.id is Family.NORMAL:
        return theta[0] + math.sqrt(psi) * rng.standard_normal((size, n))
    if fam.id is Family.NEYMAN_SCOTT:
        if m < 2:
            raise UsageError("neyman-scott needs group size m >= 2")
        return theta[:, None] + math.sqrt(psi) * rng.standard_normal((size, n, m))
    if fam.id is Family.GAMMA:
        return rng.gamma(theta[0], psi, (size, n))
    # 1 - U lies in (0, 1], so log and negative powers stay finite.
    u = 1.0 - rng.random((size, n))
    return _INVERSE_CDF[fam.id](u, theta[0], psi)


def sample(family, params: ParameterPoint, n: int, rng: np.random.Generator, m: int = 2) -> DataSet:
    """One sample; identical to the first row of :func:`sample_batch` on the same state."""
    return DataSet(sample_batch(family, params, n, rng, 1, m)[0])


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorSpec:
    kind: EstimatorKind
    prior: PriorSpec | None = None

    @classmethod
    def parse(cls, text: str) -> "EstimatorSpec":
        """``mle``, ``mumle``, ``firth``, ``mml87`` or ``mml87:<prior>``."""
        name, _, prior = text.strip().lower().partition(":")
        try:
            kind = EstimatorKind(name)
        except ValueError:
            raise UsageError(f"unknown estimator {text!r}") from None
        if kind is EstimatorKind.MML87:
            return cls(kind, PriorSpec.parse(prior) if prior else INV_SQRT_PSI_PRIOR)
        if prior:
            raise UsageError(f"estimator {name} takes no prior")
        return cls(kind)

    @property
    def name(self) -> str:
        if self.kind is EstimatorKind.MML87:
            return f"mml87[{(self.prior or INV_SQRT_PSI_PRIOR).label}]"
        return self.kind.value

    @property
    def effective_prior(self) -> PriorSpec | None:
        if self.kind is EstimatorKind.FIRTH:
            return PriorSpec.firth()
        if self.kind is EstimatorKind.MML87:
            return self.prior or INV_SQRT_PSI_PRIOR
        return None


DEFAULT_ESTIMATORS = (EstimatorSpec(EstimatorKind.MLE), EstimatorSpec(EstimatorKind.MUMLE))


@dataclass(frozen=True)
class ExperimentConfig:
    family: Family
    true_params: ParameterPoint
    n: int
    replicates: int
    seed: int
    m: int = 2
    estimators: tuple[EstimatorSpec, ...] = DEFAULT_ESTIMATORS
    theta_known: bool = False

    def __post_init__(self):
        fam = get_family(self.family)
        object.__setattr__(self, "family", fam.id)
        object.__setattr__(self, "estimators", tuple(
            e if isinstance(e, EstimatorSpec) else EstimatorSpec.parse(e) for e in self.estimators
        ))
        if int(self.replicates) < 1:
            raise UsageError("replicates must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if int(self.n) < fam.min_n:
            raise UsageError(f"{fam.id.value} needs n >= {fam.min_n}")
        if fam.grouped and int(self.m) < 2:
            raise UsageError("neyman-scott needs m >= 2")
        if not self.estimators:
            raise UsageError("no estimators requested")
        names = [e.name for e in self.estimators]
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate estimators in {names}")
        nuisance_vector(fam, self.true_params, int(self.n))
        for e in self.estimators:
            if e.kind is EstimatorKind.MUMLE and self.theta_known:
                raise UsageError("mumle needs an estimated nuisance; drop theta_known")
            if not fam.closed_form and e.kind in (EstimatorKind.MLE, EstimatorKind.MUMLE):
                raise UnsupportedOperationError(f"{fam.id.value} supports only mml87 and firth")
            prior = e.effective_prior
            if prior is not None and prior.kind is PriorKind.CUSTOM:
                raise UsageError("custom priors cannot be used in experiments")
        if self.theta_known and not fam.closed_form:
            raise UnsupportedOperationError("theta_known needs a closed-form family")
        for name in ("n", "m", "replicates", "seed"):
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def group_size(self) -> int:
        return self.m if get_family(self.family).grouped else 1

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "theta": list(self.true_params.theta),
            "psi": self.true_params.psi,
            "n": self.n,
            "m": self.group_size,
            "replicates": self.replicates,
            "seed": self.seed,
            "estimators": [e.name for e in self.estimators],
            "theta_known": self.theta_known,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorSummary:
    name: str
    mean: float | None
    bias: float | None
    bias_se: float | None
    variance: float | None
    variance_se: float | None
    mse: float | None
    failures: int
    used: int


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    summaries: tuple[EstimatorSummary, ...]
    replicate_failures: int
    estimates: dict[str, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def summary(self, name: str) -> EstimatorSummary:
        for s in self.summaries:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "replicate_failures": self.replicate_failures,
            "estimators": [s.__dict__.copy() for s in self.summaries],
        }


def summarize(name: str, values: np.ndarray, truth: float) -> EstimatorSummary:
    """Moments of one estimator's replicate values (nan marks a failure).

    Sums use ``math.fsum``, which is exactly rounded and so independent of
    summation order.
    """
    ok = values[np.isfinite(values)]
    k = ok.size
    failures = int(values.size - k)
    if k == 0:
        return EstimatorSummary(name, None, None, None, None, None, None, failures, 0)
    mean = math.fsum(ok) / k
    mse = math.fsum((ok - truth) ** 2) / k
    bias_se = variance = variance_se = None
    if k >= 2:
        dev = ok - mean
        variance = math.fsum(dev * dev) / (k - 1)
        bias_se = math.sqrt(variance / k)
        if k >= 4:
            m4 = math.fsum(dev**4) / k
            variance_se = math.sqrt(max(m4 - variance * variance * (k - 3) / (k - 1), 0.0) / k)
    return EstimatorSummary(name, mean, mean - truth, bias_se, variance, variance_se, mse, failures, k)


def _estimate_block(config: ExperimentConfig, fam: ModelFamily, x: np.ndarray) -> np.ndarray:
    out = np.full((len(config.estimators), x.shape[0]), np.nan)
    n, m = config.n, config.group_size
    if not fam.closed_form:
        for j, e in enumerate(config.estimators):
            prior = e.effective_prior
            for i in range(x.shape[0]):
                try:
                    out[j, i] = mml87_estimate(fam, DataSet(x[i]), prior, seed=config.seed).value
                except MumleError:
                    pass
        return out

    if config.theta_known:
        theta = nuisance_vector(fam, config.true_params, n)
        d = fam.form_d(x, np.broadcast_to(theta, x.shape[:1] + theta.shape))
    else:
        d = fam.y_stat(x)
    d = np.where(d > 0.0, d, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j, e in enumerate(config.estimators):
            if e.kind is EstimatorKind.MLE:
                out[j] = fam.mle_from_y(d, n, m)
            elif e.kind is EstimatorKind.MUMLE:
                out[j] = fam.y_model(n, m).argmax(d)
            else:
                out[j] = batch_stationary_psi(fam, d, n, m, e.effective_prior)
    return out


def _block_data(config: ExperimentConfig, block: int) -> np.ndarray:
    rng = block_generator(config.seed, block)
    return sample_batch(config.family, config.true_params, config.n, rng, BLOCK_SIZE, config.m)


def replicate_dataset(config: ExperimentConfig, replicate: int) -> DataSet:
    """The exact data set used for replicate ``replicate`` of ``config``."""
    block, row = divmod(int(replicate), BLOCK_SIZE)
    return DataSet(_block_data(config, block)[row])


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Draw, estimate and summarise ``config.replicates`` data sets.

    Failed replicates (degenerate data, no convergence) are excluded from the
    moments and counted; more than 1% failures for any estimator raises
    :class:`ExperimentIntegrityError`.
    """
    fam = get_family(config.family)
    R = config.replicates
    n_blocks = -(-R // BLOCK_SIZE)
    estimates = np.full((len(config.estimators), R), np.nan)

    def work(block):
        start = block * BLOCK_SIZE
        count = min(BLOCK_SIZE, R - start)
        x = _block_data(config, block)[:count]
        estimates[:, start:start + count] = _estimate_block(config, fam, x)

    threads = max(1, int(threads))
    if threads == 1:
        for b in range(n_blocks):
            work(b)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(n_blocks)))

    truth = config.true_params.psi
    summaries = []
    for j, e in enumerate(config.estimators):
        s = summarize(e.name, estimates[j], truth)
        if s.failures > MAX_FAILURE_FRACTION * R:
            raise ExperimentIntegrityError(
                f"{e.name}: {s.failures} of {R} replicates failed (limit {MAX_FAILURE_FRACTION:.0%})"
            )
        summaries.append(s)
    failed = int(np.count_nonzero(~np.all(np.isfinite(estimates), axis=0)))
    return ExperimentResult(
        config=config,
        summaries=tuple(summaries),
        replicate_failures=failed,
        estimates={e.name: estimates[j] for j, e in enumerate(config.estimators)},
    )


@dataclass(frozen=True)
class Comparison:
    by_abs_bias: tuple[str, ...]
    by_mse: tuple[str, ...]
    dominance: tuple[tuple[str, str], ...]
    """Pairs ``(a, b)`` where ``a`` has both smaller |bias| and smaller variance."""


def compare_estimators(result: ExperimentResult) -> Comparison:
    rows = [s for s in result.summaries if s.bias is not None]
    by_bias = tuple(s.name for s in sorted(rows, key=lambda s: (abs(s.bias), s.name)))
    by_mse = tuple(s.name for s in sorted(rows, key=lambda s: (s.mse, s.name)))
    dominance = []
    for a in rows:
        for b in rows:
            if a is b or a.variance is None or b.variance is None:
                continue
            if abs(a.bias) < abs(b.bias) and a.variance < b.variance:
                dominance.append((a.name, b.name))
    return Comparison(by_bias, by_mse, tuple(dominance))
