"""Reference values computed without the package under test.

Densities come from scipy.stats, derivatives from sympy, expectations from
numerical quadrature over the exact sampling law of each estimator.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import sympy as sp
from scipy import integrate, special, stats

# ---------------------------------------------------------------------------
# log-likelihoods through scipy.stats
# ---------------------------------------------------------------------------


def loglik(family: str, x, theta, psi: float) -> float:
    x = np.asarray(x, dtype=float)
    if family == "normal":
        return float(stats.norm.logpdf(x, loc=theta[0], scale=math.sqrt(psi)).sum())
    if family == "neyman-scott":
        means = np.asarray(theta, dtype=float)[:, None]
        return float(stats.norm.logpdf(x, loc=means, scale=math.sqrt(psi)).sum())
    if family == "shifted-exponential":
        return float(stats.expon.logpdf(x, loc=theta[0], scale=psi).sum())
    if family == "pareto-rate":
        return float(stats.pareto.logpdf(x, b=psi, scale=theta[0]).sum())
    if family == "pareto-scale":
        return float(stats.pareto.logpdf(x, b=1.0 / psi, scale=theta[0]).sum())
    if family == "gamma-two-param":
        return float(stats.gamma.logpdf(x, a=theta[0], scale=psi).sum())
    raise KeyError(family)


# ---------------------------------------------------------------------------
# psi-derivatives through sympy
# ---------------------------------------------------------------------------

_x, _t, _p = sp.symbols("x theta psi", real=True)
_y = sp.symbols("y", positive=True)

_PER_OBS = {
    "normal": -sp.log(2 * sp.pi * _p) / 2 - (_x - _t) ** 2 / (2 * _p),
    "neyman-scott": -sp.log(2 * sp.pi * _p) / 2 - (_x - _t) ** 2 / (2 * _p),
    "shifted-exponential": -sp.log(_p) - (_x - _t) / _p,
    "pareto-rate": sp.log(_p) + _p * sp.log(_t) - (_p + 1) * sp.log(_x),
    "pareto-scale": -sp.log(_p) + sp.log(_t) / _p - (1 / _p + 1) * sp.log(_x),
    "gamma-two-param": (_t - 1) * sp.log(_x) - _x / _p - _t * sp.log(_p) - sp.loggamma(_t),
}


@lru_cache(maxsize=None)
def _score_fn(family: str):
    return sp.lambdify((_x, _t, _p), sp.diff(_PER_OBS[family], _p), "numpy")


def score(family: str, x, theta, psi: float) -> float:
    x = np.asarray(x, dtype=float)
    th = np.asarray(theta, dtype=float)
    if family == "neyman-scott":
        th = th[:, None]
    else:
        th = th[0]
    return float(np.sum(np.broadcast_to(_score_fn(family)(x, th, psi), x.shape)))


def firth_normal_root(n: int, y: float) -> float:
    """Stationary point of log f(x|xbar, psi) + 1/2 log(2 n^2 / psi^2)."""
    obj = -n * sp.log(_p) / 2 - _y / (2 * _p) + sp.log(2 * n**2 / _p**2) / 2
    roots = [r for r in sp.solve(sp.diff(obj, _p), _p) if r.is_positive is not False]
    (root,) = roots
    return float(root.subs(_y, y))


# ---------------------------------------------------------------------------
# information
# ---------------------------------------------------------------------------


def gamma_info_det(shape: float, scale: float, n: int) -> float:
    """|I| for n iid Gamma(shape, scale) observations."""
    per_obs = (shape * special.polygamma(1, shape) - 1.0) / scale**2
    return float(n * n * per_obs)


# ---------------------------------------------------------------------------
# expectations over exact sampling laws
# ---------------------------------------------------------------------------


def expect(fn, dist) -> float:
    """E fn(Y) by adaptive quadrature over the support of ``dist``."""
    lo, hi = dist.support()
    val, _ = integrate.quad(lambda y: fn(y) * dist.pdf(y), lo, hi, limit=400, epsabs=1e-13, epsrel=1e-11)
    return val


def sum_sq_law(n_free: int, psi: float):
    """Law of a residual sum of squares with ``n_free`` degrees of freedom."""
    return stats.chi2(df=n_free, scale=psi)


def spacings_sum_law(n: int, psi: float):
    """Law of sum(X_i - X_(1)) for n exponential(scale psi) draws.

    Normalised spacings are iid exponential, so the sum is Gamma(n-1).
    """
    return stats.gamma(a=n - 1, scale=psi)


def pareto_log_spacings_law(n: int, rate: float):
    return stats.gamma(a=n - 1, scale=1.0 / rate)


def exponential_sum_law(n: int, rate: float):
    return stats.gamma(a=n, scale=1.0 / rate)


def moments(fn, dist) -> tuple[float, float]:
    """Mean and variance of fn(Y)."""
    m1 = expect(fn, dist)
    m2 = expect(lambda y: fn(y) ** 2, dist)
    return m1, m2 - m1 * m1
