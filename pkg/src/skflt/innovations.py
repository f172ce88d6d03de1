"""Stationary innovation sequences and Monte Carlo checks of dependence conditions.

Two generators are provided:

* ``iid``: independent two-sided Pareto draws.
* ``gauss_copula_ar``: a stationary Gaussian AR(1) ``G`` pushed through
  ``F^{-1}(Phi(G))``, where ``F`` is the Pareto law. The marginals are exactly
  the Pareto law. Gaussian AR(1) is geometrically rho-mixing, so its
  correlations summed at lags ``2**i`` are finite. Its extremes are
  asymptotically independent whenever ``|phi| < 1``.

Mixing coefficients themselves are not estimated. The known rates above are
what the dependence conditions rely on; the diagnostics here check them
empirically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter
from scipy.special import ndtr

from . import tail_model
from ._replicates import as_generator, map_replicates
from .tail_model import TailParams

__all__ = [
    "IID",
    "GAUSS_COPULA_AR",
    "InnovationModel",
    "InnovationWindow",
    "Estimate",
    "generate",
    "dprime_estimate",
    "dprime_iid_closed_form",
    "vsv_estimate",
    "truncated_max_moment_estimate",
]

IID = "iid"
GAUSS_COPULA_AR = "gauss_copula_ar"
_KINDS = (IID, GAUSS_COPULA_AR)


class Estimate(NamedTuple):
    """Monte Carlo estimate with its standard error."""

    value: float
    std_error: float


@dataclass(frozen=True)
class InnovationModel:
    kind: str
    tail: TailParams
    ar_coefficient: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown innovation kind {self.kind!r}; expected one of {_KINDS}")
        if not isinstance(self.tail, TailParams):
            raise TypeError("tail must be a TailParams instance")
        if self.kind == GAUSS_COPULA_AR and not -1.0 < self.ar_coefficient < 1.0:
            raise ValueError(f"ar_coefficient must lie in (-1, 1), got {self.ar_coefficient}")
        if self.kind == IID and self.ar_coefficient != 0.0:
            raise ValueError("ar_coefficient only applies to gauss_copula_ar")


@dataclass(frozen=True)
class InnovationWindow:
    """Values ``Z_{1-h}, ..., Z_n`` stored contiguously."""

    values: np.ndarray
    n: int
    h: int

    def __post_init__(self):
        if len(self.values) != self.n + self.h:
            raise ValueError(f"window holds {len(self.values)} values, expected n + h = {self.n + self.h}")

    def z(self, i):
        """``Z_i`` for time index ``i`` (scalar or array) in ``1-h .. n``."""
        i = np.asarray(i)
        if np.any(i < 1 - self.h) or np.any(i > self.n):
            raise IndexError(f"time index outside {1 - self.h}..{self.n}")
        out = self.values[i - 1 + self.h]
        return out.item() if out.ndim == 0 else out

    @property
    def observed(self) -> np.ndarray:
        """``Z_1, ..., Z_n``."""
        return self.values[self.h:]


def _gaussian_ar1(phi: float, size: int, rng: np.random.Generator) -> np.ndarray:
    e = rng.standard_normal(size)
    # start in the stationary N(0, 1) law; later shocks carry variance 1 - phi^2
    e[1:] *= math.sqrt(1.0 - phi * phi)
    return lfilter([1.0], [1.0, -phi], e)


def _draw(model: InnovationModel, size: int, rng: np.random.Generator) -> np.ndarray:
    if model.kind == IID:
        return tail_model.sample_innovations(model.tail, size, rng)
    g = _gaussian_ar1(model.ar_coefficient, size, rng)
    return tail_model.ppf(model.tail, ndtr(g), upper=ndtr(-g))


def generate(model: InnovationModel, n: int, prehistory: int = 0, seed=None) -> InnovationWindow:
    """Stationary window ``Z_{1-prehistory}, ..., Z_n``; deterministic in ``seed``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if prehistory < 0:
        raise ValueError(f"prehistory must be nonnegative, got {prehistory}")
    values = _draw(model, n + prehistory, as_generator(seed))
    return InnovationWindow(values=np.asarray(values, dtype=float), n=n, h=prehistory)


def _summarize(stats) -> Estimate:
    stats = np.asarray(stats, dtype=float)
    if stats.size < 2:
        return Estimate(float(stats.mean()), math.nan)
    return Estimate(float(stats.mean()), float(stats.std(ddof=1) / math.sqrt(stats.size)))


def _check_reps(reps: int):
    if reps < 1:
        raise ValueError(f"reps must be a positive integer, got {reps}")


def dprime_iid_closed_form(tail: TailParams, n: int, k: int, x: float) -> float:
    """``n * floor(n/k) * P(|Z| > a_n x)**2`` under independence."""
    a_n = tail_model.norming_constant(tail, n)
    return n * (n // k) * tail_model.exact_tail_probability(tail, a_n * x) ** 2


def dprime_estimate(
    model: InnovationModel, n: int, k: int, x: float, reps: int, seed: int = 0
) -> Estimate:
    """Estimate ``n * sum_{i=1}^{floor(n/k)} P(|Z_0| > a_n x, |Z_i| > a_n x)``.

    Each replicate draws ``Z_0, ..., Z_{n-1+m}`` with ``m = floor(n/k)`` and
    averages the joint exceedance over the ``n`` start positions. This uses
    stationarity. Multiplied by ``n``, the replicate statistic is just the
    number of exceedance pairs ``(j, j+i)`` with ``j < n`` and ``1 <= i <= m``.
    """
    _check_reps(reps)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..n, got k={k}, n={n}")
    m = n // k
    threshold = tail_model.norming_constant(model.tail, n) * x

    def one(_, ss):
        z = _draw(model, n + m, np.random.default_rng(ss))
        idx = np.flatnonzero(np.abs(z) > threshold)
        starts = idx[idx < n]
        if starts.size == 0:
            return 0.0
        hi = np.searchsorted(idx, starts + m, side="right")
        lo = np.searchsorted(idx, starts, side="right")
        return float(np.sum(hi - lo))

    return _summarize(map_replicates(one, reps, seed, ("dprime", n, k, x)))


def vsv_estimate(
    model: InnovationModel, n: int, u: float, eps: float, reps: int, seed: int = 0
) -> Estimate:
    """Estimate the probability that centred small-jump partial sums exceed ``eps``.

    The event is ``max_k |sum_{i<=k} (Y_i - E Y_i)| > eps`` with
    ``Y_i = (Z_i/a_n) 1{|Z_i|/a_n <= u}``. The centring is the exact truncated
    mean.
    """
    _check_reps(reps)
    if not 0.0 < u <= 1.0 and not math.isinf(u):
        raise ValueError(f"u must lie in (0, 1], got {u}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    a_n = tail_model.norming_constant(model.tail, n)
    centre = tail_model.truncated_mean(model.tail, u * a_n) / a_n

    def one(_, ss):
        y = _draw(model, n, np.random.default_rng(ss)) / a_n
        y = np.where(np.abs(y) <= u, y, 0.0) - centre
        return float(np.max(np.abs(np.cumsum(y))) > eps)

    return _summarize(map_replicates(one, reps, seed, ("vsv", n, u, eps)))


def truncated_max_moment_estimate(
    model: InnovationModel, n: int, j: int, r_order: float, reps: int, seed: int = 0
) -> Estimate:
    """Estimate ``E max_{l<=n} |a_n^{-1} sum_{i=1}^l Z_{i-j} 1{|Z_{i-j}| <= a_n}|**r_order``."""
    _check_reps(reps)
    if j < 0:
        raise ValueError(f"j must be nonnegative, got {j}")
    if r_order < 1.0:
        raise ValueError(f"r_order must be at least 1, got {r_order}")
    a_n = tail_model.norming_constant(model.tail, n)

    def one(_, ss):
        window = generate(model, n, prehistory=j, seed=ss)
        z = window.z(np.arange(1, n + 1) - j) / a_n
        z = np.where(np.abs(z) <= 1.0, z, 0.0)
        return float(np.max(np.abs(np.cumsum(z))) ** r_order)

    return _summarize(map_replicates(one, reps, seed, ("maxmom", n, j, r_order)))
