"""Coefficient models, MA filters, partial-sum paths and the block decomposition.

Built-in coefficient models always produce coefficients of a single sign.
Every partial sum of such a sequence lies between 0 and the full sum, which
is the sandwich condition the limit theorem needs. Moment hypotheses are
checked analytically from the weight-law descriptor, never by sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._replicates import as_generator
from .cadlag_geometry import StepPath
from .innovations import InnovationWindow

__all__ = [
    "WeightLaw",
    "CoefficientModel",
    "Deterministic",
    "ScaledPattern",
    "GeometricRandom",
    "LemmaDecomposition",
    "sample_coefficients",
    "sample_total",
    "validate_sandwich",
    "tail_sum",
    "build_finite_ma",
    "build_truncated_ma",
    "partial_sum_path",
    "lemma_decomposition",
]

# geometric tails below this are folded into the analytic remainder
_GEOM_EPS = 1e-17


@dataclass(frozen=True)
class WeightLaw:
    """Law of a random scale or weight.

    kinds: ``constant(value)``, ``uniform(low, high)``, ``exponential(rate)``
    and ``pareto(shape, xm)``. The Pareto kind has infinite moments of order
    ``>= shape``.
    """

    kind: str = "constant"
    a: float = 1.0
    b: float = 1.0

    _KINDS = ("constant", "uniform", "exponential", "pareto")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown weight law {self.kind!r}; expected one of {self._KINDS}")
        if self.kind == "uniform" and not self.a < self.b:
            raise ValueError("uniform law needs low < high")
        if self.kind in ("exponential", "pareto") and not self.a > 0:
            raise ValueError(f"{self.kind} law needs a positive first parameter")
        if self.kind == "pareto" and not self.b > 0:
            raise ValueError("pareto law needs xm > 0")

    @classmethod
    def constant(cls, value: float = 1.0):
        return cls("constant", value, value)

    @classmethod
    def uniform(cls, low: float = 0.0, high: float = 1.0):
        return cls("uniform", low, high)

    @classmethod
    def exponential(cls, rate: float = 1.0):
        return cls("exponential", rate, 0.0)

    @classmethod
    def pareto(cls, shape: float, xm: float = 1.0):
        return cls("pareto", shape, xm)

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "constant":
            return (self.a, self.a)
        if self.kind == "uniform":
            return (self.a, self.b)
        if self.kind == "exponential":
            return (0.0, math.inf)
        return (self.b, math.inf)

    @property
    def nonnegative(self) -> bool:
        return self.support[0] >= 0.0

    @property
    def single_signed(self) -> bool:
        lo, hi = self.support
        return lo >= 0.0 or hi <= 0.0

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "constant":
            return np.full(size, self.a) if size is not None else self.a
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size)
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.a, size)
        return self.b * (1.0 - rng.random(size)) ** (-1.0 / self.a)

    def abs_moment(self, s: float) -> float:
        """``E|W|**s``; ``inf`` when it diverges."""
        if self.kind == "constant":
            return abs(self.a) ** s
        if self.kind == "uniform":
            lo, hi = self.a, self.b

            def prim(x):
                return math.copysign(abs(x) ** (s + 1.0), x) / (s + 1.0)

            return (prim(hi) - prim(lo)) / (hi - lo)
        if self.kind == "exponential":
            return math.gamma(1.0 + s) / self.a**s
        if s >= self.a:
            return math.inf
        return self.a * self.b**s / (self.a - s)

    @property
    def mean(self) -> float:
        if self.kind == "constant":
            return self.a
        if self.kind == "uniform":
            return 0.5 * (self.a + self.b)
        return self.abs_moment(1.0)


@dataclass(frozen=True)
class CoefficientModel:
    """Common fields for coefficient sequences independent of the innovations.

    ``delta`` is the exponent in ``sum_j E|C_j|**delta < inf``. ``gamma`` and
    ``r_order`` are the additional exponents needed for infinite-order
    filters, when ``alpha < 1`` and ``alpha >= 1`` respectively.
    """

    delta: float = field(default=1.0, kw_only=True)
    gamma: Optional[float] = field(default=None, kw_only=True)
    r_order: Optional[float] = field(default=None, kw_only=True)

    infinite_order = False

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.r_order is not None and self.r_order < 1.0:
            raise ValueError(f"r_order must be at least 1, got {self.r_order}")
        if not math.isfinite(self.moment_sum(self.delta)):
            raise ValueError(f"sum of E|C_j|^delta diverges for delta={self.delta}")

    def moment_sum(self, s: float) -> float:
        """``sum_j E|C_j|**s``."""
        raise NotImplementedError

    def total_abs_moment(self, r: float) -> float:
        """Finite iff ``E (sum_j |C_j|)**r < inf``; the value is an upper bound."""
        raise NotImplementedError

    def check_hypotheses(self, alpha: float) -> None:
        """Raise ``ValueError`` naming the first limit-theorem hypothesis that fails."""
        if not self.delta < alpha:
            raise ValueError(f"moment condition needs delta < alpha (delta={self.delta}, alpha={alpha})")
        if not self.infinite_order:
            return
        if alpha < 1.0:
            if self.gamma is None or not alpha < self.gamma < 1.0:
                raise ValueError(f"infinite-order filter with alpha < 1 needs gamma in (alpha, 1), got {self.gamma}")
            if not math.isfinite(self.moment_sum(self.gamma)):
                raise ValueError(f"sum of E|C_j|^gamma diverges for gamma={self.gamma}")
        else:
            if self.r_order is None:
                raise ValueError("infinite-order filter with alpha >= 1 needs r_order >= 1")
            if not math.isfinite(self.total_abs_moment(self.r_order)):
                raise ValueError(f"E(sum |C_j|)^r diverges for r={self.r_order}")
            if not math.isfinite(self.moment_sum(1.0)):
                raise ValueError("sum of E|C_j| diverges")


@dataclass(frozen=True)
class Deterministic(CoefficientModel):
    coefficients: Sequence[float] = (1.0,)

    def __post_init__(self):
        c = tuple(float(v) for v in self.coefficients)
        if not c:
            raise ValueError("coefficient list must be nonempty")
        if not validate_sandwich(c):
            raise ValueError(f"coefficients {c} violate the sandwich condition")
        object.__setattr__(self, "coefficients", c)
        super().__post_init__()

    def moment_sum(self, s):
        return float(sum(abs(v) ** s for v in self.coefficients if v != 0.0))

    def total_abs_moment(self, r):
        return float(sum(abs(v) for v in self.coefficients)) ** r


@dataclass(frozen=True)
class ScaledPattern(CoefficientModel):
    """``C_j = S * pattern[j]`` with one shared random scale ``S``."""

    pattern: Sequence[float] = (1.0,)
    scale_law: WeightLaw = WeightLaw.constant(1.0)

    def __post_init__(self):
        pat = tuple(float(v) for v in self.pattern)
        if not pat:
            raise ValueError("pattern must be nonempty")
        if any(v < 0.0 for v in pat):
            raise ValueError("pattern entries must be nonnegative")
        if not self.scale_law.single_signed:
            raise ValueError("scale law must not change sign")
        object.__setattr__(self, "pattern", pat)
        super().__post_init__()

    def moment_sum(self, s):
        return self.scale_law.abs_moment(s) * float(sum(v**s for v in self.pattern if v > 0.0))

    def total_abs_moment(self, r):
        return self.scale_law.abs_moment(r) * float(sum(self.pattern)) ** r


@dataclass(frozen=True)
class GeometricRandom(CoefficientModel):
    """``C_j = W_j * theta**j`` with i.i.d. nonnegative weights ``W_j``."""

    theta: float = 0.5
    weight_law: WeightLaw = WeightLaw.constant(1.0)

    infinite_order = True

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not self.weight_law.nonnegative:
            raise ValueError("weight law must be nonnegative")
        super().__post_init__()

    def moment_sum(self, s):
        return self.weight_law.abs_moment(s) / (1.0 - self.theta**s)

    def total_abs_moment(self, r):
        # Minkowski: ||sum W_j theta^j||_r <= ||W||_r / (1 - theta)
        return self.weight_law.abs_moment(r) / (1.0 - self.theta) ** r

    @property
    def deterministic_weights(self) -> bool:
        return self.weight_law.kind == "constant"

    def materialized_length(self) -> int:
        """Lags after which ``theta**j`` drops below ``1e-17``."""
        return int(math.ceil(math.log(_GEOM_EPS) / math.log(self.theta)))

    def analytic_tail(self, start: int) -> float:
        """``E sum_{j >= start} C_j`` (exact when weights are constant)."""
        return self.weight_law.mean * self.theta**start / (1.0 - self.theta)


def sample_coefficients(model: CoefficientModel, count: int, seed=None) -> np.ndarray:
    """First ``count`` coefficients of one realization; deterministic in ``seed``."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    rng = as_generator(seed)
    if isinstance(model, Deterministic):
        base = np.asarray(model.coefficients)
    elif isinstance(model, ScaledPattern):
        base = float(model.scale_law.sample(rng)) * np.asarray(model.pattern)
    elif isinstance(model, GeometricRandom):
        w = np.asarray(model.weight_law.sample(rng, count), dtype=float)
        return w * model.theta ** np.arange(count)
    else:
        raise TypeError(f"unsupported coefficient model {type(model).__name__}")
    out = np.zeros(count)
    m = min(count, base.size)
    out[:m] = base[:m]
    return out


def sample_total(model: CoefficientModel, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draws from the law of ``C = sum_j C_j``."""
    if isinstance(model, Deterministic):
        return np.full(size, float(sum(model.coefficients)))
    if isinstance(model, ScaledPattern):
        return np.asarray(model.scale_law.sample(rng, size), dtype=float) * float(sum(model.pattern))
    if isinstance(model, GeometricRandom):
        if model.deterministic_weights:
            return np.full(size, model.weight_law.a / (1.0 - model.theta))
        L = model.materialized_length()
        out = np.empty(size)
        powers = model.theta ** np.arange(L)
        for s in range(0, size, 4096):
            k = min(4096, size - s)
            out[s:s + k] = model.weight_law.sample(rng, (k, L)) @ powers
        return out + model.analytic_tail(L)
    raise TypeError(f"unsupported coefficient model {type(model).__name__}")


def validate_sandwich(coeffs) -> bool:
    """True iff every partial sum lies between 0 and the full sum (in ratio).

    An all-zero list counts as valid: it yields the zero process.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        raise ValueError("coefficient list must be nonempty")
    partial = np.cumsum(c)
    total = partial[-1]
    if total == 0.0:
        return bool(np.all(partial == 0.0))
    ratio = partial / total
    return bool(np.all((ratio >= 0.0) & (ratio <= 1.0 + 1e-12)))


def tail_sum(model: CoefficientModel, coeffs, q: int) -> float:
    """``C'_q = sum_{i >= q} C_i``; geometric models add their analytic remainder."""
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    c = np.asarray(coeffs, dtype=float)
    head = float(c[q:].sum()) if q < c.size else 0.0
    if isinstance(model, GeometricRandom):
        return head + model.analytic_tail(max(q, c.size))
    return head


def _check_prehistory(q: int, window: InnovationWindow):
    if window.h < q:
        raise ValueError(f"filter of order {q} needs prehistory >= {q}, window has {window.h}")


def build_finite_ma(coeffs, window: InnovationWindow) -> np.ndarray:
    """``X_t = sum_{i=0}^q c_i Z_{t-i}`` for ``t = 1..n``."""
    c = np.asarray(coeffs, dtype=float)
    q = c.size - 1
    _check_prehistory(q, window)
    return np.convolve(window.values, c, mode="full")[window.h:window.h + window.n]


def build_truncated_ma(model: CoefficientModel, coeffs, q: int, window: InnovationWindow) -> np.ndarray:
    """``X_i^q = sum_{j<q} C_j Z_{i-j} + C'_q Z_{i-q}``: the tail mass sits at lag ``q``."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    c = np.asarray(coeffs, dtype=float)
    head = np.zeros(q + 1)
    m = min(q, c.size)
    head[:m] = c[:m]
    head[q] = tail_sum(model, c, q)
    return build_finite_ma(head, window)


def partial_sum_path(X, a_n: float, n: int) -> StepPath:
    """``V_n(t) = a_n^{-1} sum_{i <= floor(nt)} X_i`` as a step path."""
    if not a_n > 0.0:
        raise ValueError(f"a_n must be positive, got {a_n}")
    X = np.asarray(X, dtype=float)
    if X.size != n:
        raise ValueError(f"expected {n} summands, got {X.size}")
    return StepPath(np.arange(1, n + 1) / n, np.cumsum(X) / a_n, 0.0)


@dataclass(frozen=True)
class LemmaDecomposition:
    """Both sides of the block identity relating ``C sum Z_i`` to ``sum X_i``.

    ``case`` is ``"i"`` (``k < q``), ``"ii"`` (``k >= q``) or ``"iii"``
    (``q <= k <= n - q``). In case (ii), ``rhs = H - G``, and in case (iii),
    ``rhs = -G - T``. In case (i), ``H``, ``G`` and ``T`` hold the three sums
    of that identity, and ``rhs = H - G - T``.
    """

    lhs: float
    H: float
    G: float
    T: float
    case: str

    @property
    def rhs(self) -> float:
        if self.case == "ii":
            return self.H - self.G
        if self.case == "iii":
            return -self.G - self.T
        return self.H - self.G - self.T

    @property
    def relative_error(self) -> float:
        return abs(self.lhs - self.rhs) / (1.0 + abs(self.lhs))


def lemma_decomposition(coeffs, window: InnovationWindow, n: int, k: int, a_n: float, case: Optional[str] = None) -> LemmaDecomposition:
    c = np.asarray(coeffs, dtype=float)
    q = c.size - 1
    _check_prehistory(q, window)
    if window.n < n:
        raise ValueError(f"window covers only {window.n} of n={n} observations")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..n, got k={k}")
    if case is None:
        case = "i" if k < q else "ii"
    if case == "i" and not k < q:
        raise ValueError(f"case (i) needs k < q (k={k}, q={q})")
    if case == "ii" and not k >= q:
        raise ValueError(f"case (ii) needs k >= q (k={k}, q={q})")
    if case == "iii" and not q <= k <= n - q:
        raise ValueError(f"case (iii) needs q <= k <= n - q (k={k}, q={q}, n={n})")
    if case not in ("i", "ii", "iii"):
        raise ValueError(f"unknown case {case!r}")

    z = window.z
    C = c.sum()
    # suffix[u] = sum_{s=u+1}^q C_s, prefix[v] = sum_{s=0}^v C_s
    suffix = np.concatenate((np.cumsum(c[::-1])[::-1][1:], [0.0]))
    prefix = np.cumsum(c)
    X = build_finite_ma(c, window)
    upto = k + q if case == "iii" else k
    lhs = (C * z(np.arange(1, k + 1)).sum() - X[:upto].sum()) / a_n

    if case == "i":
        u = np.arange(k)
        H = float(np.dot(z(k - u), suffix[u]))
        u = np.arange(q - k, q)
        G = float(np.dot(z(-u), suffix[u]))
        u = np.arange(q - k)
        inner = prefix[u + k] - prefix[u]  # sum_{s=u+1}^{u+k} C_s
        T = float(np.dot(z(-u), inner))
        return LemmaDecomposition(lhs, H / a_n, G / a_n, T / a_n, case)

    u = np.arange(q)
    G = float(np.dot(z(-u), suffix[u])) / a_n
    if case == "ii":
        H = float(np.dot(z(k - u), suffix[u])) / a_n
        return LemmaDecomposition(lhs, H, G, 0.0, case)
    u = np.arange(1, q + 1)
    T = float(np.dot(z(k + u), prefix[q - u])) / a_n
    return LemmaDecomposition(lhs, 0.0, G, T, case)
