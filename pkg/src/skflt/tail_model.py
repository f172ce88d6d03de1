"""Two-sided Pareto laws with regularly varying tails, and standard stable draws.

The magnitude law is pure Pareto, ``P(|Y| > x) = (scale / x) ** alpha`` for
``x >= scale``, so norming constants and truncated moments are closed form.
``Y`` is positive with probability ``p`` and negative with probability ``r``.
The innovation is ``Z = Y - shift``; the shift centres the law when
``alpha > 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TailParams",
    "sample_two_sided_pareto",
    "sample_innovations",
    "exact_tail_probability",
    "cdf",
    "ppf",
    "norming_constant",
    "truncated_first_moment",
    "truncated_mean",
    "karamata_limit",
    "upper_karamata_limit",
    "sample_stable_standard",
]

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class TailParams:
    """Parameters of a two-sided Pareto law.

    ``shift`` may be left as ``None``. It is then filled in with the value the
    tail index requires: the mean of the unshifted law for ``alpha`` in
    (1, 2), and 0 otherwise.
    """

    alpha: float
    p: float = 1.0
    r: float = field(default=None)  # type: ignore[assignment]
    scale: float = 1.0
    shift: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0.0 < alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
        p = float(self.p)
        r = 1.0 - p if self.r is None else float(self.r)
        if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
            raise ValueError(f"tail weights must lie in [0, 1], got p={p}, r={r}")
        if abs(p + r - 1.0) > _SYM_TOL:
            raise ValueError(f"tail weights must satisfy p + r = 1, got p={p}, r={r}")
        scale = float(self.scale)
        if not scale > 0.0:
            raise ValueError(f"scale must be positive, got {scale}")
        if alpha == 1.0 and abs(p - 0.5) > _SYM_TOL:
            raise ValueError("alpha = 1 requires a symmetric law (p = r = 1/2)")

        required = (p - r) * alpha * scale / (alpha - 1.0) if alpha > 1.0 else 0.0
        shift = required if self.shift is None else float(self.shift)
        if not math.isclose(shift, required, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(
                f"shift must equal {required!r} for alpha={alpha} "
                "(mean zero when alpha > 1, no shift otherwise)"
            )
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "shift", required)

    @property
    def beta(self) -> float:
        """Skewness ``p - r`` of the limiting stable law."""
        return self.p - self.r

    @property
    def symmetric(self) -> bool:
        return abs(self.p - self.r) <= _SYM_TOL


def sample_two_sided_pareto(params: TailParams, u1, u2):
    """Inverse-transform draw from two uniforms.

    ``u1`` in (0, 1) sets the magnitude ``scale * u1 ** (-1/alpha)``, and
    ``u2 < p`` makes the sign positive. Works elementwise on arrays.
    """
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    magnitude = params.scale * u1 ** (-1.0 / params.alpha)
    out = np.where(u2 < params.p, magnitude, -magnitude) - params.shift
    return float(out) if out.ndim == 0 else out


def sample_innovations(params: TailParams, size, rng: np.random.Generator):
    """Draw i.i.d. innovations of the given shape from ``rng``."""
    # 1 - random() lies in (0, 1]; the magnitude is then finite.
    u1 = 1.0 - rng.random(size)
    u2 = rng.random(size)
    return sample_two_sided_pareto(params, u1, u2)


def _tail_above(alpha, p, r, scale, y):
    """P(Y > y) when Y has mass ``p`` above ``scale`` and ``r`` below ``-scale``."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        pos = p * (scale / np.maximum(y, scale)) ** alpha
        neg = r * (scale / np.maximum(-y, scale)) ** alpha
    # y >= scale: only the positive tail above y; y <= -scale: all of the
    # positive mass plus the negative mass above y.
    return np.where(y >= scale, pos, np.where(y < -scale, p + (r - neg), p))


def _upper_tail_y(params: TailParams, y):
    """P(Y > y) for the unshifted law."""
    return _tail_above(params.alpha, params.p, params.r, params.scale, y)


def _lower_tail_y(params: TailParams, y):
    """P(Y < y) for the unshifted law, computed from the mirrored law."""
    return _tail_above(params.alpha, params.r, params.p, params.scale, -np.asarray(y, dtype=float))


def exact_tail_probability(params: TailParams, x):
    """P(|Z| > x) for the shifted law ``Z = Y - shift``."""
    x = np.asarray(x, dtype=float)
    s = params.shift
    out = _upper_tail_y(params, s + x) + _lower_tail_y(params, s - x)
    out = np.where(x < 0, 1.0, out)
    return float(out) if out.ndim == 0 else out


def cdf(params: TailParams, z):
    """Distribution function of ``Z``."""
    out = 1.0 - _upper_tail_y(params, np.asarray(z, dtype=float) + params.shift)
    return float(out) if np.ndim(out) == 0 else out


def ppf(params: TailParams, w, upper=None):
    """Quantile function of ``Z``.

    ``upper`` may carry ``1 - w`` computed without cancellation. That keeps
    the far positive tail accurate when ``w`` is close to 1.
    """
    w = np.asarray(w, dtype=float)
    upper = 1.0 - w if upper is None else np.asarray(upper, dtype=float)
    a, sc = params.alpha, params.scale
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = -sc * (np.maximum(w, 1e-300) / params.r) ** (-1.0 / a) if params.r > 0 else np.full_like(w, -sc)
        pos = sc * (np.maximum(upper, 1e-300) / params.p) ** (-1.0 / a) if params.p > 0 else np.full_like(w, sc)
    out = np.where(w < params.r, neg, pos) - params.shift
    return float(out) if out.ndim == 0 else out


def norming_constant(params: TailParams, n: int) -> float:
    """``a_n = scale * n ** (1/alpha)``, so that ``n P(|Y| > a_n) = 1``."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return params.scale * float(n) ** (1.0 / params.alpha)


def _power_moment(alpha, scale, k, lo, hi):
    """Integral of ``y**k * alpha * scale**alpha * y**(-alpha-1)`` over [lo, hi] within [scale, inf)."""
    lo = max(lo, scale)
    if hi <= lo:
        return 0.0
    c = alpha * scale**alpha
    e = k - alpha
    if e == 0.0:
        return c * (math.log(hi) - math.log(lo))
    hi_term = 0.0 if math.isinf(hi) else hi**e
    return c * (hi_term - lo**e) / e


def _partial_moment_y(params: TailParams, k: int, lo: float, hi: float) -> float:
    """E[Y**k 1{lo <= Y <= hi}] for the unshifted law."""
    a, sc = params.alpha, params.scale
    pos = params.p * _power_moment(a, sc, k, lo, hi)
    neg = params.r * _power_moment(a, sc, k, -hi, -lo)
    return pos + (-1.0) ** k * neg


def truncated_first_moment(params: TailParams, cutoff: float) -> float:
    """E[Y 1{|Y| <= cutoff}] for the unshifted law, in closed form."""
    a, sc = params.alpha, params.scale
    if cutoff <= sc or params.symmetric:
        return 0.0
    if a == 1.0:
        return (params.p - params.r) * sc * math.log(cutoff / sc)
    return (params.p - params.r) * a * sc**a / (1.0 - a) * (cutoff ** (1.0 - a) - sc ** (1.0 - a))


def truncated_mean(params: TailParams, cutoff: float) -> float:
    """E[Z 1{|Z| <= cutoff}] for the shifted law ``Z = Y - shift``."""
    if cutoff <= 0.0:
        return 0.0
    s = params.shift
    if s == 0.0:
        return truncated_first_moment(params, cutoff)
    lo, hi = s - cutoff, s + cutoff
    return _partial_moment_y(params, 1, lo, hi) - s * _partial_moment_y(params, 0, lo, hi)


def karamata_limit(params: TailParams) -> float:
    """Limit ``(p - r) alpha / (1 - alpha)``.

    For alpha < 1 this is the limit of ``n E[(Z/a_n) 1{|Z| <= a_n}]``. It is
    also the drift of the limiting Levy process for any alpha != 1.
    """
    if params.alpha == 1.0:
        raise ValueError("the truncated-moment limit is undefined for alpha = 1")
    return (params.p - params.r) * params.alpha / (1.0 - params.alpha)


def upper_karamata_limit(params: TailParams) -> float:
    """For alpha > 1: limit ``(p - r) alpha / (alpha - 1)`` of ``n E[(Z/a_n) 1{|Z| > a_n}]``."""
    if params.alpha <= 1.0:
        raise ValueError("the large-jump moment limit needs alpha > 1")
    return (params.p - params.r) * params.alpha / (params.alpha - 1.0)


def sample_stable_standard(alpha, beta, u, e):
    """Chambers-Mallows-Stuck transform to ``S_alpha(1, beta, 0)``.

    The 1-parameterization is used: the characteristic function is
    ``exp(-|t|^a (1 - i b sgn(t) tan(pi a / 2)))`` for ``a != 1``, and
    ``exp(-|t| (1 + i b (2/pi) sgn(t) log|t|))`` for ``a == 1``.
    ``u`` is uniform on (0, 1) and ``e`` is standard exponential.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if not -1.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [-1, 1], got {beta}")
    v = np.pi * (np.asarray(u, dtype=float) - 0.5)
    w = np.asarray(e, dtype=float)
    if alpha == 1.0:
        half_pi = np.pi / 2.0
        bv = half_pi + beta * v
        out = (bv * np.tan(v) - beta * np.log(half_pi * w * np.cos(v) / bv)) / half_pi
    else:
        zeta = beta * math.tan(np.pi * alpha / 2.0)
        b = math.atan(zeta) / alpha
        s = (1.0 + zeta * zeta) ** (1.0 / (2.0 * alpha))
        out = (
            s
            * np.sin(alpha * (v + b))
            / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - alpha * (v + b)) / w) ** ((1.0 - alpha) / alpha)
        )
    return float(out) if np.ndim(out) == 0 else out
