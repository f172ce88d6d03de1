"""Batch experiments: marginal convergence, truncation, dependence, block identity.

Replicate ``k`` of an experiment draws from the seed stream
``SeedSequence([seed, crc32(tag), k])``. Replicates are reduced in index
order, so a given config and seed always produce the same CSV bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import innovations as inn
from . import levy_limit as lev
from . import moving_average as ma
from . import tail_model
from ._replicates import map_replicates, replicate_seed
from .cadlag_geometry import m2_distance
from .tail_model import TailParams

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "run_marginal_convergence",
    "run_truncation_study",
    "run_dependence_diagnostics",
    "run_lemma_suite",
    "run_experiment",
    "write_rows",
    "rows_to_csv",
    "ks_critical_value",
]

EXPERIMENTS = ("marginal", "truncation", "dependence", "lemma")
_DISTRIBUTIONAL = ("marginal", "dependence")


class ConfigError(ValueError):
    """Configuration that is malformed or violates the limit theorem's hypotheses."""


# --- configuration ------------------------------------------------------------


def _weight_law(entry) -> ma.WeightLaw:
    if entry is None:
        return ma.WeightLaw.constant(1.0)
    if isinstance(entry, (int, float)):
        return ma.WeightLaw.constant(float(entry))
    kind = entry.get("kind", "constant")
    if kind == "constant":
        return ma.WeightLaw.constant(float(entry.get("value", entry.get("a", 1.0))))
    return ma.WeightLaw(kind, float(entry.get("a", 0.0)), float(entry.get("b", 1.0)))


def _coefficient_model(entry: dict, alpha: float) -> ma.CoefficientModel:
    entry = dict(entry)
    kind = entry.pop("kind", "deterministic")
    infinite = kind == "geometric_random"
    common = {
        # finite sums satisfy the moment condition for every exponent
        "delta": float(entry.pop("delta", 0.5 * min(alpha, 1.0))),
        "gamma": entry.pop("gamma", 0.5 * (alpha + 1.0) if infinite and alpha < 1.0 else None),
        "r_order": entry.pop("r_order", 2.0 if infinite and alpha >= 1.0 else None),
    }
    if kind == "deterministic":
        model = ma.Deterministic(tuple(entry.pop("coefficients")), **common)
    elif kind == "scaled_pattern":
        model = ma.ScaledPattern(tuple(entry.pop("pattern")), _weight_law(entry.pop("scale_law", None)), **common)
    elif kind == "geometric_random":
        model = ma.GeometricRandom(float(entry.pop("theta")), _weight_law(entry.pop("weight_law", None)), **common)
    else:
        raise ConfigError(f"unknown coefficient kind {kind!r}")
    if entry:
        raise ConfigError(f"unknown coefficient keys {sorted(entry)}")
    return model


@dataclass
class ExperimentConfig:
    experiment: str
    tail: dict = field(default_factory=lambda: {"alpha": 1.0, "p": 0.5})
    innovation: dict = field(default_factory=lambda: {"kind": "iid"})
    coefficients: dict = field(default_factory=lambda: {"kind": "deterministic", "coefficients": [1.0]})
    n: int = 1000
    reps: int = 1000
    q_grid: list = field(default_factory=lambda: [1, 2, 4, 8, 12])
    k_grid: list = field(default_factory=lambda: [2, 5, 10, 20])
    u_grid: list = field(default_factory=lambda: [0.5, 0.1, 0.02])
    t_grid: list = field(default_factory=lambda: [1.0])
    x_grid: list = field(default_factory=lambda: [1.0])
    eps: float = 0.25
    cases: int = 1000
    cf_tolerance: float = 0.08
    m2_tolerance: float = 0.05
    long_filter: int = 0
    mixture_draws: int = 200_000
    seed: int = 0
    output_path: Optional[str] = None

    def __post_init__(self):
        self.validate()

    # derived objects ---------------------------------------------------------
    @property
    def tail_params(self) -> TailParams:
        return TailParams(**self.tail)

    @property
    def innovation_model(self) -> inn.InnovationModel:
        entry = dict(self.innovation)
        kind = entry.pop("kind", inn.IID)
        phi = float(entry.pop("ar_coefficient", 0.0))
        if entry:
            raise ConfigError(f"unknown innovation keys {sorted(entry)}")
        return inn.InnovationModel(kind, self.tail_params, phi)

    @property
    def coefficient_model(self) -> ma.CoefficientModel:
        return _coefficient_model(self.coefficients, self.tail_params.alpha)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        try:
            tail = self.tail_params
            self.innovation_model
            model = self.coefficient_model
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        try:
            model.check_hypotheses(tail.alpha)
        except ValueError as exc:
            raise ConfigError(f"theorem hypothesis violated: {exc}") from exc
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if self.reps < 1:
            raise ConfigError(f"reps must be positive, got {self.reps}")
        if self.experiment in _DISTRIBUTIONAL and self.reps < 100:
            raise ConfigError(f"{self.experiment} needs reps >= 100, got {self.reps}")
        if not self.t_grid or any(not 0.0 < t <= 1.0 for t in self.t_grid):
            raise ConfigError(f"t_grid must be a nonempty subset of (0, 1], got {self.t_grid}")
        if any(int(q) != q or q < 1 for q in self.q_grid):
            raise ConfigError(f"q_grid must hold positive integers, got {self.q_grid}")
        if any(int(k) != k or not 1 <= k <= self.n for k in self.k_grid):
            raise ConfigError(f"k_grid must hold integers in 1..n, got {self.k_grid}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config must name an experiment")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


# --- result rows --------------------------------------------------------------


@dataclass
class ResultRow:
    experiment: str
    metric: str
    t: Optional[float] = None
    u: Optional[float] = None
    q: Optional[int] = None
    k: Optional[int] = None
    x: Optional[float] = None
    estimate: Optional[float] = None
    std_error: Optional[float] = None
    theoretical: Optional[float] = None
    abs_error: Optional[float] = None
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.theoretical is not None and self.estimate is not None:
            self.abs_error = abs(self.estimate - self.theoretical)


COLUMNS = [f.name for f in fields(ResultRow)]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else format(float(v), ".17g")
    return str(v)


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
    return buf.getvalue()


def write_rows(rows: list[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def ks_critical_value(n: int, m: int, level: float = 0.01) -> float:
    """Asymptotic two-sample Kolmogorov-Smirnov critical value."""
    c = math.sqrt(-0.5 * math.log(level / 2.0))
    return c * math.sqrt((n + m) / (n * m))


# --- simulation core ----------------------------------------------------------


def _filter_length(model: ma.CoefficientModel) -> int:
    if isinstance(model, ma.GeometricRandom):
        return model.materialized_length()
    if isinstance(model, ma.Deterministic):
        return len(model.coefficients) - 1
    return len(model.pattern) - 1


def _simulate_partial_sums(config: ExperimentConfig, tag: str, generator=inn.generate) -> np.ndarray:
    """Array ``(reps, len(t_grid))`` of ``V_n(t)`` draws."""
    imodel = config.innovation_model
    cmodel = config.coefficient_model
    n = config.n
    a_n = tail_model.norming_constant(imodel.tail, n)
    q = _filter_length(cmodel)
    idx = np.array([int(math.floor(n * t)) for t in config.t_grid])

    def one(_, ss):
        c_ss, z_ss = ss.spawn(2)
        coeffs = ma.sample_coefficients(cmodel, q + 1, c_ss)
        window = generator(imodel, n, q, z_ss)
        if isinstance(cmodel, ma.GeometricRandom):
            X = ma.build_truncated_ma(cmodel, coeffs, q, window)
        else:
            X = ma.build_finite_ma(coeffs, window)
        csum = np.concatenate(([0.0], np.cumsum(X))) / a_n
        return csum[idx]

    return np.array(map_replicates(one, config.reps, config.seed, tag))


def run_marginal_convergence(config: ExperimentConfig) -> list[ResultRow]:
    """Compare the law of ``V_n(t)`` with that of ``C~ V(t)`` at each grid time."""
    if config.experiment != "marginal":
        raise ConfigError("run_marginal_convergence needs experiment = 'marginal'")
    tail = config.tail_params
    cmodel = config.coefficient_model
    triple = lev.CharTriple.from_tail(tail)
    law = lev.StableLaw.from_triple(triple)
    draws = _simulate_partial_sums(config, "marginal")
    u = lev.CF_GRID
    reps = config.reps
    rows: list[ResultRow] = []
    for j, t in enumerate(config.t_grid):
        sample = draws[:, j]
        ecf = lev.empirical_char_function(sample, u)
        cf = lev.limit_char_function(triple, cmodel, u, t, config.mixture_draws, config.seed)
        for uk, e, c in zip(u, ecf, cf):
            rows.append(ResultRow("marginal", "cf_real", t=t, u=float(uk), estimate=e.real,
                                  std_error=float(np.std(np.cos(uk * sample), ddof=1) / math.sqrt(reps)),
                                  theoretical=c.real))
            rows.append(ResultRow("marginal", "cf_imag", t=t, u=float(uk), estimate=e.imag,
                                  std_error=float(np.std(np.sin(uk * sample), ddof=1) / math.sqrt(reps)),
                                  theoretical=c.imag))
        sup_err = float(np.max(np.abs(ecf - cf)))
        rows.append(ResultRow("marginal", "cf_sup_error", t=t, estimate=sup_err,
                              std_error=1.0 / math.sqrt(reps), threshold=config.cf_tolerance))
        ss = replicate_seed(config.seed, "marginal-limit", j)
        limit = lev.sample_scaled_values(triple, cmodel, t, reps, ss, law)
        ks = float(stats.ks_2samp(sample, limit).statistic) if np.any(sample != limit) else 0.0
        rows.append(ResultRow("marginal", "ks_statistic", t=t, estimate=ks,
                              threshold=ks_critical_value(reps, reps)))
    return rows


def run_truncation_study(config: ExperimentConfig, generator: Callable = inn.generate) -> list[ResultRow]:
    """M2 distance between the lag-q truncated process and a long materialized filter.

    Both processes in a replicate share one coefficient realization and one
    innovation window.
    """
    if config.experiment != "truncation":
        raise ConfigError("run_truncation_study needs experiment = 'truncation'")
    cmodel = config.coefficient_model
    if not cmodel.infinite_order:
        raise ConfigError("truncation study needs an infinite-order (geometric_random) coefficient model")
    imodel = config.innovation_model
    n = config.n
    a_n = tail_model.norming_constant(imodel.tail, n)
    q_grid = [int(q) for q in config.q_grid]
    L = max(4 * max(q_grid), config.long_filter)

    def one(_, ss):
        c_ss, z_ss = ss.spawn(2)
        coeffs = ma.sample_coefficients(cmodel, L + 1, c_ss)
        window = generator(imodel, n, L, z_ss)
        long_path = ma.partial_sum_path(ma.build_finite_ma(coeffs, window), a_n, n)
        # what the materialized filter leaves out, bounded over the window
        omitted = ma.tail_sum(cmodel, coeffs, L + 1) * float(np.abs(window.values).sum()) / a_n
        dists = []
        for q in q_grid:
            trunc = ma.partial_sum_path(ma.build_truncated_ma(cmodel, coeffs, q, window), a_n, n)
            dists.append(m2_distance(trunc, long_path))
        return dists, omitted

    out = map_replicates(one, config.reps, config.seed, "truncation")
    dist = np.array([d for d, _ in out])
    omitted = np.array([o for _, o in out])
    rows = []
    for j, q in enumerate(q_grid):
        rows.append(ResultRow("truncation", "m2_median", q=q, estimate=float(np.median(dist[:, j])),
                              threshold=config.m2_tolerance if q == max(q_grid) else None))
        rows.append(ResultRow("truncation", "m2_q90", q=q, estimate=float(np.quantile(dist[:, j], 0.9))))
    rows.append(ResultRow("truncation", "omitted_tail_bound", q=L, estimate=float(np.max(omitted))))
    return rows


def run_dependence_diagnostics(config: ExperimentConfig) -> list[ResultRow]:
    if config.experiment != "dependence":
        raise ConfigError("run_dependence_diagnostics needs experiment = 'dependence'")
    imodel = config.innovation_model
    tail = imodel.tail
    n, reps, seed = config.n, config.reps, config.seed
    rows = []
    for k in config.k_grid:
        for x in config.x_grid:
            est = inn.dprime_estimate(imodel, n, int(k), float(x), reps, seed)
            theo = inn.dprime_iid_closed_form(tail, n, int(k), float(x)) if imodel.kind == inn.IID else None
            rows.append(ResultRow("dependence", "dprime", k=int(k), x=float(x), estimate=est.value,
                                  std_error=est.std_error, theoretical=theo))
    for u in config.u_grid:
        est = inn.vsv_estimate(imodel, n, float(u), config.eps, reps, seed)
        rows.append(ResultRow("dependence", "vsv", u=float(u), x=config.eps, estimate=est.value,
                              std_error=est.std_error))
    return rows


@dataclass(frozen=True)
class LemmaSummary:
    cases: int
    pass_count: int
    max_relative_error: float
    case_counts: tuple


def run_lemma_suite(seed: int, cases: int, zero_coefficients: bool = False, tol: float = 1e-9) -> LemmaSummary:
    """Check the block identity on randomized instances with q <= 10 and n <= 100.

    Instances cycle through the three cases so that each one is exercised.
    """
    if cases < 1:
        raise ValueError(f"cases must be positive, got {cases}")
    rng = np.random.default_rng(replicate_seed(seed, "lemma", 0))
    worst = 0.0
    passed = 0
    counts = {"i": 0, "ii": 0, "iii": 0}
    for j in range(cases):
        case = ("i", "ii", "iii")[j % 3]
        q_min = 2 if case == "i" else 0
        q = int(rng.integers(q_min, 11))
        n_min = max(2 * q, 1, q)
        n = int(rng.integers(n_min, 101))
        if case == "i":
            k = int(rng.integers(1, q))
        elif case == "ii":
            k = int(rng.integers(max(q, 1), n + 1))
        else:
            k = int(rng.integers(max(q, 1), n - q + 1))
        coeffs = np.zeros(q + 1) if zero_coefficients else rng.random(q + 1) * (rng.random() < 0.95)
        alpha = float(rng.uniform(0.3, 1.9))
        tail = TailParams(alpha, 0.5 if alpha == 1.0 else float(rng.random()))
        window = inn.generate(inn.InnovationModel(inn.IID, tail), n, q, rng)
        a_n = tail_model.norming_constant(tail, n)
        err = ma.lemma_decomposition(coeffs, window, n, k, a_n, case).relative_error
        worst = max(worst, err)
        passed += err <= tol
        counts[case] += 1
    return LemmaSummary(cases, int(passed), worst, tuple(sorted(counts.items())))


def lemma_rows(summary: LemmaSummary, tol: float = 1e-9) -> list[ResultRow]:
    return [
        ResultRow("lemma", "max_relative_error", estimate=summary.max_relative_error, threshold=tol),
        ResultRow("lemma", "pass_count", estimate=float(summary.pass_count), theoretical=float(summary.cases)),
    ]


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    if config.experiment == "marginal":
        return run_marginal_convergence(config)
    if config.experiment == "truncation":
        return run_truncation_study(config)
    if config.experiment == "dependence":
        return run_dependence_diagnostics(config)
    return lemma_rows(run_lemma_suite(config.seed, config.cases))


def check_rows(config: ExperimentConfig, rows: list[ResultRow]) -> list[str]:
    """Acceptance breaches in a result table; an empty list means pass."""
    bad = []
    for row in rows:
        if row.metric in ("cf_sup_error", "ks_statistic", "m2_median", "max_relative_error") and row.threshold is not None:
            if not row.estimate <= row.threshold:
                bad.append(f"{row.metric} at t={row.t} q={row.q}: {row.estimate:.6g} > {row.threshold:.6g}")
        if row.metric == "dprime" and row.theoretical is not None:
            if not row.abs_error <= 3.0 * row.std_error:
                bad.append(f"dprime k={row.k} x={row.x}: {row.estimate:.6g} vs closed form {row.theoretical:.6g}")
    if config.experiment == "truncation":
        med = [r.estimate for r in rows if r.metric == "m2_median"]
        if any(b > a for a, b in zip(med, med[1:])):
            bad.append(f"m2_median not nonincreasing in q: {med}")
    if config.experiment == "lemma":
        pc = next(r for r in rows if r.metric == "pass_count")
        if pc.estimate != pc.theoretical:
            bad.append(f"block identity failed on {int(pc.theoretical - pc.estimate)} cases")
    return bad
