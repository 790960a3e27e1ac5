"""Monte Carlo experiments and bound arithmetic for the detection/estimation reduction.

The reduction: if an estimator's error radius ``d_est`` is small next to the
detection scale ``d_det``, any norm approximation of distortion ``gamma`` with
``4 * gamma * d_est < d_det`` would turn into a test separating H0 from H1 by
thresholding at some ``tau``.  The functions here measure ``d_est`` for the
plug-in cumulant tensor, sweep ``tau`` over the resulting tests, and do the
finite arithmetic behind the bound.

Every rep ``r`` draws its data from substreams keyed by ``(cfg.seed, r)``;
H0 and H1 at the same rep share their Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cumulant import khat, population_planted_cumulant
from .planted import H0, H1, PlantedConfig, sample_dataset
from .seeding import substream
from .specnorm import PowerIterConfig, lower_cert_power, unfolding_distortion, upper_cert_unfold
from .symtensor import SymmetricTensor

__all__ = [
    "GapReport",
    "DetectionReport",
    "ScalingReport",
    "LowDegreeBoundParams",
    "LowDegreeBound",
    "DEFAULT_LEVELS",
    "estimate_error_distribution",
    "detection_experiment",
    "error_rates",
    "separation_window",
    "framework_bound",
    "lowdeg_bound_sum",
    "simplified_term_bound",
    "fit_power_law",
    "scaling_sweep",
    "statistic_ratios",
]

DEFAULT_LEVELS = (0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95)
STATISTICS = ("unfold", "power")


@dataclass(frozen=True, eq=False)
class GapReport:
    config: PlantedConfig
    reps: int
    est_lower_quantiles: dict
    est_upper_quantiles: dict
    d_det_proxy: float
    bound: float
    d_est_level: float = 0.9
    err_lower: np.ndarray = field(default=None, repr=False)
    err_upper: np.ndarray = field(default=None, repr=False)

    @property
    def d_est(self) -> float:
        return self.est_upper_quantiles[self.d_est_level]


@dataclass(frozen=True, eq=False)
class DetectionReport:
    statistic: str
    tau_grid: np.ndarray
    type1: np.ndarray
    type2: np.ndarray
    best_sum: float
    best_tau: float
    stats_h0: np.ndarray = field(default=None, repr=False)
    stats_h1: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class ScalingReport:
    n_values: np.ndarray
    medians: np.ndarray
    slope: float
    intercept: float
    note: str = ""
    errors: np.ndarray = field(default=None, repr=False)  # shape (len(n_values), reps)


@dataclass(frozen=True)
class LowDegreeBoundParams:
    a: float
    n: float
    p: float
    d: int
    M: int
    C_d: float = 1.0
    c0: float = 9.0

    def __post_init__(self):
        for name in ("a", "n", "p", "d", "C_d", "c0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.M < 0:
            raise ValueError(f"M must be >= 0, got {self.M}")

    def term_ratio(self, m: int) -> float:
        """Base of the m-th term, ``(a/(1+a)) C_d m^4 n^{1/d} / sqrt(p)``."""
        return (self.a / (1.0 + self.a)) * self.C_d * m**4 * self.n ** (1.0 / self.d) / math.sqrt(self.p)


@dataclass(frozen=True)
class LowDegreeBound:
    total: float
    max_ratio: float
    overflow_at: int | None = None


# ---------------------------------------------------------------------------
# statistics


def _power_stat(cfg: PowerIterConfig | None, seed: int, label: str) -> Callable[[SymmetricTensor, int], float]:
    def stat(T: SymmetricTensor, rep: int) -> float:
        return lower_cert_power(T, cfg, substream(seed, label, rep)).value

    return stat


def _unfold_stat(T: SymmetricTensor, rep: int) -> float:
    return upper_cert_unfold(T).value


def statistic_ratios(statistic: str, p: int, d: int) -> tuple[float, float]:
    """Worst-case ``(rho, zeta)`` of a statistic's certificate kind."""
    if statistic == "unfold":
        return 1.0, unfolding_distortion(p, d)
    if statistic == "power":
        return math.inf, 1.0
    raise ValueError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")


# ---------------------------------------------------------------------------
# estimation error


def estimate_error_distribution(
    cfg: PlantedConfig,
    reps: int,
    *,
    levels: Sequence[float] = DEFAULT_LEVELS,
    d_est_level: float = 0.9,
    power_cfg: PowerIterConfig | None = None,
) -> GapReport:
    """Sandwich the spectral-norm error of the plug-in cumulant over ``reps`` H1 draws."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    levels = tuple(sorted(set(levels) | {d_est_level}))
    pop = population_planted_cumulant(cfg.a, cfg.U, cfg.w_cumulant, cfg.d).tensor
    lo = np.empty(reps)
    up = np.empty(reps)
    for r in range(reps):
        E = khat(sample_dataset(cfg, H1, r), cfg.d).tensor - pop
        lo[r] = lower_cert_power(E, power_cfg, substream(cfg.seed, "estgap-power", r)).value
        up[r] = upper_cert_unfold(E).value
    qlo = dict(zip(levels, (float(v) for v in np.quantile(lo, levels))))
    qup = dict(zip(levels, (float(v) for v in np.quantile(up, levels))))
    d_det = cfg.planted_norm
    d_est = qup[d_est_level]
    bound = d_det / (4.0 * d_est) if d_est > 0 else math.inf
    return GapReport(cfg, reps, qlo, qup, d_det, bound, d_est_level, lo, up)


# ---------------------------------------------------------------------------
# detection


def error_rates(stats_h0, stats_h1, tau_grid) -> tuple[np.ndarray, np.ndarray]:
    """Type I ``P0(stat > tau)`` and type II ``P1(stat <= tau)`` on a grid."""
    s0 = np.sort(np.asarray(stats_h0, dtype=float))
    s1 = np.sort(np.asarray(stats_h1, dtype=float))
    tau = np.asarray(tau_grid, dtype=float)
    type1 = 1.0 - np.searchsorted(s0, tau, side="right") / s0.size
    type2 = np.searchsorted(s1, tau, side="right") / s1.size
    return type1, type2


def detection_experiment(
    cfg: PlantedConfig,
    statistic: str = "unfold",
    tau_grid: Sequence[float] | None = None,
    reps: int = 200,
    *,
    power_cfg: PowerIterConfig | None = None,
) -> DetectionReport:
    """Threshold test ``1{f(khat) > tau}`` evaluated on ``reps`` draws per hypothesis.

    ``tau_grid`` defaults to 101 points spanning the pooled observed statistics.
    ``best_tau`` is the smallest grid point attaining the minimal error sum.
    """
    if reps < 2:
        raise ValueError("reps must be >= 2")
    if statistic == "unfold":
        f = _unfold_stat
    elif statistic == "power":
        f = None
    else:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    s0 = np.empty(reps)
    s1 = np.empty(reps)
    f0 = f or _power_stat(power_cfg, cfg.seed, "detect-power-H0")
    f1 = f or _power_stat(power_cfg, cfg.seed, "detect-power-H1")
    for r in range(reps):
        s0[r] = f0(khat(sample_dataset(cfg, H0, r), cfg.d).tensor, r)
        s1[r] = f1(khat(sample_dataset(cfg, H1, r), cfg.d).tensor, r)
    if tau_grid is None:
        pooled = np.concatenate([s0, s1])
        tau = np.linspace(pooled.min(), pooled.max(), 101)
    else:
        tau = np.asarray(tau_grid, dtype=float).reshape(-1)
        if tau.size == 0:
            raise ValueError("tau grid must be nonempty")
        tau = np.sort(tau)
    t1, t2 = error_rates(s0, s1, tau)
    total = t1 + t2
    k = int(np.argmin(total))  # first minimum, i.e. smallest tau
    return DetectionReport(statistic, tau, t1, t2, float(total[k]), float(tau[k]), s0, s1)


# ---------------------------------------------------------------------------
# bound arithmetic


def separation_window(rho: float, zeta: float, d_est: float, d_det: float) -> tuple[float, float] | None:
    """Thresholds that separate the hypotheses, ``(2 zeta d_est, d_det / (2 rho))``.

    Returns ``None`` unless ``2 d_est rho zeta < d_det / 2``.
    """
    if rho < 1 or zeta < 1:
        raise ValueError("rho and zeta must be >= 1")
    if d_est < 0 or d_det < 0:
        raise ValueError("d_est and d_det must be nonnegative")
    if not 2.0 * d_est * rho * zeta < d_det / 2.0:
        return None
    return 2.0 * zeta * d_est, d_det / (2.0 * rho)


def framework_bound(d_det: float, d_est: float) -> float:
    """Lower bound ``d_det / (4 d_est)`` on the distortion of any admissible approximation."""
    if not d_est > 0:
        raise ValueError(f"d_est must be > 0, got {d_est}")
    return d_det / (4.0 * d_est)


def lowdeg_bound_sum(params: LowDegreeBoundParams) -> LowDegreeBound:
    """``sum_{m=0}^{M} r(m)^m`` with ``r(m)`` from :meth:`LowDegreeBoundParams.term_ratio`.

    The ``m = 0`` term is 1.  On floating overflow the total is ``inf`` and
    ``overflow_at`` names the first offending ``m``.
    """
    total = 1.0
    max_ratio = 0.0
    for m in range(1, params.M + 1):
        r = params.term_ratio(m)
        max_ratio = max(max_ratio, r)
        try:
            term = r**m
        except OverflowError:
            term = math.inf
        total += term
        if math.isinf(total):
            return LowDegreeBound(math.inf, max(max_ratio, params.term_ratio(params.M)), m)
    return LowDegreeBound(total, max_ratio)


def simplified_term_bound(params: LowDegreeBoundParams, m: int) -> float:
    """``2 C_d m^4 / (ln p)^{c0}``, the large-p bound on :meth:`term_ratio`."""
    return 2.0 * params.C_d * m**4 / math.log(params.p) ** params.c0


# ---------------------------------------------------------------------------
# scaling


def fit_power_law(n_values, medians) -> tuple[float, float]:
    """Least-squares ``(slope, intercept)`` of ``log(median)`` on ``log(n)``."""
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.log(np.asarray(medians, dtype=float))
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    return slope, float(y.mean() - slope * x.mean())


def _regime_note(p: int, d: int, n_values: np.ndarray) -> str:
    lo, hi = p ** (d / 2), p ** (d - 1)
    inside = [int(n) for n in n_values if lo < n < hi]
    if len(inside) == len(n_values):
        return f"all n inside p^(d/2)={lo:g} < n < p^(d-1)={hi:g}"
    return (
        f"{len(n_values) - len(inside)} of {len(n_values)} n values outside p^(d/2)={lo:g} < n < p^(d-1)={hi:g}; "
        "n > p^(d-1) is the central-limit regime where the error decays like n^(-1/2), not p^(d/2)/n"
    )


def scaling_sweep(cfg_base: PlantedConfig, n_grid: Sequence[int], reps: int) -> ScalingReport:
    """Median upper-certificate error of the plug-in cumulant at each ``n`` and its log-log slope."""
    n_values = np.asarray(n_grid, dtype=int)
    if n_values.size < 3:
        raise ValueError("need at least 3 sample sizes")
    if np.any(np.diff(n_values) <= 0):
        raise ValueError("n grid must be strictly increasing")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    pop = population_planted_cumulant(cfg_base.a, cfg_base.U, cfg_base.w_cumulant, cfg_base.d).tensor
    errors = np.empty((n_values.size, reps))
    for i, n in enumerate(n_values):
        cfg = cfg_base.replace(n=int(n))
        for r in range(reps):
            E = khat(sample_dataset(cfg, H1, r), cfg.d).tensor - pop
            errors[i, r] = upper_cert_unfold(E).value
    medians = np.median(errors, axis=1)
    slope, intercept = fit_power_law(n_values, medians)
    return ScalingReport(n_values, medians, slope, intercept, _regime_note(cfg_base.p, cfg_base.d, n_values), errors)
