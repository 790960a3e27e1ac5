"""Planted cumulant model: spike law, H0/H1 samplers and parameter recipes.

Under H1 each observation is ``Y = S (sqrt(a/p) W U + Z)`` with ``Z`` standard
normal, ``W`` a mean-zero unit-variance scalar and ``S`` the whitening
matrix, so ``Y`` has identity covariance and a rank-one order-d cumulant.
Under H0, ``Y = Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cumulant import SampleSet, whitening_matrix
from .seeding import substream

__all__ = [
    "TwoPointDist",
    "PlantedConfig",
    "RegimeParams",
    "H0",
    "H1",
    "twopoint_from_bernoulli",
    "twopoint_cumulant",
    "sample_dataset",
    "regime_params",
]

H0, H1 = "H0", "H1"
MAX_CUMULANT_ORDER = 6


@dataclass(frozen=True)
class TwoPointDist:
    """Takes value ``hi`` with probability ``p_hi`` and ``lo`` otherwise; standardised."""

    lo: float
    hi: float
    p_hi: float

    def __post_init__(self):
        if not 0.0 < self.p_hi < 1.0:
            raise ValueError(f"p_hi must lie in (0, 1), got {self.p_hi}")
        if abs(self.raw_moment(1)) > 1e-12:
            raise ValueError(f"two-point law must have mean 0, got {self.raw_moment(1)}")
        if abs(self.raw_moment(2) - 1.0) > 1e-12:
            raise ValueError(f"two-point law must have variance 1, got {self.raw_moment(2)}")

    def raw_moment(self, k: int) -> float:
        return self.p_hi * self.hi**k + (1.0 - self.p_hi) * self.lo**k

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """One uniform per draw: ``hi`` where ``u < p_hi``."""
        u = rng.random(size)
        return np.where(u < self.p_hi, self.hi, self.lo)


def twopoint_from_bernoulli(q: float) -> TwoPointDist:
    """Standardised Bernoulli(q): ``(B - q) / sqrt(q (1 - q))``."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    sd = math.sqrt(q * (1.0 - q))
    return TwoPointDist(lo=-q / sd, hi=(1.0 - q) / sd, p_hi=q)


def twopoint_cumulant(w: TwoPointDist, k: int) -> float:
    """k-th cumulant from raw moments via ``kappa_n = m_n - sum C(n-1, j-1) kappa_j m_{n-j}``."""
    if k < 1:
        raise ValueError(f"cumulant order must be >= 1, got {k}")
    if k > MAX_CUMULANT_ORDER:
        raise ValueError(f"cumulant order {k} unsupported (max {MAX_CUMULANT_ORDER})")
    m = [1.0] + [w.raw_moment(j) for j in range(1, k + 1)]
    kappa = [0.0] * (k + 1)
    for n in range(1, k + 1):
        kappa[n] = m[n] - sum(math.comb(n - 1, j - 1) * kappa[j] * m[n - j] for j in range(1, n))
    return kappa[k]


def _default_spike(p: int) -> np.ndarray:
    return np.ones(p)


@dataclass(frozen=True, eq=False)
class PlantedConfig:
    p: int
    n: int
    a: float
    d: int = 3
    U: np.ndarray | None = field(default=None, repr=False)
    w: TwoPointDist = field(default_factory=lambda: twopoint_from_bernoulli(0.2))
    seed: int = 0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.a < 0:
            raise ValueError(f"a must be >= 0, got {self.a}")
        if self.d not in (3, 4):
            raise ValueError(f"d must be 3 or 4, got {self.d}")
        U = _default_spike(self.p) if self.U is None else np.array(self.U, dtype=float).reshape(-1)
        if U.size != self.p:
            raise ValueError(f"spike vector has length {U.size}, expected {self.p}")
        if abs(np.linalg.norm(U) - math.sqrt(self.p)) > 1e-8 * max(1.0, math.sqrt(self.p)):
            raise ValueError("spike vector must have norm sqrt(p)")
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    def replace(self, **changes) -> PlantedConfig:
        kw = dict(p=self.p, n=self.n, a=self.a, d=self.d, U=self.U, w=self.w, seed=self.seed)
        kw.update(changes)
        if "p" in changes and "U" not in changes:
            kw["U"] = None
        return PlantedConfig(**kw)

    @property
    def w_cumulant(self) -> float:
        return twopoint_cumulant(self.w, self.d)

    @property
    def planted_norm(self) -> float:
        """Spectral norm of the population order-d cumulant of H1 data."""
        return abs(self.w_cumulant) * (self.a / (1.0 + self.a)) ** (self.d / 2)


def sample_dataset(cfg: PlantedConfig, hypothesis: str, rep: int = 0) -> SampleSet:
    """Draw ``cfg.n`` observations under ``H0`` or ``H1``.

    Gaussian noise comes from the ``("Z", rep)`` substream in row order and the
    spike weights from ``("W", rep)``, so H0 never touches the W stream and
    H0/H1 draws at the same ``rep`` share their noise.
    """
    if hypothesis not in (H0, H1):
        raise ValueError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")
    Z = substream(cfg.seed, "Z", rep).standard_normal((cfg.n, cfg.p))
    if hypothesis == H0:
        return SampleSet(Z)
    W = cfg.w.sample(substream(cfg.seed, "W", rep), cfg.n)
    X = math.sqrt(cfg.a / cfg.p) * W[:, None] * cfg.U[None, :] + Z
    S = whitening_matrix(cfg.a, cfg.U)
    return SampleSet(X @ S)


@dataclass(frozen=True)
class RegimeParams:
    a: float
    n: int
    in_regime: bool  # p^{d/2} < n < p^{d-1}


def regime_params(p: int, n: int | None = None, d: int = 3, c0: float = 9.0) -> RegimeParams:
    """Spike strength ``a = sqrt(p) / (n^{1/d} (ln p)^{c0})``.

    ``n`` defaults to ``floor(p^{d-1} / 2)``.  ``in_regime`` reports whether
    ``p^{d/2} < n < p^{d-1}``.
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if not c0 > 8:
        raise ValueError(f"c0 must exceed 8, got {c0}")
    if n is None:
        n = p ** (d - 1) // 2
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    a = math.sqrt(p) / (n ** (1.0 / d) * math.log(p) ** c0)
    in_regime = p ** (d / 2) < n < p ** (d - 1)
    return RegimeParams(a=a, n=int(n), in_regime=in_regime)
