"""Sample moments, plug-in cumulant tensors and the planted-model whitening matrix."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .symtensor import SymmetricTensor, canonical_indices, make_rank_one

__all__ = [
    "SampleSet",
    "CumulantEstimate",
    "sample_moments",
    "khat",
    "whitening_matrix",
    "population_planted_cumulant",
    "read_samples",
    "write_samples",
]

PLUGIN = "plugin_empirical"
POPULATION = "population_planted"
SUPPORTED_ORDERS = (3, 4)
# cap on entries per partial-sum block; the row count per block depends only
# on (p, order), so sums never depend on how work is split
CHUNK_ENTRIES = 1 << 21


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``n x p`` data matrix, one observation per row."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ValueError(f"sample data must be 2-D, got shape {data.shape}")
        if data.shape[0] < 2:
            raise ValueError(f"need at least 2 observations, got {data.shape[0]}")
        if not np.all(np.isfinite(data)):
            raise ValueError("sample data contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class CumulantEstimate:
    order: int
    tensor: SymmetricTensor
    provenance: str

    def __post_init__(self):
        if self.tensor.d != self.order:
            raise ValueError("tensor order does not match cumulant order")
        if self.provenance not in (PLUGIN, POPULATION):
            raise ValueError(f"unknown provenance {self.provenance!r}")


def _as_samples(S) -> SampleSet:
    return S if isinstance(S, SampleSet) else SampleSet(S)


def sample_moments(S) -> tuple[np.ndarray, np.ndarray]:
    """Row mean and the 1/n covariance."""
    S = _as_samples(S)
    mean = S.data.mean(axis=0)
    Yc = S.data - mean
    return mean, (Yc.T @ Yc) / S.n


def _central_moment_packed(Yc: np.ndarray, order: int) -> np.ndarray:
    """``(1/n) sum_i prod_k Yc[i, idx_k]`` for every canonical index tuple."""
    n, p = Yc.shape
    idx = canonical_indices(p, order)
    acc = np.zeros(idx.shape[0])
    rows = max(64, CHUNK_ENTRIES // idx.shape[0])
    for s in range(0, n, rows):
        block = Yc[s : s + rows]
        prod = block[:, idx[:, 0]].copy()
        for k in range(1, order):
            prod *= block[:, idx[:, k]]
        acc += prod.sum(axis=0)
    return acc / n


def khat(S, order: int) -> CumulantEstimate:
    """Plug-in cumulant tensor of order 3 or 4.

    Order 3 is the third central moment.  Order 4 is the fourth central
    moment minus the three covariance pairings, all with 1/n normalisation.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"cumulant order must be one of {SUPPORTED_ORDERS}, got {order}")
    S = _as_samples(S)
    mean, cov = sample_moments(S)
    Yc = S.data - mean
    vals = _central_moment_packed(Yc, order)
    if order == 4:
        idx = canonical_indices(S.p, 4)
        i, j, k, l = idx.T
        vals = vals - (cov[i, j] * cov[k, l] + cov[i, k] * cov[j, l] + cov[i, l] * cov[j, k])
    return CumulantEstimate(order, SymmetricTensor(order, S.p, vals), PLUGIN)


def _check_spike(U: np.ndarray, atol: float = 1e-8) -> np.ndarray:
    U = np.asarray(U, dtype=float).reshape(-1)
    p = U.size
    if abs(np.linalg.norm(U) - np.sqrt(p)) > atol * max(1.0, np.sqrt(p)):
        raise ValueError(f"spike vector must have norm sqrt(p)={np.sqrt(p):.6g}, got {np.linalg.norm(U):.6g}")
    return U


def whitening_matrix(a: float, U) -> np.ndarray:
    """``S = I - a / (1 + a + sqrt(1 + a)) * U U^T / p``.

    ``S`` is the inverse square root of ``I + a U U^T / p``, so ``S U = U /
    sqrt(1 + a)``.
    """
    if a < 0:
        raise ValueError(f"spike strength must be >= 0, got {a}")
    U = _check_spike(U)
    p = U.size
    coef = a / (1.0 + a + np.sqrt(1.0 + a))
    return np.eye(p) - coef * np.outer(U, U) / p


def population_planted_cumulant(a: float, U, w_cumulant: float, d: int) -> CumulantEstimate:
    """Order-``d`` cumulant of ``S X``: ``kappa_d(W) (a/p)^{d/2} (S U)^{(x)d}``.

    Its spectral norm is ``|kappa_d(W)| (a / (1 + a))^{d/2}``.
    """
    if d not in SUPPORTED_ORDERS:
        raise ValueError(f"cumulant order must be one of {SUPPORTED_ORDERS}, got {d}")
    U = _check_spike(U)
    p = U.size
    SU = whitening_matrix(a, U) @ U
    coef = w_cumulant * (a / p) ** (d / 2)
    return CumulantEstimate(d, make_rank_one(coef, SU, d), POPULATION)


# ---------------------------------------------------------------------------
# SampleSet CSV: no header, one observation per row


def write_samples(S, path) -> None:
    S = _as_samples(S)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in S.data:
            w.writerow([format(float(v), ".17g") for v in row])


def read_samples(path) -> SampleSet:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if len(rows[-1]) != len(rows[0]):
                raise ValueError(f"{path}:{lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}")
    if not rows:
        raise ValueError(f"{path}: no observations")
    return SampleSet(np.array(rows))
