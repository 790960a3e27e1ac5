"""Spectral-norm certificates for packed symmetric tensors.

The norm throughout is ``sup_{|x|=1} |<T, x^{(x)d}>|``.  Three routes are
provided:

* :func:`lower_cert_power` -- shifted symmetric power iteration with random
  restarts.  Every value it returns is attained at a unit vector, so it never
  exceeds the norm.
* :func:`upper_cert_unfold` -- operator norm of the mode-1 unfolding, which
  never falls below the norm and overestimates it by at most
  ``p**((d-2)/2)``.
* :func:`oracle_net` -- a certified bracket for tiny ``p`` built on a
  refining angular grid over the half-sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import as_generator
from .symtensor import (
    SymmetricTensor,
    _kron_power,
    canonical_indices,
    eval_form,
    frobenius,
    multiplicities,
    unfold,
)

__all__ = [
    "Certificate",
    "PowerIterConfig",
    "DistortionProbe",
    "lower_cert_power",
    "upper_cert_unfold",
    "oracle_net",
    "distortion_probe",
    "unfolding_distortion",
    "spectral_norm",
]

LOWER, UPPER, TWO_SIDED = "lower", "upper", "two_sided"
ORACLE_MAX_DIM = 4


@dataclass(frozen=True)
class Certificate:
    """An approximation ``f(T)`` of the spectral norm with its ratio guarantees.

    ``rho`` and ``zeta`` are the worst-case ratios the producing method
    guarantees over all symmetric tensors of this shape (``rho**-1 * norm <=
    value <= zeta * norm``).  Power iteration has no finite worst-case ``rho``,
    which is recorded as ``inf``.
    """

    kind: str
    value: float
    rho: float = 1.0
    zeta: float = 1.0
    witness: np.ndarray | None = field(default=None, repr=False)
    iterations: int = 0
    converged: bool = True

    def __post_init__(self):
        if self.kind not in (LOWER, UPPER, TWO_SIDED):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if not self.value >= 0:
            raise ValueError(f"certificate value must be nonnegative, got {self.value}")
        if self.rho < 1 or self.zeta < 1:
            raise ValueError("ratio parameters must be >= 1")
        if self.kind == LOWER and self.zeta != 1:
            raise ValueError("a lower certificate has zeta = 1")
        if self.kind == UPPER and self.rho != 1:
            raise ValueError("an upper certificate has rho = 1")

    @property
    def gamma(self) -> float:
        """Distortion ``rho * zeta``."""
        return self.rho * self.zeta


@dataclass(frozen=True)
class PowerIterConfig:
    """Restart and stopping controls; ``None`` means the size-dependent default."""

    starts: int | None = None  # default 8 * p
    max_iters: int = 5000
    tol: float = 1e-10
    shift: float | None = None  # default frobenius(T) * (d - 1)

    def __post_init__(self):
        if self.starts is not None and self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.shift is not None and self.shift < 0:
            raise ValueError("shift must be nonnegative")


@dataclass(frozen=True)
class DistortionProbe:
    lower: Certificate
    upper: Certificate
    ratio: float
    degenerate: bool = False


def unfolding_distortion(p: int, d: int) -> float:
    """Worst-case overestimate of the mode-1 unfolding norm, ``p**((d-2)/2)``."""
    return float(p) ** ((d - 2) / 2)


def _check_finite(T: SymmetricTensor) -> None:
    if not np.all(np.isfinite(T.values)):
        raise FloatingPointError("tensor has non-finite entries")


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


def _kron_cols(XT: np.ndarray, k: int) -> np.ndarray:
    """Column-wise Kronecker power of a ``(p, s)`` array, shape ``(p**k, s)``."""
    out = XT
    for _ in range(k - 1):
        out = (out[:, None, :] * XT[None, :, :]).reshape(-1, XT.shape[1])
    return out


def _contract_cols(M: np.ndarray, d: int, XT: np.ndarray) -> np.ndarray:
    """Columns ``unfold(T) @ x^(d-1)``; einsum keeps each column's arithmetic independent of batch shape."""
    return np.einsum("ij,js->is", M, _kron_cols(XT, d - 1))


def _ss_hopm(M: np.ndarray, d: int, X: np.ndarray, signs: np.ndarray, shift: float, max_iters: int, tol: float):
    """Shifted power ascent of ``x -> s <T, x^d>`` for every row ``x`` of ``X`` with sign ``s``.

    Rows stop individually once their objective changes by less than
    ``tol * max(1, |f|)``; frozen rows are never touched again, so each row's
    trajectory does not depend on which other rows share the batch.
    """
    XT = np.ascontiguousarray(X.T)
    GT = signs * _contract_cols(M, d, XT)
    f = np.einsum("is,is->s", GT, XT)
    iters = np.zeros(XT.shape[1], dtype=int)
    done = np.zeros(XT.shape[1], dtype=bool)
    for _ in range(max_iters):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        Xa = GT[:, act] + shift * XT[:, act]
        Xa /= np.sqrt(np.einsum("is,is->s", Xa, Xa))
        Ga = signs[act] * _contract_cols(M, d, Xa)
        fa = np.einsum("is,is->s", Ga, Xa)
        iters[act] += 1
        done[act] = np.abs(fa - f[act]) < tol * np.maximum(1.0, np.abs(fa))
        XT[:, act], GT[:, act], f[act] = Xa, Ga, fa
    return XT.T, f, iters, done


def lower_cert_power(T: SymmetricTensor, cfg: PowerIterConfig | None = None, rng=None) -> Certificate:
    """Lower certificate by shifted symmetric power iteration.

    Each restart starts from a uniform point on the sphere and is run on both
    ``T`` and ``-T``; the best attained ``|<T, x^d>|`` is returned together
    with the unit vector attaining it.  Restart ``k`` always uses the ``k``-th
    draw of ``rng``, so adding restarts can only raise the value.
    """
    cfg = cfg or PowerIterConfig()
    _check_finite(T)
    p, d = T.p, T.d
    if T.is_zero():
        w = np.zeros(p)
        w[0] = 1.0
        return Certificate(LOWER, 0.0, rho=math.inf, witness=w, iterations=0, converged=True)
    rng = as_generator(rng)
    starts = cfg.starts if cfg.starts is not None else 8 * p
    shift = cfg.shift if cfg.shift is not None else frobenius(T) * (d - 1)
    X0 = _normalize_rows(rng.standard_normal((starts, p)))

    # rows ordered restart-major: (r, +T), (r, -T), (r+1, +T), ...
    X0 = np.repeat(X0, 2, axis=0)
    signs = np.tile([1.0, -1.0], starts)
    X, f, its, conv = _ss_hopm(unfold(T), d, X0, signs, shift, cfg.max_iters, cfg.tol)
    best = int(np.argmax(np.abs(f)))
    witness = X[best] / np.linalg.norm(X[best])
    return Certificate(
        LOWER,
        abs(eval_form(T, witness)),
        rho=math.inf,
        witness=witness,
        iterations=int(its[best]),
        converged=bool(conv[best]),
    )


def upper_cert_unfold(T: SymmetricTensor) -> Certificate:
    """Upper certificate: largest singular value of the mode-1 unfolding.

    ``<T, x^d> = x^T unfold(T) vec(x^(d-1))`` with both factors of unit norm,
    so this bounds the spectral norm from above.
    """
    _check_finite(T)
    M = unfold(T)
    gram = M @ M.T
    lam = float(np.linalg.eigvalsh(gram)[-1])
    return Certificate(UPPER, math.sqrt(max(lam, 0.0)), rho=1.0, zeta=unfolding_distortion(T.p, T.d))


def spectral_norm(T: SymmetricTensor, cfg: PowerIterConfig | None = None, rng=None) -> float:
    """Best available attained value (power-iteration lower certificate)."""
    return lower_cert_power(T, cfg, rng).value


# ---------------------------------------------------------------------------
# certified net oracle


def _angles_to_sphere(theta: np.ndarray) -> np.ndarray:
    """Hyperspherical coordinates ``(K, p-1)`` to unit vectors ``(K, p)``."""
    K, m = theta.shape
    X = np.empty((K, m + 1))
    s = np.ones(K)
    for k in range(m):
        X[:, k] = s * np.cos(theta[:, k])
        s = s * np.sin(theta[:, k])
    X[:, m] = s
    return X


def _abs_form(T: SymmetricTensor, X: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    idx = canonical_indices(T.p, T.d)
    w = multiplicities(T.p, T.d) * T.values
    out = np.empty(X.shape[0])
    for s in range(0, X.shape[0], chunk):
        out[s : s + chunk] = X[s : s + chunk][:, idx].prod(axis=2) @ w
    return np.abs(out)


def _polish(T: SymmetricTensor, x: np.ndarray, steps: int = 100) -> tuple[float, np.ndarray]:
    """Projected ascent on ``|<T, x^d>|``; returns the best attained value and point."""
    M = unfold(T)
    shift = frobenius(T) * (T.d - 1)
    x = x / np.linalg.norm(x)
    best_v, best_x = abs(eval_form(T, x)), x
    sign = 1.0 if eval_form(T, x) >= 0 else -1.0
    for _ in range(steps):
        g = sign * (M @ _kron_power(x, T.d - 1))
        x = g + shift * x
        x = x / np.linalg.norm(x)
        v = abs(eval_form(T, x))
        if v > best_v:
            best_v, best_x = v, x
    return best_v, best_x


def oracle_net(T: SymmetricTensor, eps: float = 0.01, *, polish_top: int = 8) -> tuple[float, float]:
    """Certified bracket ``norm in [value, value + error_bound]`` for ``p <= 4``.

    ``error_bound = d * frobenius(T) * eps``.  The half-sphere is covered by
    boxes in hyperspherical angles (the angle map is 1-Lipschitz, so a box of
    half-width ``h`` lies within ``h * sqrt(p-1)`` of its centre) and
    ``|<T, x^d>|`` is ``d * |T|_F``-Lipschitz on the unit ball.  Boxes whose
    Lipschitz bound cannot beat the incumbent by more than ``error_bound`` are
    dropped; the rest are bisected until their radius reaches ``eps``.  The
    incumbent is always an attained value, improved by local ascent.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    if T.p > ORACLE_MAX_DIM:
        raise ValueError(f"oracle_net supports p <= {ORACLE_MAX_DIM}, got p={T.p}")
    _check_finite(T)
    p, d = T.p, T.d
    lip = d * frobenius(T)
    bound = lip * eps
    if T.is_zero():
        return 0.0, 0.0
    if p == 1:
        return abs(float(T.values[0])), bound

    m = p - 1
    n0 = max(2, int(math.ceil(4096 ** (1.0 / m))))
    h = math.pi / (2 * n0)
    axis = (np.arange(n0) + 0.5) * (2 * h)
    centres = np.stack(np.meshgrid(*([axis] * m), indexing="ij"), axis=-1).reshape(-1, m)
    offsets = np.stack(np.meshgrid(*([[-0.5, 0.5]] * m), indexing="ij"), axis=-1).reshape(-1, m)

    best_v, best_x = 0.0, None
    first = True
    while True:
        X = _angles_to_sphere(centres)
        F = _abs_form(T, X)
        k = int(np.argmax(F))
        if F[k] > best_v:
            best_v, best_x = float(F[k]), X[k]
        if first:
            for j in np.argsort(-F, kind="stable")[:polish_top]:
                v, x = _polish(T, X[j])
                if v > best_v:
                    best_v, best_x = v, x
            first = False
        r = h * math.sqrt(m)
        if r <= eps:
            break
        keep = F + lip * r > best_v + bound
        if not np.any(keep):
            break
        h /= 2
        centres = (centres[keep][:, None, :] + offsets[None, :, :] * (2 * h)).reshape(-1, m)

    v, _ = _polish(T, best_x)
    return max(best_v, v), bound


def distortion_probe(T: SymmetricTensor, cfg: PowerIterConfig | None = None, rng=None) -> DistortionProbe:
    """Lower and upper certificates and their ratio, an empirical two-sided distortion."""
    lo = lower_cert_power(T, cfg, rng)
    up = upper_cert_unfold(T)
    if lo.value == 0.0:
        return DistortionProbe(lo, up, math.inf, degenerate=True)
    return DistortionProbe(lo, up, max(1.0, up.value / lo.value))
