"""Packed storage for symmetric order-d tensors.

A symmetric tensor in ``R^{p^d}`` has one independent value per multiset of
``d`` coordinates.  :class:`SymmetricTensor` stores exactly those
``binom(p+d-1, d)`` values, ordered lexicographically over nondecreasing index
tuples (the order produced by :func:`itertools.combinations_with_replacement`).
Indices in the Python API are 0-based; the text file format is 1-based.

Dense semantics are recovered with the orbit multiplicities: the entry stored
at a canonical tuple appears ``multiplicity(idx)`` times in the full array.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

__all__ = [
    "SymmetricTensor",
    "TensorFormatError",
    "canonical_position",
    "multiplicity",
    "canonical_indices",
    "multiplicities",
    "num_canonical",
    "make_rank_one",
    "random_tensor",
    "eval_form",
    "grad_slice",
    "frobenius",
    "unfold",
    "axpy",
    "scale",
    "write_symtensor",
    "read_symtensor",
    "io_roundtrip",
]

HEADER_TAG = "SYMTENSOR"
FORMAT_VERSION = "v1"


class TensorFormatError(ValueError):
    """Malformed SYMTENSOR file; carries the offending line number."""

    def __init__(self, message: str, lineno: int | None = None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


def num_canonical(p: int, d: int) -> int:
    """Number of multisets of size ``d`` drawn from ``p`` symbols."""
    return math.comb(p + d - 1, d)


@lru_cache(maxsize=None)
def _canonical_indices(p: int, d: int) -> np.ndarray:
    idx = np.array(list(combinations_with_replacement(range(p), d)), dtype=np.intp)
    idx = idx.reshape(-1, d)
    idx.setflags(write=False)
    return idx


def canonical_indices(p: int, d: int) -> np.ndarray:
    """All nondecreasing index tuples, shape ``(num_canonical(p, d), d)``, in storage order."""
    return _canonical_indices(int(p), int(d))


@lru_cache(maxsize=None)
def _multiplicities(p: int, d: int) -> np.ndarray:
    mult = np.array([multiplicity(t) for t in _canonical_indices(p, d)], dtype=float)
    mult.setflags(write=False)
    return mult


def multiplicities(p: int, d: int) -> np.ndarray:
    """Orbit sizes aligned with :func:`canonical_indices`."""
    return _multiplicities(int(p), int(d))


def canonical_position(idx: Sequence[int], p: int, d: int | None = None) -> int:
    """Offset of ``sorted(idx)`` in the lexicographic enumeration of nondecreasing tuples.

    Computed combinatorially: for each slot, count the tuples that agree on
    the earlier slots and carry a smaller value here.
    """
    t = sorted(int(i) for i in idx)
    if d is not None and len(t) != d:
        raise ValueError(f"index has length {len(t)}, expected order {d}")
    if any(i < 0 or i >= p for i in t):
        raise ValueError(f"index {tuple(idx)} out of range for dimension {p}")
    d = len(t)
    pos = 0
    prev = 0
    for k, ik in enumerate(t):
        rest = d - k - 1
        for v in range(prev, ik):
            # nondecreasing tails of length `rest` over symbols v..p-1
            pos += math.comb(p - v + rest - 1, rest)
        prev = ik
    return pos


def multiplicity(idx: Sequence[int]) -> int:
    """Number of distinct permutations of a sorted index tuple."""
    t = tuple(int(i) for i in idx)
    if any(a > b for a, b in zip(t, t[1:])):
        raise ValueError(f"index {t} is not sorted")
    out = math.factorial(len(t))
    for c in Counter(t).values():
        out //= math.factorial(c)
    return out


@lru_cache(maxsize=None)
def _dense_map(p: int, d: int) -> np.ndarray:
    """Canonical offset for every full index tuple, in C order over ``p^d``."""
    full = np.indices((p,) * d).reshape(d, -1).T
    full.sort(axis=1)
    weights = p ** np.arange(d - 1, -1, -1)
    codes = full @ weights
    canon_codes = _canonical_indices(p, d) @ weights
    out = np.searchsorted(canon_codes, codes)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SymmetricTensor:
    """Order-``d`` symmetric tensor on ``R^p`` stored one value per orbit."""

    d: int
    p: int
    values: np.ndarray

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"order must be >= 2, got {self.d}")
        if self.p < 1:
            raise ValueError(f"dimension must be >= 1, got {self.p}")
        vals = np.array(self.values, dtype=float).reshape(-1)
        expected = num_canonical(self.p, self.d)
        if vals.size != expected:
            raise ValueError(
                f"expected {expected} canonical values for p={self.p}, d={self.d}, got {vals.size}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, p: int, d: int) -> SymmetricTensor:
        return cls(d, p, np.zeros(num_canonical(p, d)))

    @classmethod
    def from_entries(cls, p: int, d: int, entries: dict) -> SymmetricTensor:
        """Build from ``{index tuple: value}``; any permutation of a tuple names the same slot."""
        vals = np.zeros(num_canonical(p, d))
        for idx, v in entries.items():
            vals[canonical_position(idx, p, d)] = v
        return cls(d, p, vals)

    @classmethod
    def from_dense(cls, arr: np.ndarray, *, check: bool = True, atol: float = 1e-12) -> SymmetricTensor:
        """Pack a dense array, optionally checking it is symmetric."""
        arr = np.asarray(arr, dtype=float)
        d, p = arr.ndim, arr.shape[0]
        if any(s != p for s in arr.shape):
            raise ValueError(f"dense tensor must be cubical, got shape {arr.shape}")
        T = cls(d, p, arr[tuple(canonical_indices(p, d).T)])
        if check and not np.allclose(T.to_dense(), arr, atol=atol, rtol=0):
            raise ValueError("dense array is not symmetric")
        return T

    def to_dense(self) -> np.ndarray:
        return self.values[_dense_map(self.p, self.d)].reshape((self.p,) * self.d)

    def __getitem__(self, idx) -> float:
        return float(self.values[canonical_position(idx, self.p, self.d)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymmetricTensor):
            return NotImplemented
        return self.d == other.d and self.p == other.p and np.array_equal(self.values, other.values)

    def __neg__(self) -> SymmetricTensor:
        return SymmetricTensor(self.d, self.p, -self.values)

    def __add__(self, other: SymmetricTensor) -> SymmetricTensor:
        return axpy(1.0, other, self)

    def __sub__(self, other: SymmetricTensor) -> SymmetricTensor:
        return axpy(-1.0, other, self)

    def __mul__(self, c: float) -> SymmetricTensor:
        return scale(c, self)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def __repr__(self) -> str:
        return f"SymmetricTensor(d={self.d}, p={self.p}, nnz={np.count_nonzero(self.values)})"


def _check_vector(T: SymmetricTensor, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (T.p,):
        raise ValueError(f"vector has shape {x.shape}, expected ({T.p},)")
    return x


def make_rank_one(c: float, u, d: int) -> SymmetricTensor:
    """The tensor ``c * u^{(x)d}``."""
    u = np.asarray(u, dtype=float).reshape(-1)
    idx = canonical_indices(u.size, d)
    return SymmetricTensor(d, u.size, c * u[idx].prod(axis=1))


def random_tensor(p: int, d: int, rng=None) -> SymmetricTensor:
    """Tensor with i.i.d. standard normal canonical values."""
    rng = np.random.default_rng(rng)
    return SymmetricTensor(d, p, rng.standard_normal(num_canonical(p, d)))


def eval_form(T: SymmetricTensor, x) -> float:
    """``<T, x^{(x)d}>`` summed over canonical entries with orbit weights."""
    x = _check_vector(T, x)
    monomials = x[canonical_indices(T.p, T.d)].prod(axis=1)
    return float(monomials @ (multiplicities(T.p, T.d) * T.values))


def _kron_power(x: np.ndarray, k: int) -> np.ndarray:
    """Row-wise Kronecker power; ``x`` has shape (..., p), result (..., p**k)."""
    out = np.ones(x.shape[:-1] + (1,))
    for _ in range(k):
        out = (out[..., :, None] * x[..., None, :]).reshape(x.shape[:-1] + (-1,))
    return out


def grad_slice(T: SymmetricTensor, x) -> np.ndarray:
    """Vector ``g_i = <T, e_i (x) x^{(x)(d-1)}>``; the gradient of :func:`eval_form` is ``d * g``."""
    x = _check_vector(T, x)
    return unfold(T) @ _kron_power(x, T.d - 1)


def frobenius(T: SymmetricTensor) -> float:
    """Euclidean norm of the full ``p^d`` array."""
    return float(np.sqrt(multiplicities(T.p, T.d) @ (T.values**2)))


def unfold(T: SymmetricTensor) -> np.ndarray:
    """Mode-1 unfolding, shape ``(p, p**(d-1))``, columns in C order over ``(j_2, ..., j_d)``."""
    return T.values[_dense_map(T.p, T.d)].reshape(T.p, T.p ** (T.d - 1))


def axpy(alpha: float, A: SymmetricTensor, B: SymmetricTensor) -> SymmetricTensor:
    """``alpha * A + B``."""
    if (A.p, A.d) != (B.p, B.d):
        raise ValueError(f"shape mismatch: (p={A.p}, d={A.d}) vs (p={B.p}, d={B.d})")
    return SymmetricTensor(A.d, A.p, alpha * A.values + B.values)


def scale(c: float, T: SymmetricTensor) -> SymmetricTensor:
    return SymmetricTensor(T.d, T.p, c * T.values)


# ---------------------------------------------------------------------------
# text format


def write_symtensor(T: SymmetricTensor, path, *, keep_zeros: bool = False) -> None:
    """Write ``T`` as ``SYMTENSOR v1``; zero entries are omitted unless ``keep_zeros``."""
    lines = [f"{HEADER_TAG} {FORMAT_VERSION} d={T.d} p={T.p}"]
    for idx, v in zip(canonical_indices(T.p, T.d), T.values):
        if v == 0.0 and not keep_zeros:
            continue
        lines.append(" ".join(str(i + 1) for i in idx) + " " + format(float(v), ".17g"))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(line: str, path) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != HEADER_TAG or parts[1] != FORMAT_VERSION:
        raise TensorFormatError(f"bad header {line.strip()!r}", 1, path)
    try:
        d = int(parts[2].removeprefix("d=")) if parts[2].startswith("d=") else None
        p = int(parts[3].removeprefix("p=")) if parts[3].startswith("p=") else None
    except ValueError:
        d = p = None
    if d is None or p is None or d < 2 or p < 1:
        raise TensorFormatError(f"bad header {line.strip()!r}", 1, path)
    return d, p


def read_symtensor(path) -> SymmetricTensor:
    """Parse a ``SYMTENSOR v1`` file; unlisted canonical entries are zero."""
    with open(path, encoding="utf-8") as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise TensorFormatError("empty file", 1, path)
    d, p = _parse_header(raw[0].split("#", 1)[0], path)
    vals = np.zeros(num_canonical(p, d))
    seen: dict[int, int] = {}
    for lineno, line in enumerate(raw[1:], start=2):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != d + 1:
            raise TensorFormatError(f"expected {d} indices and a value, got {len(parts)} fields", lineno, path)
        try:
            idx = [int(s) - 1 for s in parts[:d]]
            value = float(parts[d])
        except ValueError as exc:
            raise TensorFormatError(str(exc), lineno, path) from None
        if any(i < 0 or i >= p for i in idx):
            raise TensorFormatError(f"index out of range 1..{p}", lineno, path)
        if any(a > b for a, b in zip(idx, idx[1:])):
            raise TensorFormatError("indices must be nondecreasing", lineno, path)
        pos = canonical_position(idx, p, d)
        if pos in seen:
            raise TensorFormatError(f"duplicate index (first seen on line {seen[pos]})", lineno, path)
        seen[pos] = lineno
        vals[pos] = value
    return SymmetricTensor(d, p, vals)


def io_roundtrip(T: SymmetricTensor, path: str | os.PathLike) -> SymmetricTensor:
    """Write ``T`` to ``path`` and read it back."""
    write_symtensor(T, path)
    return read_symtensor(path)
