"""Banach-lattice primitives on R^n with the componentwise order.

Vectors are plain 1-d float arrays. An order unit ``u`` is a strictly
positive vector; in finite dimension these are exactly the quasi-interior
points of the positive cone. ``f >>_u 0`` means ``f >= eps*u`` for some
``eps > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import config
from .errors import LatticeError

ArrayLike = Union[np.ndarray, list, tuple]


def as_vector(f: ArrayLike) -> np.ndarray:
    """Validate ``f`` as a finite real vector and return a float copy."""
    arr = np.array(f, dtype=float)
    if arr.ndim != 1:
        raise LatticeError(f"expected a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LatticeError("vector has non-finite entries")
    arr.setflags(write=False)
    return arr


class OrderUnit:
    """Strictly positive weight vector defining ``>>_u`` and the gauge norm."""

    __slots__ = ("entries",)

    def __init__(self, entries: ArrayLike):
        arr = as_vector(entries)
        if arr.size == 0 or not np.all(arr > 0):
            raise LatticeError("order unit must be strictly positive entrywise")
        self.entries = arr

    @classmethod
    def ones(cls, n: int) -> "OrderUnit":
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return self.entries.size

    def __len__(self) -> int:
        return self.entries.size

    def __repr__(self) -> str:
        return f"OrderUnit({self.entries.tolist()!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, OrderUnit) and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())


def as_order_unit(u: Union[OrderUnit, ArrayLike, None], n: Optional[int] = None) -> OrderUnit:
    if u is None:
        if n is None:
            raise LatticeError("cannot infer order unit dimension")
        return OrderUnit.ones(n)
    if not isinstance(u, OrderUnit):
        u = OrderUnit(u)
    if n is not None and u.n != n:
        raise LatticeError(f"order unit has length {u.n}, expected {n}")
    return u


def sup_norm(x: np.ndarray) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def tol_zero(x: ArrayLike) -> float:
    """Rounding-noise floor for sign tests on ``x``."""
    return config.get().tol_zero * (1.0 + sup_norm(np.asarray(x, dtype=float)))


def tol_pos(x: ArrayLike) -> float:
    """Threshold a margin must exceed to count as strict positivity."""
    return config.get().tol_pos * (1.0 + sup_norm(np.asarray(x, dtype=float)))


def decompose(f: ArrayLike) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(f+, f-, |f|)`` with ``f = f+ - f-`` and ``|f| = f+ + f-``."""
    f = as_vector(f)
    pos = np.maximum(f, 0.0)
    neg = np.maximum(-f, 0.0)
    return pos, neg, pos + neg


def is_positive(f: ArrayLike) -> bool:
    """``f >= 0`` up to :func:`tol_zero`."""
    f = np.asarray(f, dtype=float)
    return bool(np.all(f >= -tol_zero(f)))


def gauge_norm(f: ArrayLike, u: Union[OrderUnit, ArrayLike]) -> float:
    """``inf{c >= 0 : |f| <= c u}``, i.e. ``max_i |f_i| / u_i``."""
    f = as_vector(f)
    u = as_order_unit(u, f.size)
    return float(np.max(np.abs(f) / u.entries)) if f.size else 0.0


def in_principal_ideal(f: ArrayLike, u: ArrayLike) -> bool:
    """Whether ``|f| <= c u`` for some ``c``; ``u`` may have zero entries.

    Only the support of ``u`` matters: ``f`` must vanish (up to
    :func:`tol_zero`) wherever ``u`` does.
    """
    f = as_vector(f)
    u = as_vector(u)
    if u.shape != f.shape:
        raise LatticeError(f"shape mismatch {f.shape} vs {u.shape}")
    if np.any(u < 0):
        raise LatticeError("ideal generator must be nonnegative")
    off_support = u <= 0
    return bool(np.all(np.abs(f[off_support]) <= tol_zero(f)))


def strong_pos_margin(f: ArrayLike, u: Union[OrderUnit, ArrayLike]) -> float:
    """Largest ``eps`` with ``f - eps*u >= 0``; negative values measure violation."""
    f = as_vector(f)
    u = as_order_unit(u, f.size)
    return float(np.min(f / u.entries))


def is_strongly_positive(f: ArrayLike, u: Union[OrderUnit, ArrayLike]) -> bool:
    return strong_pos_margin(f, u) > tol_pos(f)


def column_margins(G: np.ndarray, u: OrderUnit, strict: bool = True):
    """Margins, thresholds and pass flags for every column of ``G``.

    Strict mode tests ``g >>_u 0`` (margin ``min g/u`` above :func:`tol_pos`);
    otherwise ``g >= 0`` (``min g`` at least ``-tol_zero``, ``u`` unused).
    """
    cfg = config.get()
    scale = 1.0 + np.max(np.abs(G), axis=0)
    if strict:
        eps = np.min(G / u.entries[:, None], axis=0)
        thr = cfg.tol_pos * scale
        return eps, thr, eps > thr
    eps = np.min(G, axis=0)
    thr = -cfg.tol_zero * scale
    return eps, thr, eps >= thr


@dataclass(frozen=True)
class ConeNorm:
    """Norm used to measure distance to the positive cone.

    ``kind`` is ``"sup"``, ``"p"`` (with ``p >= 1``) or ``"u-sup"`` (the gauge
    norm of an order unit ``u``).
    """

    kind: str = "sup"
    p: float = 2.0
    u: Optional[OrderUnit] = None

    def __post_init__(self):
        if self.kind not in ("sup", "p", "u-sup"):
            raise LatticeError(f"unknown norm kind {self.kind!r}")
        if self.kind == "p" and not (self.p >= 1.0 and np.isfinite(self.p)):
            raise LatticeError("p-norm needs a finite exponent p >= 1")
        if self.kind == "u-sup":
            if self.u is None:
                raise LatticeError("u-sup norm needs an order unit")
            if not isinstance(self.u, OrderUnit):
                object.__setattr__(self, "u", OrderUnit(self.u))

    @classmethod
    def euclidean(cls) -> "ConeNorm":
        return cls("p", 2.0)

    def __call__(self, x: ArrayLike) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "sup":
            return sup_norm(x)
        if self.kind == "p":
            return float(np.linalg.norm(x, ord=self.p))
        return gauge_norm(x, self.u)

    def columns(self, X: np.ndarray) -> np.ndarray:
        """The norm of every column of ``X``."""
        X = np.asarray(X, dtype=float)
        if self.kind == "sup":
            return np.max(np.abs(X), axis=0)
        if self.kind == "p":
            return np.linalg.norm(X, ord=self.p, axis=0)
        return np.max(np.abs(X) / self.u.entries[:, None], axis=0)

    def as_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "p":
            out["p"] = self.p
        if self.kind == "u-sup":
            out["u"] = self.u.entries.tolist()
        return out


def dist_to_cone(g: ArrayLike, norm: Optional[ConeNorm] = None) -> float:
    """Distance from ``g`` to the positive cone.

    For every supported norm the nearest cone point is ``g+`` (the
    projection is componentwise), so the distance is ``norm(g-)``.
    """
    norm = ConeNorm() if norm is None else norm
    _, neg, _ = decompose(g)
    return norm(neg)


def ideal_contains_range(T: ArrayLike, u: ArrayLike) -> bool:
    """Whether every column of ``T`` lies in the principal ideal of ``u``.

    This is the finite-dimensional form of the domination and smoothing
    conditions. With strictly positive ``u`` it always holds.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise LatticeError(f"expected a square matrix, got shape {T.shape}")
    u = as_vector(u)
    if u.size != T.shape[0]:
        raise LatticeError("dimension mismatch between operator and ideal generator")
    return all(in_principal_ideal(T[:, j], u) for j in range(T.shape[1]))
