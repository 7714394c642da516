"""Matrix semigroups ``t -> e^{tA}`` and their eventual positivity on time grids.

Positivity is scale invariant, so every time scan works with the rescaled
semigroup ``e^{t(A - s(A))}``: margins then stay of order one instead of
decaying or overflowing, and ``>>_u`` verdicts are unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from . import config
from .errors import OverflowRiskError, SpectralError
from .lattice import as_order_unit, as_vector, column_margins, ideal_contains_range, tol_pos
from .spectral import (
    OperatorLike,
    SpectralSummary,
    analyze,
    as_operator,
    cluster_projection,
    spectral_gap,
    tol_rank,
)

# diagonal [13/13] Pade coefficients b_j = (26-j)! 13! / (26! j! (13-j)!)
_PADE13 = tuple(
    math.factorial(26 - j) * math.factorial(13) / (math.factorial(26) * math.factorial(j) * math.factorial(13 - j))
    for j in range(14)
)
_THETA13 = 5.371920351148152


def _pade13_extended() -> tuple:
    # b_j = b_{j-1} (14 - j) / (j (27 - j)), evaluated in extended precision
    b = [np.longdouble(1)]
    for j in range(1, 14):
        b.append(b[-1] * np.longdouble(14 - j) / np.longdouble(j * (27 - j)))
    return tuple(b)


_PADE13_EXT = _pade13_extended()


def _expm_pade13(M: np.ndarray, extended: bool = False) -> np.ndarray:
    """Scaling and squaring with the [13/13] Pade approximant.

    ``extended`` runs the products in ``np.longdouble`` with one extra
    halving, which pushes the truncation error below the extended epsilon.
    """
    n = M.shape[0]
    norm1 = float(np.max(np.sum(np.abs(M), axis=0))) if n else 0.0
    s = max(0, int(math.ceil(math.log2(norm1 / _THETA13)))) if norm1 > _THETA13 else 0
    if extended:
        s += 1
        b = _PADE13_EXT
        X = M.astype(np.longdouble) / np.longdouble(2.0**s)
    else:
        b = _PADE13
        X = M / (2.0**s)
    ident = np.eye(n, dtype=X.dtype)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X2 @ X4
    U = X @ (X6 @ (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * ident)
    V = X6 @ (b[12] * X6 + b[10] * X4 + b[8] * X2) + b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * ident
    if extended:
        # V - U is well conditioned for ||X|| <= theta; refine a float LU solve
        D, Nm = V - U, V + U
        lu = sla.lu_factor(D.astype(float), check_finite=False)
        E = sla.lu_solve(lu, Nm.astype(float), check_finite=False).astype(np.longdouble)
        for _ in range(3):
            E += sla.lu_solve(lu, (Nm - D @ E).astype(float), check_finite=False)
    else:
        E = sla.solve(V - U, V + U, check_finite=False)
    for _ in range(s):
        E = E @ E
    return E.astype(float) if extended else E


def expm(A: OperatorLike, t: float = 1.0, spectral_bound: Optional[float] = None) -> np.ndarray:
    """``e^{tA}`` by scaling and squaring with the [13/13] Pade approximant.

    Evaluated in extended precision, so the result is accurate to about
    double epsilon times the conditioning of the exponential. Time scans use
    a faster double-precision kernel.

    Raises
    ------
    OverflowRiskError
        ``t * s(A) > 700``; the entries would overflow. Work with ``A - s(A) I``.
    """
    A = as_operator(A)
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    if spectral_bound is None:
        spectral_bound = float(np.max(sla.eigvals(A.matrix, check_finite=False).real))
    if t * spectral_bound > 700.0:
        raise OverflowRiskError(
            f"t*s(A) = {t * spectral_bound:.4g} > 700 for {A.name!r}; rescale by the spectral bound"
        )
    if t == 0.0:
        return np.eye(A.n)
    return _expm_pade13(t * A.matrix, extended=True)


def default_t_max(A: OperatorLike, summary: Optional[SpectralSummary] = None) -> float:
    """``50 / max(1e-3, gap)`` where gap separates the peripheral spectrum from the rest."""
    cfg = config.get()
    if cfg.t_max is not None:
        return float(cfg.t_max)
    gap = spectral_gap(A, summary)
    if gap is None:
        # everything is peripheral: nothing decays, any horizon shows the pattern
        gap = 1.0
    return 50.0 / max(1e-3, gap)


@dataclass(frozen=True)
class TimeGrid:
    """Geometric grid on ``[max(t_min, 1e-3), t_max]``, plus ``0`` when ``t_min = 0``."""

    t_max: float
    t_min: float = 0.0
    n_geom: int = 64

    def __post_init__(self):
        if not (self.t_min >= 0 and self.t_max > self.t_min and math.isfinite(self.t_max)):
            raise ValueError("need 0 <= t_min < t_max < inf")
        if self.n_geom < 2:
            raise ValueError("need at least two geometric points")

    @classmethod
    def for_operator(cls, A: OperatorLike, summary: Optional[SpectralSummary] = None) -> "TimeGrid":
        return cls(default_t_max(A, summary), 0.0, config.get().grid_points)

    def points(self) -> np.ndarray:
        lo = max(self.t_min, 1e-3)
        if lo >= self.t_max:
            lo = 0.5 * (self.t_min + self.t_max) if self.t_min > 0 else self.t_max / 2
        pts = np.geomspace(lo, self.t_max, self.n_geom)
        if self.t_min == 0.0:
            pts = np.concatenate([[0.0], pts])
        return pts


@dataclass(frozen=True, eq=False)
class TimeVerdict:
    """Outcome of a time scan of the rescaled semigroup.

    ``margins`` holds ``(t, eps*)`` pairs, the minimum over columns for uniform
    scans, including points added by bisection. Claims never extend past
    ``t_max``.
    """

    holds: bool
    t0: Optional[float]
    margins: tuple
    passes: tuple
    thresholds: tuple
    f: Optional[np.ndarray]
    t_max: float
    rescaled_by: float
    strict: bool
    column_t0: Optional[tuple] = None

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "t0": self.t0,
            "t_max": self.t_max,
            "rescaled_by": self.rescaled_by,
            "strict": self.strict,
            "margins": [[t, e] for t, e in self.margins],
            "passes": list(self.passes),
            "thresholds": list(self.thresholds),
            "f": None if self.f is None else self.f.tolist(),
            "column_t0": None if self.column_t0 is None else list(self.column_t0),
        }


class _RescaledFlow:
    """Evaluates ``e^{t(A - s)} F`` with column-wise margin tests, memoized by ``t``."""

    def __init__(self, A, F, u, strict, summary):
        self.A = A
        self.s = summary.spectral_bound
        self.B = A.matrix - self.s * np.eye(A.n)
        self.F = F
        self.u = u
        self.strict = strict
        self.cache: dict = {}

    def evaluate(self, t: float):
        if t in self.cache:
            return self.cache[t]
        G = (np.eye(self.A.n) if t == 0.0 else _expm_pade13(t * self.B)) @ self.F
        eps, thr, ok = column_margins(G, self.u, self.strict)
        self.cache[t] = (eps, thr, ok)
        return self.cache[t]


def _tail_start(ok: list) -> Optional[int]:
    start = None
    for k in range(len(ok) - 1, -1, -1):
        if not ok[k]:
            break
        start = k
    return start


def _time_scan(A, F, u, grid, strict, per_column, f_record):
    A = as_operator(A)
    summary = analyze(A)
    grid = TimeGrid.for_operator(A, summary) if grid is None else grid
    flow = _RescaledFlow(A, F, u, strict, summary)
    ts = list(grid.points())
    for t in ts:
        flow.evaluate(t)

    width = 1e-4 * grid.t_max

    def refine(k: int, ok) -> float:
        # last failing-to-passing transition, narrowed by bisection
        if k == 0:
            return ts[0]
        lo, hi = ts[k - 1], ts[k]
        while hi - lo > width:
            mid = 0.5 * (lo + hi)
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return hi

    col_t0 = []
    for j in range(F.shape[1]):
        def ok(t, j=j):
            return bool(flow.evaluate(t)[2][j])

        k = _tail_start([ok(t) for t in ts])
        col_t0.append(None if k is None else float(refine(k, ok)))
    holds = all(c is not None for c in col_t0)
    # the common tail starts where the last column settles
    t0 = max(col_t0) if holds else None
    times = sorted(flow.cache)
    if holds:
        failing = [t for t in times if t >= t0 and not np.all(flow.cache[t][2])]
        if failing:
            # another column's bisection probe failed past t0; start after it
            t0 = min(t for t in times if t > max(failing))
    return TimeVerdict(
        holds=holds,
        t0=t0,
        margins=tuple((float(t), float(np.min(flow.cache[t][0]))) for t in times),
        passes=tuple(bool(np.all(flow.cache[t][2])) for t in times),
        thresholds=tuple(float(np.max(flow.cache[t][1])) for t in times),
        f=f_record,
        t_max=float(grid.t_max),
        rescaled_by=float(flow.s),
        strict=strict,
        column_t0=tuple(col_t0) if per_column else None,
    )


def find_t0(A: OperatorLike, f, u=None, grid: Optional[TimeGrid] = None, strict: bool = True) -> TimeVerdict:
    """Earliest grid time from which ``e^{tA} f >>_u 0`` holds through ``t_max``.

    The last failing-to-passing transition is refined by bisection to a width
    of ``1e-4 * t_max``. With ``strict=False`` plain positivity is tested.
    """
    A = as_operator(A)
    f = as_vector(f)
    if not (np.all(f >= 0) and np.any(f > 0)):
        raise ValueError("test vector must satisfy f >= 0, f != 0")
    u = as_order_unit(u, A.n)
    return _time_scan(A, f[:, None], u, grid, strict, False, f)


def find_t0_uniform(A: OperatorLike, u=None, grid: Optional[TimeGrid] = None, strict: bool = True) -> TimeVerdict:
    """Common ``t0`` for all basis vectors, i.e. every column of ``e^{tA}`` is ``>>_u 0``."""
    A = as_operator(A)
    u = as_order_unit(u, A.n)
    return _time_scan(A, np.eye(A.n), u, grid, strict, True, None)


@dataclass(frozen=True)
class RescaledBound:
    sup_norm: float
    bounded: bool
    peripheral_pole_orders: tuple

    def as_dict(self) -> dict:
        return {
            "sup_norm": self.sup_norm,
            "bounded": self.bounded,
            "peripheral_pole_orders": [
                {"re": z.real, "im": z.imag, "pole_order": m} for z, m in self.peripheral_pole_orders
            ],
        }


def peripheral_pole_orders(A: OperatorLike, summary: Optional[SpectralSummary] = None) -> tuple:
    """``(eigenvalue, pole order)`` for each peripheral cluster."""
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    out = []
    for c in summary.peripheral:
        try:
            m = cluster_projection(A, c.center, summary).pole_order
        except SpectralError:
            # order one exactly when geometric and algebraic multiplicity agree
            N = c.center * np.eye(A.n) - A.matrix
            geom = A.n - int(np.sum(sla.svdvals(N) > tol_rank(A)))
            m = 1 if geom == c.multiplicity else 2
        out.append((complex(c.center), int(m)))
    return tuple(out)


def rescaled_bound(A: OperatorLike, grid: Optional[TimeGrid] = None) -> RescaledBound:
    """Boundedness of ``e^{t(A - s(A))}``.

    Decided by semisimplicity of the peripheral spectrum; the supremum of the
    induced sup-norm over the grid is reported as corroboration only.
    """
    A = as_operator(A)
    summary = analyze(A)
    grid = TimeGrid.for_operator(A, summary) if grid is None else grid
    B = A.matrix - summary.spectral_bound * np.eye(A.n)
    sup = 0.0
    for t in grid.points():
        E = np.eye(A.n) if t == 0 else _expm_pade13(t * B)
        sup = max(sup, float(np.max(np.sum(np.abs(E), axis=1))))
    orders = peripheral_pole_orders(A, summary)
    return RescaledBound(sup, all(m == 1 for _, m in orders), orders)


def modulus_estimate(A: OperatorLike, f, grid: Optional[TimeGrid] = None) -> Optional[float]:
    """Smallest grid time ``t1`` with ``|e^{tA} f| <= e^{tA}|f| + tol_pos`` for all grid ``t >= t1``.

    Meaningful when the semigroup is eventually positive. Returns ``None`` if
    no tail of the grid satisfies the estimate.
    """
    f = as_vector(f)
    return modulus_batch(A, f[:, None], grid)[0]


def modulus_batch(A: OperatorLike, F, grid: Optional[TimeGrid] = None) -> list:
    """:func:`modulus_estimate` for every column of ``F``, sharing the exponentials."""
    A = as_operator(A)
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != A.n:
        raise ValueError(f"expected an array with {A.n} rows")
    summary = analyze(A)
    grid = TimeGrid.for_operator(A, summary) if grid is None else grid
    B = A.matrix - summary.spectral_bound * np.eye(A.n)
    k = F.shape[1]
    W = np.hstack([F, np.abs(F)])
    ts = grid.points()
    ok = np.zeros((len(ts), k), dtype=bool)
    for i, t in enumerate(ts):
        G = W if t == 0 else _expm_pade13(t * B) @ W
        for j in range(k):
            g, h = G[:, j], G[:, k + j]
            ok[i, j] = bool(np.all(np.abs(g) <= h + tol_pos(h)))
    out = []
    for j in range(k):
        start = _tail_start(list(ok[:, j]))
        out.append(None if start is None else float(ts[start]))
    return out


def smoothing_check(A: OperatorLike, t_probe: float, u) -> bool:
    """Whether ``e^{t_probe A}`` maps into the principal ideal of ``u >= 0``."""
    return ideal_contains_range(expm(A, t_probe), u)
