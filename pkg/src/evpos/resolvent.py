"""Resolvent evaluation and one-sided scans towards a real eigenvalue.

A scan samples ``lambda_k = lambda0 +/- delta0 * factor**k`` and records the
strong-positivity margin of ``R(lambda_k, A) f``. A verdict only speaks for
the sampled points: it holds when a tail of the schedule, ending at the
point closest to ``lambda0``, passes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from . import config
from .errors import NearSingularError, NotAnEigenvalueError
from .lattice import (
    ConeNorm,
    OrderUnit,
    as_order_unit,
    as_vector,
    column_margins,
    sup_norm,
)
from .spectral import OperatorLike, ProjectionData, as_operator, eigenvalues, tol_cluster


@dataclass(frozen=True)
class ScanSchedule:
    delta0: float = 1.0
    factor: float = 0.5
    steps: int = 40
    direction: str = "above"

    def __post_init__(self):
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if not 0 < self.factor < 1:
            raise ValueError("factor must lie in (0, 1)")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.direction not in ("above", "below"):
            raise ValueError("direction must be 'above' or 'below'")

    @classmethod
    def default(cls, direction: str = "above") -> "ScanSchedule":
        cfg = config.get()
        return cls(cfg.scan_delta0, cfg.scan_factor, cfg.scan_steps, direction)

    def offsets(self) -> np.ndarray:
        return self.delta0 * self.factor ** np.arange(self.steps)

    def points(self, lambda0: float) -> np.ndarray:
        sign = 1.0 if self.direction == "above" else -1.0
        return lambda0 + sign * self.offsets()

    def mirrored(self) -> "ScanSchedule":
        return replace(self, direction="below" if self.direction == "above" else "above")


@dataclass(frozen=True, eq=False)
class ScanVerdict:
    """Outcome of a resolvent scan.

    ``margins`` pairs each sampled ``lambda`` with the strong-positivity margin
    (the minimum over columns for uniform scans); ``passes`` flags the points
    that cleared their threshold; ``skipped`` lists schedule points that hit
    another eigenvalue. ``unresolved`` counts the schedule tail lying within
    ``tol_cluster`` of ``lambda0`` itself, which is never evaluated.
    """

    holds: bool
    lambda0: float
    lambda1: Optional[float]
    margins: tuple
    passes: tuple
    thresholds: tuple
    f: Optional[np.ndarray]
    direction: str
    strict: bool
    skipped: tuple = ()
    column_lambda1: Optional[tuple] = None
    unresolved: int = 0

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "direction": self.direction,
            "strict": self.strict,
            "margins": [[lam, eps] for lam, eps in self.margins],
            "passes": list(self.passes),
            "thresholds": list(self.thresholds),
            "skipped": list(self.skipped),
            "f": None if self.f is None else self.f.tolist(),
            "column_lambda1": None if self.column_lambda1 is None else list(self.column_lambda1),
            "unresolved": self.unresolved,
        }


def _residual_bound(M: np.ndarray, X: np.ndarray) -> float:
    cond = np.max(np.sum(np.abs(M), axis=1)) * np.max(np.sum(np.abs(X), axis=1))
    return 1e-10 * max(1.0, float(cond))


def resolvent(A: OperatorLike, lam: complex, eigs: Optional[np.ndarray] = None) -> np.ndarray:
    """``R(lam, A) = (lam I - A)^-1`` by dense LU.

    Raises
    ------
    NearSingularError
        ``lam`` is within ``tol_cluster`` of an eigenvalue, or the residual
        ``||(lam I - A) X - I||_sup`` exceeds ``1e-10 * cond``.
    """
    A = as_operator(A)
    eigs = eigenvalues(A) if eigs is None else eigs
    tol = tol_cluster(A)
    d = float(np.min(np.abs(eigs - lam)))
    if d <= tol:
        raise NearSingularError(f"lambda={lam!r} is within {d:.3g} of the spectrum of {A.name!r}")
    dtype = complex if np.iscomplexobj(lam) and complex(lam).imag != 0 else float
    lam = lam if dtype is complex else float(np.real(lam))
    M = lam * np.eye(A.n, dtype=dtype) - A.matrix
    X = sla.solve(M, np.eye(A.n, dtype=dtype), check_finite=False)
    res = float(np.max(np.abs(M @ X - np.eye(A.n))))
    if res > _residual_bound(M, X):
        raise NearSingularError(f"resolvent residual {res:.3g} too large at lambda={lam!r}")
    return X


def _require_real_eigenvalue(eigs: np.ndarray, lambda0: float, tol: float, name: str) -> None:
    if float(np.min(np.abs(eigs - lambda0))) > tol:
        raise NotAnEigenvalueError(f"{lambda0!r} is not an eigenvalue of {name!r}")


def _require_positive(f: np.ndarray) -> None:
    if not (np.all(f >= 0) and np.any(f > 0)):
        raise ValueError("test vector must satisfy f >= 0, f != 0")


def _suffix_start(flags: Sequence[Optional[bool]]) -> Optional[int]:
    """First index of the longest passing tail; ``None`` entries are neutral."""
    start = None
    for k in range(len(flags) - 1, -1, -1):
        if flags[k] is None:
            continue
        if not flags[k]:
            break
        start = k
    return start


def _blocking_index(points: np.ndarray, eigs: np.ndarray, lambda0: float, tol: float, above: bool) -> int:
    """Index from which the open interval between ``lambda0`` and the point is eigenvalue free."""
    real = eigs[np.abs(eigs.imag) <= tol].real
    if above:
        barriers = real[real > lambda0 + tol]
        if barriers.size == 0:
            return 0
        b = barriers.min()
        ok = points < b - tol
    else:
        barriers = real[real < lambda0 - tol]
        if barriers.size == 0:
            return 0
        b = barriers.max()
        ok = points > b + tol
    idx = np.nonzero(ok)[0]
    return int(idx[0]) if idx.size else len(points)


def _scan_columns(
    A, lambda0: float, F: np.ndarray, u: OrderUnit, sched: ScanSchedule, strict: bool
):
    """Per-point, per-column margins and pass flags of ``R(lambda_k, A) F``."""
    M = A.matrix
    eigs = eigenvalues(A)
    tol = tol_cluster(A)
    _require_real_eigenvalue(eigs, lambda0, tol, A.name)
    pts = sched.points(lambda0)
    first_ok = _blocking_index(pts, eigs, lambda0, tol, sched.direction == "above")
    eye = np.eye(A.n)
    margins = np.full((len(pts), F.shape[1]), np.nan)
    thresholds = np.full((len(pts), F.shape[1]), np.nan)
    flags: list = []
    skipped = []
    unresolved = 0
    own = np.abs(eigs - lambda0) <= tol
    for k, lam in enumerate(pts):
        if abs(lam - lambda0) <= tol:
            unresolved += 1
            flags.append(None)
            continue
        if np.any(~own) and float(np.min(np.abs(eigs[~own] - lam))) <= tol:
            skipped.append(float(lam))
            flags.append(None)
            continue
        G = sla.lu_solve(sla.lu_factor(lam * eye - M, check_finite=False), F, check_finite=False)
        eps, thr, col = column_margins(G, u, strict)
        margins[k] = eps
        thresholds[k] = thr
        flags.append(col if k >= first_ok else np.zeros_like(col))
    if skipped:
        warnings.warn(f"{len(skipped)} schedule points hit the spectrum of {A.name!r} and were skipped")
    return pts, margins, thresholds, flags, tuple(skipped), unresolved


def _verdict_from(pts, margins, thresholds, flags, skipped, unresolved, lambda0, f, direction, strict, per_column):
    ncol = margins.shape[1]
    all_flags = [None if fl is None else bool(np.all(fl)) for fl in flags]
    start = _suffix_start(all_flags)
    col_l1 = None
    if per_column:
        col_l1 = []
        for j in range(ncol):
            s = _suffix_start([None if fl is None else bool(fl[j]) for fl in flags])
            col_l1.append(None if s is None else float(pts[s]))
        col_l1 = tuple(col_l1)
    rows = [k for k in range(len(pts)) if flags[k] is not None]
    return ScanVerdict(
        holds=start is not None,
        lambda0=float(lambda0),
        lambda1=None if start is None else float(pts[start]),
        margins=tuple((float(pts[k]), float(np.min(margins[k]))) for k in rows),
        passes=tuple(bool(all_flags[k]) for k in rows),
        thresholds=tuple(float(np.max(thresholds[k])) for k in rows),
        f=f,
        direction=direction,
        strict=strict,
        skipped=skipped,
        column_lambda1=col_l1,
        unresolved=unresolved,
    )


def _mirror(v: ScanVerdict) -> ScanVerdict:
    return replace(
        v,
        lambda0=-v.lambda0,
        lambda1=None if v.lambda1 is None else -v.lambda1,
        margins=tuple((-lam, eps) for lam, eps in v.margins),
        direction="below" if v.direction == "above" else "above",
        skipped=tuple(-s for s in v.skipped),
        column_lambda1=None
        if v.column_lambda1 is None
        else tuple(None if x is None else -x for x in v.column_lambda1),
    )


def _check_direction(sched: ScanSchedule, want: str) -> ScanSchedule:
    if sched is None:
        return ScanSchedule.default(want)
    if sched.direction != want:
        raise ValueError(f"schedule direction must be {want!r}")
    return sched


def scan_individual_positive(
    A: OperatorLike,
    lambda0: float,
    f,
    u=None,
    sched: Optional[ScanSchedule] = None,
    strict: bool = True,
) -> ScanVerdict:
    """Scan ``R(lambda, A) f >>_u 0`` for ``lambda`` decreasing to ``lambda0``.

    With ``strict=False`` only ``R(lambda, A) f >= 0`` is tested.
    """
    A = as_operator(A)
    f = as_vector(f)
    _require_positive(f)
    u = as_order_unit(u, A.n)
    sched = _check_direction(sched, "above")
    out = _scan_columns(A, lambda0, f[:, None], u, sched, strict)
    return _verdict_from(*out, lambda0, f, "above", strict, per_column=False)


def scan_individual_negative(
    A: OperatorLike,
    lambda0: float,
    f,
    u=None,
    sched: Optional[ScanSchedule] = None,
    strict: bool = True,
) -> ScanVerdict:
    """Scan ``-R(lambda, A) f >>_u 0`` for ``lambda`` increasing to ``lambda0``.

    Evaluated as the positive scan of ``-A`` at ``-lambda0``, using
    ``R(lambda, -A) = -R(-lambda, A)``, then mapped back.
    """
    A = as_operator(A)
    sched = _check_direction(sched, "below")
    return _mirror(scan_individual_positive(-A, -lambda0, f, u, sched.mirrored(), strict))


def scan_uniform_positive(
    A: OperatorLike,
    lambda0: float,
    u=None,
    sched: Optional[ScanSchedule] = None,
    strict: bool = True,
) -> ScanVerdict:
    """Column criterion: every ``R(lambda, A) e_j >>_u 0`` on a common tail."""
    A = as_operator(A)
    u = as_order_unit(u, A.n)
    sched = _check_direction(sched, "above")
    out = _scan_columns(A, lambda0, np.eye(A.n), u, sched, strict)
    return _verdict_from(*out, lambda0, None, "above", strict, per_column=True)


def scan_uniform_negative(
    A: OperatorLike,
    lambda0: float,
    u=None,
    sched: Optional[ScanSchedule] = None,
    strict: bool = True,
) -> ScanVerdict:
    """Uniform negative variant, defined through the ``-A`` reduction."""
    A = as_operator(A)
    sched = _check_direction(sched, "below")
    return _mirror(scan_uniform_positive(-A, -lambda0, u, sched.mirrored(), strict))


@dataclass(frozen=True, eq=False)
class AsymptoticVerdict:
    """``d_k = (lambda_k - lambda0) * dist(R(lambda_k, A) f, E+)`` along a schedule."""

    holds: bool
    lambda0: float
    offsets: tuple
    distances: tuple
    tolerance: float
    f: np.ndarray
    norm: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "lambda0": self.lambda0,
            "offsets": list(self.offsets),
            "distances": list(self.distances),
            "tolerance": self.tolerance,
            "f": self.f.tolist(),
            "norm": self.norm,
        }


def _decay_ok(d: np.ndarray, tol: float) -> bool:
    tail = d[len(d) - max(1, len(d) // 4):]
    if not np.all(tail <= tol):
        return False
    floor = 1e-3 * tol
    return bool(np.all(tail[1:] <= np.maximum(1.1 * tail[:-1], floor)))


def asymptotic_batch(
    A: OperatorLike,
    lambda0: float,
    F: np.ndarray,
    norm: Optional[ConeNorm] = None,
    sched: Optional[ScanSchedule] = None,
) -> list[AsymptoticVerdict]:
    """:func:`asymptotic_positivity` for every column of ``F``, sharing factorizations."""
    A = as_operator(A)
    norm = ConeNorm() if norm is None else norm
    sched = _check_direction(sched, "above")
    eigs = eigenvalues(A)
    tol = tol_cluster(A)
    _require_real_eigenvalue(eigs, lambda0, tol, A.name)
    F = np.asarray(F, dtype=float)
    for j in range(F.shape[1]):
        if np.any(F[:, j] < 0):
            raise ValueError("asymptotic positivity needs f >= 0")
    offs = sched.offsets()
    pts = sched.points(lambda0)
    eye = np.eye(A.n)
    D = np.zeros((len(pts), F.shape[1]))
    for k, lam in enumerate(pts):
        if offs[k] <= tol or float(np.min(np.abs(eigs - lam))) <= tol:
            D[k] = np.nan
            continue
        G = sla.lu_solve(sla.lu_factor(lam * eye - A.matrix, check_finite=False), F, check_finite=False)
        D[k] = offs[k] * norm.columns(np.maximum(-G, 0.0))
    keep = ~np.isnan(D[:, 0])
    if not np.any(keep):
        raise NearSingularError("no schedule point is resolvable from the spectrum")
    out = []
    for j in range(F.shape[1]):
        f = as_vector(F[:, j])
        t = config.get().tol_asym * (1.0 + sup_norm(f))
        d = D[keep, j]
        out.append(
            AsymptoticVerdict(
                holds=_decay_ok(d, t),
                lambda0=float(lambda0),
                offsets=tuple(float(x) for x in offs[keep]),
                distances=tuple(float(x) for x in d),
                tolerance=t,
                f=f,
                norm=norm.as_dict(),
            )
        )
    return out


def asymptotic_positivity(
    A: OperatorLike,
    lambda0: float,
    f,
    norm: Optional[ConeNorm] = None,
    sched: Optional[ScanSchedule] = None,
) -> AsymptoticVerdict:
    """Check ``(lambda - lambda0) dist(R(lambda, A) f, E+) -> 0`` as ``lambda`` decreases to ``lambda0``.

    Holds when the sequence is below ``tol_asym * (1 + ||f||)`` on the last
    quarter of the schedule and does not grow there by more than 10%.

    Raises
    ------
    NotAnEigenvalueError
        ``lambda0`` is not an eigenvalue of ``A``.
    """
    f = as_vector(f)
    return asymptotic_batch(A, lambda0, f[:, None], norm, sched)[0]


def laurent_limit(
    proj: ProjectionData, k: int, sched: Optional[ScanSchedule] = None
) -> tuple[np.ndarray, list]:
    """Numeric estimates of ``Q_k`` along a schedule above ``lambda0``.

    Uses ``delta^-k (R(lambda0 + delta) - sum_{j<k} delta^j Q_j)``, subtracting
    the more singular terms with their closed forms. Returns the offsets and
    the estimates, nearest point last.
    """
    m = proj.pole_order
    if not (-m <= k <= -1):
        raise IndexError(f"Laurent index {k} outside [-{m}, -1]")
    sched = _check_direction(sched, "above")
    lam0 = float(np.real(proj.lambda0))
    lam0_ld = refined_eigenvalue(proj)
    # offsets actually realized in floating point; exact for nearby points
    lams = sched.points(lam0)
    offs = (lams.astype(np.longdouble) - lam0_ld).astype(float)
    est = []
    for lam, delta in zip(lams, offs):
        R = refined_inverse(proj.matrix, lam)
        acc = R.copy()
        for j in range(-m, k):
            acc -= delta**j * proj.laurent_neg[-j - 1]
        est.append(delta ** (-k) * acc)
    return offs, est


def refined_eigenvalue(proj: ProjectionData) -> np.longdouble:
    """Two-sided Rayleigh quotient of a simple real eigenvalue in extended precision.

    With ``v`` and ``phi`` taken from the largest column and row of ``P`` the
    error is second order in their errors, which removes the ``eps ||A||``
    offset carried by the eigensolver. Other eigenvalues are returned as is.
    """
    lam0 = np.longdouble(float(np.real(proj.lambda0)))
    if proj.alg_mult != 1 or np.imag(proj.lambda0) != 0:
        return lam0
    P = np.real(proj.P)
    v = P[:, int(np.argmax(np.sum(np.abs(P), axis=0)))].astype(np.longdouble)
    phi = P[int(np.argmax(np.sum(np.abs(P), axis=1))), :].astype(np.longdouble)
    denom = phi @ v
    if denom == 0:
        return lam0
    return (phi @ (proj.matrix.astype(np.longdouble) @ v)) / denom


def refined_inverse(M: np.ndarray, lam: float, sweeps: int = 4) -> np.ndarray:
    """``(lam I - M)^-1`` with residuals in extended precision.

    Near an eigenvalue a plain LU solve loses ``eps * cond`` relative
    accuracy; a few refinement sweeps whose residual ``I - (lam I - M) X``
    is accumulated in ``np.longdouble`` recover most of it.
    """
    n = M.shape[0]
    lam_ld = np.longdouble(lam)
    T_ld = -M.astype(np.longdouble)
    T_ld[np.diag_indices(n)] += lam_ld
    eye_ld = np.eye(n, dtype=np.longdouble)
    lu = sla.lu_factor(T_ld.astype(float), check_finite=False)
    X = sla.lu_solve(lu, np.eye(n), check_finite=False).astype(np.longdouble)
    for _ in range(sweeps):
        resid = eye_ld - T_ld @ X
        X += sla.lu_solve(lu, resid.astype(float), check_finite=False)
    return X.astype(float)


def limit_schedule(
    A: OperatorLike, lambda0: float, gap: Optional[float] = None, proj: Optional[ProjectionData] = None
) -> ScanSchedule:
    """Schedule for Laurent-limit checks ending near the accuracy optimum.

    For a first order pole the error of ``(lambda - lambda0) R(lambda, A)``
    is about ``delta ||Q_0|| + c / delta`` with ``c = eps (1 + ||A||) ||P||^2``
    for the refined solves, so the last offset is ``sqrt(c / ||Q_0||)``.
    Without a projection ``||Q_0||`` is replaced by ``1 / gap``.
    """
    A = as_operator(A)
    if gap is None:
        eigs = eigenvalues(A)
        rest = eigs[np.abs(eigs - lambda0) > tol_cluster(A)]
        gap = float(np.min(np.abs(rest - lambda0))) if rest.size else 1.0
    eps = max(float(np.finfo(np.longdouble).eps), 1e-19)
    p_norm, q0_norm = 1.0, 1.0 / max(gap, 1e-300)
    if proj is not None and proj.pole_order == 1:
        P = np.real(proj.P)
        p_norm = max(1.0, float(np.max(np.sum(np.abs(P), axis=1))))
        Q0 = sla.solve(lambda0 * np.eye(A.n) - A.matrix + P, np.eye(A.n), check_finite=False) - P
        q0_norm = max(float(np.max(np.sum(np.abs(Q0), axis=1))), 1e-300)
    last = float(np.sqrt(eps * (1.0 + A.norm) * p_norm**2 / q0_norm))
    last = min(last, 1.0)
    delta0 = max(min(1.0, 0.5 * gap), 2 * last)
    steps = int(np.floor(np.log2(delta0 / last))) + 1
    return ScanSchedule(delta0, 0.5, max(steps, 1), "above")
