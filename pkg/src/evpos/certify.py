"""Theorem certifiers.

Each certifier checks a list of hypotheses numerically. When all of them
hold it evaluates the conclusion; a failing conclusion is reported as
``CONCLUSION-VIOLATED``, which always indicates a bug or a numerically
degenerate input. Hypotheses that quantify over all ``f > 0`` are checked on
a finite probe set, and the report says so.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog

from . import config
from .errors import NearSingularError, SpectralError
from .lattice import ConeNorm, as_order_unit, strong_pos_margin, tol_pos, tol_zero
from .resolvent import ScanSchedule, asymptotic_batch, scan_uniform_negative, scan_uniform_positive
from .semigroup import TimeGrid, TimeVerdict, find_t0_uniform, rescaled_bound
from .spectral import (
    OperatorLike,
    SpectralSummary,
    analyze,
    as_operator,
    kernel_basis,
    locate_cluster,
    spectral_projection,
    tol_cluster,
    tol_rank,
)

CERTIFIED = "certified"
HYPOTHESIS_FAILED = "hypothesis-failed"
VIOLATED = "CONCLUSION-VIOLATED"

THEOREMS = ("KR", "KR-resolvent", "KR-semigroup", "PF-resolvent", "PF-semigroup", "PF-corollary")


@dataclass(frozen=True)
class Check:
    name: str
    holds: bool
    evidence: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"name": self.name, "holds": bool(self.holds), "evidence": self.evidence}


@dataclass(frozen=True)
class Conclusion:
    holds: bool
    checks: tuple
    witnesses: dict = field(default_factory=dict)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {"holds": bool(self.holds), "checks": [c.as_dict() for c in self.checks], "witnesses": self.witnesses}


@dataclass(frozen=True)
class CertReport:
    theorem_id: str
    lambda0: Optional[float]
    hypotheses: tuple
    conclusion: Optional[Conclusion]
    overall: str
    notes: tuple = ()

    def __post_init__(self):
        if self.theorem_id not in THEOREMS:
            raise ValueError(f"unknown theorem id {self.theorem_id!r}")
        if self.overall == VIOLATED and not all(h.holds for h in self.hypotheses):
            raise ValueError("a conclusion can only be violated when every hypothesis holds")

    @property
    def hypotheses_hold(self) -> bool:
        return all(h.holds for h in self.hypotheses)

    def hypothesis(self, name: str) -> Check:
        for h in self.hypotheses:
            if h.name == name:
                return h
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "lambda0": self.lambda0,
            "hypotheses": [h.as_dict() for h in self.hypotheses],
            "conclusion": None if self.conclusion is None else self.conclusion.as_dict(),
            "overall": self.overall,
            "notes": list(self.notes),
        }


def _finish(theorem_id, lambda0, hyps, conclude, notes=()) -> CertReport:
    """Evaluate ``conclude()`` only when every hypothesis holds."""
    hyps = tuple(hyps)
    lam = None if lambda0 is None else float(lambda0)
    if not all(h.holds for h in hyps):
        return CertReport(theorem_id, lam, hyps, None, HYPOTHESIS_FAILED, tuple(notes))
    try:
        concl = conclude()
    except SpectralError as exc:
        concl = Conclusion(False, (Check("spectral data available", False, {"error": str(exc)}),), {})
    return CertReport(theorem_id, lam, hyps, concl, CERTIFIED if concl.holds else VIOLATED, tuple(notes))


# ----------------------------------------------------------------------------
# nonnegative vectors in a subspace


def _orthonormal(basis) -> np.ndarray:
    B = np.asarray(basis, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    if B.ndim != 2 or B.shape[1] == 0:
        raise ValueError("need at least one basis vector")
    if not np.all(np.isfinite(B)):
        raise ValueError("basis has non-finite entries")
    U, s, vh = sla.svd(B, full_matrices=False)
    if s[-1] <= 1e-10 * max(1.0, s[0]):
        raise ValueError("degenerate basis: vectors are linearly dependent")
    return U


def _accept(x: np.ndarray) -> Optional[np.ndarray]:
    scale = float(np.max(np.abs(x)))
    if scale == 0.0:
        return None
    x = x / scale
    if np.max(x) < 0.5:  # a nonnegative vector has its sup-norm at a positive entry
        return None
    if np.min(x) >= -tol_zero(x):
        return x
    return None


def _polish(Q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Snap near-zero entries of ``x = Q c`` to exact zeros while staying in span(Q)."""
    small = x <= 1e-7
    if not np.any(small) or np.all(small):
        return x
    K = kernel_basis(Q[small], 1e-9)
    if K.shape[1] == 0:
        return x
    c = Q.T @ x
    return Q @ (K @ (K.T @ c))


def _vertex_search(Q: np.ndarray) -> Optional[np.ndarray]:
    d = Q.shape[1]
    if d == 1:
        for sgn in (1.0, -1.0):
            x = _accept(sgn * Q[:, 0])
            if x is not None:
                return x
        return None
    # extreme rays of {c : Qc >= 0} have d - 1 active constraints
    for rows in itertools.combinations(range(Q.shape[0]), d - 1):
        K = kernel_basis(Q[list(rows)], 1e-12)
        if K.shape[1] != 1:
            continue
        for sgn in (1.0, -1.0):
            x = _accept(sgn * (Q @ K[:, 0]))
            if x is not None:
                return x
    return None


def nonneg_in_subspace(basis) -> Optional[np.ndarray]:
    """A vector ``x >= -tol_zero`` with ``||x||_sup = 1`` in the span of ``basis``, or ``None``.

    ``basis`` is an ``n x d`` array whose columns span the subspace. Decided
    by the linear program ``max sum(x)`` over ``x = Qc``, ``0 <= x <= 1``,
    which has an optimum of at least 1 exactly when such a vector exists.
    When the LP solver fails and ``d <= 3``, extreme rays are enumerated.
    """
    Q = _orthonormal(basis)
    n, d = Q.shape
    if d == n:
        return np.ones(n)
    res = linprog(
        -Q.sum(axis=0),
        A_ub=np.vstack([-Q, Q]),
        b_ub=np.concatenate([np.zeros(n), np.ones(n)]),
        bounds=[(None, None)] * d,
        method="highs",
    )
    if res.status != 0:
        if d <= 3:
            return _vertex_search(Q)
        raise SpectralError(f"linear program failed: {res.message}")
    if -res.fun < 0.5:
        return None
    x = Q @ res.x
    found = _accept(x)
    if found is None:
        found = _accept(_polish(Q, x))
    if found is None and d <= 3:
        found = _vertex_search(Q)
    return found


# ----------------------------------------------------------------------------
# shared pieces


def probe_set(n: int, k: Optional[int] = None, seed: Optional[int] = None) -> np.ndarray:
    """Columns: the canonical basis followed by ``k`` seeded random positive vectors."""
    cfg = config.get()
    k = cfg.n_probes if k is None else k
    rng = np.random.default_rng(cfg.probe_seed if seed is None else seed)
    return np.hstack([np.eye(n), rng.uniform(0.0, 1.0, (n, k)) + 1e-3])


def _eigenspace(M: np.ndarray, tol: float) -> tuple[np.ndarray, bool]:
    K = kernel_basis(M, tol)
    if K.shape[1]:
        return K, False
    # the eigenvalue is known to lie in the spectrum; take the closest direction
    _, _, vh = sla.svd(M)
    return vh[-1:].T, True


def _kr_conclusion(A, lambda0: float) -> Conclusion:
    N = lambda0 * np.eye(A.n) - A.matrix
    tol = tol_rank(A)
    checks, wit = [], {}
    for label, M, key in (("eigenspace contains v > 0", N, "v"), ("dual eigenspace contains phi > 0", N.T, "phi")):
        K, fallback = _eigenspace(M, tol)
        x = nonneg_in_subspace(K)
        ev = {"eigenspace_dim": int(K.shape[1]), "kernel_fallback": fallback}
        if x is not None:
            ev["min_entry"] = float(np.min(x))
            wit[key] = x.tolist()
        checks.append(Check(label, x is not None, ev))
    return Conclusion(all(c.holds for c in checks), tuple(checks), wit)


def _real_eigenvalue_check(summary: SpectralSummary, lambda0: float) -> Check:
    try:
        cluster, sep = locate_cluster(summary, lambda0)
        sep = sep if np.isfinite(sep) else None  # a lone cluster has no neighbour
        return Check("lambda0 is a real eigenvalue", True, {"cluster_size": cluster.multiplicity, "separation": sep})
    except SpectralError as exc:
        return Check("lambda0 is a real eigenvalue", False, {"error": str(exc)})


def _bound_eigenvalue(summary: SpectralSummary) -> Optional[float]:
    """The real peripheral cluster, if there is one."""
    for c in summary.peripheral:
        if c.is_real:
            return float(c.center.real)
    return None


def _sign_normalize(x: np.ndarray) -> np.ndarray:
    x = np.real(np.asarray(x)).astype(float)
    k = int(np.argmax(np.abs(x)))
    x = x / x[k]
    return x


# ----------------------------------------------------------------------------
# certifiers


def pf_conclusion(A: OperatorLike, lambda0: float, u=None, summary: Optional[SpectralSummary] = None) -> Conclusion:
    """Perron-Frobenius conclusion at ``lambda0`` in eigenvector and projection form.

    Checks (1) geometric and algebraic multiplicity one, (2) the eigenvector
    is ``>>_u 0``, (3) the left eigenvector is strictly positive, (4) every
    column of the spectral projection is ``>>_u 0``, and that (4) agrees
    with (1) to (3).

    Raises
    ------
    SpectralError
        The spectral projection at ``lambda0`` cannot be computed.
    """
    A = as_operator(A)
    u = as_order_unit(u, A.n)
    proj = spectral_projection(A, lambda0, summary)
    N = lambda0 * np.eye(A.n) - A.matrix
    tol = tol_rank(A)
    right = kernel_basis(N, tol)
    left = kernel_basis(N.T, tol)

    c1 = Check(
        "simple eigenvalue",
        proj.geom_mult == 1 and proj.alg_mult == 1,
        {"geom_mult": proj.geom_mult, "alg_mult": proj.alg_mult, "pole_order": proj.pole_order},
    )
    wit: dict = {}
    v = phi = None
    if right.shape[1] == 1:
        v = _sign_normalize(right[:, 0])
        margin = strong_pos_margin(v, u)
        c2 = Check("eigenvector strongly positive", margin > tol_pos(v), {"margin": margin, "threshold": tol_pos(v)})
        wit["v"] = v.tolist()
    else:
        c2 = Check("eigenvector strongly positive", False, {"eigenspace_dim": int(right.shape[1])})
    if left.shape[1] == 1:
        phi = _sign_normalize(left[:, 0])
        low = float(np.min(phi))
        c3 = Check("dual eigenvector strictly positive", low > tol_pos(phi), {"min_entry": low, "threshold": tol_pos(phi)})
        wit["phi"] = phi.tolist()
    else:
        c3 = Check("dual eigenvector strictly positive", False, {"eigenspace_dim": int(left.shape[1])})

    P = proj.P
    margins = [strong_pos_margin(P[:, j], u) for j in range(A.n)]
    ok4 = all(m > tol_pos(P[:, j]) for j, m in enumerate(margins))
    c4 = Check("projection strongly positive", ok4, {"column_margins": margins, "min_margin": float(min(margins))})
    eig_form = c1.holds and c2.holds and c3.holds
    c5 = Check("eigenvector and projection forms agree", eig_form == ok4, {"eigenvector_form": eig_form, "projection_form": ok4})
    if v is not None and phi is not None and float(phi @ v) != 0.0:
        R1 = np.outer(v, phi) / float(phi @ v)
        wit["rank_one_residual"] = float(np.max(np.sum(np.abs(P - R1), axis=1)))
    wit["P_norm"] = float(np.max(np.sum(np.abs(P), axis=1)))
    checks = (c1, c2, c3, c4, c5)
    return Conclusion(all(c.holds for c in checks), checks, wit)


def krein_rutman(
    A: OperatorLike,
    lambda0: float,
    norm: Optional[ConeNorm] = None,
    sched: Optional[ScanSchedule] = None,
    probes: Optional[np.ndarray] = None,
    summary: Optional[SpectralSummary] = None,
) -> CertReport:
    """Asymptotic positivity of the resolvent at ``lambda0`` implies positive eigenvectors of ``A`` and ``A^T``."""
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    F = probe_set(A.n) if probes is None else np.asarray(probes, dtype=float)
    hyps = [_real_eigenvalue_check(summary, lambda0)]
    if hyps[0].holds:
        try:
            verdicts = asymptotic_batch(A, lambda0, F, norm, sched)
            bad = [j for j, v in enumerate(verdicts) if not v.holds]
            hyps.append(
                Check(
                    "asymptotically positive on probes",
                    not bad,
                    {
                        "probes": F.shape[1],
                        "failing_probes": bad,
                        "max_final_distance": max(v.distances[-1] for v in verdicts),
                        "points_evaluated": len(verdicts[0].offsets),
                    },
                )
            )
        except NearSingularError as exc:
            hyps.append(Check("asymptotically positive on probes", False, {"error": str(exc)}))
    return _finish("KR", lambda0, hyps, lambda: _kr_conclusion(A, lambda0), ("hypothesis checked on a finite probe set",))


def kr_resolvent(
    A: OperatorLike, lambda0: float, sched: Optional[ScanSchedule] = None, summary: Optional[SpectralSummary] = None
) -> CertReport:
    """An eventually positive resolvent at ``lambda0`` has positive eigenvectors for ``A`` and ``A^T``.

    The hypothesis is the column criterion ``R(lambda, A) >= 0`` on a tail of
    the schedule, which covers every ``f >= 0`` at once.
    """
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    hyps = [_real_eigenvalue_check(summary, lambda0)]
    if hyps[0].holds:
        scan = scan_uniform_positive(A, lambda0, None, sched, strict=False)
        hyps.append(Check("resolvent eventually positive", scan.holds, {"lambda1": scan.lambda1, "unresolved": scan.unresolved}))
    return _finish("KR-resolvent", lambda0, hyps, lambda: _kr_conclusion(A, lambda0))


def kr_semigroup(A: OperatorLike, grid: Optional[TimeGrid] = None, summary: Optional[SpectralSummary] = None) -> CertReport:
    """An eventually positive semigroup has positive eigenvectors at ``s(A)`` for ``A`` and ``A^T``."""
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    tv = find_t0_uniform(A, None, grid, strict=False)
    hyps = [Check("semigroup eventually positive", tv.holds, {"t0": tv.t0, "t_max": tv.t_max})]
    s = summary.spectral_bound

    def conclude():
        lam = _bound_eigenvalue(summary)
        if lam is None:
            return Conclusion(False, (Check("s(A) is a real eigenvalue", False, {"spectral_bound": s}),), {})
        inner = _kr_conclusion(A, lam)
        head = Check("s(A) is a real eigenvalue", True, {"spectral_bound": s, "eigenvalue": lam})
        return Conclusion(inner.holds, (head,) + inner.checks, inner.witnesses)

    return _finish("KR-semigroup", s, hyps, conclude, (f"claims limited to the grid up to t_max = {tv.t_max:.6g}",))


def pf_resolvent(
    A: OperatorLike,
    lambda0: float,
    u=None,
    sched: Optional[ScanSchedule] = None,
    summary: Optional[SpectralSummary] = None,
) -> CertReport:
    """Eventual strong positivity or negativity of the resolvent at ``lambda0`` implies ``P >>_u 0``.

    Both branches use the uniform column criterion. The report records which
    branch fired under the hypothesis ``branch``.
    """
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    u = as_order_unit(u, A.n)
    hyps = [_real_eigenvalue_check(summary, lambda0)]
    if hyps[0].holds:
        above = None if sched is None else replace(sched, direction="above")
        below = None if sched is None else replace(sched, direction="below")
        pos = scan_uniform_positive(A, lambda0, u, above)
        neg = scan_uniform_negative(A, lambda0, u, below)
        branch = {(True, True): "both", (True, False): "positive", (False, True): "negative"}.get((pos.holds, neg.holds))
        hyps.append(
            Check(
                "resolvent eventually strongly positive or negative",
                branch is not None,
                {"branch": branch, "positive_lambda1": pos.lambda1, "negative_lambda1": neg.lambda1},
            )
        )
    return _finish("PF-resolvent", lambda0, hyps, lambda: pf_conclusion(A, lambda0, u, summary))


def _semigroup_hypothesis(A, u, grid, tv) -> Check:
    tv = find_t0_uniform(A, u, grid) if tv is None else tv
    return Check(
        "semigroup eventually strongly positive",
        tv.holds,
        {"t0": tv.t0, "t_max": tv.t_max, "column_t0": None if tv.column_t0 is None else list(tv.column_t0)},
    )


def pf_semigroup(
    A: OperatorLike,
    u=None,
    grid: Optional[TimeGrid] = None,
    sched: Optional[ScanSchedule] = None,
    summary: Optional[SpectralSummary] = None,
    time_verdict: Optional[TimeVerdict] = None,
) -> CertReport:
    """Eventual strong positivity of ``e^{tA}`` implies ``P >>_u 0`` at ``s(A)``."""
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    u = as_order_unit(u, A.n)
    hyps = [_semigroup_hypothesis(A, u, grid, time_verdict)]
    s = summary.spectral_bound

    def conclude():
        lam = _bound_eigenvalue(summary)
        if lam is None:
            return Conclusion(False, (Check("s(A) is a real eigenvalue", False, {"spectral_bound": s}),), {})
        inner = pf_conclusion(A, lam, u, summary)
        head = Check("s(A) is a real eigenvalue", True, {"spectral_bound": s, "eigenvalue": lam})
        return Conclusion(inner.holds, (head,) + inner.checks, inner.witnesses)

    return _finish("PF-semigroup", s, hyps, conclude, (f"claims limited to the grid up to t_max = {hyps[0].evidence['t_max']:.6g}",))


def pf_semigroup_corollary(
    A: OperatorLike,
    u=None,
    grid: Optional[TimeGrid] = None,
    sched: Optional[ScanSchedule] = None,
    summary: Optional[SpectralSummary] = None,
    time_verdict: Optional[TimeVerdict] = None,
) -> CertReport:
    """Eventual strong positivity implies a bounded rescaled semigroup and a dominant ``s(A)``.

    Every matrix semigroup is norm continuous, so that hypothesis is
    recorded as satisfied rather than tested.
    """
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    u = as_order_unit(u, A.n)
    hyps = [
        Check("eventually norm continuous", True, {"reason": "matrix semigroups are uniformly continuous"}),
        Check("peripheral spectrum finite and made of poles", True, {"peripheral_clusters": len(summary.peripheral)}),
        _semigroup_hypothesis(A, u, grid, time_verdict),
    ]
    s = summary.spectral_bound

    def conclude():
        rb = rescaled_bound(A, grid)
        tol = tol_cluster(A)
        dom = summary.dominant
        c_dom = Check(
            "s(A) is a dominant spectral value",
            dom is not None and abs(dom - s) <= tol,
            {"dominant": dom, "spectral_bound": s},
        )
        c_bound = Check("rescaled semigroup bounded", rb.bounded, rb.as_dict())
        checks = [c_bound, c_dom]
        wit = {}
        if dom is not None:
            inner = pf_conclusion(A, dom, u, summary)
            m = inner.check("simple eigenvalue").evidence["pole_order"]
            checks.append(Check("first order pole at s(A)", m == 1, {"pole_order": m}))
            checks.extend(inner.checks)
            wit = inner.witnesses
        return Conclusion(all(c.holds for c in checks), tuple(checks), wit)

    return _finish("PF-corollary", s, hyps, conclude)


def certify_all(
    A: OperatorLike,
    u=None,
    grid: Optional[TimeGrid] = None,
    sched: Optional[ScanSchedule] = None,
    include_kr: bool = True,
) -> list:
    """Run every certifier: resolvent ones at each real eigenvalue cluster, semigroup ones at ``s(A)``."""
    A = as_operator(A)
    u = as_order_unit(u, A.n)
    summary = analyze(A)
    reports = []
    for c in summary.real_clusters():
        lam = float(c.center.real)
        if include_kr:
            reports.append(krein_rutman(A, lam, sched=sched, summary=summary))
            reports.append(kr_resolvent(A, lam, sched=sched, summary=summary))
        reports.append(pf_resolvent(A, lam, u, sched=sched, summary=summary))
    if include_kr:
        reports.append(kr_semigroup(A, grid, summary))
    tv = find_t0_uniform(A, u, grid)
    reports.append(pf_semigroup(A, u, grid, sched, summary, tv))
    reports.append(pf_semigroup_corollary(A, u, grid, sched, summary, tv))
    return reports
