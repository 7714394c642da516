"""Eigenstructure of dense real operators.

Spectral bound, peripheral spectrum and dominant value come from a dense
nonsymmetric eigensolver followed by single-linkage clustering. Spectral
projections are computed twice, once from an ordered complex Schur form and
once as a contour integral of the resolvent, and the two must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np
import scipy.linalg as sla

from . import config
from .errors import (
    ClusterAmbiguityError,
    EigensolverError,
    NotAnEigenvalueError,
    ProjectionDisagreementError,
    SpectralError,
)

CONTOUR_NODES = 64


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense real square matrix with a name and free-form provenance."""

    matrix: np.ndarray
    name: str = "A"
    source: Mapping = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator {self.name!r} must be square, got shape {m.shape}")
        if m.shape[0] == 0:
            raise ValueError(f"operator {self.name!r} is empty")
        if not np.all(np.isfinite(m)):
            raise ValueError(f"operator {self.name!r} has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "source", dict(self.source))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        """Induced sup-norm (maximum absolute row sum)."""
        return float(np.max(np.sum(np.abs(self.matrix), axis=1)))

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, name=f"-{self.name}", source=self.source)

    def shifted(self, c: float) -> "Operator":
        """``A - c I``."""
        return Operator(self.matrix - c * np.eye(self.n), name=f"{self.name}-{c!r}I", source=self.source)


OperatorLike = Union[Operator, np.ndarray, Sequence[Sequence[float]]]


def as_operator(A: OperatorLike, name: str = "A") -> Operator:
    return A if isinstance(A, Operator) else Operator(np.asarray(A, dtype=float), name=name)


def tol_cluster(A: OperatorLike) -> float:
    A = as_operator(A)
    return config.get().tol_cluster * (1.0 + A.norm)


def tol_proj(A: OperatorLike) -> float:
    A = as_operator(A)
    return config.get().tol_proj * (1.0 + A.norm)


def tol_rank(A: OperatorLike) -> float:
    A = as_operator(A)
    return config.get().tol_rank * max(1.0, A.norm)


@dataclass(frozen=True)
class EigenCluster:
    """Group of computed eigenvalues within ``tol_cluster`` of each other."""

    center: complex
    members: tuple

    @property
    def multiplicity(self) -> int:
        return len(self.members)

    @property
    def is_real(self) -> bool:
        return self.center.imag == 0.0

    def distance(self, z: complex) -> float:
        return float(min(abs(m - z) for m in self.members))


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: tuple
    clusters: tuple
    spectral_bound: float
    peripheral: tuple
    dominant: Optional[float]
    tol_cluster: float

    def real_clusters(self) -> list:
        return [c for c in self.clusters if c.is_real]

    def as_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "clusters": [
                {"re": float(c.center.real), "im": float(c.center.imag), "multiplicity": c.multiplicity}
                for c in self.clusters
            ],
            "spectral_bound": self.spectral_bound,
            "peripheral": [[float(c.center.real), float(c.center.imag)] for c in self.peripheral],
            "dominant": self.dominant,
            "tol_cluster": self.tol_cluster,
        }


def _cluster(eigs: np.ndarray, tol: float) -> list[list[int]]:
    n = eigs.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def eigenvalues(A: OperatorLike) -> np.ndarray:
    A = as_operator(A)
    try:
        return sla.eigvals(A.matrix, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(A.name, exc) from exc


def analyze(A: OperatorLike, tol: Optional[float] = None) -> SpectralSummary:
    """Spectral bound, peripheral spectrum and dominant spectral value of ``A``.

    Parameters
    ----------
    A
        Operator or square array.
    tol
        Clustering tolerance; defaults to :func:`tol_cluster`. Two eigenvalues
        share a cluster when they are within ``tol`` (single linkage), the
        peripheral band is ``Re z >= s(A) - tol`` and a cluster counts as real
        when ``|Im| <= tol``.
    """
    A = as_operator(A)
    tol = tol_cluster(A) if tol is None else float(tol)
    eigs = eigenvalues(A)
    clusters = []
    for idx in _cluster(eigs, tol):
        members = eigs[idx]
        center = complex(np.mean(members))
        if abs(center.imag) <= tol:
            center = complex(center.real, 0.0)
        clusters.append(EigenCluster(center, tuple(complex(z) for z in members)))
    # conjugate partners end up adjacent: (-Re, |Im|, Im)
    clusters.sort(key=lambda c: (-c.center.real, abs(c.center.imag), c.center.imag))
    s = float(np.max(eigs.real))
    peripheral = tuple(c for c in clusters if c.center.real >= s - tol)
    dominant = None
    if len(peripheral) == 1 and peripheral[0].is_real:
        dominant = peripheral[0].center.real
    ordered = tuple(z for c in clusters for z in c.members)
    return SpectralSummary(ordered, tuple(clusters), s, peripheral, dominant, tol)


def spectral_bound(A: OperatorLike) -> float:
    return float(np.max(eigenvalues(A).real))


def spectral_gap(A: OperatorLike, summary: Optional[SpectralSummary] = None) -> Optional[float]:
    """``s(A) - max Re`` over the non-peripheral spectrum, or ``None`` if empty."""
    summary = analyze(A) if summary is None else summary
    rest = [c.center.real for c in summary.clusters if c not in summary.peripheral]
    if not rest:
        return None
    return summary.spectral_bound - max(rest)


def locate_cluster(summary: SpectralSummary, lambda0: complex) -> tuple[EigenCluster, float]:
    """Find the unique isolated cluster near ``lambda0``.

    Returns the cluster and its distance to the rest of the spectrum.
    """
    tol = summary.tol_cluster
    near = [c for c in summary.clusters if c.distance(lambda0) <= tol]
    if not near:
        raise NotAnEigenvalueError(f"{lambda0!r} is not within {tol:.3g} of an eigenvalue")
    if len(near) > 1:
        raise ClusterAmbiguityError(f"{lambda0!r} is within {tol:.3g} of {len(near)} clusters")
    cluster = near[0]
    others = [z for c in summary.clusters if c is not cluster for z in c.members]
    sep = min((min(abs(z - m) for m in cluster.members) for z in others), default=np.inf)
    if sep <= 10 * tol:
        raise ClusterAmbiguityError(
            f"cluster at {cluster.center!r} is only {sep:.3g} from the rest of the spectrum"
        )
    return cluster, float(sep)


def _schur_projection(M: np.ndarray, cluster: EigenCluster, sep: float) -> np.ndarray:
    # reorder the cluster to the top-left block, then decouple with a Sylvester solve
    n = M.shape[0]
    center = cluster.center
    radius = max(abs(z - center) for z in cluster.members)
    cut = radius + 0.5 * sep
    T, Z, k = sla.schur(M.astype(complex), output="complex", sort=lambda z: abs(z - center) <= cut)
    if k != cluster.multiplicity:
        raise SpectralError(
            f"ordered Schur form selected {k} eigenvalues, cluster has {cluster.multiplicity}"
        )
    if k == n:
        return np.eye(n, dtype=complex)
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    Y = sla.solve_sylvester(T11, -T22, -T12)
    PT = np.zeros((n, n), dtype=complex)
    PT[:k, :k] = np.eye(k)
    PT[:k, k:] = -Y
    return Z @ PT @ Z.conj().T


def _contour_projection(M: np.ndarray, cluster: EigenCluster, sep: float, nodes: int = CONTOUR_NODES) -> np.ndarray:
    """Trapezoidal rule for ``(2 pi i)^-1 \\oint R(z) dz`` around the cluster."""
    n = M.shape[0]
    if not np.isfinite(sep):
        return np.eye(n, dtype=complex)
    center = cluster.center
    rho = max(abs(z - center) for z in cluster.members)
    dist = sep + rho
    r = 0.5 * dist if rho <= dist / 8 else float(np.sqrt(max(rho, 1e-300) * dist))
    eye = np.eye(n)
    real_symmetric = center.imag == 0.0
    # offset nodes avoid the real axis so conjugate pairs can be folded
    thetas = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    if real_symmetric:
        thetas = thetas[: nodes // 2]
    acc = np.zeros((n, n), dtype=complex)
    for th in thetas:
        w = r * np.exp(1j * th)
        acc += w * sla.solve((center + w) * eye - M, eye, check_finite=False)
    if real_symmetric:
        return (2.0 / nodes) * acc.real.astype(complex)
    return acc / nodes


@dataclass(frozen=True, eq=False)
class ProjectionData:
    """Spectral projection and principal Laurent coefficients at ``lambda0``.

    ``laurent_neg[j]`` is ``Q_{-(j+1)} = (A - lambda0 I)^j P``.
    """

    lambda0: complex
    P: np.ndarray
    pole_order: int
    laurent_neg: tuple
    geom_mult: int
    alg_mult: int
    matrix: np.ndarray
    disagreement: float

    def summary(self) -> dict:
        lam = complex(self.lambda0)
        return {
            "lambda0": lam.real if lam.imag == 0 else [lam.real, lam.imag],
            "pole_order": self.pole_order,
            "geom_mult": self.geom_mult,
            "alg_mult": self.alg_mult,
            "P_norm": float(np.max(np.sum(np.abs(self.P), axis=1))),
            "method_disagreement": self.disagreement,
        }


def _rank(M: np.ndarray, tol: float) -> int:
    s = sla.svdvals(M, check_finite=False)
    return int(np.sum(s > tol))


def _pole_order(N: np.ndarray, P: np.ndarray, tol: float, cap: int) -> tuple[int, list]:
    coeffs = [P]
    scale = max(1.0, float(np.max(np.sum(np.abs(P), axis=1))))
    for k in range(1, cap + 1):
        nxt = N @ coeffs[-1]
        if np.max(np.abs(nxt)) <= tol * scale:
            return k, coeffs
        coeffs.append(nxt)
    # exact nilpotency on range(P) caps the order at the algebraic multiplicity
    return cap, coeffs[:cap]


def cluster_projection(
    A: OperatorLike, lambda0: complex, summary: Optional[SpectralSummary] = None
) -> ProjectionData:
    """Projection data for the cluster at ``lambda0`` (real or complex)."""
    A = as_operator(A)
    summary = analyze(A) if summary is None else summary
    cluster, sep = locate_cluster(summary, lambda0)
    M = A.matrix
    P_schur = _schur_projection(M, cluster, sep)
    P_contour = _contour_projection(M, cluster, sep)
    gap = float(np.max(np.abs(P_schur - P_contour)))
    if gap > tol_proj(A):
        raise ProjectionDisagreementError(
            f"projection methods differ by {gap:.3g} at {lambda0!r} on {A.name!r}"
        )
    real = complex(lambda0).imag == 0.0
    P = P_schur.real.copy() if real else P_schur
    lam = float(complex(lambda0).real) if real else complex(lambda0)
    N = M - lam * np.eye(A.n)
    m, coeffs = _pole_order(N, P, tol_proj(A), cluster.multiplicity)
    geom = A.n - _rank(N, tol_rank(A))
    alg = _rank(P, tol_rank(A))
    if alg != cluster.multiplicity:
        raise SpectralError(
            f"rank(P) = {alg} but the cluster at {lambda0!r} has {cluster.multiplicity} eigenvalues"
        )
    for c in coeffs:
        c.setflags(write=False)
    return ProjectionData(lam, P, m, tuple(coeffs), geom, alg, M, gap)


def spectral_projection(
    A: OperatorLike, lambda0: float, summary: Optional[SpectralSummary] = None
) -> ProjectionData:
    """Spectral projection, pole order and Laurent coefficients at a real eigenvalue.

    Raises
    ------
    NotAnEigenvalueError
        ``lambda0`` is not within ``tol_cluster`` of the spectrum.
    ClusterAmbiguityError
        ``lambda0`` touches several clusters or its cluster is not separated
        from the rest of the spectrum by more than ``10 * tol_cluster``.
    ProjectionDisagreementError
        The Schur and contour projections differ by more than ``tol_proj``.
    """
    lam = complex(lambda0)
    if lam.imag != 0.0:
        raise NotAnEigenvalueError("spectral_projection expects a real lambda0")
    return cluster_projection(A, lam.real, summary)


def laurent_coefficient(proj: ProjectionData, k: int) -> np.ndarray:
    """Principal-part coefficient ``Q_k`` for ``-m <= k <= -1``."""
    if not (-proj.pole_order <= k <= -1):
        raise IndexError(f"Laurent index {k} outside [-{proj.pole_order}, -1]")
    return proj.laurent_neg[-k - 1]


def multiplicities(
    A: OperatorLike, lambda0: float, summary: Optional[SpectralSummary] = None
) -> tuple[int, int]:
    """``(geometric, algebraic)`` multiplicity of the eigenvalue ``lambda0``."""
    proj = spectral_projection(A, lambda0, summary)
    return proj.geom_mult, proj.alg_mult


def kernel_basis(M: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space of ``M``."""
    _, s, vh = sla.svd(M, check_finite=False)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def eigenvectors(A: OperatorLike, lambda0: float) -> tuple[np.ndarray, np.ndarray]:
    """Bases of ``ker(lambda0 I - A)`` and ``ker(lambda0 I - A^T)``."""
    A = as_operator(A)
    N = lambda0 * np.eye(A.n) - A.matrix
    tol = tol_rank(A)
    return kernel_basis(N, tol), kernel_basis(N.T, tol)
