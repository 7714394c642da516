"""Seeded generators of test operators.

Randomness comes from numpy's ``PCG64`` bit generator (``default_rng(seed)``),
a published algorithm with reference implementations in several languages.
Each generator records what it guarantees in ``Operator.source["advertised"]``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import mmio
from .spectral import Operator

KINDS = ("metzler", "rank_one_dominant", "jordan", "rotation_dominant", "biharmonic_1d", "random_stable")

# rank_one_dominant: regenerate when the eigenvector basis is worse than this
COND_LIMIT = 1e4
_MAX_REGENERATIONS = 100


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def _cplx(zs) -> list:
    return [[float(z.real), float(z.imag)] for z in zs]


def make_metzler(n: int, seed: int) -> Operator:
    """Irreducible Metzler matrix; ``e^{tA} >= 0`` for every ``t >= 0``."""
    if n < 2:
        raise ValueError("metzler needs n >= 2")
    rng = _rng(seed)
    off = 1.0 - rng.random((n, n))  # uniform on (0, 1]
    np.fill_diagonal(off, 0.0)
    idx = np.arange(n)
    off[idx, (idx + 1) % n] += 1.0
    A = off.copy()
    np.fill_diagonal(A, -off.sum(axis=1) + rng.random(n))
    return Operator(
        A,
        name=f"metzler_{n}_seed{seed}",
        source={"kind": "metzler", "n": n, "seed": int(seed), "advertised": {"metzler": True, "irreducible": True}},
    )


def _rotation_block(a: float, b: float) -> np.ndarray:
    return np.array([[a, -b], [b, a]])


def make_rank_one_dominant(
    n: int, seed: int, lambda0: float = 0.0, decay: float = 1.0, freq: float = 5.0
) -> Operator:
    """``S D S^{-1}`` with a simple dominant eigenvalue ``lambda0`` and ``v, phi >> 0``.

    ``D`` holds ``lambda0`` followed by rotation blocks with eigenvalues
    ``lambda0 - decay +/- i freq``; when ``n - 1`` is odd the leftover slot
    gets the real eigenvalue ``lambda0 - decay``. The first column ``v`` of
    ``S`` and the first row of ``S^{-1}`` (proportional to ``phi``) are
    strictly positive. If ``cond(S) > COND_LIMIT`` the next seed is tried and
    the seed actually used is recorded.
    """
    if n < 3:
        raise ValueError("rank_one_dominant needs n >= 3")
    if not decay > 0:
        raise ValueError("decay must be positive")
    for attempt in range(_MAX_REGENERATIONS):
        used = int(seed) + attempt
        rng = _rng(used)
        v = rng.uniform(0.5, 1.5, n)
        phi = rng.uniform(0.5, 1.5, n)
        G = rng.standard_normal((n, n - 1))
        comp = G - np.outer(v, phi @ G) / (phi @ v)
        S = np.column_stack([v, comp])
        if np.linalg.cond(S) <= COND_LIMIT:
            break
    else:
        raise ValueError(f"could not draw a well-conditioned basis from seed {seed}")
    D = np.zeros((n, n))
    D[0, 0] = lambda0
    k = 1
    eigs = [complex(lambda0)]
    while k + 1 < n:
        D[k : k + 2, k : k + 2] = _rotation_block(lambda0 - decay, freq)
        eigs += [complex(lambda0 - decay, freq), complex(lambda0 - decay, -freq)]
        k += 2
    if k < n:
        D[k, k] = lambda0 - decay
        eigs.append(complex(lambda0 - decay))
    A = S @ np.linalg.solve(S.T, D.T).T
    P = np.outer(v, phi) / (phi @ v)
    return Operator(
        A,
        name=f"rank_one_dominant_{n}_seed{seed}",
        source={
            "kind": "rank_one_dominant",
            "n": n,
            "seed": int(seed),
            "seed_used": used,
            "regenerated": used != int(seed),
            "cond_S": float(np.linalg.cond(S)),
            "params": {"lambda0": lambda0, "decay": decay, "freq": freq},
            "advertised": {
                "eigenvalues": _cplx(eigs),
                "dominant": lambda0,
                "v": v.tolist(),
                "phi": phi.tolist(),
                "projection": P.tolist(),
                "pole_order": 1,
            },
        },
    )


def make_jordan(lambda0: float, m: int) -> Operator:
    """``m x m`` upper Jordan block at ``lambda0``."""
    if m < 1:
        raise ValueError("jordan block needs m >= 1")
    A = lambda0 * np.eye(m) + np.eye(m, k=1)
    return Operator(
        A,
        name=f"jordan_{m}",
        source={
            "kind": "jordan",
            "n": m,
            "params": {"lambda0": lambda0, "m": m},
            "advertised": {"eigenvalues": _cplx([lambda0] * m), "pole_order": m, "geom": 1, "alg": m},
        },
    )


def biharmonic_symbol(mesh_n: int) -> np.ndarray:
    """Eigenvalues ``-16 h^{-4} sin^4(pi k / mesh_n)`` of the periodic discretization."""
    h = 1.0 / mesh_n
    k = np.arange(mesh_n)
    return -16.0 * h**-4 * np.sin(np.pi * k / mesh_n) ** 4


def make_biharmonic_1d(mesh_n: int, bc: str = "periodic") -> Operator:
    """``-d^4/dx^4`` on the unit circle by the five-point stencil ``(1, -4, 6, -4, 1) / h^4``.

    Exploration instance: eventual positivity of the continuous problem is
    not claimed for the discretization.
    """
    if bc != "periodic":
        raise ValueError("only periodic boundary conditions are supported")
    if mesh_n < 8:
        raise ValueError("biharmonic_1d needs mesh_n >= 8")
    h = 1.0 / mesh_n
    row = np.zeros(mesh_n)
    row[[0, 1, 2, -2, -1]] = [6.0, -4.0, 1.0, 1.0, -4.0]
    C = np.array([np.roll(row, i) for i in range(mesh_n)])
    A = -(h**-4) * C
    return Operator(
        A,
        name=f"biharmonic_1d_{mesh_n}",
        source={
            "kind": "biharmonic_1d",
            "n": mesh_n,
            "params": {"mesh_n": mesh_n, "bc": bc},
            "exploration": True,
            "advertised": {"eigenvalues": _cplx(biharmonic_symbol(mesh_n)), "dominant": 0.0, "pole_order": 1},
        },
    )


def _stable_block(rng: np.random.Generator, k: int, lo: float, hi: float) -> np.ndarray:
    """Random ``k x k`` block with spectral bound uniform in ``[-hi, -lo]``."""
    G = rng.standard_normal((k, k)) / math.sqrt(k)
    s = float(np.max(np.linalg.eigvals(G).real))
    return G - (s + rng.uniform(lo, hi)) * np.eye(k)


def make_rotation_dominant(n: int, seed: int, omega: float = 1.0) -> Operator:
    """Rotation block with eigenvalues ``+/- i omega`` plus a stable remainder (bound <= -1)."""
    if n < 2:
        raise ValueError("rotation_dominant needs n >= 2")
    A = np.zeros((n, n))
    A[:2, :2] = _rotation_block(0.0, omega)
    if n > 2:
        A[2:, 2:] = _stable_block(_rng(seed), n - 2, 1.0, 2.0)
    return Operator(
        A,
        name=f"rotation_dominant_{n}_seed{seed}",
        source={
            "kind": "rotation_dominant",
            "n": n,
            "seed": int(seed),
            "params": {"omega": omega},
            "advertised": {"peripheral": _cplx([complex(0, omega), complex(0, -omega)]), "dominant": None},
        },
    )


def make_random_stable(n: int, seed: int) -> Operator:
    """Scaled Gaussian matrix shifted to spectral bound in ``[-1, -0.1]``."""
    if n < 1:
        raise ValueError("random_stable needs n >= 1")
    A = _stable_block(_rng(seed), n, 0.1, 1.0)
    return Operator(A, name=f"random_stable_{n}_seed{seed}", source={"kind": "random_stable", "n": n, "seed": int(seed)})


@dataclass(frozen=True)
class ZooSpec:
    """Recipe for one zoo operator; equal specs build bit-identical matrices."""

    kind: str
    n: int
    seed: int = 0
    params: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown zoo kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def build(self) -> Operator:
        p = self.param_dict
        if self.kind == "metzler":
            return make_metzler(self.n, self.seed)
        if self.kind == "rank_one_dominant":
            return make_rank_one_dominant(self.n, self.seed, **p)
        if self.kind == "jordan":
            return make_jordan(p.get("lambda0", 0.0), self.n)
        if self.kind == "rotation_dominant":
            return make_rotation_dominant(self.n, self.seed, **p)
        if self.kind == "biharmonic_1d":
            return make_biharmonic_1d(self.n, **p)
        return make_random_stable(self.n, self.seed)

    def filename(self) -> str:
        extra = "".join(f"_{k}={v:g}" if isinstance(v, float) else f"_{k}={v}" for k, v in self.params)
        return f"{self.kind}_{self.n}_seed{self.seed}{extra}.mtx"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "seed": int(self.seed), "params": self.param_dict}


def checksum(A: np.ndarray) -> str:
    """sha256 of the canonical Matrix Market text."""
    return hashlib.sha256(mmio.dumps(A).encode("ascii")).hexdigest()


def write_fixture(spec: ZooSpec, directory, filename: Optional[str] = None) -> dict:
    """Write ``spec`` as a Matrix Market file and merge its entry into ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    op = spec.build()
    filename = filename or spec.filename()
    mmio.write(directory / filename, op.matrix, comment=json.dumps(spec.as_dict(), sort_keys=True))
    entry = {
        "spec": spec.as_dict(),
        "file": filename,
        "sha256": checksum(op.matrix),
        "advertised": op.source.get("advertised", {}),
    }
    manifest_path = directory / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {"fixtures": []}
    manifest["fixtures"] = [e for e in manifest["fixtures"] if e["file"] != filename] + [entry]
    manifest["fixtures"].sort(key=lambda e: e["file"])
    mmio.atomic_write_text(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return entry


def default_specs(seeds: int = 50) -> list:
    """The standard population used by the soundness sweep."""
    specs = []
    for s in range(seeds):
        specs.append(ZooSpec("metzler", 2 + s % 7, s))
        specs.append(ZooSpec("rank_one_dominant", (3, 5, 8)[s % 3], s, {"lambda0": 0.0, "decay": 1.0, "freq": 5.0}))
        specs.append(ZooSpec("rotation_dominant", 2 + s % 6, s))
        specs.append(ZooSpec("random_stable", 2 + s % 7, s))
        specs.append(ZooSpec("jordan", 1 + s % 4, s, {"lambda0": (s - 25) / 10}))
        # the biharmonic family has no randomness; the mesh plays the seed's role
        specs.append(ZooSpec("biharmonic_1d", 8 + s, 0))
    return specs


def _match_error(expected: np.ndarray, computed: np.ndarray) -> float:
    """Largest distance under the best one-to-one matching of two eigenvalue lists."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(expected[:, None] - computed[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def verify_operator(op: Operator, advertised: dict) -> list:
    """Re-derive the advertised spectral facts; returns a list of discrepancies."""
    from .spectral import analyze, spectral_projection

    problems = []
    tol = 1e-8 * (1.0 + op.norm)
    summary = analyze(op)
    if "eigenvalues" in advertised:
        want = np.array([complex(re, im) for re, im in advertised["eigenvalues"]])
        got = np.array(summary.eigenvalues)
        if want.size != got.size:
            problems.append(f"expected {want.size} eigenvalues, found {got.size}")
        else:
            err = _match_error(want, got)
            if err > tol:
                problems.append(f"eigenvalues differ by {err:.3g}")
    if "dominant" in advertised:
        dom = advertised["dominant"]
        if (dom is None) != (summary.dominant is None) or (dom is not None and abs(dom - summary.dominant) > tol):
            problems.append(f"dominant value {summary.dominant!r}, expected {dom!r}")
    if "pole_order" in advertised and summary.dominant is not None:
        proj = spectral_projection(op, summary.dominant, summary)
        if proj.pole_order != advertised["pole_order"]:
            problems.append(f"pole order {proj.pole_order}, expected {advertised['pole_order']}")
        if "projection" in advertised:
            err = float(np.max(np.abs(proj.P - np.array(advertised["projection"]))))
            if err > tol:
                problems.append(f"projection differs by {err:.3g}")
    return problems


def verify_fixture(entry: dict, directory) -> list:
    """Reload a manifest entry, check its checksum and re-verify advertised facts."""
    path = Path(directory) / entry["file"]
    A = mmio.read(path)
    problems = []
    if checksum(A) != entry["sha256"]:
        problems.append("checksum mismatch")
    problems += verify_operator(Operator(A, name=entry["file"]), entry.get("advertised", {}))
    return problems
