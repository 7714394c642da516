"""Independent reference computations used by the tests.

Each oracle takes a route different from the library's: power iteration
instead of eigensolvers, eigendecomposition instead of Pade, quadrature
instead of LU solves, and brute-force sweeps instead of linear programs.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate, optimize


def perron_pair(A: np.ndarray, iters: int = 20000, tol: float = 1e-14):
    """Perron root and normalized right/left Perron vectors of a Metzler matrix.

    Power iteration on ``A + cI``, which is nonnegative with a positive
    diagonal and hence primitive when ``A`` is irreducible.
    """
    n = A.shape[0]
    c = float(np.max(np.abs(np.diag(A)))) + 1.0
    B = A + c * np.eye(n)
    assert np.all(B >= 0)

    def power(M):
        x = np.ones(n) / n
        rho = 0.0
        for _ in range(iters):
            y = M @ x
            rho_new = float(np.sum(y) / np.sum(x))
            y /= np.max(y)
            if np.max(np.abs(y - x)) < tol:
                x = y
                rho = rho_new
                break
            x, rho = y, rho_new
        return rho, x

    rho, v = power(B)
    _, phi = power(B.T)
    return rho - c, v, phi


def expm_eig(A: np.ndarray, t: float) -> np.ndarray:
    """``e^{tA}`` through ``V diag(e^{t lambda}) V^-1``; needs a diagonalizable ``A``."""
    w, V = np.linalg.eig(A)
    E = (V * np.exp(t * w)) @ np.linalg.inv(V)
    return np.real_if_close(E, tol=1e6).real


def expm_eig_mp(A: np.ndarray, t: float, dps: int = 40) -> np.ndarray:
    """Same route as ``expm_eig`` carried out with ``dps`` decimal digits."""
    import mpmath as mp

    with mp.workdps(dps):
        w, V = mp.eig(mp.matrix(A.tolist()))
        E = V * mp.diag([mp.exp(t * z) for z in w]) * mp.inverse(V)
        return np.array([[float(mp.re(E[i, j])) for j in range(E.cols)] for i in range(E.rows)])


def resolvent_laplace(A: np.ndarray, lam: float, f: np.ndarray) -> np.ndarray:
    """``R(lam, A) f = int_0^inf e^{-lam t} e^{tA} f dt`` by adaptive quadrature."""
    w, V = np.linalg.eig(A)
    c = np.linalg.solve(V, f.astype(complex))
    assert lam > np.max(w.real)

    def integrand(t):
        return np.real(V @ (np.exp(t * (w - lam)) * c))

    val, _ = integrate.quad_vec(integrand, 0.0, np.inf, epsabs=1e-13, epsrel=1e-12)
    return val


def jordan_resolvent(lambda0: float, m: int, lam: float) -> np.ndarray:
    """``sum_k N^k / (lam - lambda0)^{k+1}`` for the upper Jordan block."""
    N = np.eye(m, k=1)
    R = np.zeros((m, m))
    Nk = np.eye(m)
    for k in range(m):
        R += Nk / (lam - lambda0) ** (k + 1)
        Nk = Nk @ N
    return R


def cone_distance_qp(g: np.ndarray) -> float:
    """Euclidean distance to the nonnegative orthant by bound-constrained least squares."""
    res = optimize.minimize(
        lambda x: float(np.sum((x - g) ** 2)),
        x0=np.abs(g) + 1.0,
        jac=lambda x: 2 * (x - g),
        bounds=[(0.0, None)] * g.size,
        method="L-BFGS-B",
        options={"ftol": 1e-15, "gtol": 1e-12},
    )
    return float(np.sqrt(res.fun))


def gauge_bisection(f: np.ndarray, u: np.ndarray, iters: int = 200) -> float:
    """Smallest ``c`` with ``|f| <= c u`` by bisection on the predicate."""
    lo, hi = 0.0, 1.0
    while not np.all(np.abs(f) <= hi * u):
        hi *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.all(np.abs(f) <= mid * u):
            hi = mid
        else:
            lo = mid
    return hi


def margin_sweep(f: np.ndarray, u: np.ndarray, hi: float = 10.0, steps: int = 100001) -> float:
    """Largest grid ``eps`` in ``[0, hi]`` with ``f - eps u >= 0``."""
    grid = np.linspace(0.0, hi, steps)
    ok = [e for e in grid if np.all(f - e * u >= 0)]
    return float(max(ok)) if ok else -np.inf


def sphere_has_nonneg(basis: np.ndarray, samples: int = 200000, seed: int = 0, slack: float = 1e-6) -> bool:
    """Whether some sampled unit coefficient vector gives ``basis @ c >= -slack`` with a unit entry."""
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((basis.shape[1], samples))
    C /= np.linalg.norm(C, axis=0)
    X = basis @ C
    X /= np.max(np.abs(X), axis=0)
    return bool(np.any(np.all(X >= -slack, axis=0)))


def circulant_eigenvalues(first_row: np.ndarray) -> np.ndarray:
    """Eigenvalues of the circulant with the given first row (real symmetric case)."""
    return np.real(np.fft.fft(first_row))


def dense_sign_changes(values) -> int:
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[signs != 0]
    return int(np.sum(signs[1:] != signs[:-1]))
