"""Dense symmetric eigensolver and the matrix functions built on it.

Everything here is deliberately self-contained: eigenvalues come from a
cyclic Jacobi iteration so results are deterministic and accurate for the
small (n <= ~64) matrices that frame operators produce.
"""

from __future__ import annotations

import math
import os
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import NoConvergence, SingularMatrix

DEFAULT_RTOL = 1e-10
_EXTENDED = np.longdouble


def singular_rtol() -> float:
    """Relative singularity tolerance; ``PFRAME_TOL`` overrides the default."""
    raw = os.environ.get("PFRAME_TOL")
    if raw is None or raw.strip() == "":
        return DEFAULT_RTOL
    value = float(raw)
    if not value > 0:
        raise ValueError(f"PFRAME_TOL must be positive, got {raw!r}")
    return value


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # orthonormal columns


def symmetrize(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (M + M.T)


def _fix_signs(Q: np.ndarray) -> np.ndarray:
    # largest-magnitude component of each column made positive (first on ties)
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return Q * signs


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Cyclic ordering of all (p, q) pairs grouped into rounds of disjoint pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


_SCHEDULES: dict[int, list] = {}


@njit(cache=True)
def _jacobi_f64(A, V, target, max_sweeps):
    # row-cyclic Jacobi in place; returns (converged, off-diagonal norm)
    n = A.shape[0]
    for _ in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += A[i, j] * A[i, j]
        off = math.sqrt(off)
        if off <= target:
            return True, off
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                gap = A[q, q] - A[p, p]
                if abs(gap) > 1e150 * abs(apq):
                    t = apq / gap
                else:
                    theta = gap / (2.0 * apq)
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    off = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                off += A[i, j] * A[i, j]
    return False, math.sqrt(off)


def eigh(M, tol: float | None = None, max_sweeps: int = 100, dtype=np.float64) -> EigenDecomposition:
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Each sweep visits every (p, q) pair once. Iteration stops when the
    off-diagonal Frobenius norm is at most ``tol * ||M||_F`` (default
    ``1e-14`` in double precision); after ``max_sweeps`` sweeps
    :class:`NoConvergence` is raised with the residual.

    With ``dtype=np.longdouble`` the rotations run in extended precision (the
    pairs are then visited in round-robin order so disjoint rotations can be
    applied as one matrix product) and the result keeps that precision.
    """
    extended = np.finfo(dtype).eps < np.finfo(np.float64).eps
    if tol is None:
        tol = 8.0 * float(np.finfo(dtype).eps) if extended else 1e-14
    if extended:
        A, V, converged, res = _jacobi_round_robin(symmetrize(M).astype(dtype), tol, max_sweeps)
    else:
        A = np.ascontiguousarray(symmetrize(M))
        V = np.eye(A.shape[0])
        converged, res = _jacobi_f64(A, V, tol * float(np.linalg.norm(A)), max_sweeps)
    if not converged:
        raise NoConvergence(
            f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {float(res):.3e})",
            residual=float(res),
        )
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], _fix_signs(V[:, order]))


def _jacobi_round_robin(A, tol, max_sweeps):
    dtype = A.dtype.type
    n = A.shape[0]
    V = np.eye(n, dtype=dtype)
    target = dtype(tol) * np.linalg.norm(A)
    if n not in _SCHEDULES:
        _SCHEDULES[n] = _round_robin(n)
    offdiag = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps + 1):
        res = np.linalg.norm(A[offdiag])
        if res <= target:
            return A, V, True, res
        for ps, qs in _SCHEDULES[n]:
            apq = A[ps, qs]
            active = apq != 0
            if not active.any():
                continue
            gap = A[qs, qs] - A[ps, ps]
            safe = np.where(active, apq, 1)
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                theta = gap / (2 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1))
            t[theta == 0] = 1
            # theta overflow: t ~ 1/(2 theta)
            huge = ~np.isfinite(theta * theta)
            t[huge] = safe[huge] / gap[huge]
            t[~active] = 0
            c = 1 / np.sqrt(t * t + 1)
            s = t * c

            J = np.eye(n, dtype=dtype)
            J[ps, ps] = c
            J[qs, qs] = c
            J[ps, qs] = s
            J[qs, ps] = -s
            A = J.T @ A @ J
            A[ps, qs] = 0
            A[qs, ps] = 0
            V = V @ J
    return A, V, False, np.linalg.norm(A[offdiag])


def extreme_eigenvalues(M) -> tuple[float, float]:
    w = eigh(M).eigenvalues
    return float(w[0]), float(w[-1])


def inv_and_invsqrt(M, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(M^{-1}, M^{-1/2})`` for a symmetric positive definite ``M``.

    ``tol`` defaults to ``singular_rtol() * lambda_max``; eigenvalues at or
    below it raise :class:`SingularMatrix`.
    """
    # extended precision keeps ||M M^{-1} - I|| near the rounding floor for
    # condition numbers up to ~1e8
    w, Q = eigh(M, dtype=_EXTENDED)
    lam_min, lam_max = float(w[0]), float(w[-1])
    if tol is None:
        tol = singular_rtol() * max(lam_max, 0.0)
    if not lam_min > tol:
        raise SingularMatrix(
            f"matrix is singular to tolerance {tol:.3e} (lambda_min = {lam_min:.3e})",
            lambda_min=lam_min,
        )
    inv = ((Q / w) @ Q.T).astype(np.float64)
    invsqrt = ((Q / np.sqrt(w)) @ Q.T).astype(np.float64)
    return symmetrize(inv), symmetrize(invsqrt)


def _gram(M: np.ndarray) -> np.ndarray:
    # smaller of M^T M and M M^T; both carry the same nonzero spectrum
    return M.T @ M if M.shape[1] <= M.shape[0] else M @ M.T


def spectral_norm(M) -> float:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    lam_max = eigh(_gram(M)).eigenvalues[-1]
    return math.sqrt(max(float(lam_max), 0.0))


def top_singular(M) -> tuple[float, np.ndarray, np.ndarray]:
    """Largest singular triple ``(sigma, u, v)`` with ``M v = sigma u``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    rows, cols = M.shape
    if rows <= cols:
        w, Q = eigh(M @ M.T)
        u = Q[:, -1]
        sigma = math.sqrt(max(float(w[-1]), 0.0))
        if sigma == 0.0:
            v = np.zeros(cols)
            v[0] = 1.0
            return 0.0, u, v
        v = M.T @ u
        v /= np.linalg.norm(v)
        return float(np.linalg.norm(M @ v)), u, v
    w, Q = eigh(M.T @ M)
    v = Q[:, -1]
    sigma = float(np.linalg.norm(M @ v))
    if sigma == 0.0:
        u = np.zeros(rows)
        u[0] = 1.0
        return 0.0, u, v
    return sigma, (M @ v) / sigma, v


def singular_values(M, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """All singular values (descending) by one-sided Jacobi.

    Small singular values come out with high relative accuracy, unlike the
    square root of Gram eigenvalues, which is what rank decisions need.
    """
    U = np.atleast_2d(np.asarray(M, dtype=float)).copy()
    if U.shape[1] > U.shape[0]:
        U = U.T.copy()
    n = U.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = float(U[:, i] @ U[:, i])
                beta = float(U[:, j] @ U[:, j])
                gamma = float(U[:, i] @ U[:, j])
                if gamma == 0.0 or abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                ui = U[:, i].copy()
                U[:, i] = c * ui - s * U[:, j]
                U[:, j] = s * ui + c * U[:, j]
        if not rotated:
            break
    else:
        raise NoConvergence(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.linalg.norm(U, axis=0))[::-1]
