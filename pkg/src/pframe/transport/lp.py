"""Transport-dual membership as an LP feasibility problem.

Given discrete ``mu`` and ``nu`` we look for ``gamma_ij >= 0`` with the
marginals of ``mu`` and ``nu`` and ``sum gamma_ij x_i y_j^T = Id``. A dense
phase-1 simplex decides feasibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, NoConvergence, NumericalInstability
from ..measure import DiscreteMeasure
from .coupling import Coupling

FEASIBILITY_TOL = 1e-8
PIVOT_TOL = 1e-11
MAX_PIVOTS = 10**6
ZERO_TOL = 1e-13
# consecutive degenerate pivots before pricing switches to Bland's rule
BLAND_AFTER = 20
REFACTOR_EVERY = 50


@dataclass(frozen=True)
class Phase1Result:
    feasible: bool
    objective: float
    x: np.ndarray | None


def phase1(A, b, tol: float = FEASIBILITY_TOL, max_pivots: int = MAX_PIVOTS) -> Phase1Result:
    """Find ``x >= 0`` with ``A x = b`` or report the minimal infeasibility.

    Revised simplex on the auxiliary problem ``min sum(a)`` over
    ``A x + a = b``, ``x, a >= 0``. The basis system is re-solved from scratch
    periodically (the inverse is rank-one updated in between) so long
    degenerate runs do not accumulate elimination error. Pricing is
    most-negative reduced cost, falling back to Bland's rule after a streak
    of degenerate pivots (anti-cycling).
    ``objective <= tol`` counts as feasible.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)

    full = np.hstack([A, np.eye(m)])
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    xB = b.copy()

    Binv = np.eye(m)
    degenerate_run = 0
    since_refactor = 0
    for _ in range(max_pivots):
        if since_refactor >= REFACTOR_EVERY:
            Binv = np.linalg.inv(full[:, basis])
            since_refactor = 0
        xB = Binv @ b
        xB[np.abs(xB) <= ZERO_TOL] = 0.0
        y = Binv.T @ cost[basis]
        reduced = cost - full.T @ y
        reduced[basis] = 0.0
        entering = np.flatnonzero(reduced < -PIVOT_TOL * scale)
        if entering.size == 0:
            if since_refactor == 0:
                break
            # confirm optimality with a fresh inverse, not an updated one
            since_refactor = REFACTOR_EVERY
            continue
        bland = degenerate_run >= BLAND_AFTER
        c = int(entering[0]) if bland else int(entering[np.argmin(reduced[entering])])
        d = Binv @ full[:, c]
        rows = np.flatnonzero(d > PIVOT_TOL)
        if rows.size == 0:
            raise NumericalInstability("phase-1 simplex found an unbounded direction")
        ratios = np.maximum(xB[rows], 0.0) / d[rows]
        best = ratios.min()
        ties = rows[ratios <= best + ZERO_TOL]
        # Bland: lowest basic index; otherwise the largest pivot element
        r = int(ties[np.argmin(basis[ties])]) if bland else int(ties[np.argmax(d[ties])])
        degenerate_run = degenerate_run + 1 if best <= ZERO_TOL else 0
        basis[r] = c
        # rank-one update of the basis inverse
        pivot_row = Binv[r] / d[r]
        Binv -= np.outer(d, pivot_row)
        Binv[r] = pivot_row
        since_refactor += 1
    else:
        raise NoConvergence(f"phase-1 simplex exceeded {max_pivots} pivots")
    xB = np.linalg.solve(full[:, basis], b)

    objective = max(float(cost[basis] @ xB), 0.0)
    if objective > tol:
        return Phase1Result(False, objective, None)

    structural = basis < n
    cols = basis[structural]
    x = np.zeros(n)
    if cols.size:
        # polish: least-squares solve on the structural part of the final basis
        sol, *_ = np.linalg.lstsq(A[:, cols], b, rcond=None)
        x[cols] = sol
    if np.any(x < -1e-9):
        raise NumericalInstability(
            f"phase-1 objective {objective:.3e} is feasible but the basis solve has entries down to {x.min():.3e}"
        )
    x = np.maximum(x, 0.0)
    residual = float(np.max(np.abs(A @ x - b))) if m else 0.0
    if residual > tol:
        raise NumericalInstability(
            f"phase-1 objective {objective:.3e} but no basic feasible point recovered (residual {residual:.3e})"
        )
    return Phase1Result(True, objective, x)


@dataclass(frozen=True)
class DualMembership:
    is_member: bool
    witness: Coupling | None
    phase1_objective: float
    moment_residual: float | None

    def to_dict(self) -> dict:
        return {
            "is_member": self.is_member,
            "phase1_objective": self.phase1_objective,
            "moment_residual": self.moment_residual,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def moment_residual(gamma: Coupling) -> float:
    """Frobenius distance of ``sum gamma x y^T`` from the identity."""
    M = gamma.cross_moment()
    return float(np.linalg.norm(M - np.eye(M.shape[0])))


def dual_membership(mu: DiscreteMeasure, nu: DiscreteMeasure) -> DualMembership:
    """Decide whether ``nu`` is a transport dual of ``mu``."""
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"measures live in dimensions {mu.dim} and {nu.dim}")
    k, l, n = mu.size, nu.size, mu.dim
    X, Y = mu.points, nu.points
    # variable (i, j) at column i * l + j
    rows = np.kron(np.eye(k), np.ones((1, l)))
    cols = np.kron(np.ones((1, k)), np.eye(l))
    # moment row (a, b): sum_ij x_i[a] y_j[b] gamma_ij
    moment = np.einsum("ia,jb->abij", X, Y).reshape(n * n, k * l)
    A = np.vstack([rows, cols, moment])
    b = np.concatenate([mu.masses, nu.masses, np.eye(n).ravel()])

    result = phase1(A, b)
    if not result.feasible:
        return DualMembership(False, None, result.objective, None)
    P = result.x.reshape(k, l)
    P[P < 1e-15] = 0.0
    # renormalize away rounding in the total before building the coupling
    P *= 1.0 / P.sum()
    witness = Coupling.from_dense(mu, nu, P)
    return DualMembership(True, witness, result.objective, moment_residual(witness))
