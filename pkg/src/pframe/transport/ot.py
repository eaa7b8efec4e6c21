"""Exact discrete optimal transport by the transportation simplex method.

Start from the northwest-corner basis, price with the u-v potentials of the
basis tree, and pivot with Bland's rule (lowest-index entering cell, lowest
index leaving cell among ties) so degenerate problems cannot cycle.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from ..errors import DimensionMismatch, NoConvergence
from ..measure import DiscreteMeasure
from .coupling import Coupling

MAX_PIVOTS = 10**6


def _northwest_corner(a: np.ndarray, b: np.ndarray) -> list[tuple[int, int]]:
    m, n = a.size, b.size
    ra, rb = a.copy(), b.copy()
    cells = []
    i = j = 0
    while True:
        cells.append((i, j))
        if i == m - 1 and j == n - 1:
            break
        q = min(ra[i], rb[j])
        ra[i] -= q
        rb[j] -= q
        if j == n - 1 or (i < m - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1
    return cells


def _tree_flows(cells, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Basic flows determined by the spanning tree and the marginals (leaf peeling)."""
    m, n = a.size, b.size
    resid = np.concatenate([a, b]).astype(float)
    incident: list[set[int]] = [set() for _ in range(m + n)]
    for e, (i, j) in enumerate(cells):
        incident[i].add(e)
        incident[m + j].add(e)
    flows = np.zeros(len(cells))
    leaves = deque(v for v in range(m + n) if len(incident[v]) == 1)
    while leaves:
        v = leaves.popleft()
        if len(incident[v]) != 1:
            continue
        e = incident[v].pop()
        i, j = cells[e]
        other = m + j if v == i else i
        flows[e] = resid[v]
        resid[other] -= resid[v]
        resid[v] = 0.0
        incident[other].discard(e)
        if len(incident[other]) == 1:
            leaves.append(other)
    return flows


class _Basis:
    def __init__(self, m: int, n: int, cells):
        self.m, self.n = m, n
        self.row_adj: list[set[int]] = [set() for _ in range(m)]
        self.col_adj: list[set[int]] = [set() for _ in range(n)]
        self.is_basic = np.zeros((m, n), dtype=bool)
        for i, j in cells:
            self.add(i, j)

    def add(self, i, j):
        self.row_adj[i].add(j)
        self.col_adj[j].add(i)
        self.is_basic[i, j] = True

    def remove(self, i, j):
        self.row_adj[i].discard(j)
        self.col_adj[j].discard(i)
        self.is_basic[i, j] = False

    def potentials(self, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = np.full(self.m, np.nan)
        v = np.full(self.n, np.nan)
        u[0] = 0.0
        queue = deque([("r", 0)])
        while queue:
            kind, idx = queue.popleft()
            if kind == "r":
                for j in self.row_adj[idx]:
                    if math.isnan(v[j]):
                        v[j] = C[idx, j] - u[idx]
                        queue.append(("c", j))
            else:
                for i in self.col_adj[idx]:
                    if math.isnan(u[i]):
                        u[i] = C[i, idx] - v[idx]
                        queue.append(("r", i))
        return u, v

    def cycle(self, r: int, c: int) -> list[tuple[int, int]]:
        """Cells on the tree path from column ``c`` back to row ``r``."""
        # BFS over the tree from row r; nodes: rows 0..m-1, columns m..m+n-1
        parent = {r: None}
        queue = deque([r])
        target = self.m + c
        while queue and target not in parent:
            node = queue.popleft()
            if node < self.m:
                nbrs = (self.m + j for j in self.row_adj[node])
            else:
                nbrs = iter(self.col_adj[node - self.m])
            for nb in nbrs:
                if nb not in parent:
                    parent[nb] = node
                    queue.append(nb)
        path = []
        node = target
        while parent[node] is not None:
            prev = parent[node]
            if node >= self.m:
                path.append((prev, node - self.m))
            else:
                path.append((node, prev - self.m))
            node = prev
        return path


def transport_simplex(a, b, C, max_pivots: int = MAX_PIVOTS) -> tuple[np.ndarray, float]:
    """Solve ``min <C, P>`` over ``P >= 0`` with row sums ``a`` and column sums ``b``.

    Returns ``(P, cost)`` with ``P`` dense.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    m, n = a.size, b.size
    if C.shape != (m, n):
        raise DimensionMismatch(f"cost matrix shape {C.shape} does not match ({m}, {n})")

    cells = _northwest_corner(a, b)
    flows = _tree_flows(cells, a, b)
    X = np.zeros((m, n))
    for (i, j), f in zip(cells, flows):
        X[i, j] = f
    basis = _Basis(m, n, cells)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(C))))

    for _ in range(max_pivots):
        u, v = basis.potentials(C)
        reduced = C - u[:, None] - v[None, :]
        eligible = np.flatnonzero((reduced < -tol) & ~basis.is_basic)
        if eligible.size == 0:
            break
        r, c = divmod(int(eligible[0]), n)
        path = basis.cycle(r, c)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(X[i, j] for i, j in minus)
        leave = min((i * n + j, (i, j)) for i, j in minus if X[i, j] <= theta)[1]
        for i, j in minus:
            X[i, j] -= theta
        for i, j in plus:
            X[i, j] += theta
        X[r, c] += theta
        basis.remove(*leave)
        X[leave] = 0.0
        basis.add(r, c)
    else:
        raise NoConvergence(f"transportation simplex exceeded {max_pivots} pivots")

    cells = [(i, j) for i in range(m) for j in basis.row_adj[i]]
    flows = np.maximum(_tree_flows(cells, a, b), 0.0)
    P = np.zeros((m, n))
    for (i, j), f in zip(cells, flows):
        P[i, j] = f
    return P, float(np.sum(P * C))


def squared_distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - Y[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[float, Coupling]:
    """Exact 2-Wasserstein distance and an optimal plan."""
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"measures live in dimensions {mu.dim} and {nu.dim}")
    C = squared_distances(mu.points, nu.points)
    P, cost = transport_simplex(mu.masses, nu.masses, C)
    return math.sqrt(max(cost, 0.0)), Coupling.from_dense(mu, nu, P)
