"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np

from pframe.measure import DiscreteMeasure


def random_measure(rng, dim, atoms, dirichlet=True):
    masses = rng.dirichlet(np.ones(atoms)) if dirichlet else np.full(atoms, 1.0 / atoms)
    return DiscreteMeasure(rng.standard_normal((atoms, dim)), masses / masses.sum())


def frame_operator_sum(points, masses):
    """Plain double loop over atoms."""
    n = len(points[0])
    S = np.zeros((n, n))
    for x, m in zip(points, masses):
        for a in range(n):
            for b in range(n):
                S[a, b] += m * x[a] * x[b]
    return S


def power_extremes(S, rtol=1e-14, max_iter=200_000, seed=0):
    """(lambda_min, lambda_max) of a PSD matrix by power iteration for the top
    eigenvalue and shifted inverse iteration for the bottom one (Rayleigh
    quotients, stop on relative change below ``rtol``)."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    top = v @ S @ v
    for _ in range(max_iter):
        w = S @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            top = 0.0
            break
        v = w / nw
        new = v @ S @ v
        if abs(new - top) <= rtol * abs(new):
            top = new
            break
        top = new
    if top == 0.0:
        return 0.0, 0.0
    shift = 1e-3 * top
    M = S + shift * np.eye(n)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    bottom = v @ S @ v
    for _ in range(max_iter):
        w = np.linalg.solve(M, v)
        v = w / np.linalg.norm(w)
        new = v @ S @ v
        if abs(new - bottom) <= rtol * top:
            bottom = new
            break
        bottom = new
    return float(bottom), float(top)


def w2_bruteforce(X, Y):
    """W2 between uniform measures of equal size: min over permutation plans."""
    k = len(X)
    best = math.inf
    for perm in itertools.permutations(range(k)):
        cost = sum(float(np.sum((X[i] - Y[p]) ** 2)) for i, p in enumerate(perm)) / k
        best = min(best, cost)
    return math.sqrt(best)
