"""Couplings between discrete measures and three-marginal gluing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, MarginalMismatch, NonpositiveMass
from ..measure import DiscreteMeasure, LinearMap, pushforward

MARGINAL_TOL = 1e-10
TOTAL_TOL = 1e-12


def _index_array(a) -> np.ndarray:
    a = np.array(a, dtype=np.int64).ravel()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Coupling:
    """Sparse joint measure: ``mass[e]`` sits on ``(mu.points[i[e]], nu.points[j[e]])``."""

    mu: DiscreteMeasure
    nu: DiscreteMeasure
    i: np.ndarray
    j: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        i, j = _index_array(self.i), _index_array(self.j)
        mass = np.array(self.mass, dtype=float).ravel()
        if not (i.size == j.size == mass.size):
            raise DimensionMismatch("coupling index and mass arrays differ in length")
        if mass.size == 0:
            raise MarginalMismatch("coupling has no entries")
        if np.any(i < 0) or np.any(i >= self.mu.size) or np.any(j < 0) or np.any(j >= self.nu.size):
            raise DimensionMismatch("coupling index out of range")
        if not np.all(mass > 0):
            raise NonpositiveMass("coupling masses must be strictly positive")
        if abs(mass.sum() - 1.0) > TOTAL_TOL:
            raise MarginalMismatch(f"coupling total mass {mass.sum()!r} differs from 1")
        row = np.bincount(i, weights=mass, minlength=self.mu.size)
        col = np.bincount(j, weights=mass, minlength=self.nu.size)
        row_err = np.max(np.abs(row - self.mu.masses))
        col_err = np.max(np.abs(col - self.nu.masses))
        if row_err > MARGINAL_TOL or col_err > MARGINAL_TOL:
            raise MarginalMismatch(
                f"coupling marginals off by {row_err:.3e} (first) and {col_err:.3e} (second)"
            )
        mass.setflags(write=False)
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "mass", mass)

    @property
    def xs(self) -> np.ndarray:
        return self.mu.points[self.i]

    @property
    def ys(self) -> np.ndarray:
        return self.nu.points[self.j]

    def __len__(self) -> int:
        return self.mass.size

    def dense(self) -> np.ndarray:
        P = np.zeros((self.mu.size, self.nu.size))
        np.add.at(P, (self.i, self.j), self.mass)
        return P

    def cross_moment(self) -> np.ndarray:
        """``sum mass * x y^T``."""
        return (self.xs * self.mass[:, None]).T @ self.ys

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.to_dict(),
            "nu": self.nu.to_dict(),
            "entries": [[int(a), int(b), float(w)] for a, b, w in zip(self.i, self.j, self.mass)],
        }

    @classmethod
    def from_dense(cls, mu: DiscreteMeasure, nu: DiscreteMeasure, P) -> "Coupling":
        P = np.asarray(P, dtype=float)
        ii, jj = np.nonzero(P > 0)
        return cls(mu, nu, ii, jj, P[ii, jj])


def check_marginals(gamma: Coupling, mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    """Raise :class:`MarginalMismatch` unless ``gamma`` couples ``mu`` with ``nu``."""
    if not gamma.mu.allclose(mu, MARGINAL_TOL):
        raise MarginalMismatch("coupling's first marginal differs from the given measure")
    if not gamma.nu.allclose(nu, MARGINAL_TOL):
        raise MarginalMismatch("coupling's second marginal differs from the given measure")


def product_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    ii, jj = np.meshgrid(np.arange(mu.size), np.arange(nu.size), indexing="ij")
    mass = np.outer(mu.masses, nu.masses)
    return Coupling(mu, nu, ii.ravel(), jj.ravel(), mass.ravel())


def map_coupling(mu: DiscreteMeasure, T) -> Coupling:
    """Graph coupling ``(Id x T)_# mu``, pairing atom ``i`` with its image."""
    if not isinstance(T, LinearMap):
        T = LinearMap(T)
    if T.dim_in != mu.dim:
        raise DimensionMismatch(f"map expects dim {T.dim_in}, measure has dim {mu.dim}")
    nu = pushforward(mu, T)
    idx = np.arange(mu.size)
    return Coupling(mu, nu, idx, idx, mu.masses)


def diagonal_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """Pair atom ``i`` of ``mu`` with atom ``i`` of ``nu``; masses must agree."""
    if mu.size != nu.size or np.max(np.abs(mu.masses - nu.masses)) > MARGINAL_TOL:
        raise MarginalMismatch("diagonal coupling needs equal atom counts and masses")
    idx = np.arange(mu.size)
    return Coupling(mu, nu, idx, idx, mu.masses)


def quadratic_cost(gamma: Coupling) -> float:
    d = gamma.xs - gamma.ys
    return float(gamma.mass @ np.einsum("ij,ij->i", d, d))


@dataclass(frozen=True, eq=False)
class TriplePlan:
    mu: DiscreteMeasure
    nu: DiscreteMeasure
    eta: DiscreteMeasure
    i: np.ndarray
    j: np.ndarray
    k: np.ndarray
    mass: np.ndarray

    def project_12(self) -> np.ndarray:
        P = np.zeros((self.mu.size, self.nu.size))
        np.add.at(P, (self.i, self.j), self.mass)
        return P

    def project_23(self) -> np.ndarray:
        P = np.zeros((self.nu.size, self.eta.size))
        np.add.at(P, (self.j, self.k), self.mass)
        return P

    def project_13(self) -> np.ndarray:
        P = np.zeros((self.mu.size, self.eta.size))
        np.add.at(P, (self.i, self.k), self.mass)
        return P


def glue(gamma12: Coupling, gamma23: Coupling) -> TriplePlan:
    """Conditionally independent gluing over the shared middle marginal.

    ``mass(i, j, k) = gamma12(i, j) * gamma23(j, k) / nu(j)``. Only nonzero
    triples are materialized.
    """
    nu = gamma12.nu
    if not nu.allclose(gamma23.mu, MARGINAL_TOL):
        raise MarginalMismatch("middle marginals of the two couplings differ")
    by_j_23: dict[int, list[int]] = {}
    for e, jj in enumerate(gamma23.i):
        by_j_23.setdefault(int(jj), []).append(e)
    out_i, out_j, out_k, out_m = [], [], [], []
    for e12 in range(len(gamma12)):
        jj = int(gamma12.j[e12])
        partners = by_j_23.get(jj)
        if not partners:
            continue
        partners = np.asarray(partners)
        out_i.append(np.full(partners.size, gamma12.i[e12]))
        out_j.append(np.full(partners.size, jj))
        out_k.append(gamma23.j[partners])
        out_m.append(gamma12.mass[e12] * gamma23.mass[partners] / nu.masses[jj])
    return TriplePlan(
        gamma12.mu,
        nu,
        gamma23.nu,
        np.concatenate(out_i),
        np.concatenate(out_j),
        np.concatenate(out_k),
        np.concatenate(out_m),
    )
