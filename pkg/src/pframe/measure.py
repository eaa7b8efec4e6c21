"""Finitely supported probability measures on R^n."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySupport, NonpositiveMass, NormalizationError
from .linalg import singular_values

MASS_TOL = 1e-12
# relative deviation of the mass total beyond which file input is rejected
STRICT_NORMALIZATION_TOL = 1e-6


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms ``points[i]`` carrying mass ``masses[i]``.

    Atoms form a multiset: repeated points are kept as separate atoms so that
    index-aligned structures (couplings, paired measures) stay well defined.
    """

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        m = np.asarray(self.masses, dtype=float)
        if pts.ndim != 2:
            raise DimensionMismatch(f"points must be a (k, n) array, got shape {pts.shape}")
        if m.ndim != 1 or m.shape[0] != pts.shape[0]:
            raise DimensionMismatch(f"{pts.shape[0]} points but {m.size} masses")
        if pts.shape[0] == 0:
            raise EmptySupport("a measure needs at least one atom")
        if pts.shape[1] == 0:
            raise DimensionMismatch("ambient dimension must be positive")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(m))):
            raise ValueError("points and masses must be finite")
        if np.any(m <= 0):
            raise NonpositiveMass(f"masses must be strictly positive, got min {m.min()!r}")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise NormalizationError(f"masses sum to {m.sum()!r}, not 1")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "masses", _frozen(m))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.size

    def allclose(self, other: "DiscreteMeasure", atol: float = 1e-10) -> bool:
        """Atomwise comparison (same order, same multiplicities)."""
        return (
            self.points.shape == other.points.shape
            and bool(np.all(np.abs(self.points - other.points) <= atol))
            and bool(np.all(np.abs(self.masses - other.masses) <= atol))
        )

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.array(self.points.shape, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.points, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.masses, dtype="<f8").tobytes())
        return h.hexdigest()

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "points": self.points.tolist(),
            "masses": self.masses.tolist(),
        }


@dataclass(frozen=True, eq=False)
class LinearMap:
    matrix: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if M.ndim != 2:
            raise DimensionMismatch(f"linear map must be a matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValueError("linear map has non-finite entries")
        object.__setattr__(self, "matrix", _frozen(M))

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[1]

    @property
    def dim_out(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        return self.matrix @ np.asarray(x, dtype=float)

    def compose(self, inner: "LinearMap") -> "LinearMap":
        """``self ∘ inner``."""
        if inner.dim_out != self.dim_in:
            raise DimensionMismatch(f"cannot compose {self.matrix.shape} after {inner.matrix.shape}")
        return LinearMap(self.matrix @ inner.matrix)

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls(np.eye(n))

    @classmethod
    def scaling(cls, n: int, c: float) -> "LinearMap":
        return cls(c * np.eye(n))


def make_measure(points, masses=None) -> DiscreteMeasure:
    """Build a measure, renormalizing the masses to sum to one.

    Masses whose total is already within ``MASS_TOL`` of one are left untouched.

    ``masses`` defaults to uniform. Atom order is preserved.
    """
    if len(points) == 0:
        raise EmptySupport("a measure needs at least one atom")
    lengths = {len(p) for p in points}
    if len(lengths) != 1:
        raise DimensionMismatch(f"points have unequal lengths {sorted(lengths)}")
    pts = np.array(points, dtype=float)
    if masses is None:
        m = np.full(len(pts), 1.0 / len(pts))
    else:
        m = np.array(masses, dtype=float).ravel()
        if m.size != len(pts):
            raise DimensionMismatch(f"{len(pts)} points but {m.size} masses")
        bad = np.flatnonzero(~(m > 0))
        if bad.size:
            raise NonpositiveMass(f"mass at index {bad[0]} is {m[bad[0]]!r}; masses must be > 0")
        # masses already normalized to the measure tolerance are kept bit-for-bit
        # so that files round-trip exactly
        if abs(m.sum() - 1.0) > MASS_TOL:
            m = m / m.sum()
    return DiscreteMeasure(pts, m)


def measure_from_dict(data: dict, force_normalize: bool = False) -> DiscreteMeasure:
    """Parse the JSON measure schema ``{"dim", "points", "masses"?}``.

    Unlike :func:`make_measure`, masses summing to something more than 1e-6
    (relative) away from 1 are rejected unless ``force_normalize`` is set.
    """
    points = data["points"]
    dim = data.get("dim")
    if dim is not None and any(len(p) != dim for p in points):
        raise DimensionMismatch(f"declared dim {dim} does not match point lengths")
    masses = data.get("masses")
    if masses is not None and not force_normalize:
        total = float(np.sum(np.asarray(masses, dtype=float)))
        if abs(total - 1.0) > STRICT_NORMALIZATION_TOL:
            raise NormalizationError(
                f"masses sum to {total!r}; pass force_normalize to rescale"
            )
    return make_measure(points, masses)


def second_moment(mu: DiscreteMeasure) -> float:
    return float(mu.masses @ np.einsum("ij,ij->i", mu.points, mu.points))


def pushforward(mu: DiscreteMeasure, T) -> DiscreteMeasure:
    """Image measure ``T_# mu``; atoms are mapped one by one and never merged."""
    if not isinstance(T, LinearMap):
        T = LinearMap(T)
    if T.dim_in != mu.dim:
        raise DimensionMismatch(f"map expects dim {T.dim_in}, measure has dim {mu.dim}")
    return DiscreteMeasure(mu.points @ T.matrix.T, mu.masses)


def support_span_dim(mu: DiscreteMeasure, tol: float = 1e-10) -> int:
    """Numerical rank of the support: singular values above ``tol * sigma_max``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    sv = singular_values(mu.points)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def dirac(point) -> DiscreteMeasure:
    return make_measure([list(np.atleast_1d(point))], [1.0])


def mercedes_benz() -> DiscreteMeasure:
    """Uniform measure on three unit vectors at 120 degrees (a tight frame)."""
    r = np.sqrt(3.0) / 2.0
    return make_measure([[1.0, 0.0], [-0.5, r], [-0.5, -r]])
