"""Frame operators, optimal frame bounds, canonical duals and the synthesis
and analysis operators on paired atoms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, LengthMismatch, NotAFrame, SingularMatrix
from .measure import DiscreteMeasure, LinearMap, pushforward, second_moment

TIGHT_RTOL = 1e-9


class Classification(str, enum.Enum):
    NOT_FRAME = "not-frame"
    FRAME = "frame"
    TIGHT = "tight"
    PARSEVAL = "parseval"


@dataclass(frozen=True, eq=False)
class FrameCertificate:
    frame_operator: np.ndarray
    lower: float
    upper: float
    m2: float
    classification: Classification

    @property
    def is_frame(self) -> bool:
        return self.classification is not Classification.NOT_FRAME

    def to_dict(self) -> dict:
        return {
            "S": self.frame_operator.tolist(),
            "A": self.lower,
            "B": self.upper,
            "M2": self.m2,
            "class": self.classification.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FrameCertificate":
        return cls(
            np.array(data["S"], dtype=float),
            float(data["A"]),
            float(data["B"]),
            float(data["M2"]),
            Classification(data["class"]),
        )


def frame_operator(mu: DiscreteMeasure) -> np.ndarray:
    """``S = sum_i m_i x_i x_i^T``."""
    X = mu.points
    return linalg.symmetrize((X * mu.masses[:, None]).T @ X)


def classify(lower: float, upper: float, rtol: float | None = None) -> Classification:
    if rtol is None:
        rtol = linalg.singular_rtol()
    if not lower > rtol * max(upper, 0.0):
        return Classification.NOT_FRAME
    if upper - lower <= TIGHT_RTOL * upper:
        if abs(upper - 1.0) <= TIGHT_RTOL:
            return Classification.PARSEVAL
        return Classification.TIGHT
    return Classification.FRAME


def frame_bounds(mu: DiscreteMeasure) -> FrameCertificate:
    """Optimal bounds ``A = lambda_min(S)``, ``B = lambda_max(S)`` and a label.

    A measure whose lower bound falls under the singularity tolerance is
    labelled ``NOT_FRAME``; that is a classification, never an exception.
    """
    S = frame_operator(mu)
    A, B = linalg.extreme_eigenvalues(S)
    return FrameCertificate(S, A, B, float(np.trace(S)), classify(A, B))


def require_frame(mu: DiscreteMeasure) -> FrameCertificate:
    cert = frame_bounds(mu)
    if not cert.is_frame:
        raise NotAFrame(f"measure is not a frame (lambda_min = {cert.lower:.3e})")
    return cert


def frame_inverses(mu: DiscreteMeasure) -> tuple[np.ndarray, np.ndarray]:
    """``(S^{-1}, S^{-1/2})`` of a frame; raises :class:`NotAFrame` otherwise."""
    require_frame(mu)
    try:
        return linalg.inv_and_invsqrt(frame_operator(mu))
    except SingularMatrix as exc:
        raise NotAFrame(str(exc)) from exc


def canonical_dual(mu: DiscreteMeasure):
    """Canonical dual ``(S^{-1})_# mu`` together with its graph coupling.

    Returns ``(dual, coupling)``; the coupling pairs each atom with its image.
    """
    from .transport import map_coupling

    S_inv, _ = frame_inverses(mu)
    coupling = map_coupling(mu, LinearMap(S_inv))
    return coupling.nu, coupling


def canonical_parseval(mu: DiscreteMeasure) -> DiscreteMeasure:
    _, S_inv_half = frame_inverses(mu)
    return pushforward(mu, LinearMap(S_inv_half))


def reconstruction_residual(mu: DiscreteMeasure, f, mode: str = "dual") -> float:
    """Norm of ``f`` minus its reconstruction from the canonical dual or the
    canonical Parseval frame. Exact identities, so the result is rounding error.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (mu.dim,):
        raise DimensionMismatch(f"vector has shape {f.shape}, expected ({mu.dim},)")
    S_inv, S_inv_half = frame_inverses(mu)
    X, m = mu.points, mu.masses
    if mode == "dual":
        coeffs = X @ (S_inv @ f)
        recon = (m * coeffs) @ X
    elif mode == "parseval":
        coeffs = X @ (S_inv_half @ f)
        recon = S_inv_half @ ((m * coeffs) @ X)
    else:
        raise ValueError(f"mode must be 'dual' or 'parseval', got {mode!r}")
    return float(np.linalg.norm(f - recon))


@dataclass(frozen=True, eq=False)
class PairedMeasure:
    """Index-aligned atoms ``(x_i, y_i)`` sharing mass ``m_i``.

    A coefficient vector ``c`` plays the role of a function sampled on the
    atoms; its ``L^2(mu)`` norm is ``sqrt(sum m_i c_i^2)``.
    """

    x: np.ndarray
    y: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        mu = DiscreteMeasure(self.x, self.masses)
        nu = DiscreteMeasure(self.y, self.masses)
        if mu.points.shape != nu.points.shape:
            raise DimensionMismatch(f"x has shape {mu.points.shape}, y has shape {nu.points.shape}")
        object.__setattr__(self, "x", mu.points)
        object.__setattr__(self, "y", nu.points)
        object.__setattr__(self, "masses", mu.masses)

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def mu(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.x, self.masses)

    @property
    def nu(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.y, self.masses)

    @classmethod
    def from_maps(cls, mu: DiscreteMeasure, nu: DiscreteMeasure) -> "PairedMeasure":
        if mu.size != nu.size or not np.allclose(mu.masses, nu.masses, rtol=0, atol=1e-12):
            raise LengthMismatch("paired measures need identical mass vectors")
        return cls(mu.points, nu.points, mu.masses)

    def l2_norm(self, c) -> float:
        c = np.asarray(c, dtype=float)
        return float(math.sqrt(self.masses @ (c * c)))

    def displacement_operator(self) -> np.ndarray:
        """``(X - Y) diag(sqrt(m))`` with atoms as columns."""
        return (self.x - self.y).T * np.sqrt(self.masses)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "masses": self.masses.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PairedMeasure":
        masses = data.get("masses")
        k = len(data["x"])
        if masses is None:
            masses = [1.0 / k] * k
        return cls(np.array(data["x"], dtype=float), np.array(data["y"], dtype=float), np.array(masses, dtype=float))


def _coefficients(p: PairedMeasure, c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (p.size,):
        raise LengthMismatch(f"expected {p.size} coefficients, got shape {c.shape}")
    return c


def synthesis_U(p: PairedMeasure, c) -> np.ndarray:
    """``sum_i c_i m_i x_i``."""
    c = _coefficients(p, c)
    return (c * p.masses) @ p.x


def synthesis_T(p: PairedMeasure, c) -> np.ndarray:
    """``sum_i c_i m_i y_i``."""
    c = _coefficients(p, c)
    return (c * p.masses) @ p.y


def analysis_Uplus(p: PairedMeasure, f) -> np.ndarray:
    """Coefficients ``c_i = <S^{-1} f, x_i>``, a right inverse of ``synthesis_U``."""
    f = np.asarray(f, dtype=float)
    if f.shape != (p.dim,):
        raise DimensionMismatch(f"vector has shape {f.shape}, expected ({p.dim},)")
    S_inv, _ = frame_inverses(p.mu)
    return p.x @ (S_inv @ f)


def pw_delta_exact(p: PairedMeasure) -> float:
    """Smallest ``delta`` with ``|Uc - Tc| <= delta |c|_{L^2(mu)}`` for all ``c``."""
    return linalg.spectral_norm(p.displacement_operator())


def pw_extremal_coefficients(p: PairedMeasure) -> tuple[float, np.ndarray]:
    """``(delta, c)`` where ``c`` attains ``|Uc - Tc| = delta |c|`` (unit L^2 norm)."""
    sigma, _, v = linalg.top_singular(p.displacement_operator())
    return sigma, v / np.sqrt(p.masses)
