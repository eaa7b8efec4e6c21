"""Perturbation certificates: premise quantity, strict premise verdict and
guaranteed frame bounds for a perturbed measure, plus an empirical validator.

Every certificate compares ``premise_value < premise_threshold`` strictly in
floating point, with no slack. Bounds are only emitted when the premise holds.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    AutoRequiresZeroLambdas,
    DigestMismatch,
    HypothesisViolated,
    NotADualWitness,
    PremiseNotSatisfied,
)
from .frame import (
    FrameCertificate,
    PairedMeasure,
    frame_bounds,
    frame_inverses,
    frame_operator,
    pw_delta_exact,
    pw_extremal_coefficients,
    require_frame,
)
from .measure import DiscreteMeasure, second_moment
from .transport import Coupling, check_marginals, glue, moment_residual, quadratic_cost, w2

VALIDATION_SLACK = 1e-9
DUAL_WITNESS_TOL = 1e-8
FALSIFY_MARGIN = 1e-12
AUTO = "auto"


class Theorem(str, enum.Enum):
    QUAD_CLOSE = "QuadClose"
    W2_OPENNESS = "W2Openness"
    SWEETIE = "Sweetie"
    SWEETIE_COUPLING = "SweetieCoupling"
    PALEY_WIENER = "PaleyWiener"
    DUAL_STABILITY = "DualStability"
    CANONICAL_DUAL_SIGMA = "CanonicalDualSigma"
    CANONICAL_DUAL_EPS_HAT = "CanonicalDualEpsHat"
    COUPLING_DUAL_EPS = "CouplingDualEps"
    COUPLING_DUAL_CHI = "CouplingDualChi"
    PARSEVAL_TAU = "ParsevalTau"


@dataclass(frozen=True)
class PerturbationCertificate:
    theorem: Theorem
    premise_value: float
    premise_threshold: float
    premise_ok: bool
    guaranteed_lower: float | None
    guaranteed_upper: float | None
    inputs_digest: str
    target_digest: str
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem.value,
            "premise_value": self.premise_value,
            "premise_threshold": self.premise_threshold,
            "premise_ok": self.premise_ok,
            "guaranteed_lower": self.guaranteed_lower,
            "guaranteed_upper": self.guaranteed_upper,
            "inputs_digest": self.inputs_digest,
            "target_digest": self.target_digest,
            "extras": dict(self.extras),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbationCertificate":
        return cls(
            Theorem(data["theorem"]),
            float(data["premise_value"]),
            float(data["premise_threshold"]),
            bool(data["premise_ok"]),
            None if data["guaranteed_lower"] is None else float(data["guaranteed_lower"]),
            None if data["guaranteed_upper"] is None else float(data["guaranteed_upper"]),
            data["inputs_digest"],
            data["target_digest"],
            dict(data.get("extras", {})),
        )


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, DiscreteMeasure):
            h.update(part.digest().encode())
        elif isinstance(part, Coupling):
            h.update(part.mu.digest().encode())
            h.update(part.nu.digest().encode())
            h.update(np.ascontiguousarray(part.i, dtype="<i8").tobytes())
            h.update(np.ascontiguousarray(part.j, dtype="<i8").tobytes())
            h.update(np.ascontiguousarray(part.mass, dtype="<f8").tobytes())
        else:
            h.update(repr(part).encode())
        h.update(b"|")
    return h.hexdigest()


def _make(theorem, value, threshold, lower, upper, inputs, target, **extras) -> PerturbationCertificate:
    """Assemble a certificate; ``lower``/``upper`` are callables evaluated only
    when the strict premise holds."""
    ok = bool(value < threshold)
    return PerturbationCertificate(
        theorem,
        float(value),
        float(threshold),
        ok,
        float(lower()) if ok else None,
        float(upper()) if ok else None,
        _digest(*inputs),
        target.digest(),
        extras,
    )


def _norms(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", a, a))


# -- closeness in quadratic cost and in W2 ------------------------------------


def _shrunk(A: float, r: float) -> float:
    """``(sqrt(A) - r)^2``, returning ``A`` itself when ``r`` is zero so an
    unperturbed measure gets its own bound back bit for bit."""
    return A if r == 0.0 else (math.sqrt(A) - r) ** 2


def certify_quadclose(mu: DiscreteMeasure, nu: DiscreteMeasure, gamma: Coupling,
                      coupling_source: str = "user") -> PerturbationCertificate:
    """Premise ``lambda = int |x - y|^2 dgamma < A``; bounds ``((sqrt A - sqrt lambda)^2, M2(nu))``."""
    A = require_frame(mu).lower
    check_marginals(gamma, mu, nu)
    lam = quadratic_cost(gamma)
    return _make(
        Theorem.QUAD_CLOSE, lam, A,
        lambda: _shrunk(A, math.sqrt(lam)),
        lambda: second_moment(nu),
        (mu, nu, gamma), nu,
        coupling_source=coupling_source,
    )


def certify_w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> PerturbationCertificate:
    """Premise ``W2(mu, nu) < sqrt(A)``; bounds ``((sqrt A - W2)^2, M2(nu))``."""
    A = require_frame(mu).lower
    dist, _ = w2(mu, nu)
    return _make(
        Theorem.W2_OPENNESS, dist, math.sqrt(A),
        lambda: _shrunk(A, dist),
        lambda: second_moment(nu),
        (mu, nu), nu,
        coupling_source="w2-optimal",
    )


# -- frame-operator closeness --------------------------------------------------


def _sweetie(theorem, cert: FrameCertificate, R_opt: float, R, inputs, nu, **extras):
    if R is None:
        R = R_opt
    elif R < R_opt:
        raise HypothesisViolated(f"supplied R = {R!r} is below the optimal constant {R_opt!r}")
    A, B = cert.lower, cert.upper
    return _make(theorem, R, A, lambda: A - R, lambda: B + R, inputs, nu, R_optimal=R_opt, **extras)


def certify_sweetie(mu: DiscreteMeasure, nu: DiscreteMeasure, R: float | None = None) -> PerturbationCertificate:
    """Premise ``R = ||S_mu - S_nu||_2 < A``; bounds ``(A - R, B + R)``.

    A user ``R`` is accepted if it is at least the optimal constant.
    """
    cert = require_frame(mu)
    R_opt = linalg.spectral_norm(cert.frame_operator - frame_operator(nu))
    return _sweetie(Theorem.SWEETIE, cert, R_opt, R, (mu, nu), nu)


def certify_sweetie_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure, gamma: Coupling,
                             R: float | None = None, coupling_source: str = "user") -> PerturbationCertificate:
    """Sweetie premise with the quadratic-form gap integrated against ``gamma``.

    ``R = || sum gamma (x x^T - y y^T) ||_2``; the marginals fix both terms,
    so the value agrees with :func:`certify_sweetie` up to rounding.
    """
    cert = require_frame(mu)
    check_marginals(gamma, mu, nu)
    xs, ys, m = gamma.xs, gamma.ys, gamma.mass
    gap = (xs * m[:, None]).T @ xs - (ys * m[:, None]).T @ ys
    R_opt = linalg.spectral_norm(linalg.symmetrize(gap))
    return _sweetie(Theorem.SWEETIE_COUPLING, cert, R_opt, R, (mu, nu, gamma), nu,
                    coupling_source=coupling_source)


# -- synthesis-operator closeness on paired atoms -----------------------------


def certify_paley(p: PairedMeasure, lambda1: float = 0.0, lambda2: float = 0.0, delta=AUTO) -> PerturbationCertificate:
    """Premise ``kappa = max(lambda1 + delta / sqrt(A), lambda2) < 1``.

    With ``delta=AUTO`` (only for ``lambda1 = lambda2 = 0``) ``delta`` is the
    exact operator norm of ``U - T`` and the hypothesis is certified;
    otherwise it is recorded as assumed. The lower bound is the smaller of
    ``A^2 (1 - kappa)^2 / ((1 + lambda2)^2 M2(nu))`` and
    ``A (1 - kappa)^2 / (1 + lambda2)^2``; the second is what the paired
    coefficient space supports on its own (see ``lower_paired``).
    """
    lambda1, lambda2 = float(lambda1), float(lambda2)
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("lambda1 and lambda2 must be nonnegative")
    mu, nu = p.mu, p.nu
    A = require_frame(mu).lower
    if isinstance(delta, str):
        if delta != AUTO:
            raise ValueError(f"delta must be a number or {AUTO!r}")
        if lambda1 != 0.0 or lambda2 != 0.0:
            raise AutoRequiresZeroLambdas("automatic delta needs lambda1 = lambda2 = 0")
        delta = pw_delta_exact(p)
        regime = "exact"
    else:
        delta = float(delta)
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        regime = "assumed"
    kappa = max(lambda1 + delta / math.sqrt(A), lambda2)
    m2 = second_moment(nu)

    extras = {"hypothesis": regime, "lambda1": lambda1, "lambda2": lambda2, "delta": delta}
    if kappa < 1:
        paired = A * (1 - kappa) ** 2 / (1 + lambda2) ** 2
        # None when nu sits at the origin, where the M2-normalized form is undefined
        extras["lower_m2"] = paired * A / m2 if m2 > 0 else None
        extras["lower_paired"] = paired
    return _make(
        Theorem.PALEY_WIENER, kappa, 1.0,
        lambda: min(v for v in (extras["lower_m2"], extras["lower_paired"]) if v is not None),
        lambda: m2,
        (mu, nu, "paley", lambda1, lambda2, delta), nu, **extras,
    )


def falsify_paley(p: PairedMeasure, lambda1: float, lambda2: float, delta: float,
                  trials: int = 100, seed: int = 0):
    """Search for ``w`` with ``|Uw - Tw| > lambda1 |Uw| + lambda2 |Tw| + delta |w|``.

    The top right singular vector of the displacement operator is tried
    first, then ``trials`` Gaussian vectors (standard in the mass-weighted
    metric). Returns the first violating coefficient vector, or ``None``.
    ``None`` only means nothing was found; it proves nothing.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sqrt_m = np.sqrt(p.masses)
    X, Y, m = p.x, p.y, p.masses

    def violates(w):
        Uw, Tw = (w * m) @ X, (w * m) @ Y
        lhs = np.linalg.norm(Uw - Tw)
        rhs = lambda1 * np.linalg.norm(Uw) + lambda2 * np.linalg.norm(Tw) + delta * p.l2_norm(w)
        return lhs - rhs > FALSIFY_MARGIN

    _, w = pw_extremal_coefficients(p)
    if violates(w):
        return w
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        g = rng.standard_normal(p.size)
        w = g / np.linalg.norm(g) / sqrt_m
        if violates(w):
            return w
    return None


# -- dual-frame perturbations -------------------------------------------------


def certify_dual_stability(mu: DiscreteMeasure, nu: DiscreteMeasure, gamma12: Coupling,
                           eta: DiscreteMeasure, gamma23: Coupling,
                           coupling_source: str = "user") -> PerturbationCertificate:
    """``nu`` is a transport dual of ``mu`` witnessed by ``gamma12``; ``eta`` is
    coupled to ``nu`` by ``gamma23``. Premise ``sigma = int |x - z| |y| dpi < 1``
    over the glued plan.

    Two lower bounds: ``(1 - sigma)^2 / D`` with ``D = lambda_max(S_nu)`` (the
    guaranteed one) and the weaker ``(1 - sigma)^2 / M2(nu)``.
    """
    require_frame(mu)
    check_marginals(gamma12, mu, nu)
    check_marginals(gamma23, nu, eta)
    residual = moment_residual(gamma12)
    if residual > DUAL_WITNESS_TOL:
        raise NotADualWitness(f"first coupling has moment residual {residual:.3e} from the identity")
    plan = glue(gamma12, gamma23)
    x = mu.points[plan.i]
    y = nu.points[plan.j]
    z = eta.points[plan.k]
    sigma = float(plan.mass @ (_norms(x - z) * _norms(y)))
    D = frame_bounds(nu).upper
    m2_nu = second_moment(nu)
    extras = {"coupling_source": coupling_source, "dual_witness_residual": residual, "D": D}
    if sigma < 1:
        extras["lower_D"] = (1 - sigma) ** 2 / D
        extras["lower_M2"] = (1 - sigma) ** 2 / m2_nu
    return _make(
        Theorem.DUAL_STABILITY, sigma, 1.0,
        lambda: (1 - sigma) ** 2 / D,
        lambda: second_moment(eta),
        (mu, nu, gamma12, eta, gamma23), eta, **extras,
    )


def certify_canonical_dual(mu: DiscreteMeasure, eta: DiscreteMeasure) -> list[PerturbationCertificate]:
    """Canonical-dual perturbation over the product ``mu x eta``.

    Returns two certificates: premise ``sigma_hat < 1`` and premise
    ``eps_hat < A``, both with lower bound ``A (1 - sigma_hat)^2`` and upper
    bound ``M2(eta)``.
    """
    cert = require_frame(mu)
    A = cert.lower
    S_inv, _ = frame_inverses(mu)
    X, Z = mu.points, eta.points
    dist = np.sqrt(np.maximum(
        np.einsum("ij,ij->i", X, X)[:, None] + np.einsum("ij,ij->i", Z, Z)[None, :] - 2 * X @ Z.T, 0.0))
    # mean |x - z| under eta for each atom of mu
    spread = dist @ eta.masses
    sigma_hat = float(mu.masses @ (_norms(X @ S_inv) * spread))
    eps_hat = float(mu.masses @ (_norms(X) * spread))
    m2 = second_moment(eta)
    lower = lambda: A * (1 - sigma_hat) ** 2
    inputs = (mu, eta, "canonical-dual")
    common = {"coupling_source": "product", "sigma_hat": sigma_hat, "eps_hat": eps_hat}
    return [
        _make(Theorem.CANONICAL_DUAL_SIGMA, sigma_hat, 1.0, lower, lambda: m2, inputs, eta, **common),
        _make(Theorem.CANONICAL_DUAL_EPS_HAT, eps_hat, A, lower, lambda: m2, inputs, eta, **common),
    ]


def certify_coupling_dual(mu: DiscreteMeasure, eta: DiscreteMeasure, gamma: Coupling,
                          coupling_source: str = "user") -> list[PerturbationCertificate]:
    """Two certificates over a coupling ``gamma`` of ``mu`` and ``eta``.

    ``eps = int |x| |x - z| dgamma < A`` gives ``(A - eps)^2 / B``;
    ``chi = int |S^{-1} x| |x - z| dgamma < 1`` gives ``A^2 (1 - chi)^2 / B``.
    Both have upper bound ``M2(eta)``; see :func:`combined_lower`.
    """
    cert = require_frame(mu)
    check_marginals(gamma, mu, eta)
    A, B = cert.lower, cert.upper
    S_inv, _ = frame_inverses(mu)
    xs, zs, m = gamma.xs, gamma.ys, gamma.mass
    gap = _norms(xs - zs)
    eps = float(m @ (_norms(xs) * gap))
    chi = float(m @ (_norms(xs @ S_inv) * gap))
    m2 = second_moment(eta)
    inputs = (mu, eta, gamma, "coupling-dual")
    common = {"coupling_source": coupling_source, "eps": eps, "chi": chi}
    return [
        _make(Theorem.COUPLING_DUAL_EPS, eps, A, lambda: (A - eps) ** 2 / B, lambda: m2, inputs, eta, **common),
        _make(Theorem.COUPLING_DUAL_CHI, chi, 1.0, lambda: A**2 * (1 - chi) ** 2 / B, lambda: m2, inputs, eta,
              **common),
    ]


def combined_lower(certs) -> float | None:
    """Best lower bound among certificates whose premise holds."""
    lowers = [c.guaranteed_lower for c in certs if c.premise_ok]
    return max(lowers) if lowers else None


def certify_parseval_tau(mu: DiscreteMeasure, eta: DiscreteMeasure, gamma: Coupling,
                         coupling_source: str = "user") -> PerturbationCertificate:
    """Premise ``tau = int |x| |S^{-1/2} x - z| dgamma < sqrt(A)``; bounds
    ``((sqrt A - tau)^2 / B, M2(eta))``."""
    cert = require_frame(mu)
    check_marginals(gamma, mu, eta)
    A, B = cert.lower, cert.upper
    _, S_inv_half = frame_inverses(mu)
    xs, zs, m = gamma.xs, gamma.ys, gamma.mass
    tau = float(m @ (_norms(xs) * _norms(xs @ S_inv_half - zs)))
    return _make(
        Theorem.PARSEVAL_TAU, tau, math.sqrt(A),
        lambda: (math.sqrt(A) - tau) ** 2 / B,
        lambda: second_moment(eta),
        (mu, eta, gamma), eta,
        coupling_source=coupling_source,
    )


# -- empirical validation -----------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    certificate: PerturbationCertificate
    actual_lower: float
    actual_upper: float
    lower_slack: float
    upper_slack: float
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "certificate": self.certificate.to_dict(),
            "actual_lower": self.actual_lower,
            "actual_upper": self.actual_upper,
            "lower_slack": self.lower_slack,
            "upper_slack": self.upper_slack,
            "verdict": self.verdict,
        }


def validate(cert: PerturbationCertificate, perturbed: DiscreteMeasure) -> ValidationReport:
    """Compare the guaranteed bounds with the true extreme eigenvalues of
    ``S`` of the perturbed measure."""
    if perturbed.digest() != cert.target_digest:
        raise DigestMismatch("measure does not match the one the certificate was issued for")
    if not cert.premise_ok:
        raise PremiseNotSatisfied(f"{cert.theorem.value} premise failed; nothing to validate")
    actual = frame_bounds(perturbed)
    lower_slack = actual.lower - cert.guaranteed_lower
    upper_slack = cert.guaranteed_upper - actual.upper
    verdict = lower_slack >= -VALIDATION_SLACK and upper_slack >= -VALIDATION_SLACK
    return ValidationReport(cert, actual.lower, actual.upper, lower_slack, upper_slack, bool(verdict))
