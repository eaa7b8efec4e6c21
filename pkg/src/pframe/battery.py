"""Randomized soundness battery: build perturbation instances for every
certificate variant, certify, and check the guarantees against the true
frame bounds of the perturbed measure."""

from __future__ import annotations

import csv
import dataclasses
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NotAFrame
from .frame import PairedMeasure, canonical_dual, canonical_parseval, frame_bounds
from .measure import DiscreteMeasure
from .perturb import (
    Theorem,
    certify_canonical_dual,
    certify_coupling_dual,
    certify_dual_stability,
    certify_paley,
    certify_parseval_tau,
    certify_quadclose,
    certify_sweetie,
    certify_sweetie_coupling,
    certify_w2,
    validate,
)
from .transport import Coupling, diagonal_coupling

# a frame must clear this lower bound to be accepted by the generator
MIN_LOWER = 1e-8
MAX_RETRIES = 100
SCALES = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0)
CORRUPT_FACTOR = 0.9
CSV_FIELDS = (
    "theorem", "seed", "premise_value", "threshold", "premise_ok",
    "guaranteed_lower", "actual_lower", "lower_slack", "verdict",
)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    trials: int = 200
    dims: tuple[int, int] = (2, 6)
    atoms: tuple[int, int] = (3, 32)
    scales: tuple[float, ...] = SCALES
    workers: int = 1
    corrupt: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for name in ("dims", "atoms"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} range {lo}..{hi} is empty or non-positive")
        if not self.scales or any(not s > 0 for s in self.scales):
            raise ValueError("scales must be a non-empty list of positive numbers")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


def random_frame(rng: np.random.Generator, dim: int, atoms: int) -> DiscreteMeasure:
    """Gaussian atoms with Dirichlet(1) masses, redrawn until ``lambda_min > 1e-8``."""
    for _ in range(MAX_RETRIES):
        points = rng.standard_normal((atoms, dim))
        masses = rng.dirichlet(np.ones(atoms))
        # Dirichlet draws can underflow to exactly zero for tiny concentrations
        if np.any(masses <= 0):
            continue
        mu = DiscreteMeasure(points, masses / masses.sum())
        if frame_bounds(mu).lower > MIN_LOWER:
            return mu
    raise NotAFrame(f"no frame with {atoms} atoms in dimension {dim} after {MAX_RETRIES} draws")


def jitter(rng: np.random.Generator, mu: DiscreteMeasure, scale: float) -> DiscreteMeasure:
    return DiscreteMeasure(mu.points + scale * rng.standard_normal(mu.points.shape), mu.masses)


def random_coupling(rng: np.random.Generator, mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """Convex mix of the product plan and a northwest-corner plan on shuffled atoms."""
    pi, pj = rng.permutation(mu.size), rng.permutation(nu.size)
    a, b = mu.masses[pi].copy(), nu.masses[pj].copy()
    P = np.zeros((mu.size, nu.size))
    i = j = 0
    while i < mu.size and j < nu.size:
        q = min(a[i], b[j])
        P[pi[i], pj[j]] += q
        a[i] -= q
        b[j] -= q
        if a[i] <= b[j]:
            i += 1
        else:
            j += 1
    t = rng.uniform()
    P = t * np.outer(mu.masses, nu.masses) + (1 - t) * P
    P /= P.sum()
    return Coupling.from_dense(mu, nu, P)


def _base(rng, config: RunConfig):
    dim = int(rng.integers(config.dims[0], config.dims[1] + 1))
    atoms = int(rng.integers(max(config.atoms[0], dim), max(config.atoms[1], dim) + 1))
    return random_frame(rng, dim, atoms)


def build_instance(theorem: Theorem, rng: np.random.Generator, scale: float, config: RunConfig):
    """Return ``(certificate, perturbed measure)`` for one randomized trial."""
    if theorem in (Theorem.CANONICAL_DUAL_SIGMA, Theorem.CANONICAL_DUAL_EPS_HAT):
        # product-coupling premises are only satisfiable in one dimension:
        # concentrated atoms near 1 and a jittered copy
        k = int(rng.integers(config.atoms[0], config.atoms[1] + 1))
        mu = DiscreteMeasure(1.0 + 0.1 * rng.standard_normal((k, 1)), rng.dirichlet(np.ones(k)))
        eta = jitter(rng, mu, scale)
        sigma_cert, eps_cert = certify_canonical_dual(mu, eta)
        return (sigma_cert if theorem is Theorem.CANONICAL_DUAL_SIGMA else eps_cert), eta

    mu = _base(rng, config)
    if theorem is Theorem.QUAD_CLOSE:
        nu = jitter(rng, mu, scale)
        return certify_quadclose(mu, nu, diagonal_coupling(mu, nu), "diagonal"), nu
    if theorem is Theorem.W2_OPENNESS:
        nu = jitter(rng, mu, scale)
        return certify_w2(mu, nu), nu
    if theorem is Theorem.SWEETIE:
        nu = jitter(rng, mu, scale)
        return certify_sweetie(mu, nu), nu
    if theorem is Theorem.SWEETIE_COUPLING:
        nu = jitter(rng, mu, scale)
        return certify_sweetie_coupling(mu, nu, random_coupling(rng, mu, nu), coupling_source="random"), nu
    if theorem is Theorem.PALEY_WIENER:
        nu = jitter(rng, mu, scale)
        p = PairedMeasure(mu.points, nu.points, mu.masses)
        return certify_paley(p), nu
    if theorem is Theorem.DUAL_STABILITY:
        nu, gamma12 = canonical_dual(mu)
        eta = jitter(rng, mu, scale)
        gamma23 = Coupling(nu, eta, np.arange(nu.size), np.arange(nu.size), nu.masses)
        return certify_dual_stability(mu, nu, gamma12, eta, gamma23, "canonical-dual/diagonal"), eta
    if theorem in (Theorem.COUPLING_DUAL_EPS, Theorem.COUPLING_DUAL_CHI):
        eta = jitter(rng, mu, scale)
        eps_cert, chi_cert = certify_coupling_dual(mu, eta, diagonal_coupling(mu, eta), "diagonal")
        return (eps_cert if theorem is Theorem.COUPLING_DUAL_EPS else chi_cert), eta
    if theorem is Theorem.PARSEVAL_TAU:
        eta = jitter(rng, canonical_parseval(mu), scale)
        return certify_parseval_tau(mu, eta, diagonal_coupling(mu, eta), "diagonal"), eta
    raise ValueError(f"unsupported theorem {theorem!r}")


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def run_trial(config: RunConfig, trial: int) -> list[dict]:
    tseed = trial_seed(config.seed, trial)
    scale = config.scales[trial % len(config.scales)]
    rows = []
    for idx, theorem in enumerate(Theorem):
        rng = np.random.default_rng([tseed, idx])
        cert, perturbed = build_instance(theorem, rng, scale, config)
        row = {
            "theorem": theorem.value,
            "seed": tseed,
            "premise_value": cert.premise_value,
            "threshold": cert.premise_threshold,
            "premise_ok": cert.premise_ok,
            "guaranteed_lower": cert.guaranteed_lower,
            "actual_lower": None,
            "lower_slack": None,
            "verdict": None,
        }
        if cert.premise_ok:
            if config.corrupt:
                actual_upper = frame_bounds(perturbed).upper
                cert = dataclasses.replace(cert, guaranteed_upper=CORRUPT_FACTOR * actual_upper)
            report = validate(cert, perturbed)
            row.update(actual_lower=report.actual_lower, lower_slack=report.lower_slack, verdict=report.verdict)
        else:
            row["actual_lower"] = frame_bounds(perturbed).lower
        rows.append(row)
    return rows


def _run_chunk(args):
    config, trials = args
    out = []
    for t in trials:
        out.extend(run_trial(config, t))
    return out


def run_battery(config: RunConfig) -> list[dict]:
    """All rows, sorted by (theorem order, seed) regardless of execution order."""
    trials = list(range(config.trials))
    if config.workers > 1:
        chunks = [trials[w :: config.workers] for w in range(config.workers)]
        with ProcessPoolExecutor(config.workers) as pool:
            rows = [r for part in pool.map(_run_chunk, [(config, c) for c in chunks]) for r in part]
    else:
        rows = _run_chunk((config, trials))
    order = {t.value: k for k, t in enumerate(Theorem)}
    rows.sort(key=lambda r: (order[r["theorem"]], r["seed"]))
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_cell(row[f]) for f in CSV_FIELDS])
    return buf.getvalue()


def summarize(rows) -> dict[str, dict[str, int]]:
    """Per-theorem counts of trials, premise-satisfying trials and violations."""
    out: dict[str, dict[str, int]] = {}
    for row in rows:
        s = out.setdefault(row["theorem"], {"trials": 0, "premise_ok": 0, "passed": 0, "violations": 0})
        s["trials"] += 1
        if row["premise_ok"]:
            s["premise_ok"] += 1
            if row["verdict"]:
                s["passed"] += 1
            else:
                s["violations"] += 1
    return out
