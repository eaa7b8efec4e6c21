"""Command-line entry point.

Exit codes: 0 success, 2 input/parse error, 3 not a frame, 4 premise failed
(or not a transport dual), 5 validation violations.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import battery, jsonio
from .errors import NotAFrame, PFrameError, UnknownTheorem
from .frame import canonical_dual, canonical_parseval, frame_bounds
from .perturb import (
    AUTO,
    certify_canonical_dual,
    certify_coupling_dual,
    certify_dual_stability,
    certify_paley,
    certify_parseval_tau,
    certify_quadclose,
    certify_sweetie,
    certify_sweetie_coupling,
    certify_w2,
    combined_lower,
)
from .transport import diagonal_coupling, dual_membership, product_coupling, w2

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_FRAME = 3
EXIT_PREMISE = 4
EXIT_VIOLATION = 5

THEOREMS = {
    "quadclose": 2,
    "w2": 2,
    "sweetie": 2,
    "sweetie-coupling": 2,
    "paley": 1,
    "dual-stability": 3,
    "canonical-dual": 2,
    "coupling-dual": 2,
    "parseval": 2,
}


def _emit(obj, out=None) -> None:
    text = jsonio.dumps(obj)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _default_coupling(mu, nu):
    """Diagonal plan when atom counts and masses agree, else the product plan."""
    try:
        return diagonal_coupling(mu, nu), "diagonal"
    except PFrameError:
        return product_coupling(mu, nu), "product"


def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    mu = battery.random_frame(rng, args.dim, args.atoms)
    cert = frame_bounds(mu).to_dict()
    if args.out:
        jsonio.write_json(args.out, mu.to_dict())
        _emit(cert)
    else:
        _emit(mu.to_dict())
        sys.stderr.write(jsonio.dumps(cert))
    return EXIT_OK


def cmd_analyze(args) -> int:
    mu = jsonio.read_measure(args.measure, args.force_normalize)
    cert = frame_bounds(mu)
    _emit(cert.to_dict(), args.out)
    return EXIT_OK if cert.is_frame else EXIT_NOT_FRAME


def cmd_dual(args) -> int:
    mu = jsonio.read_measure(args.measure, args.force_normalize)
    dual, coupling = canonical_dual(mu)
    _emit(dual.to_dict(), args.out)
    if args.coupling:
        jsonio.write_json(args.coupling, coupling.to_dict())
    return EXIT_OK


def cmd_parseval(args) -> int:
    mu = jsonio.read_measure(args.measure, args.force_normalize)
    _emit(canonical_parseval(mu).to_dict(), args.out)
    return EXIT_OK


def cmd_w2(args) -> int:
    mu = jsonio.read_measure(args.mu, args.force_normalize)
    nu = jsonio.read_measure(args.nu, args.force_normalize)
    dist, plan = w2(mu, nu)
    print(f"{dist:.12g}")
    if args.plan:
        jsonio.write_json(args.plan, plan.to_dict())
    return EXIT_OK


def cmd_ismember(args) -> int:
    mu = jsonio.read_measure(args.mu, args.force_normalize)
    nu = jsonio.read_measure(args.nu, args.force_normalize)
    result = dual_membership(mu, nu)
    _emit(result.to_dict(), args.out)
    return EXIT_OK if result.is_member else EXIT_PREMISE


def _coupling_arg(path, mu, nu, args):
    if path:
        return jsonio.read_coupling(path, mu, nu, args.force_normalize), f"file:{path}"
    return _default_coupling(mu, nu)


def cmd_certify(args) -> int:
    name = args.theorem
    if name not in THEOREMS:
        raise UnknownTheorem(f"unknown theorem {name!r}; choose from {', '.join(THEOREMS)}")
    if len(args.inputs) != THEOREMS[name]:
        raise ValueError(f"theorem {name} takes {THEOREMS[name]} input file(s), got {len(args.inputs)}")

    if name == "paley":
        p = jsonio.read_paired(args.inputs[0])
        if args.auto_delta:
            cert = certify_paley(p, args.lambda1 or 0.0, args.lambda2 or 0.0, AUTO)
        else:
            if args.delta is None:
                raise ValueError("paley needs --auto-delta or an explicit --delta")
            cert = certify_paley(p, args.lambda1 or 0.0, args.lambda2 or 0.0, args.delta)
        certs = [cert]
    else:
        measures = [jsonio.read_measure(path, args.force_normalize) for path in args.inputs]
        mu = measures[0]
        if name == "quadclose":
            nu = measures[1]
            if args.coupling:
                gamma, source = _coupling_arg(args.coupling, mu, nu, args)
            else:
                _, gamma = w2(mu, nu)
                source = "w2-optimal"
            certs = [certify_quadclose(mu, nu, gamma, source)]
        elif name == "w2":
            certs = [certify_w2(mu, measures[1])]
        elif name == "sweetie":
            certs = [certify_sweetie(mu, measures[1], args.R)]
        elif name == "sweetie-coupling":
            nu = measures[1]
            gamma, source = _coupling_arg(args.coupling, mu, nu, args)
            certs = [certify_sweetie_coupling(mu, nu, gamma, args.R, source)]
        elif name == "dual-stability":
            nu, eta = measures[1], measures[2]
            if args.coupling12:
                gamma12 = jsonio.read_coupling(args.coupling12, mu, nu, args.force_normalize)
                source12 = f"file:{args.coupling12}"
            else:
                membership = dual_membership(mu, nu)
                if not membership.is_member:
                    sys.stderr.write("second measure is not a transport dual of the first\n")
                    _emit(membership.to_dict(), args.out)
                    return EXIT_PREMISE
                gamma12, source12 = membership.witness, "lp-witness"
            gamma23, source23 = _coupling_arg(args.coupling23, nu, eta, args)
            certs = [certify_dual_stability(mu, nu, gamma12, eta, gamma23, f"{source12}/{source23}")]
        elif name == "canonical-dual":
            certs = certify_canonical_dual(mu, measures[1])
        elif name == "coupling-dual":
            eta = measures[1]
            gamma, source = _coupling_arg(args.coupling, mu, eta, args)
            certs = certify_coupling_dual(mu, eta, gamma, source)
        else:  # parseval
            eta = measures[1]
            gamma, source = _coupling_arg(args.coupling, mu, eta, args)
            certs = [certify_parseval_tau(mu, eta, gamma, source)]

    if len(certs) == 1:
        _emit(certs[0].to_dict(), args.out)
    else:
        _emit({"certificates": [c.to_dict() for c in certs], "combined_lower": combined_lower(certs)}, args.out)
    return EXIT_OK if any(c.premise_ok for c in certs) else EXIT_PREMISE


def cmd_validate(args) -> int:
    config = battery.RunConfig(
        seed=args.seed,
        trials=args.trials,
        dims=tuple(args.dims),
        atoms=tuple(args.atoms),
        workers=args.workers,
        corrupt=args.self_test_corrupt,
    )
    rows = battery.run_battery(config)
    text = battery.rows_to_csv(rows)
    summary = battery.summarize(rows)
    log = sys.stdout
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        log = sys.stderr
    violations = 0
    for theorem, s in summary.items():
        log.write(f"{theorem}: {s['passed']}/{s['premise_ok']} passed ({s['trials']} trials)\n")
        violations += s["violations"]
    if violations:
        log.write(f"{violations} violation(s)\n")
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pframe", description="Probabilistic frame toolkit.")
    parser.add_argument("--force-normalize", action="store_true",
                        help="rescale masses that do not sum to 1 instead of rejecting the file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random frame")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--atoms", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="frame operator, bounds and classification")
    p.add_argument("measure")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("dual", help="canonical dual frame")
    p.add_argument("measure")
    p.add_argument("--out", "-o")
    p.add_argument("--coupling", help="also write the pairing coupling here")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("parseval", help="canonical Parseval frame")
    p.add_argument("measure")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_parseval)

    p = sub.add_parser("w2", help="exact 2-Wasserstein distance")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--plan", help="write the optimal plan here")
    p.set_defaults(func=cmd_w2)

    p = sub.add_parser("ismember-dual", help="is nu a transport dual of mu")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_ismember)

    p = sub.add_parser("certify", help="perturbation certificate for one theorem")
    p.add_argument("--theorem", required=True, help=", ".join(THEOREMS))
    p.add_argument("inputs", nargs="+")
    p.add_argument("--coupling", help="coupling file (quadclose, sweetie-coupling, coupling-dual, parseval)")
    p.add_argument("--coupling12", help="dual witness coupling for dual-stability")
    p.add_argument("--coupling23", help="second coupling for dual-stability")
    p.add_argument("--R", type=float, help="sweetie constant override (must be >= the optimal one)")
    p.add_argument("--auto-delta", action="store_true")
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("validate", help="randomized soundness battery")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--dims", type=int, nargs=2, default=[2, 6], metavar=("LO", "HI"))
    p.add_argument("--atoms", type=int, nargs=2, default=[3, 32], metavar=("LO", "HI"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", "-o")
    p.add_argument("--self-test-corrupt", action="store_true",
                   help="shrink every guaranteed upper bound to 90%% of the true one")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotAFrame as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_FRAME
    except (PFrameError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
