"""``edr-lab`` command line.

Exit codes: 0 success, 1 configuration/input error, 2 numerical invariant
failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from edrlab import bounds, estimators, fock, instruments
from edrlab.errors import ConfigError, InputError, NumericalInvariantError, OutputError
from edrlab.states import PAULI, pauli_observable, parse_state, random_pure_qubit
from edrlab.sweep import SweepConfig, apply_overrides, emit_table, load_config, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


def _vector(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return parts


def cmd_sweep(args) -> int:
    data = load_config(args.config) if args.config else {}
    data = apply_overrides(data, args.set)
    cfg = SweepConfig.from_mapping(data)
    rows = run_sweep(cfg)
    emit_table(rows, args.format, args.output)
    return EXIT_OK


def cmd_bounds(args) -> int:
    inputs = bounds.RelationInputs(
        eps=args.eps,
        eta=args.eta,
        sigma_a=args.sigma_a,
        sigma_b=args.sigma_b,
        c=args.C,
        bloch_a=args.bloch_a,
        bloch_b=args.bloch_b,
        ozawa0_term=args.ozawa0_term,
    )
    reports = bounds.evaluate_all(inputs)
    if args.format == "json":
        out = [
            {
                "relation": r.relation.value,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "slack": r.slack,
                "satisfied": r.satisfied,
                "out_of_model": r.out_of_model,
            }
            for r in reports
        ]
        print(json.dumps(out, indent=2))
    else:
        print(f"{'relation':<18} {'lhs':>14} {'rhs':>14} {'slack':>14}  status")
        for r in reports:
            status = "satisfied" if r.satisfied else "VIOLATED"
            if r.out_of_model:
                status += " (out-of-model)"
            print(f"{r.relation.value:<18} {r.lhs:>14.10g} {r.rhs:>14.10g} {r.slack:>14.6g}  {status}")
    return EXIT_OK


def cmd_shots(args) -> int:
    A, B = pauli_observable(args.A), pauli_observable(args.B)
    psi = parse_state(args.state).density()
    if args.extinction > 0:
        main = instruments.imperfect_pbs_instrument(args.theta, args.extinction)
    else:
        main = instruments.vpbs_instrument(args.theta)
    results = {"theta": args.theta, "shots": args.shots, "seed": args.seed, "strength": args.strength}
    for mode, target, stage in (("error", A, 0), ("disturbance", B, 1)):
        probe = estimators.WeakProbe.from_strength(target, args.strength)
        dist = estimators.cascade_distribution(probe, main, B, psi)
        rec = estimators.sample_shots(dist, args.shots, args.seed, (0, stage))
        est, se = estimators.estimate_from_counts(rec, probe.strength, mode)
        if mode == "error":
            exact = instruments.error_direct(main, A, psi)
        else:
            exact = instruments.disturbance_direct(main, B, psi)
        results[mode] = {
            "estimate": est,
            "stderr": se,
            "exact": exact,
            "counts": rec.counts.ravel().tolist(),
        }
    if args.format == "json":
        print(json.dumps(results, indent=2))
    else:
        print(f"theta={args.theta:.12g} shots={args.shots} seed={args.seed} strength={args.strength:g}")
        for mode in ("error", "disturbance"):
            r = results[mode]
            print(f"{mode:<12} estimate={r['estimate']:.12g} stderr={r['stderr']:.6g} exact={r['exact']:.12g}")
    return EXIT_OK


def fock_check(cutoff: int = fock.DEFAULT_CUTOFF, samples: int = 100, seed: int = 0) -> list[tuple[str, bool, str]]:
    """Stokes -> Pauli checks as ``(name, passed, detail)`` triples."""
    space = fock.FockSpace(cutoff)
    checks = []
    for idx, key in ((0, "I"), (1, "z"), (2, "x"), (3, "y")):
        block = fock.restrict_to_single_photon(fock.stokes_operator(idx, space), space)
        ok = bool(np.array_equal(block, PAULI[key]))
        checks.append((f"s{idx} -> sigma_{key}", ok, "exact" if ok else f"block={block.tolist()}"))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        q = random_pure_qubit(rng)
        s0, s1, s2, s3 = fock.stokes_means(space.single_photon_state(q.alpha, q.beta), space)
        worst = max(worst, abs(s1**2 + s2**2 + s3**2 - s0**2))
    checks.append(("Poincare sphere", worst <= 1e-12, f"max residual {worst:.3e} over {samples} states"))
    return checks


def cmd_fock_check(args) -> int:
    checks = fock_check(args.cutoff, args.samples, args.seed)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<18} {detail}")
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edr-lab",
        description="Generalized qubit measurement and error-disturbance relations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="sweep the measurement strength and emit a table")
    p.add_argument("--config", help="YAML/JSON file with SweepConfig fields")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field after loading (repeatable)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bounds", help="evaluate every relation for one (eps, eta, C) point")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--C", type=float, required=True, help="C, or D for mixed states")
    p.add_argument("--sigma-a", type=float, default=1.0)
    p.add_argument("--sigma-b", type=float, default=1.0)
    p.add_argument("--bloch-a", type=_vector, default=(0.0, 0.0, 1.0))
    p.add_argument("--bloch-b", type=_vector, default=(1.0, 0.0, 0.0))
    p.add_argument("--ozawa0-term", type=float, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("shots", help="simulate one photon-counting cascade")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--shots", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strength", type=float, default=estimators.DEFAULT_PROBE_STRENGTH)
    p.add_argument("--state", default="L")
    p.add_argument("--A", default="sigma_z")
    p.add_argument("--B", default="sigma_x")
    p.add_argument("--extinction", type=float, default=0.0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_shots)

    p = sub.add_parser("fock-check", help="verify the Stokes -> Pauli reduction")
    p.add_argument("--cutoff", type=int, default=fock.DEFAULT_CUTOFF)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fock_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"edr-lab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInvariantError as exc:
        print(f"edr-lab: numerical invariant failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OutputError, OSError) as exc:
        print(f"edr-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
