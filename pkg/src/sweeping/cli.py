"""Command-line interface.

Exit codes: 0 success, 1 audit found violations, 2 solver error,
3 scenario validation error.  ``SWEEP_SEED`` overrides every RNG seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import convergence_study, residual_normal_cone
from .dynamics import LiftedPerturbation, audit_growth, audit_lipschitz
from .errors import NonUniqueProjection, ScenarioError
from .geometry import prox_inequality_audit, variation_audit
from .scenario_io import parse_scenario, write_scenario, write_table, write_trajectory
from .solver import QUADRATURES, SecondOrderScenario, TimeGrid, reduce_second_to_first, solve

EXIT_OK, EXIT_VIOLATIONS, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3
VARIATION_TOL = 1e-9


def _seed() -> int:
    raw = os.environ.get("SWEEP_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError("SWEEP_SEED", f"must be an integer, got {raw!r}") from None


def _load(args):
    sc = parse_scenario(args.scenario)
    if getattr(args, "steps", None) is not None:
        if args.steps < 1:
            raise ScenarioError("--steps", "must be a positive integer")
        sc = sc.with_steps(args.steps)
    if getattr(args, "quadrature", None) is not None:
        sc = sc.with_quadrature(args.quadrature)
    return sc


def cmd_run(args) -> int:
    sc = _load(args)
    traj = solve(sc)
    write_trajectory(traj, args.output)
    report = residual_normal_cone(traj, sc, rng_seed=_seed())
    report_path = Path(args.report) if args.report else Path(args.output).with_suffix(".residual.json")
    report_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {traj.grid.n + 1} nodes to {args.output}; "
          f"max normal-cone violation {report.max_violation:.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_study(args) -> int:
    sc = _load(args)
    table = convergence_study(sc, args.levels, args.refine)
    write_table(["n", "h", "error", "ratio", "order"], table.to_rows(), args.output)
    print(f"reference solve with {table.reference_n} steps; orders {table.orders}", file=sys.stderr)
    return EXIT_OK


def _probe_points(set_, n, rng):
    center, scale = set_.sampling_region(0.0)
    return [center + 3.0 * scale * rng.uniform(-1.0, 1.0, set_.dim) for _ in range(n)]


def run_audits(sc, seed: int, n_samples: int = 2000, radius: float = 10.0, eta: float = 1.0) -> dict:
    """Variation, prox, growth and Lipschitz audits of a scenario's data."""
    if isinstance(sc, SecondOrderScenario):
        set_, f, state_form = sc.K, sc.f, False
    else:
        set_, f = sc.set, sc.g
        state_form = not isinstance(f, LiftedPerturbation)
    T = sc.grid.T
    grid = TimeGrid(T, min(sc.grid.n, 100))
    rng = np.random.default_rng(seed)

    ratio = variation_audit(set_, grid, _probe_points(set_, 50, rng))
    variation = {"worst_ratio": ratio, "passed": ratio <= 1.0 + VARIATION_TOL}

    prox = []
    for k, t in enumerate((0.0, 0.5 * T, T)):
        rep = prox_inequality_audit(set_, t, n_samples, seed + 1 + k)
        prox.append({"t": t, "declared_radius": set_.prox_radius, **rep.to_dict()})

    growth = audit_growth(f, grid, n_samples, radius, seed + 11, state_form=state_form)
    k_emp = audit_lipschitz(f, grid, eta, n_samples, seed + 12, state_form=state_form)
    declared = f.lipschitz
    lip = {"eta": eta, "empirical": k_emp}
    if declared is not None:
        k_decl = max(declared(t) for t in grid.nodes)
        lip.update(declared=k_decl, passed=k_emp <= k_decl * (1 + 1e-9))
    else:
        lip.update(declared=None, passed=True)

    report = {
        "variation": variation,
        "prox": prox,
        "growth": {"samples": n_samples, "radius": radius,
                   "violations": [v.to_dict() for v in growth[:50]],
                   "violation_count": len(growth), "passed": not growth},
        "lipschitz": lip,
    }
    report["passed"] = (variation["passed"] and all(not p["violations"] for p in prox)
                        and not growth and lip["passed"])
    return report


def cmd_audit(args) -> int:
    sc = _load(args)
    report = run_audits(sc, _seed(), n_samples=args.samples)
    text = json.dumps(report, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not report["passed"]:
        failed = [k for k in ("variation", "growth", "lipschitz") if not report[k]["passed"]]
        failed += [f"prox@t={p['t']:g}" for p in report["prox"] if p["violations"]]
        print("audit violations: " + ", ".join(failed), file=sys.stderr)
        return EXIT_VIOLATIONS
    return EXIT_OK


def cmd_reduce(args) -> int:
    sc = _load(args)
    if not isinstance(sc, SecondOrderScenario):
        raise ScenarioError("order", "reduce needs an order-2 scenario")
    write_scenario(reduce_second_to_first(sc), args.output)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Usage errors are validation errors (exit 3); argparse would use 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sweeping", description="Catching-up solvers and audits for perturbed sweeping processes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="solve a scenario and write the trajectory CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", help="residual report path (default: OUTPUT with .residual.json)")
    p.add_argument("--steps", type=int)
    p.add_argument("--quadrature", choices=QUADRATURES)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("study", help="convergence study, written as CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--refine", type=int, default=8, help="extra refinement of the reference grid")
    p.add_argument("--steps", type=int, help="coarsest grid (default: the scenario's steps)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("audit", help="audit the hypotheses on the scenario data")
    p.add_argument("--scenario", required=True)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--output")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("reduce", help="write the equivalent first-order scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NonUniqueProjection as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # bad numeric arguments such as --levels 2
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
