"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (also collected in the
terminal summary).  Run with ``pytest tests/test_acceptance.py -s`` to see
the lines inline.
"""

import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np

from conftest import record_acceptance
from sweeping import benchmarks
from sweeping.analysis import bound_check, convergence_study, residual_normal_cone
from sweeping.cli import run_audits
from sweeping.dynamics import ZeroPerturbation, a_priori_bound
from sweeping.errors import NonUniqueProjection
from sweeping.geometry import (
    BallComplement,
    Box,
    FreeSpace,
    MovingBall,
    MovingHalfSpace,
    ProductSet,
    TranslatedBase,
    prox_inequality_audit,
    variation_audit,
)
from sweeping.paths import Linear, Sinusoid
from sweeping.scenario_io import read_trajectory, scenario_to_dict, write_trajectory
from sweeping.solver import FirstOrderScenario, TimeGrid, Trajectory, reduce_second_to_first, solve

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
SIZES = (50, 200)


def test_ac01_scheme_equivalence():
    worst_u, position_exact, cases = 0.0, True, 0
    for name, make in benchmarks.SECOND_ORDER_SUITE.items():
        for n in SIZES:
            sc = make(n)
            direct = solve(sc)
            reduced = solve(reduce_second_to_first(sc))
            d = sc.K.dim
            u, x = reduced.states[:, :d], reduced.states[:, d:]
            worst_u = max(worst_u, float(np.max(np.abs(direct.velocity - u))))
            position_exact &= bool(np.all(x[1:] == x[:-1] + sc.grid.h * u[:-1]))
            position_exact &= bool(np.all(direct.position == x))
            cases += 1
    ok = worst_u <= 1e-12 and position_exact and cases >= 10
    record_acceptance("AC1 scheme equivalence", ok,
                      f"{cases} solves, sup |u diff| = {worst_u:.1e}, position update exact: {position_exact}")
    assert ok


def test_ac02_exact_sweeping_benchmark():
    worst_u = 0.0
    for n in (1, 3, 7, 50, 64, 200, 256, 1000):
        for make in (benchmarks.half_line, benchmarks.half_line_first_order):
            traj = solve(make(n))
            worst_u = max(worst_u, float(np.max(np.abs(traj.velocity[:, 0] - traj.grid.nodes))))
    # bit equality is attainable only where h and the partial sums are exact (dyadic n, T = 1);
    # elsewhere h itself is rounded and the identity holds to a few ulps of T^2/2
    dyadic_exact = True
    for n in (64, 256, 1024):
        traj = solve(benchmarks.half_line(n))
        dyadic_exact &= abs(traj.position[-1, 0] - 0.5) == traj.grid.h / 2
    worst_x = 0.0
    for n, T in ((50, 1.0), (200, 1.0), (37, 2.5)):
        traj = solve(benchmarks.half_line(n, T))
        err = abs(traj.position[-1, 0] - T * T / 2)
        worst_x = max(worst_x, abs(err - T * traj.grid.h / 2) / math.ulp(T * T / 2))
    ok = worst_u <= 1e-13 and dyadic_exact and worst_x <= 4
    record_acceptance("AC2 exact sweeping benchmark", ok,
                      f"max |u_i - t_i| = {worst_u:.1e}; |x_n - T^2/2| = Th/2 bit-exact on dyadic grids: "
                      f"{dyadic_exact}; other grids within {worst_x:.0f} ulp")
    assert ok


def test_ac03_convergence_smooth_convex():
    table = convergence_study(benchmarks.moving_ball(50), levels=4, refine_factor_for_reference=8)
    # reference 2^4 * 8 * 50 = 6400 steps, 16x the finest level
    orders = table.orders
    ok = (table.reference_n == 16 * table.rows[-1].n and table.min_order() >= 0.8
          and table.is_monotone(1e-9) and not table.is_exact())
    record_acceptance("AC3 convergence (moving ball)", ok,
                      "orders " + ", ".join(f"{o:.3f}" for o in orders)
                      + f"; errors {', '.join(f'{e:.2e}' for e in table.errors)}")
    assert ok


def test_ac04_prox_regular_benchmark():
    solved, worst_gap = True, 0.0
    try:
        for n in SIZES:
            sc = benchmarks.ball_complement(n)
            traj = solve(sc)
            gaps = [sc.K.distance(sc.grid.node(i), traj.velocity[i]) for i in range(n + 1)]
            worst_gap = max(worst_gap, max(gaps))
    except NonUniqueProjection:
        solved = False
    table = convergence_study(benchmarks.ball_complement(50), levels=4, refine_factor_for_reference=8)
    K = benchmarks.ball_complement(50).K
    doubled = prox_inequality_audit(K, 0.0, 10_000, rng_seed=0, declared_radius=2.0 * K.prox_radius)
    ok = solved and worst_gap <= 1e-9 and table.min_order() >= 0.5 and len(doubled.violations) >= 1
    record_acceptance("AC4 prox-regular benchmark", ok,
                      f"solved: {solved}, worst gap {worst_gap:.1e}, min order {table.min_order():.3f}, "
                      f"doubled-r violations {len(doubled.violations)} (worst slack {doubled.worst_slack:.3f})")
    assert ok


def test_ac05_a_priori_bounds():
    checked, failed = [], []
    for name, make in benchmarks.SECOND_ORDER_SUITE.items():
        if not run_audits(make(50), seed=0, n_samples=1000)["passed"]:
            continue
        for n in SIZES:
            red = reduce_second_to_first(make(n))
            rep = bound_check(solve(red), a_priori_bound(red), red, slack=1.05)
            checked.append(f"{name}/{n}")
            if not rep.passed:
                failed.append(f"{name}/{n}")
    sc = FirstOrderScenario(FreeSpace(1), ZeroPerturbation(1, growth=1.0), [0.0], TimeGrid(1.0, 50))
    l = a_priori_bound(sc).l
    closed_ok = abs(l - 2 * math.e ** 2) <= 1e-6
    ok = not failed and len(checked) >= 10 and closed_ok
    record_acceptance("AC5 a-priori bounds", ok,
                      f"{len(checked)} audited solves, failures {failed or 'none'}; "
                      f"l = {l:.9f} vs 2e^2 = {2 * math.e ** 2:.9f}")
    assert ok


def test_ac06_product_geometry():
    rng = np.random.default_rng(20240601)
    blocks = [BallComplement([Sinusoid(0.4, 1.0), Linear(-0.3)], 1.2),
              MovingHalfSpace([1.0, -2.0], Sinusoid(0.5, 2.0)),
              MovingBall([0.0, 0.0], 0.7)]
    blockwise_exact, worst_add, radius_ok, checked = True, 0.0, True, 0
    for block in blocks:
        ps = ProductSet.with_free_block(block, 3)
        radius_ok &= ps.prox_radius == block.prox_radius
        for _ in range(1000):
            t = float(rng.uniform(0.0, 2.0))
            p = rng.uniform(-3.0, 3.0, 2)
            w = rng.uniform(-3.0, 3.0, 3)
            full = np.concatenate([p, w])
            worst_add = max(worst_add, abs(ps.distance(t, full) ** 2 - block.distance(t, p) ** 2))
            try:
                expected = block.project(t, p)
            except NonUniqueProjection:
                continue
            blockwise_exact &= bool(np.array_equal(ps.project(t, full), np.concatenate([expected, w])))
            checked += 1
    ok = blockwise_exact and worst_add <= 1e-12 and radius_ok
    record_acceptance("AC6 product geometry", ok,
                      f"{checked} projections blockwise-exact: {blockwise_exact}, "
                      f"additivity error {worst_add:.1e}, radius equal: {radius_ok}")
    assert ok


def test_ac07_prox_inequality():
    bc = BallComplement([0.0, 0.0], 1.0)
    rep = prox_inequality_audit(bc, 0.0, 10_000, rng_seed=0)
    moving_bc = benchmarks.ball_complement(50).K
    rep2 = prox_inequality_audit(moving_bc, 0.5, 10_000, rng_seed=1)
    convex = {
        "axis half-space": MovingHalfSpace([0.0, 1.0], Sinusoid(0.5, 2.0)),
        "moving ball": MovingBall([Linear(0.6), Sinusoid(0.3, 2.0)], 0.5),
        "box": Box([-1.0, -0.3], [1.0, 0.3]),
        "translated box": TranslatedBase(Box([-0.3, -0.3], [0.3, 0.3]), [Sinusoid(0.5, 1.5), Linear(0.6)]),
    }
    worst_convex = max(prox_inequality_audit(K, t, 2500, rng_seed=2).worst_slack
                       for K in convex.values() for t in (0.0, 0.5, 1.0))
    # an oblique normal rounds the projection; slack stays at rounding level and no violation is recorded
    oblique = prox_inequality_audit(MovingHalfSpace([1.0, -2.0], 0.3), 0.0, 10_000, rng_seed=3)
    ok = (rep.samples_checked >= 10_000 and rep.worst_slack <= 1e-12 and rep2.worst_slack <= 1e-12
          and worst_convex <= 0.0 and not oblique.violations)
    record_acceptance("AC7 prox inequality", ok,
                      f"ball complement worst slack {rep.worst_slack:.1e} / {rep2.worst_slack:.1e} over "
                      f"{rep.samples_checked} samples; convex worst {worst_convex:.1e}; "
                      f"oblique half-space {oblique.worst_slack:.1e} with {len(oblique.violations)} violations")
    assert ok


def test_ac08_variation_audit():
    rng = np.random.default_rng(8)
    kinds = {
        "moving_half_space": MovingHalfSpace([1.0, -2.0], Sinusoid(0.5, 2.0, 0.0, 0.3)),
        "moving_ball": MovingBall([Linear(0.5), Sinusoid(0.3, 1.0)], 0.7),
        "box": Box([-1.0, 0.0], [1.0, 0.5]),
        "ball_complement": BallComplement([Sinusoid(0.4, 1.0), Linear(-0.3)], 1.2),
        "translated": TranslatedBase(Box([-0.5, -0.5], [0.5, 0.5]), [Sinusoid(0.5, 1.5), Linear(0.3)]),
        "product": ProductSet.with_free_block(BallComplement([Linear(0.2), 0.0], 1.0), 2),
        "free": FreeSpace(2),
    }
    grid = TimeGrid(2.0, 99)  # 100 nodes
    ratios = {}
    for name, K in kinds.items():
        center, scale = K.sampling_region(0.0)
        probes = [center + 3.0 * scale * rng.uniform(-1.0, 1.0, K.dim) for _ in range(100)]
        ratios[name] = variation_audit(K, grid, probes)
    ok = all(r <= 1.0 + 1e-9 for r in ratios.values())
    record_acceptance("AC8 variation audit", ok,
                      ", ".join(f"{k} {v:.4f}" for k, v in ratios.items()))
    assert ok


def test_ac09_normal_cone_residuals():
    worst, solves = 0.0, 0
    for name, make in benchmarks.SECOND_ORDER_SUITE.items():
        for n in SIZES:
            sc = make(n)
            for item in (sc, reduce_second_to_first(sc)):
                rep = residual_normal_cone(solve(item), item)
                worst = max(worst, rep.max_violation)
                solves += 1
    detected = []
    for name in ("half_line", "moving_ball", "ball_complement"):
        sc = benchmarks.SECOND_ORDER_SUITE[name](50)
        traj = solve(sc)
        bad = Trajectory(traj.grid, traj.states.copy(), order=2)
        bad.states[25, 0] += traj.grid.h
        detected.append(bool(residual_normal_cone(bad, sc).flagged))
    ok = worst <= 1e-9 and all(detected)
    record_acceptance("AC9 normal-cone residuals", ok,
                      f"{solves} solves, max violation {worst:.1e}; corruption detected {detected}")
    assert ok


def _cli(args, seed="11"):
    env = dict(os.environ, SWEEP_SEED=seed)
    return subprocess.run([sys.executable, "-m", "sweeping", *args], capture_output=True, env=env).returncode


def test_ac10_cli_contract(tmp_path):
    codes = {}
    codes["ok"] = _cli(["run", "--scenario", str(SCENARIO_DIR / "moving_ball.json"),
                        "--output", str(tmp_path / "ok.csv")])
    tube = {
        "order": 2, "horizon": 1.0, "steps": 10,
        "set": {"kind": "ball_complement", "center": [{"linear": {"slope": 10.0, "offset": -1.5}}], "radius": 1.0},
        "perturbation": {"kind": "zero", "dim": 1},
        "initial": {"x0": [0.0], "u0": [0.0]},
    }
    (tmp_path / "tube.json").write_text(json.dumps(tube))
    codes["solver"] = _cli(["run", "--scenario", str(tmp_path / "tube.json"), "--output", str(tmp_path / "t.csv")])
    bad = scenario_to_dict(benchmarks.moving_ball(10))
    bad["set"]["kind"] = "polytope"
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    codes["validation"] = _cli(["run", "--scenario", str(tmp_path / "bad.json"), "--output", str(tmp_path / "b.csv")])
    codes_ok = codes == {"ok": 0, "solver": 2, "validation": 3}

    runs = []
    for k in range(2):
        out, audit = tmp_path / f"r{k}.csv", tmp_path / f"a{k}.json"
        _cli(["run", "--scenario", str(SCENARIO_DIR / "ball_complement.json"), "--output", str(out)])
        _cli(["audit", "--scenario", str(SCENARIO_DIR / "ball_complement.json"), "--samples", "500",
              "--output", str(audit)])
        runs.append(b"".join(p.read_bytes() for p in (out, out.with_suffix(".residual.json"), audit)))
    identical = runs[0] == runs[1]

    round_trip = True
    for name in ("moving_ball", "ball_complement", "forced_affine"):
        traj = solve(benchmarks.SECOND_ORDER_SUITE[name](200))
        path = tmp_path / f"{name}.csv"
        write_trajectory(traj, path)
        _, data = read_trajectory(path)
        round_trip &= bool(np.array_equal(data[:, 0], traj.grid.nodes)
                           and np.array_equal(data[:, 1:], np.hstack([traj.position, traj.velocity])))
    ok = codes_ok and identical and round_trip
    record_acceptance("AC10 CLI contract", ok,
                      f"exit codes {codes}; byte-identical reruns: {identical}; CSV round trip bit-exact: {round_trip}")
    assert ok
