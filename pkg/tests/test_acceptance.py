"""Acceptance suite: one test per criterion, printing a PASS/FAIL line each.

The three preset scenarios are solved once per session at the production
discretization (n = 801, m = 101, epsilon = 1e-5) and shared across
criteria.  Run with ``pytest tests/test_acceptance.py -v -s`` to see the
per-criterion lines; the full module takes on the order of ten minutes.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
import pytest
from scipy import stats

import reinsgame as rg
from reinsgame import ExitSide

from conftest import make_driftonly_spec, make_prop_spec, make_xl_spec

GRID_N = 801
CONTROL_M = 101
EPSILON = 1e-5
MC_PATHS = 100_000
SEED = 20_240_601


@dataclass
class Solution:
    spec: rg.GameSpec
    upper: rg.PolicyIterationResult
    lower: rg.PolicyIterationResult
    gap: float
    elapsed_upper: float
    elapsed_lower: float
    histories: list = field(default_factory=list)


@pytest.fixture(scope="module")
def solutions():
    out = {}
    for name in rg.SCENARIO_NAMES:
        spec = rg.make_scenario(name)
        t0 = time.perf_counter()
        upper = rg.policy_iteration(
            spec, rg.Order.MIN_FIRST, epsilon=EPSILON,
            grid_n=GRID_N, control_m=CONTROL_M, keep_history=True,
        )
        t1 = time.perf_counter()
        lower = rg.policy_iteration(
            spec, rg.Order.MAX_FIRST, epsilon=EPSILON,
            grid_n=GRID_N, control_m=CONTROL_M, keep_history=True,
        )
        t2 = time.perf_counter()
        out[name] = Solution(
            spec=spec,
            upper=upper,
            lower=lower,
            gap=float(np.max(np.abs(upper.v.values - lower.v.values))),
            elapsed_upper=t1 - t0,
            elapsed_lower=t2 - t1,
            histories=upper.history + lower.history,
        )
    return out


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")


def test_criterion_1_operator_residuals(solutions):
    """Max interior |operator| <= 1e-6 at the returned triple; <= 5 min per run."""
    ok = True
    details = []
    for name, sol in solutions.items():
        for label, run, elapsed in (
            ("upper", sol.upper, sol.elapsed_upper),
            ("lower", sol.lower, sol.elapsed_lower),
        ):
            res = rg.interior_residuals(sol.spec, run.v, run.u1, run.u2)
            max_res = float(np.max(res[1:-1]))
            ok &= max_res <= 1e-6 and elapsed <= 300.0
            details.append(f"{name}/{label}: residual {max_res:.2e}, {elapsed:.0f}s")
    _report("criterion 1 (operator residual, runtime)", ok, "; ".join(details))
    assert ok


def test_criterion_2_mc_cross_validation(solutions):
    """MC agreement within 3 stderr at 11 interior points, stderr <= 0.01, <= 2 min."""
    sol = solutions["prop-var-exp"]
    run = sol.upper
    t0 = time.perf_counter()
    worst_z = 0.0
    worst_se = 0.0
    span = sol.spec.b - sol.spec.a
    for i in range(1, 12):
        x0 = sol.spec.a + span * i / 12
        est = rg.estimate_J(sol.spec, run.u1, run.u2, x0, MC_PATHS, master_seed=SEED + i)
        z = (est.mean - run.v(x0)) / max(est.stderr, 1e-9)
        worst_z = max(worst_z, abs(z))
        worst_se = max(worst_se, est.stderr)
    elapsed = time.perf_counter() - t0
    ok = worst_z <= 3.0 and worst_se <= 0.01 and elapsed <= 120.0
    _report(
        "criterion 2 (MC cross-validation)",
        ok,
        f"worst |z| {worst_z:.2f}, worst stderr {worst_se:.4f}, {elapsed:.0f}s",
    )
    assert ok


def test_criterion_3_dpp_property(solutions):
    """Tower-identity residual within 3 stderr at x0 = 0, T in {0.5, 1, 2}."""
    ok = True
    details = []
    for name, sol in solutions.items():
        run = sol.upper
        for j, horizon in enumerate((0.5, 1.0, 2.0)):
            chk = rg.check_dpp(
                sol.spec, run.u1, run.u2, 0.0, horizon, MC_PATHS,
                master_seed=SEED + 100 + j, v=run.v,
            )
            z = abs(chk.residual) / max(chk.stderr, 1e-12)
            ok &= z <= 3.0
            details.append(f"{name} T={horizon}: z {z:.2f}")
    _report("criterion 3 (DPP residuals)", ok, "; ".join(details))
    assert ok


def test_criterion_4_closed_form_suite():
    """Constant-solution identity to 1e-8 and jump-free exponential to 1e-5."""
    details = []
    worst_const = 0.0
    for make in (make_prop_spec, make_xl_spec):
        spec = make(rg.PayoffSpec.constant_pair(0.5, 0.7))
        grid = rg.Grid(spec.a, spec.b, 201)
        u1 = rg.PolicyTable.constant(grid, 0.6)
        u2 = rg.PolicyTable.constant(grid, spec.no_reinsurance())
        v = rg.policy_evaluate(spec, u1, u2, tol=1e-10)
        worst_const = max(worst_const, float(np.max(np.abs(v.values - 0.7))))
        for i in range(10):
            rec = rg.sample_path(
                spec, u1, u2, 0.1, rg.RngStream.for_path(SEED, i), t_max=200.0
            )
            worst_const = max(worst_const, abs(rec.total - 0.7))
    ok = worst_const <= 1e-8
    details.append(f"constant identity max err {worst_const:.2e}")

    spec = make_driftonly_spec(1.5, 0.5, 0.0, 0.5, 0.05)
    grid = rg.Grid(0.0, 0.5, GRID_N)
    u1 = rg.PolicyTable.constant(grid, 1.0)
    u2 = rg.PolicyTable.constant(grid, 1.0)
    v = rg.policy_evaluate(spec, u1, u2)
    exact = np.exp(-0.05 * (0.5 - grid.xs))
    err = float(np.max(np.abs(v.values - exact)))
    ok &= err <= 1e-5
    details.append(f"jump-free ODE max err {err:.2e}")
    _report("criterion 4 (closed-form suite)", ok, "; ".join(details))
    assert ok


def test_criterion_5_figure_one_shape(solutions):
    """Player 1 never reinsures; player 2 reinsures only in the middle; v(a) = 0."""
    sol = solutions["prop-var-exp"]
    ok = True
    details = []
    for label, run in (("upper", sol.upper), ("lower", sol.lower)):
        u1 = run.u1.values
        u2 = run.u2.values
        full_u1 = bool(np.all(u1 == 1.0))
        edges_u2 = bool(np.all(u2[:5] == 1.0) and np.all(u2[-5:] == 1.0))
        active = bool(np.any(u2 < 1.0))
        v_a = abs(float(run.v.values[0]))
        ok &= full_u1 and edges_u2 and active and v_a <= EPSILON
        details.append(
            f"{label}: u1 full {full_u1}, u2 edges {edges_u2}, "
            f"active frac {float(np.mean(u2 < 1.0)):.2f}, |v(a)| {v_a:.1e}"
        )
    _report("criterion 5 (figure-1 shape)", ok, "; ".join(details))
    assert ok


def test_criterion_6_figure_three_boundary(solutions):
    """Pareto scenario: v(b) = 1 on both upper and lower runs."""
    sol = solutions["xl-exp-pareto"]
    err_u = abs(float(sol.upper.v.values[-1]) - 1.0)
    err_l = abs(float(sol.lower.v.values[-1]) - 1.0)
    ok = err_u <= EPSILON and err_l <= EPSILON
    _report(
        "criterion 6 (figure-3 boundary)", ok, f"|v(b)-1| upper {err_u:.1e}, lower {err_l:.1e}"
    )
    assert ok


#: Regression baselines: sup-norm upper/lower gaps measured at the production
#: discretization, frozen with an order-of-magnitude headroom.
GAP_BASELINES = {
    "prop-var-exp": 5e-9,
    "xl-exp-exp": 5e-10,
    "xl-exp-pareto": 5e-8,
}


def test_criterion_7_minimax_ordering(solutions):
    """Lower value <= upper value + 1e-4 pointwise; gaps near zero."""
    ok = True
    details = []
    for name, sol in solutions.items():
        pointwise = bool(np.all(sol.lower.v.values <= sol.upper.v.values + 1e-4))
        ok &= pointwise and sol.gap <= 1e-4 and sol.gap <= GAP_BASELINES[name]
        details.append(f"{name}: gap {sol.gap:.2e}")
    _report("criterion 7 (minimax ordering / gap)", ok, "; ".join(details))
    assert ok


def test_criterion_8_bound_preservation(solutions):
    """Every intermediate and final table lies in [0, 1] exactly."""
    ok = True
    count = 0
    for sol in solutions.values():
        for table in sol.histories:
            count += 1
            ok &= bool(np.all(table >= 0.0) and np.all(table <= 1.0))
        for run in (sol.upper, sol.lower):
            ok &= bool(np.all(run.v.values >= 0.0) and np.all(run.v.values <= 1.0))
    _report("criterion 8 (payoff bound preservation)", ok, f"{count} tables checked")
    assert ok


def test_criterion_9_pdmp_statistics():
    """Mark fraction, inter-jump mean, and claim-size KS at 1e5 samples."""
    lam1, lam2 = 1.0, 3.0
    claim = rg.Exponential(1.0)
    prem1 = rg.PremiumModel(
        1.1, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, lam1, 0.12, claim
    )
    prem2 = rg.PremiumModel(
        1.1, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, lam2, 0.12, claim
    )
    spec = rg.GameSpec(
        lam1=lam1, lam2=lam2, claim1=claim, claim2=claim,
        retention=rg.RetentionKind.PROPORTIONAL,
        premium1=prem1, premium2=prem2, a=-1.0, b=1.0,
        payoff=rg.PayoffSpec.test_functional(0.5),
        controls1=(0.0, 1.0), controls2=(0.0, 1.0),
    )
    # full reinsurance and equal premium rates: the state never moves and the
    # path accumulates jumps until the censoring horizon; the asymmetric
    # intensities leave at least 1e5 player-1 claims for the KS test
    lam = lam1 + lam2
    n_target = 420_000
    grid = rg.Grid(spec.a, spec.b, 21)
    u1 = rg.PolicyTable.constant(grid, 0.0)
    u2 = rg.PolicyTable.constant(grid, 0.0)
    rec = rg.sample_path(spec, u1, u2, 0.0, rg.RngStream(SEED), t_max=n_target / lam)
    assert rec.side is ExitSide.CENSORED

    marks = np.array([e.player for e in rec.events])
    times = np.array([e.time for e in rec.events])
    claims1 = np.array([e.claim for e in rec.events if e.player == 1])

    frac1 = float(np.mean(marks == 1))
    p = lam1 / lam
    sd = math.sqrt(p * (1 - p) / marks.size)
    ok = abs(frac1 - p) < 4 * sd
    details = [f"{marks.size} jumps, mark z {(frac1 - p) / sd:+.2f}"]

    gaps = np.diff(np.concatenate([[0.0], times]))
    se = float(gaps.std(ddof=1) / math.sqrt(gaps.size))
    z_gap = (float(gaps.mean()) - 1.0 / lam) / se
    ok &= abs(z_gap) < 4
    details.append(f"inter-jump z {z_gap:+.2f}")

    assert claims1.size >= 100_000
    ks = stats.kstest(claims1, lambda y: -np.expm1(-y)).statistic
    crit = 1.9495 / math.sqrt(claims1.size)
    ok &= ks < crit
    details.append(f"KS {ks:.5f} < {crit:.5f} at n={claims1.size}")
    _report("criterion 9 (PDMP statistics)", ok, "; ".join(details))
    assert ok
