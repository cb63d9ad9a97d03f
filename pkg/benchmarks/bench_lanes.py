"""Benchmark the numba lane against the pure-Python fallback lane.

Runs a moderate solve and a Monte Carlo batch in the current lane; when
invoked without arguments it also re-runs itself in a subprocess with
REINSGAME_DISABLE_JIT=1 and prints a side-by-side table.

    python benchmarks/bench_lanes.py          # both lanes
    python benchmarks/bench_lanes.py --self   # just the current lane
"""

import json
import os
import subprocess
import sys
import time

import reinsgame as rg

GRID_N = 201
CONTROL_M = 21
MC_PATHS = 20_000


def run_current_lane() -> dict:
    spec = rg.make_scenario("prop-var-exp")
    t0 = time.perf_counter()
    res = rg.policy_iteration(
        spec, grid_n=GRID_N, control_m=CONTROL_M, epsilon=1e-5, max_rounds=6
    )
    t_solve = time.perf_counter() - t0
    t0 = time.perf_counter()
    est = rg.estimate_J(spec, res.u1, res.u2, 0.0, MC_PATHS, master_seed=12345)
    t_mc = time.perf_counter() - t0
    return {
        "jit": rg.JIT_ENABLED,
        "solve_s": t_solve,
        "mc_s": t_mc,
        "v0": res.v(0.0),
        "j0": est.mean,
    }


def main() -> int:
    mine = run_current_lane()
    if "--self" in sys.argv:
        print(json.dumps(mine))
        return 0
    env = dict(os.environ, REINSGAME_DISABLE_JIT="1")
    proc = subprocess.run(
        [sys.executable, __file__, "--self"],
        capture_output=True, text=True, env=env, check=True,
    )
    other = json.loads(proc.stdout.splitlines()[-1])
    jitted, fallback = (mine, other) if mine["jit"] else (other, mine)
    print(f"workload: solve n={GRID_N}, m={CONTROL_M}; MC paths={MC_PATHS}")
    print(f"{'lane':<12}{'solve [s]':>12}{'mc [s]':>12}")
    print(f"{'numba':<12}{jitted['solve_s']:>12.3f}{jitted['mc_s']:>12.3f}")
    print(f"{'fallback':<12}{fallback['solve_s']:>12.3f}{fallback['mc_s']:>12.3f}")
    print(
        f"{'speedup':<12}{fallback['solve_s'] / jitted['solve_s']:>12.1f}"
        f"{fallback['mc_s'] / jitted['mc_s']:>12.1f}"
    )
    dv = abs(mine["v0"] - other["v0"])
    dj = abs(mine["j0"] - other["j0"])
    print(f"lane agreement: |dv(0)| = {dv:.3e}, |dJ(0)| = {dj:.3e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
