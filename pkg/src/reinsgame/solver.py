"""Policy evaluation and the alternating policy-iteration loop.

Policy evaluation solves the operator equation for fixed Markov policies by
Gauss-Seidel sweeps of the per-node implicit upwind equation, alternating
sweep direction so information propagates along either drift sign.  Each
update solves the node's own linear equation exactly (the explicit update
normalized by delta + lam alone diverges once |drift|/dx dominates), which
leaves the scheme a sup-norm contraction with every intermediate table
inside the payoff bound.

Policy improvement is the pointwise argmax/argmin of the operator over the
discretized control set, evaluated with the upwind derivative recomputed
per candidate drift sign; ties resolve to the smallest control value.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels as k
from .bellman import ControlSet, Grid, PackedSpec, ValueTable
from .errors import ConvergenceError, SpecError
from .model import GameSpec

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 10_000
DEFAULT_EPSILON = 1e-5
DEFAULT_MAX_ROUNDS = 10
DEFAULT_GRID_N = 801
DEFAULT_CONTROL_M = 101


@dataclass
class PolicyTable:
    """Piecewise-constant Markov control, read at the nearest-left grid node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n,):
            raise SpecError(
                f"policy table needs {self.grid.n} entries, got {self.values.shape}"
            )

    def __call__(self, x: float) -> float:
        return float(self.values[self.grid.index_of(x)])

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "PolicyTable":
        return cls(grid, np.full(grid.n, value))


class BoundaryAction(Enum):
    ABSORBED = "absorbed"
    SOLVE_EQUATION = "solve_equation"


@dataclass(frozen=True)
class BoundaryDecision:
    action: BoundaryAction
    value: Optional[float] = None

    def describe(self) -> str:
        if self.action is BoundaryAction.ABSORBED:
            return f"absorbed({self.value!r})"
        return "equation"


def boundary_rule(spec: GameSpec, u1: float, u2: float, endpoint: str) -> BoundaryDecision:
    """Endpoint treatment under the endpoint controls: absorbed at the exit
    payoff when the drift points out of [a, b], else the one-sided equation."""
    d = spec.premium1.net_rate(u1) - spec.premium2.net_rate(u2)
    if endpoint == "a":
        if d < 0.0:
            return BoundaryDecision(BoundaryAction.ABSORBED, spec.h(spec.a))
        return BoundaryDecision(BoundaryAction.SOLVE_EQUATION)
    if endpoint == "b":
        if d > 0.0:
            return BoundaryDecision(BoundaryAction.ABSORBED, spec.h(spec.b))
        return BoundaryDecision(BoundaryAction.SOLVE_EQUATION)
    raise ValueError(f"endpoint must be 'a' or 'b', got {endpoint!r}")


@dataclass
class SolveReport:
    """Diagnostics of one policy-iteration run."""

    rounds: int
    converged: bool
    value_change: float
    policy_change: float
    max_residual: float
    boundary_a: str
    boundary_b: str
    sweeps_total: int
    elapsed: float


@dataclass
class _EvalWorkspace:
    """Reusable per-grid buffers for policy evaluation."""

    qpos: np.ndarray
    qw: np.ndarray
    pm_pos: np.ndarray
    pm_w: np.ndarray
    exits: np.ndarray
    drifts: np.ndarray
    res: np.ndarray

    @classmethod
    def for_grid(cls, n: int) -> "_EvalWorkspace":
        return cls(
            qpos=np.empty((n, 2, k.N_QUAD)),
            qw=np.empty((n, 2, k.N_QUAD)),
            pm_pos=np.empty((n, 2)),
            pm_w=np.empty((n, 2)),
            exits=np.empty(n),
            drifts=np.empty(n),
            res=np.empty(n),
        )


def _evaluate(
    ps: PackedSpec,
    grid: Grid,
    zeta_tab: np.ndarray,
    u1: np.ndarray,
    u2: np.ndarray,
    tol: float,
    max_sweeps: int,
    v0: Optional[np.ndarray],
    ws: _EvalWorkspace,
) -> tuple[np.ndarray, float, int]:
    """Core evaluation loop; returns (values, max interior residual, sweeps)."""
    mp = ps.mp
    n = grid.n
    lam1 = mp[k.MP_LAM1]
    lam2 = mp[k.MP_LAM2]
    dl = mp[k.MP_DELTA] + lam1 + lam2
    h_a, h_b = ps.boundary_payoffs()
    k._policy_setup(
        mp, ps.h_lo, ps.h_lo_x0, ps.h_lo_dx, ps.h_hi, ps.h_hi_x0, ps.h_hi_dx,
        grid.xs, n, grid.dx, u1, u2, zeta_tab,
        ws.qpos, ws.qw, ws.pm_pos, ws.pm_w, ws.exits, ws.drifts,
    )
    v = np.zeros(n) if v0 is None else v0.copy()
    max_res = math.inf
    sweeps = 0
    for sweep in range(max_sweeps):
        change = k._gs_sweep(
            v, grid.xs, n, grid.dx, dl, lam1, lam2,
            ws.qpos, ws.qw, ws.pm_pos, ws.pm_w, ws.exits, ws.drifts,
            h_a, h_b, sweep % 2 == 1,
        )
        sweeps = sweep + 1
        if change < tol:
            k._policy_residuals(
                v, grid.xs, n, grid.dx, dl, lam1, lam2,
                ws.qpos, ws.qw, ws.pm_pos, ws.pm_w, ws.exits, ws.drifts,
                h_a, h_b, ws.res,
            )
            max_res = float(np.max(ws.res))
            if max_res <= tol:
                return v, max_res, sweeps
    raise ConvergenceError(
        f"policy evaluation did not reach residual {tol:g} in {max_sweeps} sweeps "
        f"(last residual {max_res:g})",
        residual=max_res,
        sweeps=sweeps,
    )


def policy_evaluate(
    spec: GameSpec,
    u1: PolicyTable,
    u2: PolicyTable,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    v0: Optional[ValueTable] = None,
    packed: Optional[PackedSpec] = None,
) -> ValueTable:
    """Solve the operator equation for fixed policies.

    The returned table satisfies |operator| <= tol at every interior node and
    the boundary rule at the endpoints.
    """
    if u1.grid is not u2.grid and (u1.grid.a, u1.grid.b, u1.grid.n) != (
        u2.grid.a, u2.grid.b, u2.grid.n,
    ):
        raise SpecError("policies must share one grid")
    grid = u1.grid
    ps = packed or PackedSpec.build(spec)
    zeta_tab = ps.zeta_table(grid)
    ws = _EvalWorkspace.for_grid(grid.n)
    values, _, _ = _evaluate(
        ps, grid, zeta_tab, u1.values, u2.values, tol, max_sweeps,
        None if v0 is None else v0.values, ws,
    )
    return ValueTable(grid, values)


def _improve(
    ps: PackedSpec,
    grid: Grid,
    zeta_tab: np.ndarray,
    v: np.ndarray,
    other: np.ndarray,
    controls: ControlSet,
    player: int,
) -> np.ndarray:
    idx = k._improve_pass(
        ps.mp, ps.h_lo, ps.h_lo_x0, ps.h_lo_dx, ps.h_hi, ps.h_hi_x0, ps.h_hi_dx,
        v, grid.xs, grid.n, grid.dx, zeta_tab, controls.values, other, player,
    )
    return controls.values[idx]


def improve_max(
    spec: GameSpec,
    v: ValueTable,
    u2: PolicyTable,
    controls1: ControlSet,
    packed: Optional[PackedSpec] = None,
) -> PolicyTable:
    """Pointwise argmax of the operator over player 1's control set."""
    ps = packed or PackedSpec.build(spec)
    zeta_tab = ps.zeta_table(v.grid)
    return PolicyTable(
        v.grid, _improve(ps, v.grid, zeta_tab, v.values, u2.values, controls1, 1)
    )


def improve_min(
    spec: GameSpec,
    v: ValueTable,
    u1: PolicyTable,
    controls2: ControlSet,
    packed: Optional[PackedSpec] = None,
) -> PolicyTable:
    """Pointwise argmin of the operator over player 2's control set."""
    ps = packed or PackedSpec.build(spec)
    zeta_tab = ps.zeta_table(v.grid)
    return PolicyTable(
        v.grid, _improve(ps, v.grid, zeta_tab, v.values, u1.values, controls2, 2)
    )


class Order(Enum):
    MIN_FIRST = "min_first"  # update player 2 first (upper-value proxy)
    MAX_FIRST = "max_first"  # update player 1 first (lower-value proxy)


@dataclass
class PolicyIterationResult:
    v: ValueTable
    u1: PolicyTable
    u2: PolicyTable
    report: SolveReport
    history: list[np.ndarray] = field(default_factory=list)


def _policy_delta(old: np.ndarray, new: np.ndarray) -> float:
    """Sup-norm policy change in control units; equal entries count as zero
    so the distinguished +inf control compares cleanly."""
    diff = np.where(old == new, 0.0, np.abs(old - new))
    return float(np.max(diff))


def policy_iteration(
    spec: GameSpec,
    order: Order = Order.MIN_FIRST,
    epsilon: float = DEFAULT_EPSILON,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    grid_n: int = DEFAULT_GRID_N,
    control_m: int = DEFAULT_CONTROL_M,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    keep_history: bool = False,
) -> PolicyIterationResult:
    """Alternate policy evaluation and one-player improvements from the
    no-reinsurance start until value and both policies move less than epsilon.

    Non-convergence within ``max_rounds`` full rounds (one update per player)
    is reported, not raised.
    """
    if epsilon <= 0.0:
        raise SpecError(f"epsilon must be positive, got {epsilon}")
    t0 = time.perf_counter()
    ps = PackedSpec.build(spec)
    grid = Grid(spec.a, spec.b, grid_n)
    zeta_tab = ps.zeta_table(grid)
    cs1 = ControlSet.for_player(spec, 1, control_m)
    cs2 = ControlSet.for_player(spec, 2, control_m)
    ws = _EvalWorkspace.for_grid(grid.n)
    # start from no reinsurance: the largest discretized control (u = 1 for
    # proportional, the distinguished +inf for excess of loss)
    u1 = np.full(grid.n, cs1.values[-1])
    u2 = np.full(grid.n, cs2.values[-1])

    history: list[np.ndarray] = []
    sweeps_total = 0
    v, max_res, sw = _evaluate(ps, grid, zeta_tab, u1, u2, tol, max_sweeps, None, ws)
    sweeps_total += sw
    if keep_history:
        history.append(v.copy())

    converged = False
    rounds = 0
    value_change = math.inf
    policy_change = math.inf
    for _ in range(max_rounds):
        v_prev = v
        u1_prev = u1
        u2_prev = u2
        if order is Order.MIN_FIRST:
            u2 = _improve(ps, grid, zeta_tab, v, u1, cs2, 2)
            v, max_res, sw = _evaluate(ps, grid, zeta_tab, u1, u2, tol, max_sweeps, v, ws)
            sweeps_total += sw
            if keep_history:
                history.append(v.copy())
            u1 = _improve(ps, grid, zeta_tab, v, u2, cs1, 1)
        else:
            u1 = _improve(ps, grid, zeta_tab, v, u2, cs1, 1)
            v, max_res, sw = _evaluate(ps, grid, zeta_tab, u1, u2, tol, max_sweeps, v, ws)
            sweeps_total += sw
            if keep_history:
                history.append(v.copy())
            u2 = _improve(ps, grid, zeta_tab, v, u1, cs2, 2)
        v, max_res, sw = _evaluate(ps, grid, zeta_tab, u1, u2, tol, max_sweeps, v, ws)
        sweeps_total += sw
        if keep_history:
            history.append(v.copy())
        rounds += 1
        value_change = float(np.max(np.abs(v - v_prev)))
        policy_change = max(_policy_delta(u1_prev, u1), _policy_delta(u2_prev, u2))
        logger.debug(
            "round %d: value change %.3e, policy change %.3e, residual %.3e",
            rounds, value_change, policy_change, max_res,
        )
        if value_change < epsilon and policy_change < epsilon:
            converged = True
            break
    if not converged:
        logger.warning(
            "policy iteration stopped after %d rounds (value change %.3e, "
            "policy change %.3e)", rounds, value_change, policy_change,
        )

    dec_a = boundary_rule(spec, float(u1[0]), float(u2[0]), "a")
    dec_b = boundary_rule(spec, float(u1[-1]), float(u2[-1]), "b")
    report = SolveReport(
        rounds=rounds,
        converged=converged,
        value_change=value_change,
        policy_change=policy_change,
        max_residual=max_res,
        boundary_a=dec_a.describe(),
        boundary_b=dec_b.describe(),
        sweeps_total=sweeps_total,
        elapsed=time.perf_counter() - t0,
    )
    return PolicyIterationResult(
        v=ValueTable(grid, v),
        u1=PolicyTable(grid, u1),
        u2=PolicyTable(grid, u2),
        report=report,
        history=history,
    )


@dataclass
class GapResult:
    gap: float
    v_upper: ValueTable
    v_lower: ValueTable
    upper: PolicyIterationResult
    lower: PolicyIterationResult


def upper_lower_gap(spec: GameSpec, epsilon: float = DEFAULT_EPSILON, **kwargs) -> GapResult:
    """Run both improvement orders and report the sup-norm upper/lower gap.

    MIN_FIRST (player 2 updated first) approximates the upper value,
    MAX_FIRST the lower value; a vanishing gap signals a Nash equilibrium
    on the discretization.
    """
    upper = policy_iteration(spec, Order.MIN_FIRST, epsilon=epsilon, **kwargs)
    lower = policy_iteration(spec, Order.MAX_FIRST, epsilon=epsilon, **kwargs)
    gap = float(np.max(np.abs(upper.v.values - lower.v.values)))
    return GapResult(gap=gap, v_upper=upper.v, v_lower=lower.v, upper=upper, lower=lower)


def interior_residuals(
    spec: GameSpec,
    v: ValueTable,
    u1: PolicyTable,
    u2: PolicyTable,
    packed: Optional[PackedSpec] = None,
) -> np.ndarray:
    """Absolute operator residual at every node for the given policies."""
    ps = packed or PackedSpec.build(spec)
    grid = v.grid
    zeta_tab = ps.zeta_table(grid)
    ws = _EvalWorkspace.for_grid(grid.n)
    mp = ps.mp
    lam1 = mp[k.MP_LAM1]
    lam2 = mp[k.MP_LAM2]
    dl = mp[k.MP_DELTA] + lam1 + lam2
    h_a, h_b = ps.boundary_payoffs()
    k._policy_setup(
        mp, ps.h_lo, ps.h_lo_x0, ps.h_lo_dx, ps.h_hi, ps.h_hi_x0, ps.h_hi_dx,
        grid.xs, grid.n, grid.dx, u1.values, u2.values, zeta_tab,
        ws.qpos, ws.qw, ws.pm_pos, ws.pm_w, ws.exits, ws.drifts,
    )
    k._policy_residuals(
        v.values, grid.xs, grid.n, grid.dx, dl, lam1, lam2,
        ws.qpos, ws.qw, ws.pm_pos, ws.pm_w, ws.exits, ws.drifts, h_a, h_b, ws.res,
    )
    return ws.res.copy()
