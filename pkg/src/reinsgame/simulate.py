"""Exact PDMP Monte Carlo engine for the controlled difference process.

Paths are built from counter-based uniform streams: inter-jump times by
inversion at the combined intensity, marks by a fresh uniform, claim sizes
by inverse CDF.  Between jumps the state follows the piecewise-constant
drift integrated exactly across grid cells, so there is no time-stepping
error; continuous boundary crossings are solved exactly.  This module is
the independent oracle against the grid solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels as k
from ._rng import GOLDEN, mix64, to_signed64, uniform_at
from .bellman import PackedSpec, ValueTable
from .errors import DomainError
from .model import GameSpec, RunningKind
from .solver import PolicyTable

#: Default truncation-bias target for censored paths.
BIAS_TARGET = 1e-4


@dataclass
class RngStream:
    """Counter-based uniform stream: the k-th draw depends only on (seed, k)."""

    seed: int
    counter: int = 0

    def __post_init__(self):
        self.seed = to_signed64(self.seed)

    def uniform(self) -> float:
        u = uniform_at(self.seed, self.counter)
        self.counter += 1
        return u

    @classmethod
    def for_path(cls, master_seed: int, path_index: int) -> "RngStream":
        """The sub-stream a batch run assigns to one path."""
        z = to_signed64(to_signed64(master_seed) + (path_index + 1) * GOLDEN)
        return cls(to_signed64(mix64(z)))


class ExitSide(Enum):
    BELOW_A = "below_a"
    ABOVE_B = "above_b"
    CENSORED = "censored"


@dataclass(frozen=True)
class JumpEvent:
    time: float
    player: int
    claim: float
    retained: float
    state_after: float


@dataclass
class PathRecord:
    """One simulated trajectory with its discounted payoff pieces."""

    x0: float
    events: list[JumpEvent]
    final_time: float
    final_state: float
    side: ExitSide
    running_payoff: float
    exit_payoff: float
    uniforms_used: int

    @property
    def total(self) -> float:
        return self.running_payoff + self.exit_payoff


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_paths: int
    censored_fraction: float
    bias_bound: float


@dataclass(frozen=True)
class DppCheck:
    """Monte Carlo check of the dynamic-programming identity at one horizon."""

    residual: float
    stderr: float
    mean_rhs: float
    v_x0: float
    n_paths: int


def default_t_max(spec: GameSpec, bias: float = BIAS_TARGET) -> float:
    """Censoring horizon with discounted truncation bias below ``bias``."""
    m = max(spec.value_bound(), bias)
    return math.log(m / bias) / spec.payoff.delta


def _cell_drifts(ps: PackedSpec, grid, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    d = np.empty(grid.n)
    for j in range(grid.n):
        d[j] = k._drift(ps.mp, u1[j], u2[j])
    return d


def _runs(d_node: np.ndarray, n: int, skip: bool) -> tuple[np.ndarray, np.ndarray]:
    """Maximal constant-drift cell runs (cells j = 0..n-2), for flow skipping."""
    run_lo = np.arange(n - 1, dtype=np.int64)
    run_hi = np.arange(n - 1, dtype=np.int64)
    if skip:
        for j in range(n - 3, -1, -1):
            if d_node[j + 1] == d_node[j]:
                run_hi[j] = run_hi[j + 1]
        for j in range(1, n - 1):
            if d_node[j - 1] == d_node[j]:
                run_lo[j] = run_lo[j - 1]
    return run_lo, run_hi


def _batch(
    spec: GameSpec,
    u1: PolicyTable,
    u2: PolicyTable,
    x0: float,
    n_paths: int,
    master_seed: int,
    stop_time: float,
    raw_seed: bool = False,
    start_counter: int = 0,
    record: bool = False,
    record_capacity: int = 0,
):
    """Run the path kernel and return its raw per-path outputs."""
    ps = PackedSpec.build(spec)
    grid = u1.grid
    zeta_tab = ps.zeta_table(grid)
    d_node = _cell_drifts(ps, grid, u1.values, u2.values)
    # per-cell running-payoff integration needs cell-by-cell flow
    skip = spec.payoff.running_kind is not RunningKind.CUSTOM
    run_lo, run_hi = _runs(d_node, grid.n, skip)
    out_run = np.empty(n_paths)
    out_state = np.empty(n_paths)
    out_time = np.empty(n_paths)
    out_status = np.empty(n_paths, np.int64)
    out_njumps = np.empty(n_paths, np.int64)
    out_used = np.empty(n_paths, np.int64)
    cap = record_capacity if record else 0
    rec_t = np.empty(cap)
    rec_player = np.empty(cap, np.int64)
    rec_y = np.empty(cap)
    rec_r = np.empty(cap)
    rec_x = np.empty(cap)
    k._run_paths(
        ps.mp, grid.xs, grid.n, grid.dx, d_node, run_lo, run_hi,
        u1.values, u2.values, zeta_tab,
        x0, n_paths, to_signed64(master_seed), stop_time, raw_seed, start_counter,
        out_run, out_state, out_time, out_status, out_njumps, out_used,
        record, rec_t, rec_player, rec_y, rec_r, rec_x,
    )
    return (
        out_run, out_state, out_time, out_status, out_njumps, out_used,
        (rec_t, rec_player, rec_y, rec_r, rec_x),
    )


def sample_path(
    spec: GameSpec,
    u1: PolicyTable,
    u2: PolicyTable,
    x0: float,
    stream: RngStream,
    t_max: Optional[float] = None,
) -> PathRecord:
    """Simulate one trajectory from the given stream, recording every jump."""
    if t_max is None:
        t_max = default_t_max(spec)
    lam = spec.lam1 + spec.lam2
    capacity = int(lam * t_max * 3.0) + 64
    run, state, tau, status, njumps, used, rec = _batch(
        spec, u1, u2, x0, 1, stream.seed, t_max,
        raw_seed=True, start_counter=stream.counter,
        record=True, record_capacity=capacity,
    )
    stream.counter += int(used[0])
    nj = int(njumps[0])
    rec_t, rec_player, rec_y, rec_r, rec_x = rec
    events = [
        JumpEvent(
            time=float(rec_t[i]),
            player=int(rec_player[i]),
            claim=float(rec_y[i]),
            retained=float(rec_r[i]),
            state_after=float(rec_x[i]),
        )
        for i in range(min(nj, capacity))
    ]
    st = int(status[0])
    if st == k.EXIT_BELOW:
        side = ExitSide.BELOW_A
    elif st == k.EXIT_ABOVE:
        side = ExitSide.ABOVE_B
    else:
        side = ExitSide.CENSORED
    exit_payoff = 0.0
    if side is not ExitSide.CENSORED:
        exit_payoff = math.exp(-spec.payoff.delta * float(tau[0])) * spec.h(
            float(state[0])
        )
    return PathRecord(
        x0=x0,
        events=events,
        final_time=float(tau[0]),
        final_state=float(state[0]),
        side=side,
        running_payoff=float(run[0]),
        exit_payoff=exit_payoff,
        uniforms_used=int(used[0]),
    )


def _h_vec(spec: GameSpec, states: np.ndarray) -> np.ndarray:
    return np.array([spec.h(float(s)) for s in states])


def estimate_J(
    spec: GameSpec,
    u1: PolicyTable,
    u2: PolicyTable,
    x0: float,
    n_paths: int,
    master_seed: int,
    t_max: Optional[float] = None,
) -> McEstimate:
    """Sample mean and standard error of the discounted performance functional.

    Censored paths contribute their accumulated running payoff only; the
    reported ``bias_bound`` is exp(-delta * t_max) times the payoff bound.
    """
    if n_paths < 2:
        raise DomainError(f"need at least 2 paths for a standard error, got {n_paths}")
    if t_max is None:
        t_max = default_t_max(spec)
    run, state, tau, status, _, _, _ = _batch(
        spec, u1, u2, x0, n_paths, master_seed, t_max
    )
    exited = status != k.STOPPED
    payoff = run.copy()
    if np.any(exited):
        payoff[exited] += np.exp(-spec.payoff.delta * tau[exited]) * _h_vec(
            spec, state[exited]
        )
    mean = float(np.mean(payoff))
    stderr = float(np.std(payoff, ddof=1) / math.sqrt(n_paths))
    return McEstimate(
        mean=mean,
        stderr=stderr,
        n_paths=n_paths,
        censored_fraction=float(np.mean(~exited)),
        bias_bound=math.exp(-spec.payoff.delta * t_max) * spec.value_bound(),
    )


def check_dpp(
    spec: GameSpec,
    u1: PolicyTable,
    u2: PolicyTable,
    x0: float,
    horizon: float,
    n_paths: int,
    master_seed: int,
    v: ValueTable,
) -> DppCheck:
    """Tower-identity residual: MC estimate of the right-hand side

        int_0^(tau ^ T) e^{-delta s} zeta ds
        + e^{-delta T} v(X_T) 1{T < tau} + e^{-delta tau} h(X_tau) 1{tau <= T}

    minus v(x0); vanishes up to MC and discretization error when v solves
    the policy-evaluation equation for (u1, u2).
    """
    if horizon < 0.0:
        raise DomainError(f"horizon must be nonnegative, got {horizon}")
    if n_paths < 2:
        raise DomainError(f"need at least 2 paths for a standard error, got {n_paths}")
    run, state, tau, status, _, _, _ = _batch(
        spec, u1, u2, x0, n_paths, master_seed, horizon
    )
    delta = spec.payoff.delta
    rhs = run.copy()
    exited = status != k.STOPPED
    if np.any(exited):
        rhs[exited] += np.exp(-delta * tau[exited]) * _h_vec(spec, state[exited])
    alive = ~exited
    if np.any(alive):
        vt = np.array([v(float(s)) for s in state[alive]])
        rhs[alive] += math.exp(-delta * horizon) * vt
    mean_rhs = float(np.mean(rhs))
    stderr = float(np.std(rhs, ddof=1) / math.sqrt(n_paths))
    v_x0 = float(v(x0))
    return DppCheck(
        residual=mean_rhs - v_x0,
        stderr=stderr,
        mean_rhs=mean_rhs,
        v_x0=v_x0,
        n_paths=n_paths,
    )
