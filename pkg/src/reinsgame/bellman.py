"""Bellman-Isaacs operator: grid types, jump integrals, and Hamiltonians.

The operator at state x, value table v, and controls (u1, u2) is

    drift * v'(x)
    + lam1 * [staying integral + exit integral over player-1 claims]
    + lam2 * [staying integral + exit integral over player-2 claims]
    - (delta + lam1 + lam2) * v(x) + zeta(x),

with the jump integrals split at the claim threshold rho(z, u).  All heavy
lifting lives in ``_kernels``; this module owns the array types and packs a
``GameSpec`` into the kernels' flat representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels as k
from .errors import SpecError
from .model import (
    ClaimModel,
    Exponential,
    ExitKind,
    GameSpec,
    ParetoII,
    PremiumPrinciple,
    RetentionKind,
    RunningKind,
    TAIL_EPS,
)

#: Points per side in tabulated custom exit payoffs.
H_TABLE_SIZE = 2049


class Side(Enum):
    DOWN = k.DOWN  # player-1 claims
    UP = k.UP  # player-2 claims


@dataclass(frozen=True)
class Grid:
    """Equidistant grid x_k = a + k*(b-a)/(n-1), k = 0..n-1."""

    a: float
    b: float
    n: int
    xs: np.ndarray = field(init=False, repr=False, compare=False)
    dx: float = field(init=False, compare=False)

    def __post_init__(self):
        if self.n < 3:
            raise SpecError(f"grid needs at least 3 points, got {self.n}")
        if not self.a < self.b:
            raise SpecError(f"grid needs a < b, got [{self.a}, {self.b}]")
        object.__setattr__(self, "xs", np.linspace(self.a, self.b, self.n))
        object.__setattr__(self, "dx", (self.b - self.a) / (self.n - 1))

    def index_of(self, x: float) -> int:
        """Nearest-left node index; clamps to [0, n-1]."""
        j = int((x - self.a) / self.dx)
        if j < 0:
            return 0
        if j > self.n - 1:
            return self.n - 1
        if j + 1 <= self.n - 1 and self.xs[j + 1] <= x:
            return j + 1
        return j


@dataclass
class ValueTable:
    """Grid approximation of a value function, linear between nodes."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n,):
            raise SpecError(
                f"value table needs {self.grid.n} entries, got {self.values.shape})"
            )
        if not np.all(np.isfinite(self.values)):
            raise SpecError("value table entries must be finite")

    def __call__(self, x: float) -> float:
        g = self.grid
        return k._interp(self.values, g.xs, g.n, g.dx, x)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ValueTable":
        return cls(grid, np.full(grid.n, value))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ValueTable":
        return cls(grid, np.array([fn(x) for x in grid.xs]))


@dataclass(frozen=True)
class ControlSet:
    """Discretized compact control set, ascending; may end in the distinguished
    no-reinsurance point +inf for excess of loss."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise SpecError("control set must be a nonempty 1-D array")
        if np.any(np.diff(vals) <= 0):
            raise SpecError("control values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def for_player(cls, spec: GameSpec, player: int, m: int) -> "ControlSet":
        """m equally spaced values covering the player's interval, plus the
        no-reinsurance point for excess of loss."""
        lo, hi = spec.controls1 if player == 1 else spec.controls2
        vals = np.linspace(lo, hi, m)
        if spec.retention is RetentionKind.EXCESS_OF_LOSS:
            vals = np.append(vals, np.inf)
        return cls(vals)

    def __len__(self) -> int:
        return int(self.values.size)


# ---------------------------------------------------------------------------
# spec packing
# ---------------------------------------------------------------------------

_EMPTY = np.zeros(2)


def _claim_code(c: ClaimModel):
    if isinstance(c, Exponential):
        return k.EXPONENTIAL, c.mu, 0.0
    if isinstance(c, ParetoII):
        return k.PARETO_II, c.alpha, c.beta
    raise SpecError(f"unsupported claim model {type(c).__name__}")


def pack_spec(spec: GameSpec) -> np.ndarray:
    """Flatten a GameSpec into the kernels' model-pack vector."""
    mp = np.zeros(k.MP_SIZE)
    mp[k.MP_RETENTION] = (
        k.PROPORTIONAL if spec.retention is RetentionKind.PROPORTIONAL else k.EXCESS_OF_LOSS
    )
    mp[k.MP_LAM1] = spec.lam1
    mp[k.MP_LAM2] = spec.lam2
    mp[k.MP_DELTA] = spec.payoff.delta
    mp[k.MP_A] = spec.a
    mp[k.MP_B] = spec.b
    ck1, p11, p12 = _claim_code(spec.claim1)
    ck2, p21, p22 = _claim_code(spec.claim2)
    mp[k.MP_CK1], mp[k.MP_CP11], mp[k.MP_CP12] = ck1, p11, p12
    mp[k.MP_CK2], mp[k.MP_CP21], mp[k.MP_CP22] = ck2, p21, p22
    mp[k.MP_YCUT1] = spec.claim1.tail_cutoff(TAIL_EPS)
    mp[k.MP_YCUT2] = spec.claim2.tail_cutoff(TAIL_EPS)
    for slot_pp, slot_base, slot_theta, slot_mean, prem in (
        (k.MP_PP1, k.MP_BASE1, k.MP_THETA1, k.MP_MEAN1, spec.premium1),
        (k.MP_PP2, k.MP_BASE2, k.MP_THETA2, k.MP_MEAN2, spec.premium2),
    ):
        mp[slot_pp] = (
            k.VAR_PROP
            if prem.principle is PremiumPrinciple.VARIANCE_ON_PROPORTIONAL
            else k.EXP_XL
        )
        mp[slot_base] = prem.base_rate
        mp[slot_theta] = prem.theta
        mp[slot_mean] = prem.claim.mean
    pk = spec.payoff.exit_kind
    mp[k.MP_HKIND] = {
        ExitKind.INDICATOR_ABOVE: k.H_INDICATOR,
        ExitKind.CONSTANT: k.H_CONSTANT,
        ExitKind.CUSTOM: k.H_TABULATED,
    }[pk]
    mp[k.MP_HC] = spec.payoff.exit_value
    mp[k.MP_ZKIND] = {
        RunningKind.ZERO: k.Z_ZERO,
        RunningKind.CONSTANT: k.Z_CONSTANT,
        RunningKind.CUSTOM: k.Z_TABULATED,
    }[spec.payoff.running_kind]
    mp[k.MP_ZC] = spec.payoff.running_value
    return mp


@dataclass
class PackedSpec:
    """A GameSpec flattened for the kernels, with payoff tables."""

    spec: GameSpec
    mp: np.ndarray
    h_lo: np.ndarray
    h_lo_x0: float
    h_lo_dx: float
    h_hi: np.ndarray
    h_hi_x0: float
    h_hi_dx: float

    @classmethod
    def build(cls, spec: GameSpec) -> "PackedSpec":
        mp = pack_spec(spec)
        if spec.payoff.exit_kind is ExitKind.CUSTOM:
            reach1 = spec.claim1.tail_cutoff(1e-9)
            reach2 = spec.claim2.tail_cutoff(1e-9)
            if spec.retention is RetentionKind.EXCESS_OF_LOSS:
                reach1 = min(reach1, spec.controls1[1])
                reach2 = min(reach2, spec.controls2[1])
            lo_xs = np.linspace(spec.a - max(reach1, 1e-6), spec.a, H_TABLE_SIZE)
            hi_xs = np.linspace(spec.b, spec.b + max(reach2, 1e-6), H_TABLE_SIZE)
            h_lo = np.array([spec.payoff.exit_fn(x) for x in lo_xs])
            h_hi = np.array([spec.payoff.exit_fn(x) for x in hi_xs])
            if np.any(np.diff(h_lo) < 0) or np.any(np.diff(h_hi) < 0) or (
                h_lo[-1] > h_hi[0]
            ):
                raise SpecError("custom exit payoff must be monotone nondecreasing")
            return cls(
                spec, mp,
                h_lo, float(lo_xs[0]), float(lo_xs[1] - lo_xs[0]),
                h_hi, float(hi_xs[0]), float(hi_xs[1] - hi_xs[0]),
            )
        return cls(spec, mp, _EMPTY, 0.0, 1.0, _EMPTY, 0.0, 1.0)

    def zeta_table(self, grid: Grid) -> np.ndarray:
        tab = np.array([self.spec.zeta(x) for x in grid.xs], dtype=np.float64)
        if not np.all(np.isfinite(tab)):
            raise SpecError("running payoff must be finite on the grid")
        if np.any(tab < 0.0):
            raise SpecError("running payoff must be nonnegative on [a, b]")
        return tab

    def boundary_payoffs(self) -> tuple[float, float]:
        """(h(a) limit from below, h(b)) used when an endpoint absorbs."""
        return self.spec.h(self.spec.a), self.spec.h(self.spec.b)


# ---------------------------------------------------------------------------
# operator API
# ---------------------------------------------------------------------------


def drift(spec: GameSpec, u1: float, u2: float) -> float:
    """Net drift of the difference process under the two controls."""
    return spec.premium1.net_rate(u1) - spec.premium2.net_rate(u2)


def inner_jump_integral(
    spec: GameSpec, v: ValueTable, x: float, u: float, side: Side,
    packed: Optional[PackedSpec] = None,
) -> float:
    """Jump integral of v over post-jump states inside [a, b] (no intensity factor)."""
    ps = packed or PackedSpec.build(spec)
    g = v.grid
    return k._inner_integral(ps.mp, v.values, g.xs, g.n, g.dx, x, u, side.value)


def exit_jump_integral(
    spec: GameSpec, x: float, u: float, side: Side,
    packed: Optional[PackedSpec] = None,
) -> float:
    """Tail integral of the exit payoff over post-jump states outside [a, b]."""
    ps = packed or PackedSpec.build(spec)
    return k._exit_integral(
        ps.mp, ps.h_lo, ps.h_lo_x0, ps.h_lo_dx, ps.h_hi, ps.h_hi_x0, ps.h_hi_dx,
        x, u, side.value,
    )


def bi_operator(
    spec: GameSpec, v: ValueTable, x: float, dv: float, u1: float, u2: float,
    packed: Optional[PackedSpec] = None,
) -> float:
    """Operator value at x with caller-supplied one-sided derivative dv."""
    ps = packed or PackedSpec.build(spec)
    g = v.grid
    return k._op_value(
        ps.mp, ps.h_lo, ps.h_lo_x0, ps.h_lo_dx, ps.h_hi, ps.h_hi_x0, ps.h_hi_dx,
        v.values, g.xs, g.n, g.dx, x, v(x), spec.zeta(x), dv, u1, u2,
    )


def upwind_derivative(v: ValueTable, x_index: int, d: float) -> float:
    """Forward difference for d > 0, backward for d < 0, into the interior at ends."""
    g = v.grid
    return k._upwind_dv(v.values, g.n, g.dx, x_index, d)


@dataclass(frozen=True)
class HamiltonianResult:
    value: float
    outer_control: float
    inner_control: float


def _hamiltonian(
    spec: GameSpec, v: ValueTable, x: float,
    controls1: ControlSet, controls2: ControlSet,
    upper: bool, packed: Optional[PackedSpec],
) -> HamiltonianResult:
    ps = packed or PackedSpec.build(spec)
    g = v.grid
    x_index = g.index_of(x)
    vx = v(x)
    zx = spec.zeta(x)

    def op(u1: float, u2: float) -> float:
        d = k._drift(ps.mp, u1, u2)
        dv = k._upwind_dv(v.values, g.n, g.dx, x_index, d)
        return k._op_value(
            ps.mp, ps.h_lo, ps.h_lo_x0, ps.h_lo_dx, ps.h_hi, ps.h_hi_x0, ps.h_hi_dx,
            v.values, g.xs, g.n, g.dx, x, vx, zx, dv, u1, u2,
        )

    outer = controls2 if upper else controls1
    inner = controls1 if upper else controls2
    tie = k.TIE_EPS
    inner_vals = np.empty(len(outer))
    inner_args = np.empty(len(outer))
    for i, co in enumerate(outer.values):
        vals = np.array([op(ci, co) if upper else op(co, ci) for ci in inner.values])
        best = vals.max() if upper else vals.min()
        within = vals >= best - tie if upper else vals <= best + tie
        inner_vals[i] = best
        inner_args[i] = inner.values[int(np.argmax(within))]
    best = inner_vals.min() if upper else inner_vals.max()
    within = inner_vals <= best + tie if upper else inner_vals >= best - tie
    pick = int(np.argmax(within))
    return HamiltonianResult(float(best), float(outer.values[pick]), float(inner_args[pick]))


def upper_hamiltonian(
    spec: GameSpec, v: ValueTable, x: float,
    controls1: ControlSet, controls2: ControlSet,
    packed: Optional[PackedSpec] = None,
) -> HamiltonianResult:
    """inf over u2 of sup over u1 of the operator; ties go to smaller controls."""
    return _hamiltonian(spec, v, x, controls1, controls2, True, packed)


def lower_hamiltonian(
    spec: GameSpec, v: ValueTable, x: float,
    controls1: ControlSet, controls2: ControlSet,
    packed: Optional[PackedSpec] = None,
) -> HamiltonianResult:
    """sup over u1 of inf over u2 of the operator; ties go to smaller controls."""
    return _hamiltonian(spec, v, x, controls1, controls2, False, packed)


def extended_value(spec: GameSpec, v: ValueTable, x: float) -> float:
    """The value table inside [a, b], the exit payoff h outside."""
    if x < spec.a or x > spec.b:
        return spec.h(x)
    return v(x)
