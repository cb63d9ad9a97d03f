"""Problem definition: claim distributions, retention functions, premium
principles, payoff functions, and the validated game specification.

The state variable is the difference of the two insurers' surpluses; player 1
pushes it up (their claims pull it down), player 2 pushes it down (their
claims pull it up).  Everything here is immutable after construction and safe
to share across threads.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

from .errors import DomainError, SpecError

logger = logging.getLogger(__name__)

#: Tail mass beyond which claim-size integrals are truncated.
TAIL_EPS = 1e-13


# ---------------------------------------------------------------------------
# claim-size distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    """Exponential claim sizes with mean ``mu``."""

    mu: float

    def __post_init__(self):
        if not (self.mu > 0.0 and math.isfinite(self.mu)):
            raise SpecError(f"exponential mean must be positive, got {self.mu}")

    @property
    def mean(self) -> float:
        return self.mu

    def cdf(self, y: float) -> float:
        if y <= 0.0:
            return 0.0
        return -math.expm1(-y / self.mu)

    def sf(self, y: float) -> float:
        if y <= 0.0:
            return 1.0
        return math.exp(-y / self.mu)

    def density(self, y: float) -> float:
        if y < 0.0:
            return 0.0
        return math.exp(-y / self.mu) / self.mu

    def inverse_cdf(self, p: float) -> float:
        _check_prob(p)
        return -self.mu * math.log1p(-p)

    def tail_cutoff(self, eps: float = TAIL_EPS) -> float:
        return -self.mu * math.log(eps)

    def stop_loss(self, m: float) -> float:
        """E[(Y - m)+], the reinsured mean under excess of loss at level m."""
        return self.mu * math.exp(-m / self.mu)


@dataclass(frozen=True)
class ParetoII:
    """Pareto type II (Lomax) claim sizes with shape ``alpha`` and scale ``beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        # alpha > 1 keeps the mean finite.
        if not (self.alpha > 1.0 and math.isfinite(self.alpha)):
            raise SpecError(f"Pareto shape must exceed 1, got {self.alpha}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise SpecError(f"Pareto scale must be positive, got {self.beta}")

    @property
    def mean(self) -> float:
        return self.beta / (self.alpha - 1.0)

    def cdf(self, y: float) -> float:
        if y <= 0.0:
            return 0.0
        return -math.expm1(-self.alpha * math.log1p(y / self.beta))

    def sf(self, y: float) -> float:
        if y <= 0.0:
            return 1.0
        return math.exp(-self.alpha * math.log1p(y / self.beta))

    def density(self, y: float) -> float:
        if y < 0.0:
            return 0.0
        return (self.alpha / self.beta) * math.exp(
            -(self.alpha + 1.0) * math.log1p(y / self.beta)
        )

    def inverse_cdf(self, p: float) -> float:
        _check_prob(p)
        return self.beta * math.expm1(-math.log1p(-p) / self.alpha)

    def tail_cutoff(self, eps: float = TAIL_EPS) -> float:
        return self.beta * math.expm1(-math.log(eps) / self.alpha)

    def stop_loss(self, m: float) -> float:
        """E[(Y - m)+] = beta^alpha / (alpha - 1) * (m + beta)^(1 - alpha)."""
        return (
            self.beta**self.alpha
            / (self.alpha - 1.0)
            * (m + self.beta) ** (1.0 - self.alpha)
        )


ClaimModel = Union[Exponential, ParetoII]


def _check_prob(p: float) -> None:
    if not (0.0 <= p < 1.0):
        raise DomainError(f"probability must lie in [0, 1), got {p}")


def claim_sample(model: ClaimModel, p: float) -> float:
    """Inverse-CDF transform of a uniform draw into a claim size."""
    return model.inverse_cdf(p)


# ---------------------------------------------------------------------------
# retention functions
# ---------------------------------------------------------------------------


class RetentionKind(Enum):
    """How much of each claim the insurer keeps under its reinsurance contract."""

    PROPORTIONAL = "proportional"  # r(y, u) = y * u,        u in [0, 1]
    EXCESS_OF_LOSS = "excess_of_loss"  # r(y, M) = min(y, M),  M in [0, inf]

    @property
    def no_reinsurance(self) -> float:
        """The control value under which the insurer retains every claim fully."""
        return 1.0 if self is RetentionKind.PROPORTIONAL else math.inf


def retention(kind: RetentionKind, y: float, u: float) -> float:
    """Retained part of a claim of size ``y`` under control ``u``."""
    if y < 0.0:
        raise DomainError(f"claim size must be nonnegative, got {y}")
    if kind is RetentionKind.PROPORTIONAL:
        if not (0.0 <= u <= 1.0):
            raise DomainError(f"proportional control must lie in [0, 1], got {u}")
        return y * u
    if u < 0.0:
        raise DomainError(f"excess-of-loss level must be nonnegative, got {u}")
    return min(y, u)


def rho(kind: RetentionKind, z: float, u: float) -> float:
    """Smallest claim size whose retained part reaches ``z`` (+inf if none does)."""
    if z < 0.0:
        raise DomainError(f"distance to boundary must be nonnegative, got {z}")
    if z == 0.0:
        return 0.0
    if kind is RetentionKind.PROPORTIONAL:
        if u <= 0.0:
            return math.inf
        return z / u
    return z if z <= u else math.inf


# ---------------------------------------------------------------------------
# premium models
# ---------------------------------------------------------------------------


class PremiumPrinciple(Enum):
    VARIANCE_ON_PROPORTIONAL = "variance_on_proportional"
    EXPECTATION_ON_XL = "expectation_on_xl"


def base_premium(lam: float, eta: float, mean: float) -> float:
    """Expectation-principle gross premium rate lam * (1 + eta) * mean."""
    if not (lam > 0.0 and mean > 0.0):
        raise SpecError(f"intensity and mean claim must be positive, got {lam}, {mean}")
    if eta < 0.0:
        raise SpecError(f"safety loading must be nonnegative, got {eta}")
    return lam * (1.0 + eta) * mean


@dataclass(frozen=True)
class PremiumModel:
    """Net premium income of one insurer as a function of its reinsurance control.

    ``base_rate`` is the gross premium; the reinsurance premium charged by the
    reinsurer is subtracted according to ``principle``.
    """

    base_rate: float
    principle: PremiumPrinciple
    lam: float
    theta: float
    claim: ClaimModel

    def __post_init__(self):
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise SpecError(f"claim intensity must be positive, got {self.lam}")
        if self.theta < 0.0:
            raise SpecError(f"reinsurance loading must be nonnegative, got {self.theta}")
        if not math.isfinite(self.base_rate):
            raise SpecError(f"base premium rate must be finite, got {self.base_rate}")

    def net_rate(self, u: float) -> float:
        """Drift contribution under control ``u`` (full retention returns base_rate)."""
        mean = self.claim.mean
        if self.principle is PremiumPrinciple.VARIANCE_ON_PROPORTIONAL:
            if not (0.0 <= u <= 1.0):
                raise DomainError(f"proportional control must lie in [0, 1], got {u}")
            ceded = 1.0 - u
            return self.base_rate - self.lam * (
                mean * ceded + self.theta * mean * mean * ceded * ceded
            )
        if u < 0.0:
            raise DomainError(f"excess-of-loss level must be nonnegative, got {u}")
        return self.base_rate - self.lam * (1.0 + self.theta) * self.claim.stop_loss(u)


def net_rate(premium: PremiumModel, u: float) -> float:
    return premium.net_rate(u)


def xl_control_bound(claim: ClaimModel, tail: float = 1e-6) -> float:
    """Truncation level M_max with strictly less than ``tail`` claim mass above it."""
    m = claim.inverse_cdf(1.0 - tail)
    while claim.sf(m) >= tail:
        m *= 1.0 + 1e-9
    return m


# ---------------------------------------------------------------------------
# payoff specification
# ---------------------------------------------------------------------------


class ExitKind(Enum):
    INDICATOR_ABOVE = "indicator_above"  # amplitude * 1{x >= b}
    CONSTANT = "constant"
    CUSTOM = "custom"


class RunningKind(Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PayoffSpec:
    """Discount rate plus the running payoff zeta and the exit payoff h.

    ``zeta`` lives on [a, b]; ``h`` on the complement of (a, b) and must be
    monotone nondecreasing.  Custom callables are sampled onto grids by the
    numerical modules.
    """

    delta: float
    running_kind: RunningKind = RunningKind.ZERO
    running_value: float = 0.0
    running_fn: Optional[Callable[[float], float]] = field(default=None, compare=False)
    exit_kind: ExitKind = ExitKind.INDICATOR_ABOVE
    exit_value: float = 1.0
    exit_fn: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise SpecError(f"discount rate must be positive, got {self.delta}")
        if self.running_kind is RunningKind.CONSTANT and self.running_value < 0.0:
            raise SpecError("running payoff must be nonnegative")
        if self.running_kind is RunningKind.CUSTOM and self.running_fn is None:
            raise SpecError("custom running payoff needs a callable")
        if self.exit_kind is ExitKind.CUSTOM and self.exit_fn is None:
            raise SpecError("custom exit payoff needs a callable")
        if self.exit_kind is ExitKind.INDICATOR_ABOVE:
            logger.warning(
                "indicator exit payoff is not Lipschitz at the upper endpoint; "
                "Lipschitz check skipped"
            )

    @classmethod
    def test_functional(cls, delta: float) -> "PayoffSpec":
        """zeta = 0 and h = 1{x >= b}: discounted upper-exit probability."""
        return cls(delta=delta)

    @classmethod
    def constant_pair(cls, delta: float, k: float) -> "PayoffSpec":
        """zeta = delta*k and h = k, whose value function is identically k."""
        return cls(
            delta=delta,
            running_kind=RunningKind.CONSTANT,
            running_value=delta * k,
            exit_kind=ExitKind.CONSTANT,
            exit_value=k,
        )


# ---------------------------------------------------------------------------
# game specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameSpec:
    """A full problem instance for the two-insurer difference game on [a, b]."""

    lam1: float
    lam2: float
    claim1: ClaimModel
    claim2: ClaimModel
    retention: RetentionKind
    premium1: PremiumModel
    premium2: PremiumModel
    a: float
    b: float
    payoff: PayoffSpec
    controls1: tuple[float, float]
    controls2: tuple[float, float]

    def __post_init__(self):
        if not (self.a < self.b and math.isfinite(self.a) and math.isfinite(self.b)):
            raise SpecError(f"need a < b with finite endpoints, got [{self.a}, {self.b}]")
        for i, lam in ((1, self.lam1), (2, self.lam2)):
            if not (lam > 0.0 and math.isfinite(lam)):
                raise SpecError(f"jump intensity of player {i} must be positive, got {lam}")
        for i, (lo, hi) in ((1, self.controls1), (2, self.controls2)):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise SpecError(f"control set of player {i} must be a compact interval")
        for i, (prem, lam, claim) in (
            (1, (self.premium1, self.lam1, self.claim1)),
            (2, (self.premium2, self.lam2, self.claim2)),
        ):
            if prem.lam != lam or prem.claim != claim:
                raise SpecError(
                    f"premium model of player {i} must share the player's intensity and claim model"
                )
        expected = (
            PremiumPrinciple.VARIANCE_ON_PROPORTIONAL
            if self.retention is RetentionKind.PROPORTIONAL
            else PremiumPrinciple.EXPECTATION_ON_XL
        )
        for i, prem in ((1, self.premium1), (2, self.premium2)):
            if prem.principle is not expected:
                raise SpecError(
                    f"premium principle of player {i} does not match the retention kind"
                )

    # -- payoff evaluation ---------------------------------------------------

    def zeta(self, x: float) -> float:
        p = self.payoff
        if p.running_kind is RunningKind.ZERO:
            return 0.0
        if p.running_kind is RunningKind.CONSTANT:
            return p.running_value
        return p.running_fn(x)

    def h(self, x: float) -> float:
        p = self.payoff
        if p.exit_kind is ExitKind.INDICATOR_ABOVE:
            return p.exit_value if x >= self.b else 0.0
        if p.exit_kind is ExitKind.CONSTANT:
            return p.exit_value
        return p.exit_fn(x)

    def admissible(self, player: int, u: float) -> bool:
        lo, hi = self.controls1 if player == 1 else self.controls2
        if self.retention is RetentionKind.EXCESS_OF_LOSS and math.isinf(u) and u > 0:
            return True  # distinguished no-reinsurance point
        return lo <= u <= hi

    def no_reinsurance(self) -> float:
        return self.retention.no_reinsurance

    def value_bound(self) -> float:
        """Bound M = sup|zeta|/delta + sup|h| on every performance functional."""
        p = self.payoff
        if p.running_kind is RunningKind.ZERO:
            z_sup = 0.0
        elif p.running_kind is RunningKind.CONSTANT:
            z_sup = abs(p.running_value)
        else:
            z_sup = max(
                abs(p.running_fn(self.a + k * (self.b - self.a) / 256.0))
                for k in range(257)
            )
        if p.exit_kind is ExitKind.CUSTOM:
            reach1 = self.claim1.tail_cutoff(1e-9)
            reach2 = self.claim2.tail_cutoff(1e-9)
            h_sup = max(
                max(abs(p.exit_fn(self.a - k * reach1 / 256.0)) for k in range(257)),
                max(abs(p.exit_fn(self.b + k * reach2 / 256.0)) for k in range(257)),
            )
        else:
            h_sup = abs(p.exit_value)
        return z_sup / p.delta + h_sup
