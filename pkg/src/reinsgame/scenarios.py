"""Preset problem instances for the three published examples.

All presets share lam1 = lam2 = 1, delta = 0.05, eta = (0.1, 0.08), and
theta = (0.12, 0.12).  Gross premiums follow the expectation principle
``lam * (1 + eta) * E[Y]`` with the mean of the scenario's claim model, so
the Pareto scenario's base rates are 0.55 and 0.54 (which is what makes its
no-reinsurance drift positive and the upper boundary absorbing).
"""

from __future__ import annotations

from .errors import ConfigError
from .model import (
    ClaimModel,
    Exponential,
    GameSpec,
    ParetoII,
    PayoffSpec,
    PremiumModel,
    PremiumPrinciple,
    RetentionKind,
    base_premium,
    xl_control_bound,
)

SCENARIO_NAMES = ("prop-var-exp", "xl-exp-exp", "xl-exp-pareto")

LAM1 = 1.0
LAM2 = 1.0
DELTA = 0.05
ETA1 = 0.1
ETA2 = 0.08
THETA1 = 0.12
THETA2 = 0.12


def _premium(principle: PremiumPrinciple, lam, eta, theta, claim: ClaimModel):
    return PremiumModel(
        base_rate=base_premium(lam, eta, claim.mean),
        principle=principle,
        lam=lam,
        theta=theta,
        claim=claim,
    )


def _build(retention: RetentionKind, claim1, claim2, a, b) -> GameSpec:
    if retention is RetentionKind.PROPORTIONAL:
        principle = PremiumPrinciple.VARIANCE_ON_PROPORTIONAL
        controls1 = (0.0, 1.0)
        controls2 = (0.0, 1.0)
    else:
        principle = PremiumPrinciple.EXPECTATION_ON_XL
        controls1 = (0.0, xl_control_bound(claim1))
        controls2 = (0.0, xl_control_bound(claim2))
    return GameSpec(
        lam1=LAM1,
        lam2=LAM2,
        claim1=claim1,
        claim2=claim2,
        retention=retention,
        premium1=_premium(principle, LAM1, ETA1, THETA1, claim1),
        premium2=_premium(principle, LAM2, ETA2, THETA2, claim2),
        a=a,
        b=b,
        payoff=PayoffSpec.test_functional(DELTA),
        controls1=controls1,
        controls2=controls2,
    )


def make_scenario(name: str) -> GameSpec:
    """Build one of the preset game specifications by name."""
    if name == "prop-var-exp":
        return _build(
            RetentionKind.PROPORTIONAL, Exponential(1.0), Exponential(2.0), -4.0, 4.0
        )
    if name == "xl-exp-exp":
        return _build(
            RetentionKind.EXCESS_OF_LOSS, Exponential(1.0), Exponential(2.0), -2.0, 2.0
        )
    if name == "xl-exp-pareto":
        return _build(
            RetentionKind.EXCESS_OF_LOSS, ParetoII(3.0, 1.0), ParetoII(3.0, 1.0), -2.0, 2.0
        )
    raise ConfigError(
        f"unknown scenario {name!r}; expected one of {', '.join(SCENARIO_NAMES)} or 'custom'"
    )
