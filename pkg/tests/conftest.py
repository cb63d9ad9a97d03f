"""Shared fixtures: small problem instances used across the suite."""

import logging

import pytest

import reinsgame as rg

logging.getLogger("reinsgame").setLevel(logging.ERROR)


def make_prop_spec(payoff: rg.PayoffSpec, a=-1.0, b=1.0) -> rg.GameSpec:
    """Small proportional-retention game with the published premium shapes."""
    claim1 = rg.Exponential(1.0)
    claim2 = rg.Exponential(2.0)
    return rg.GameSpec(
        lam1=1.0,
        lam2=1.0,
        claim1=claim1,
        claim2=claim2,
        retention=rg.RetentionKind.PROPORTIONAL,
        premium1=rg.PremiumModel(
            1.1, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, 1.0, 0.12, claim1
        ),
        premium2=rg.PremiumModel(
            2.16, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, 1.0, 0.12, claim2
        ),
        a=a,
        b=b,
        payoff=payoff,
        controls1=(0.0, 1.0),
        controls2=(0.0, 1.0),
    )


def make_xl_spec(payoff: rg.PayoffSpec, a=-1.0, b=1.0) -> rg.GameSpec:
    """Small excess-of-loss game, exponential claims."""
    claim1 = rg.Exponential(1.0)
    claim2 = rg.Exponential(2.0)
    return rg.GameSpec(
        lam1=1.0,
        lam2=1.0,
        claim1=claim1,
        claim2=claim2,
        retention=rg.RetentionKind.EXCESS_OF_LOSS,
        premium1=rg.PremiumModel(
            1.1, rg.PremiumPrinciple.EXPECTATION_ON_XL, 1.0, 0.12, claim1
        ),
        premium2=rg.PremiumModel(
            2.16, rg.PremiumPrinciple.EXPECTATION_ON_XL, 1.0, 0.12, claim2
        ),
        a=a,
        b=b,
        payoff=payoff,
        controls1=(0.0, rg.xl_control_bound(claim1)),
        controls2=(0.0, rg.xl_control_bound(claim2)),
    )


def make_symmetric_spec(payoff: rg.PayoffSpec, a=-1.0, b=1.0) -> rg.GameSpec:
    """Identical players: drift vanishes whenever the controls agree."""
    claim = rg.Exponential(1.0)
    prem = rg.PremiumModel(
        1.1, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, 1.0, 0.12, claim
    )
    return rg.GameSpec(
        lam1=1.0,
        lam2=1.0,
        claim1=claim,
        claim2=claim,
        retention=rg.RetentionKind.PROPORTIONAL,
        premium1=prem,
        premium2=prem,
        a=a,
        b=b,
        payoff=payoff,
        controls1=(0.0, 1.0),
        controls2=(0.0, 1.0),
    )


def make_driftonly_spec(
    c1: float, c2: float, a: float, b: float, delta: float
) -> rg.GameSpec:
    """Effectively jump-free game (intensities 1e-12) with constant drift c1 - c2."""
    lam = 1e-12
    claim = rg.Exponential(1.0)
    return rg.GameSpec(
        lam1=lam,
        lam2=lam,
        claim1=claim,
        claim2=claim,
        retention=rg.RetentionKind.PROPORTIONAL,
        premium1=rg.PremiumModel(
            c1, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, lam, 0.0, claim
        ),
        premium2=rg.PremiumModel(
            c2, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, lam, 0.0, claim
        ),
        a=a,
        b=b,
        payoff=rg.PayoffSpec.test_functional(delta),
        controls1=(0.0, 1.0),
        controls2=(0.0, 1.0),
    )


@pytest.fixture
def prop_test_spec():
    return make_prop_spec(rg.PayoffSpec.test_functional(0.5))


@pytest.fixture
def constant_prop_spec():
    return make_prop_spec(rg.PayoffSpec.constant_pair(0.5, 0.7))


@pytest.fixture
def constant_xl_spec():
    return make_xl_spec(rg.PayoffSpec.constant_pair(0.5, 0.7))
