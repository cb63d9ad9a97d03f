"""Operator layer: grid types, jump integrals, operator value, Hamiltonians.

Quadrature results are checked against scipy.integrate.quad as the
independent oracle; minimax facts against brute-force matrix reductions.
"""

import math

import numpy as np
import pytest
from scipy import integrate

import reinsgame as rg
from reinsgame import Side
from reinsgame.bellman import PackedSpec, upwind_derivative

from conftest import make_prop_spec, make_symmetric_spec, make_driftonly_spec


@pytest.fixture
def grid():
    return rg.Grid(-1.0, 1.0, 41)


class TestGridAndTables:
    def test_grid_nodes(self):
        g = rg.Grid(-4.0, 4.0, 801)
        assert g.xs[0] == -4.0 and g.xs[-1] == 4.0
        assert g.n == 801
        assert np.all(np.diff(g.xs) > 0)
        assert g.dx == pytest.approx(0.01, rel=1e-15)

    def test_grid_needs_three_points(self):
        with pytest.raises(rg.SpecError):
            rg.Grid(0.0, 1.0, 2)

    def test_index_of(self):
        g = rg.Grid(0.0, 1.0, 11)
        assert g.index_of(0.0) == 0
        assert g.index_of(0.2) == 2
        assert g.index_of(0.25) == 2
        assert g.index_of(1.0) == 10

    def test_value_table_interp(self, grid):
        v = rg.ValueTable.from_function(grid, lambda x: x * x)
        for k in range(grid.n):
            assert v(grid.xs[k]) == grid.xs[k] ** 2
        mid = 0.5 * (grid.xs[3] + grid.xs[4])
        assert v(mid) == pytest.approx(0.5 * (grid.xs[3] ** 2 + grid.xs[4] ** 2), abs=1e-15)

    def test_value_table_rejects_nonfinite(self, grid):
        vals = np.zeros(grid.n)
        vals[5] = math.nan
        with pytest.raises(rg.SpecError):
            rg.ValueTable(grid, vals)

    def test_control_set_for_player(self, prop_test_spec, constant_xl_spec):
        cs = rg.ControlSet.for_player(prop_test_spec, 1, 5)
        assert np.array_equal(cs.values, [0.0, 0.25, 0.5, 0.75, 1.0])
        cs_xl = rg.ControlSet.for_player(constant_xl_spec, 2, 5)
        assert cs_xl.values[0] == 0.0
        assert math.isinf(cs_xl.values[-1])
        assert len(cs_xl) == 6


class TestDrift:
    def test_published_parameters(self, prop_test_spec):
        assert rg.drift(prop_test_spec, 1.0, 1.0) == pytest.approx(-1.06, abs=1e-14)
        assert rg.drift(prop_test_spec, 0.0, 0.0) == pytest.approx(0.30, abs=1e-14)

    def test_symmetric_spec_zero_drift(self):
        spec = make_symmetric_spec(rg.PayoffSpec.test_functional(0.5))
        for u in (0.0, 0.3, 1.0):
            assert rg.drift(spec, u, u) == 0.0


class TestInnerJumpIntegral:
    def test_constant_table_mass(self, prop_test_spec, grid):
        spec = prop_test_spec
        v = rg.ValueTable.constant(grid, 0.8)
        for u, x, side in [(0.5, 0.3, Side.DOWN), (0.25, -0.4, Side.UP), (1.0, 0.9, Side.DOWN)]:
            z = x - spec.a if side is Side.DOWN else spec.b - x
            claim = spec.claim1 if side is Side.DOWN else spec.claim2
            expected = 0.8 * claim.cdf(rg.rho(spec.retention, z, u))
            got = rg.inner_jump_integral(spec, v, x, u, side)
            assert got == pytest.approx(expected, abs=1e-10)

    def test_full_reinsurance_returns_value_at_x(self, prop_test_spec, grid):
        v = rg.ValueTable.from_function(grid, lambda x: 0.1 + 0.3 * (x + 1))
        for x in (-0.7, 0.0, 0.42):
            got = rg.inner_jump_integral(prop_test_spec, v, x, 0.0, Side.DOWN)
            assert got == pytest.approx(v(x), abs=1e-14)

    def test_linear_table_against_quad_oracle(self, prop_test_spec, grid):
        # v(x) = x is globally linear, so interpolation is exact and the
        # integral has the closed form integral of (x - u*y) f(y) dy.
        spec = prop_test_spec
        v = rg.ValueTable.from_function(grid, lambda x: x)
        mu = spec.claim1.mu
        for x, u in [(0.6, 1.0), (0.3, 0.5), (0.9, 0.8)]:
            rho = (x - spec.a) / u
            oracle, err = integrate.quad(
                lambda y: (x - u * y) * math.exp(-y / mu) / mu, 0.0, rho
            )
            got = rg.inner_jump_integral(spec, v, x, u, Side.DOWN)
            assert got == pytest.approx(oracle, abs=max(1e-10, 10 * err))

    def test_xl_point_mass_against_quad_oracle(self, constant_xl_spec, grid):
        # retained size saturates at M < z: point mass of sf(M) at x + M
        spec = constant_xl_spec
        v = rg.ValueTable.from_function(grid, lambda x: 0.2 + 0.4 * (x + 1))
        x, m = -0.5, 0.6  # z = b - x = 1.5 > m
        claim = spec.claim2
        oracle, err = integrate.quad(
            lambda y: v(x + min(y, m)) * claim.density(y), 0.0, m
        )
        oracle += v(x + m) * claim.sf(m)
        got = rg.inner_jump_integral(spec, v, x, m, Side.UP)
        assert got == pytest.approx(oracle, abs=max(1e-10, 10 * err))

    @pytest.mark.parametrize(
        "claim,retention,controls",
        [
            (rg.Exponential(2.0), rg.RetentionKind.PROPORTIONAL, [0.05, 0.5, 1.0]),
            (rg.ParetoII(3.0, 1.0), rg.RetentionKind.PROPORTIONAL, [0.05, 0.5, 1.0]),
            (rg.Exponential(1.0), rg.RetentionKind.EXCESS_OF_LOSS, [0.3, 2.0, math.inf]),
            (rg.ParetoII(3.0, 1.0), rg.RetentionKind.EXCESS_OF_LOSS, [0.3, 2.0, math.inf]),
        ],
    )
    def test_quadrature_normalization(self, claim, retention, controls):
        # staying mass + exiting mass must reconstruct the full claim measure
        if retention is rg.RetentionKind.PROPORTIONAL:
            principle = rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL
            cset = (0.0, 1.0)
        else:
            principle = rg.PremiumPrinciple.EXPECTATION_ON_XL
            cset = (0.0, rg.xl_control_bound(claim))
        prem = rg.PremiumModel(1.1, principle, 1.0, 0.12, claim)
        spec = rg.GameSpec(
            lam1=1.0, lam2=1.0, claim1=claim, claim2=claim, retention=retention,
            premium1=prem, premium2=prem, a=-1.0, b=1.0,
            payoff=rg.PayoffSpec.test_functional(0.5),
            controls1=cset, controls2=cset,
        )
        g = rg.Grid(-1.0, 1.0, 41)
        ones = rg.ValueTable.constant(g, 1.0)
        for x in (-0.9, -0.2, 0.55, 1.0):
            for u in controls:
                for side in (Side.DOWN, Side.UP):
                    z = x - spec.a if side is Side.DOWN else spec.b - x
                    stay = rg.inner_jump_integral(spec, ones, x, u, side)
                    exit_mass = 1.0 - claim.cdf(rg.rho(retention, z, u))
                    assert stay + exit_mass == pytest.approx(1.0, abs=1e-8)


class TestExitJumpIntegral:
    def test_indicator_down_side_is_zero(self, prop_test_spec):
        for x in (-0.9, 0.0, 1.0):
            for u in (0.0, 0.5, 1.0):
                assert rg.exit_jump_integral(prop_test_spec, x, u, Side.DOWN) == 0.0

    def test_indicator_up_side_closed_form(self):
        # x = 3, b = 4, proportional u2 = 1, exponential mu2 = 2: sf(1) = e^{-1/2}
        spec = make_prop_spec(rg.PayoffSpec.test_functional(0.05), a=-4.0, b=4.0)
        got = rg.exit_jump_integral(spec, 3.0, 1.0, Side.UP)
        assert got == pytest.approx(math.exp(-0.5), abs=1e-14)

    def test_constant_exit_payoff(self, constant_prop_spec):
        spec = constant_prop_spec
        for x, u, side in [(0.4, 0.8, Side.DOWN), (-0.3, 0.6, Side.UP)]:
            z = x - spec.a if side is Side.DOWN else spec.b - x
            claim = spec.claim1 if side is Side.DOWN else spec.claim2
            expected = 0.7 * claim.sf(rg.rho(spec.retention, z, u))
            assert rg.exit_jump_integral(spec, x, u, side) == pytest.approx(
                expected, abs=1e-12
            )

    def test_custom_exit_against_quad_oracle(self):
        # smooth monotone h, proportional retention, down side
        h = lambda x: 1.0 / (1.0 + math.exp(-2.0 * x))
        claim = rg.Exponential(1.0)
        prem = rg.PremiumModel(
            1.1, rg.PremiumPrinciple.VARIANCE_ON_PROPORTIONAL, 1.0, 0.12, claim
        )
        spec = rg.GameSpec(
            lam1=1.0, lam2=1.0, claim1=claim, claim2=claim,
            retention=rg.RetentionKind.PROPORTIONAL,
            premium1=prem, premium2=prem, a=-1.0, b=1.0,
            payoff=rg.PayoffSpec(
                delta=0.5, exit_kind=rg.ExitKind.CUSTOM, exit_fn=h, exit_value=0.0
            ),
            controls1=(0.0, 1.0), controls2=(0.0, 1.0),
        )
        x, u = 0.2, 0.7
        rho = (x - spec.a) / u
        oracle, _ = integrate.quad(
            lambda y: h(x - u * y) * claim.density(y), rho, 60.0
        )
        got = rg.exit_jump_integral(spec, x, u, Side.DOWN)
        assert got == pytest.approx(oracle, abs=2e-6)


class TestBiOperator:
    def test_constant_solution_identity(self, constant_prop_spec, constant_xl_spec):
        for spec in (constant_prop_spec, constant_xl_spec):
            g = rg.Grid(spec.a, spec.b, 41)
            v = rg.ValueTable.constant(g, 0.7)
            controls = (
                [(0.2, 0.9), (1.0, 0.0)]
                if spec.retention is rg.RetentionKind.PROPORTIONAL
                else [(0.4, 2.0), (math.inf, math.inf)]
            )
            for x in (spec.a, -0.35, 0.5, spec.b):
                for u1, u2 in controls:
                    val = rg.bi_operator(spec, v, x, 0.0, u1, u2)
                    assert abs(val) < 1e-10

    def test_jump_free_ode_solution(self):
        # constant drift d > 0, zeta = 0, h = indicator: v(x) = exp(-delta (b-x)/d)
        spec = make_driftonly_spec(1.5, 0.5, 0.0, 0.5, 0.05)
        d = rg.drift(spec, 1.0, 1.0)
        assert d == 1.0
        g = rg.Grid(0.0, 0.5, 201)
        v = rg.ValueTable.from_function(g, lambda x: math.exp(-0.05 * (0.5 - x) / d))
        for x in (0.1, 0.27, 0.44):
            dv_exact = (0.05 / d) * math.exp(-0.05 * (0.5 - x) / d)
            val = rg.bi_operator(spec, v, x, dv_exact, 1.0, 1.0)
            assert abs(val) < 1e-9

    def test_zero_table_leaves_only_exit_terms(self, prop_test_spec):
        spec = prop_test_spec
        g = rg.Grid(spec.a, spec.b, 41)
        v = rg.ValueTable.constant(g, 0.0)
        for x, u2 in [(0.5, 1.0), (0.0, 0.6)]:
            val = rg.bi_operator(spec, v, x, 0.0, 1.0, u2)
            expected = spec.lam2 * (
                1.0 - spec.claim2.cdf(rg.rho(spec.retention, spec.b - x, u2))
            )
            assert val == pytest.approx(expected, abs=1e-12)
            assert val >= 0.0

    def test_linearity_in_payoff_scale(self, grid):
        # doubling v, zeta, and h doubles the operator value
        spec1 = make_prop_spec(rg.PayoffSpec.constant_pair(0.5, 0.7))
        spec2 = make_prop_spec(rg.PayoffSpec.constant_pair(0.5, 1.4))
        rng = np.random.default_rng(7)
        vals = rng.uniform(0.0, 1.0, grid.n)
        v1 = rg.ValueTable(grid, vals)
        v2 = rg.ValueTable(grid, 2.0 * vals)
        for x, dv, u1, u2 in [(0.3, 0.2, 0.8, 0.4), (-0.6, -0.1, 0.1, 0.9)]:
            a1 = rg.bi_operator(spec1, v1, x, dv, u1, u2)
            a2 = rg.bi_operator(spec2, v2, x, 2 * dv, u1, u2)
            assert a2 == pytest.approx(2.0 * a1, abs=1e-12)

    def test_monotone_in_off_point_values(self, prop_test_spec, grid):
        # raising any other node weakly raises the operator value
        spec = prop_test_spec
        rng = np.random.default_rng(3)
        vals = rng.uniform(0.0, 1.0, grid.n)
        k = 20
        x = grid.xs[k]
        base = rg.bi_operator(spec, rg.ValueTable(grid, vals), x, 0.1, 0.7, 0.6)
        for j in (2, 15, 19, 21, 33):
            bumped = vals.copy()
            bumped[j] += 0.25
            val = rg.bi_operator(spec, rg.ValueTable(grid, bumped), x, 0.1, 0.7, 0.6)
            assert val >= base - 1e-14


class TestHamiltonians:
    def test_constant_spec_value_zero(self, constant_prop_spec):
        # every control pair annihilates the operator; rounding noise breaks
        # the mathematical ties, so only the value is asserted here
        spec = constant_prop_spec
        g = rg.Grid(spec.a, spec.b, 21)
        v = rg.ValueTable.constant(g, 0.7)
        cs = rg.ControlSet(np.linspace(0.0, 1.0, 5))
        for x in (-0.5, 0.1):
            up = rg.upper_hamiltonian(spec, v, x, cs, cs)
            lo = rg.lower_hamiltonian(spec, v, x, cs, cs)
            assert abs(up.value) < 1e-10 and abs(lo.value) < 1e-10
            assert up.outer_control in cs.values and lo.outer_control in cs.values

    def test_exact_ties_resolve_to_smallest_control(self, prop_test_spec):
        # at x = a with a constant table the player-1 terms vanish exactly
        # (z = 0, indicator pays nothing below b, dv = 0), so all u1
        # candidates tie bit-for-bit and the smallest must win
        spec = prop_test_spec
        g = rg.Grid(spec.a, spec.b, 21)
        v = rg.ValueTable.constant(g, 0.4)
        cs = rg.ControlSet(np.linspace(0.0, 1.0, 5))
        lo = rg.lower_hamiltonian(spec, v, spec.a, cs, cs)
        up = rg.upper_hamiltonian(spec, v, spec.a, cs, cs)
        assert lo.outer_control == 0.0
        assert up.inner_control == 0.0

    def test_single_point_sets_reduce_to_operator(self, prop_test_spec):
        spec = prop_test_spec
        g = rg.Grid(spec.a, spec.b, 21)
        rng = np.random.default_rng(11)
        v = rg.ValueTable(g, rng.uniform(0, 1, g.n))
        cs1 = rg.ControlSet(np.array([0.6]))
        cs2 = rg.ControlSet(np.array([0.4]))
        x = g.xs[8]
        d = rg.drift(spec, 0.6, 0.4)
        dv = upwind_derivative(v, 8, d)
        direct = rg.bi_operator(spec, v, x, dv, 0.6, 0.4)
        up = rg.upper_hamiltonian(spec, v, x, cs1, cs2)
        lo = rg.lower_hamiltonian(spec, v, x, cs1, cs2)
        assert up.value == direct == lo.value

    def _matrix(self, spec, v, x_index, cs1, cs2):
        g = v.grid
        x = g.xs[x_index]
        m = np.empty((len(cs1), len(cs2)))
        for i, u1 in enumerate(cs1.values):
            for j, u2 in enumerate(cs2.values):
                d = rg.drift(spec, u1, u2)
                dv = upwind_derivative(v, x_index, d)
                m[i, j] = rg.bi_operator(spec, v, x, dv, u1, u2)
        return m

    def test_matches_brute_force_matrix(self, prop_test_spec):
        spec = prop_test_spec
        g = rg.Grid(spec.a, spec.b, 21)
        rng = np.random.default_rng(5)
        cs1 = rg.ControlSet(np.linspace(0.0, 1.0, 3))
        cs2 = rg.ControlSet(np.linspace(0.0, 1.0, 3))
        for x_index in (0, 7, 20):
            v = rg.ValueTable(g, rng.uniform(0, 1, g.n))
            m = self._matrix(spec, v, x_index, cs1, cs2)
            up = rg.upper_hamiltonian(spec, v, g.xs[x_index], cs1, cs2)
            lo = rg.lower_hamiltonian(spec, v, g.xs[x_index], cs1, cs2)
            assert up.value == m.max(axis=0).min()
            assert lo.value == m.min(axis=1).max()

    def test_minimax_inequality(self, prop_test_spec, constant_xl_spec):
        for spec in (prop_test_spec, constant_xl_spec):
            g = rg.Grid(spec.a, spec.b, 21)
            rng = np.random.default_rng(13)
            cs1 = rg.ControlSet.for_player(spec, 1, 7)
            cs2 = rg.ControlSet.for_player(spec, 2, 7)
            for _ in range(5):
                v = rg.ValueTable(g, rng.uniform(0, 1, g.n))
                for x_index in (0, 5, 13, 20):
                    x = g.xs[x_index]
                    lo = rg.lower_hamiltonian(spec, v, x, cs1, cs2)
                    up = rg.upper_hamiltonian(spec, v, x, cs1, cs2)
                    assert lo.value <= up.value


class TestUpwindDerivative:
    def test_directions(self, grid):
        v = rg.ValueTable.from_function(grid, lambda x: x * x)
        vals, dx = v.values, grid.dx
        assert upwind_derivative(v, 10, 1.0) == (vals[11] - vals[10]) / dx
        assert upwind_derivative(v, 10, -1.0) == (vals[10] - vals[9]) / dx
        assert upwind_derivative(v, 10, 0.0) == 0.0
        assert upwind_derivative(v, 0, -1.0) == (vals[1] - vals[0]) / dx
        assert upwind_derivative(v, grid.n - 1, 1.0) == (vals[-1] - vals[-2]) / dx
