"""Scalar numerical kernels shared by the operator, solver, and simulator.

Everything here is nopython-compatible and compiled with numba unless the
fallback lane is selected (see ``_jit``).  The same source runs in both
lanes.  Model data is passed as a flat float64 vector (``MP_*`` slots below)
so kernels take a single spec argument; claim models, retention functions,
premium principles, and payoff kinds are integer codes.
"""

import numpy as np

from ._jit import jit
from ._rng import GOLDEN, mix64, uniform_at

# 16-node Gauss-Legendre base rule, applied on 4 graded panels per integral.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
N_PANELS = 4
N_GL = 16
N_QUAD = N_PANELS * N_GL

# claim-model codes
EXPONENTIAL = 0
PARETO_II = 1
# retention codes
PROPORTIONAL = 0
EXCESS_OF_LOSS = 1
# premium-principle codes
VAR_PROP = 0
EXP_XL = 1
# exit-payoff codes
H_INDICATOR = 0
H_CONSTANT = 1
H_TABULATED = 2
# running-payoff codes
Z_ZERO = 0
Z_CONSTANT = 1
Z_TABULATED = 2
# path termination statuses
EXIT_BELOW = 0
EXIT_ABOVE = 1
STOPPED = 2
# integral sides
DOWN = 0  # player-1 claims move the difference down
UP = 1  # player-2 claims move it up

# model-pack slots
MP_RETENTION = 0
MP_LAM1 = 1
MP_LAM2 = 2
MP_DELTA = 3
MP_A = 4
MP_B = 5
MP_CK1 = 6
MP_CP11 = 7
MP_CP12 = 8
MP_YCUT1 = 9
MP_CK2 = 10
MP_CP21 = 11
MP_CP22 = 12
MP_YCUT2 = 13
MP_PP1 = 14
MP_BASE1 = 15
MP_THETA1 = 16
MP_MEAN1 = 17
MP_PP2 = 18
MP_BASE2 = 19
MP_THETA2 = 20
MP_MEAN2 = 21
MP_HKIND = 22
MP_HC = 23
MP_ZKIND = 24
MP_ZC = 25
MP_SIZE = 26


# ---------------------------------------------------------------------------
# claim-model primitives
# ---------------------------------------------------------------------------


@jit
def _cdf(kind, p1, p2, y):
    if y <= 0.0:
        return 0.0
    if kind == EXPONENTIAL:
        return -np.expm1(-y / p1)
    return -np.expm1(-p1 * np.log1p(y / p2))


@jit
def _sf(kind, p1, p2, y):
    if y <= 0.0:
        return 1.0
    if kind == EXPONENTIAL:
        return np.exp(-y / p1)
    return np.exp(-p1 * np.log1p(y / p2))


@jit
def _pdf(kind, p1, p2, y):
    if y < 0.0:
        return 0.0
    if kind == EXPONENTIAL:
        return np.exp(-y / p1) / p1
    return (p1 / p2) * np.exp(-(p1 + 1.0) * np.log1p(y / p2))


@jit
def _inv_cdf(kind, p1, p2, p):
    if kind == EXPONENTIAL:
        return -p1 * np.log1p(-p)
    return p2 * np.expm1(-np.log1p(-p) / p1)


@jit
def _stop_loss(kind, p1, p2, m):
    if kind == EXPONENTIAL:
        return p1 * np.exp(-m / p1)
    return p2**p1 / (p1 - 1.0) * (m + p2) ** (1.0 - p1)


# ---------------------------------------------------------------------------
# retention and premiums
# ---------------------------------------------------------------------------


@jit
def _retention(rk, y, u):
    if rk == PROPORTIONAL:
        return y * u
    return y if y < u else u


@jit
def _rho(rk, z, u):
    if z <= 0.0:
        return 0.0
    if rk == PROPORTIONAL:
        if u <= 0.0:
            return np.inf
        return z / u
    return z if z <= u else np.inf


@jit
def _net_rate(pp, base, lam, theta, ck, cp1, cp2, mean, u):
    if pp == VAR_PROP:
        ceded = 1.0 - u
        return base - lam * (mean * ceded + theta * mean * mean * ceded * ceded)
    return base - lam * (1.0 + theta) * _stop_loss(ck, cp1, cp2, u)


@jit
def _drift(mp, u1, u2):
    c1 = _net_rate(
        int(mp[MP_PP1]), mp[MP_BASE1], mp[MP_LAM1], mp[MP_THETA1],
        int(mp[MP_CK1]), mp[MP_CP11], mp[MP_CP12], mp[MP_MEAN1], u1,
    )
    c2 = _net_rate(
        int(mp[MP_PP2]), mp[MP_BASE2], mp[MP_LAM2], mp[MP_THETA2],
        int(mp[MP_CK2]), mp[MP_CP21], mp[MP_CP22], mp[MP_MEAN2], u2,
    )
    return c1 - c2


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@jit
def _fill_quad(ck, p1, p2, lo, hi, ys, ws):
    """Nodes/weights for integrating against the claim measure on [lo, hi].

    Weights absorb dF.  Exponential tails use equal-width panels (the
    integrand stays entire); Pareto uses equal-width panels on short ranges
    and equal-probability panels otherwise, which keeps the total quadrature
    mass exact for heavy tails.
    """
    if hi <= lo:
        for q in range(N_QUAD):
            ys[q] = lo
            ws[q] = 0.0
        return
    yspace = ck == EXPONENTIAL or (hi - lo) <= 8.0 * p2
    if yspace:
        step = (hi - lo) / N_PANELS
        for ip in range(N_PANELS):
            e0 = lo + step * ip
            c = e0 + 0.5 * step
            h = 0.5 * step
            for q in range(N_GL):
                y = c + h * _GL_X[q]
                ys[ip * N_GL + q] = y
                ws[ip * N_GL + q] = h * _GL_W[q] * _pdf(ck, p1, p2, y)
    else:
        plo = _cdf(ck, p1, p2, lo)
        phi = _cdf(ck, p1, p2, hi)
        step = (phi - plo) / N_PANELS
        for ip in range(N_PANELS):
            e0 = plo + step * ip
            c = e0 + 0.5 * step
            h = 0.5 * step
            for q in range(N_GL):
                p = c + h * _GL_X[q]
                ys[ip * N_GL + q] = _inv_cdf(ck, p1, p2, p)
                ws[ip * N_GL + q] = h * _GL_W[q]


@jit
def _interp(vals, xs, n, dx, x):
    """Linear interpolation on the uniform grid, exact at node coordinates."""
    t = (x - xs[0]) / dx
    j = int(t)
    if j < 0:
        j = 0
    elif j > n - 2:
        j = n - 2
    if x == xs[j]:
        return vals[j]
    if x == xs[j + 1]:
        return vals[j + 1]
    f = (x - xs[j]) / (xs[j + 1] - xs[j])
    if f < 0.0:
        f = 0.0
    elif f > 1.0:
        f = 1.0
    return vals[j] + f * (vals[j + 1] - vals[j])


# ---------------------------------------------------------------------------
# jump integrals
# ---------------------------------------------------------------------------


@jit
def _inner_nodes(mp, x, u, side, pos, w):
    """Quadrature for the staying-mass jump integral at state x, control u.

    Fills post-jump positions and weights; returns the point-mass position
    and weight (retained size saturates under excess of loss, and r == 0
    under full proportional reinsurance keeps all mass at x).
    """
    rk = int(mp[MP_RETENTION])
    if side == DOWN:
        z = x - mp[MP_A]
        ck = int(mp[MP_CK1])
        p1 = mp[MP_CP11]
        p2 = mp[MP_CP12]
        ycut = mp[MP_YCUT1]
        sgn = -1.0
    else:
        z = mp[MP_B] - x
        ck = int(mp[MP_CK2])
        p1 = mp[MP_CP21]
        p2 = mp[MP_CP22]
        ycut = mp[MP_YCUT2]
        sgn = 1.0
    if z <= 0.0:
        for q in range(N_QUAD):
            pos[q] = x
            w[q] = 0.0
        return x, 0.0
    if rk == PROPORTIONAL:
        if u <= 0.0:
            for q in range(N_QUAD):
                pos[q] = x
                w[q] = 0.0
            return x, 1.0
        rho = z / u
        hi = rho if rho < ycut else ycut
        _fill_quad(ck, p1, p2, 0.0, hi, pos, w)
        for q in range(N_QUAD):
            pos[q] = x + sgn * (u * pos[q])
        return x, 0.0
    if z <= u:
        hi = z if z < ycut else ycut
        _fill_quad(ck, p1, p2, 0.0, hi, pos, w)
        for q in range(N_QUAD):
            pos[q] = x + sgn * pos[q]
        return x, 0.0
    # u < z: claims above u retain exactly u and still land inside [a, b]
    hi = u if u < ycut else ycut
    _fill_quad(ck, p1, p2, 0.0, hi, pos, w)
    for q in range(N_QUAD):
        pos[q] = x + sgn * pos[q]
    return x + sgn * u, _sf(ck, p1, p2, u)


@jit
def _inner_integral(mp, vvals, xs, n, dx, x, u, side):
    """Integral of v over post-jump states that stay inside [a, b] (no intensity)."""
    pos = np.empty(N_QUAD)
    w = np.empty(N_QUAD)
    pm_pos, pm_w = _inner_nodes(mp, x, u, side, pos, w)
    total = 0.0
    for q in range(N_QUAD):
        total += w[q] * _interp(vvals, xs, n, dx, pos[q])
    if pm_w != 0.0:
        total += pm_w * _interp(vvals, xs, n, dx, pm_pos)
    return total


@jit
def _interp_uniform(vals, x0, dx, x):
    """Clamped linear interpolation on a uniform table given by (x0, dx)."""
    n = vals.shape[0]
    t = (x - x0) / dx
    j = int(t)
    if j < 0 or t < 0.0:
        return vals[0]
    if j >= n - 1:
        return vals[n - 1]
    f = t - j
    return vals[j] + f * (vals[j + 1] - vals[j])


@jit
def _h_tab(mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, pos):
    """Tabulated exit payoff, clamped beyond the table ends."""
    a = mp[MP_A]
    b = mp[MP_B]
    if pos <= a or (pos < b and pos - a < b - pos):
        return _interp_uniform(hlo, hlo_x0, hlo_dx, pos)
    return _interp_uniform(hhi, hhi_x0, hhi_dx, pos)


@jit
def _exit_integral(mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x, u, side):
    """Tail integral of the exit payoff over post-jump states outside [a, b]."""
    rk = int(mp[MP_RETENTION])
    if side == DOWN:
        z = x - mp[MP_A]
        ck = int(mp[MP_CK1])
        p1 = mp[MP_CP11]
        p2 = mp[MP_CP12]
        ycut = mp[MP_YCUT1]
        sgn = -1.0
    else:
        z = mp[MP_B] - x
        ck = int(mp[MP_CK2])
        p1 = mp[MP_CP21]
        p2 = mp[MP_CP22]
        ycut = mp[MP_YCUT2]
        sgn = 1.0
    rho = _rho(rk, z, u)
    hkind = int(mp[MP_HKIND])
    if hkind == H_INDICATOR:
        # downward exits land below a < b and pay nothing
        if side == DOWN:
            return 0.0
        if rho == np.inf:
            return 0.0
        return mp[MP_HC] * _sf(ck, p1, p2, rho)
    if hkind == H_CONSTANT:
        if rho == np.inf:
            return 0.0
        return mp[MP_HC] * _sf(ck, p1, p2, rho)
    if rho == np.inf:
        return 0.0
    pos = np.empty(N_QUAD)
    w = np.empty(N_QUAD)
    if rk == PROPORTIONAL:
        ub = rho if rho > ycut else ycut
        _fill_quad(ck, p1, p2, rho, ub, pos, w)
        total = 0.0
        for q in range(N_QUAD):
            total += w[q] * _h_tab(
                mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x + sgn * (u * pos[q])
            )
        tail_pos = x + sgn * (u * ub)
        total += _sf(ck, p1, p2, ub) * _h_tab(
            mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, tail_pos
        )
        return total
    ub0 = rho if rho > ycut else ycut
    ub = u if u < ub0 else ub0
    _fill_quad(ck, p1, p2, rho, ub, pos, w)
    total = 0.0
    for q in range(N_QUAD):
        total += w[q] * _h_tab(
            mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x + sgn * pos[q]
        )
    total += _sf(ck, p1, p2, ub) * _h_tab(
        mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x + sgn * ub
    )
    return total


# ---------------------------------------------------------------------------
# the Bellman-Isaacs operator at one point
# ---------------------------------------------------------------------------


@jit
def _op_value(
    mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx,
    vvals, xs, n, dx, x, vx, zx, dv, u1, u2,
):
    """Operator value at state x given v(x), zeta(x), and the upwind derivative."""
    d = _drift(mp, u1, u2)
    i1 = _inner_integral(mp, vvals, xs, n, dx, x, u1, DOWN)
    e1 = _exit_integral(mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x, u1, DOWN)
    i2 = _inner_integral(mp, vvals, xs, n, dx, x, u2, UP)
    e2 = _exit_integral(mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x, u2, UP)
    lam1 = mp[MP_LAM1]
    lam2 = mp[MP_LAM2]
    return (
        d * dv
        + lam1 * (i1 + e1)
        + lam2 * (i2 + e2)
        - (mp[MP_DELTA] + lam1 + lam2) * vx
        + zx
    )


@jit
def _upwind_dv(v, n, dx, k, d):
    """One-sided derivative: upwind in the interior, into the interior at ends."""
    if k == 0:
        return (v[1] - v[0]) / dx
    if k == n - 1:
        return (v[n - 1] - v[n - 2]) / dx
    if d > 0.0:
        return (v[k + 1] - v[k]) / dx
    if d < 0.0:
        return (v[k] - v[k - 1]) / dx
    return 0.0


# ---------------------------------------------------------------------------
# policy evaluation kernels
# ---------------------------------------------------------------------------


@jit
def _policy_setup(
    mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, xs, n, dx,
    u1vals, u2vals, zeta_tab,
    qpos, qw, pm_pos, pm_w, exits, drifts,
):
    """Per-node quadrature tables and constants for fixed Markov policies."""
    lam1 = mp[MP_LAM1]
    lam2 = mp[MP_LAM2]
    for k in range(n):
        x = xs[k]
        drifts[k] = _drift(mp, u1vals[k], u2vals[k])
        pm_pos[k, DOWN], pm_w[k, DOWN] = _inner_nodes(
            mp, x, u1vals[k], DOWN, qpos[k, DOWN], qw[k, DOWN]
        )
        pm_pos[k, UP], pm_w[k, UP] = _inner_nodes(
            mp, x, u2vals[k], UP, qpos[k, UP], qw[k, UP]
        )
        e1 = _exit_integral(
            mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x, u1vals[k], DOWN
        )
        e2 = _exit_integral(
            mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx, x, u2vals[k], UP
        )
        exits[k] = lam1 * e1 + lam2 * e2 + zeta_tab[k]


@jit
def _policy_rhs(v, xs, n, dx, lam1, lam2, qpos, qw, pm_pos, pm_w, exits, k):
    """Jump terms plus exits plus zeta at node k for the current table v."""
    s1 = 0.0
    for q in range(N_QUAD):
        s1 += qw[k, DOWN, q] * _interp(v, xs, n, dx, qpos[k, DOWN, q])
    if pm_w[k, DOWN] != 0.0:
        s1 += pm_w[k, DOWN] * _interp(v, xs, n, dx, pm_pos[k, DOWN])
    s2 = 0.0
    for q in range(N_QUAD):
        s2 += qw[k, UP, q] * _interp(v, xs, n, dx, qpos[k, UP, q])
    if pm_w[k, UP] != 0.0:
        s2 += pm_w[k, UP] * _interp(v, xs, n, dx, pm_pos[k, UP])
    return lam1 * s1 + lam2 * s2 + exits[k]


@jit
def _gs_sweep(
    v, xs, n, dx, dl, lam1, lam2,
    qpos, qw, pm_pos, pm_w, exits, drifts, h_a, h_b, reverse,
):
    """One Gauss-Seidel pass solving the per-node implicit upwind equation.

    Returns the sup-norm change.  Endpoints with outward drift are absorbed
    at the exit payoff; otherwise the one-sided equation is solved there.
    """
    max_change = 0.0
    for i in range(n):
        k = n - 1 - i if reverse else i
        rhs = _policy_rhs(v, xs, n, dx, lam1, lam2, qpos, qw, pm_pos, pm_w, exits, k)
        d = drifts[k]
        if k == 0:
            if d < 0.0:
                new = h_a
            elif d > 0.0:
                new = (rhs + (d / dx) * v[1]) / (dl + d / dx)
            else:
                new = rhs / dl
        elif k == n - 1:
            if d > 0.0:
                new = h_b
            elif d < 0.0:
                new = (rhs + (-d / dx) * v[n - 2]) / (dl - d / dx)
            else:
                new = rhs / dl
        else:
            if d > 0.0:
                new = (rhs + (d / dx) * v[k + 1]) / (dl + d / dx)
            elif d < 0.0:
                new = (rhs + (-d / dx) * v[k - 1]) / (dl - d / dx)
            else:
                new = rhs / dl
        change = abs(new - v[k])
        if change > max_change:
            max_change = change
        v[k] = new
    return max_change


@jit
def _policy_residuals(
    v, xs, n, dx, dl, lam1, lam2,
    qpos, qw, pm_pos, pm_w, exits, drifts, h_a, h_b, res,
):
    """Absolute operator residual per node for fixed policies.

    Absorbed endpoints report the deviation from their boundary value.
    """
    for k in range(n):
        d = drifts[k]
        if k == 0 and d < 0.0:
            res[k] = abs(v[0] - h_a)
            continue
        if k == n - 1 and d > 0.0:
            res[k] = abs(v[n - 1] - h_b)
            continue
        rhs = _policy_rhs(v, xs, n, dx, lam1, lam2, qpos, qw, pm_pos, pm_w, exits, k)
        dv = _upwind_dv(v, n, dx, k, d)
        res[k] = abs(d * dv + rhs - dl * v[k])


# ---------------------------------------------------------------------------
# policy improvement
# ---------------------------------------------------------------------------


#: Absolute tolerance below which two operator values count as tied; matches
#: the default policy-evaluation residual tolerance, below which operator
#: values carry no information, and keeps the smallest-control tie-break
#: deterministic under evaluation noise.
TIE_EPS = 1e-8


@jit
def _improve_pass(
    mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx,
    v, xs, n, dx, zeta_tab, candidates, other, player,
):
    """Pointwise argmax (player 1) or argmin (player 2) of the operator.

    Candidates are scanned in ascending control order; values within
    TIE_EPS of the optimum count as tied and the smallest control wins.
    """
    out = np.empty(n, np.int64)
    m = candidates.shape[0]
    vals = np.empty(m)
    for k in range(n):
        x = xs[k]
        vx = v[k]
        zx = zeta_tab[k]
        for j in range(m):
            c = candidates[j]
            if player == 1:
                u1 = c
                u2 = other[k]
            else:
                u1 = other[k]
                u2 = c
            d = _drift(mp, u1, u2)
            dv = _upwind_dv(v, n, dx, k, d)
            vals[j] = _op_value(
                mp, hlo, hlo_x0, hlo_dx, hhi, hhi_x0, hhi_dx,
                v, xs, n, dx, x, vx, zx, dv, u1, u2,
            )
        if player == 1:
            best = -np.inf
            for j in range(m):
                if vals[j] > best:
                    best = vals[j]
            for j in range(m):
                if vals[j] >= best - TIE_EPS:
                    out[k] = j
                    break
        else:
            best = np.inf
            for j in range(m):
                if vals[j] < best:
                    best = vals[j]
            for j in range(m):
                if vals[j] <= best + TIE_EPS:
                    out[k] = j
                    break
    return out


# ---------------------------------------------------------------------------
# path simulation
# ---------------------------------------------------------------------------


@jit
def _zeta_segment(zkind, zc, zeta_tab, xs, n, dx, delta, t, dur, x0, d):
    """Discounted running payoff over one constant-drift segment of length dur."""
    if zkind == Z_ZERO or dur <= 0.0:
        return 0.0
    if zkind == Z_CONSTANT:
        z0 = zc
        z1 = zc
    else:
        z0 = _interp(zeta_tab, xs, n, dx, x0)
        z1 = _interp(zeta_tab, xs, n, dx, x0 + d * dur)
    c = delta * dur
    e = np.exp(-c)
    base = -np.expm1(-c) / delta  # integral of e^{-delta s}
    ramp = (-np.expm1(-c) - e * c) / (delta * delta)  # integral of s e^{-delta s}
    return np.exp(-delta * t) * (z0 * base + (z1 - z0) / dur * ramp)


@jit
def _run_paths(
    mp, xs, n, dx, d_node, run_lo, run_hi, u1vals, u2vals, zeta_tab,
    x0, n_paths, master_seed, stop_time, raw_seed, start_counter,
    out_run, out_state, out_time, out_status, out_njumps, out_used,
    record, rec_t, rec_player, rec_y, rec_r, rec_x,
):
    """Exact PDMP paths of the controlled difference process.

    Inter-jump times by inversion at the combined intensity; marks by a
    fresh uniform with probability lam1/lam for player 1; claim sizes by
    inverse CDF; the deterministic flow is integrated exactly across grid
    cells (drift is piecewise constant in x).  Paths stop at the first exit
    from [a, b] or at ``stop_time``.
    """
    a = mp[MP_A]
    b = mp[MP_B]
    rk = int(mp[MP_RETENTION])
    lam1 = mp[MP_LAM1]
    lam2 = mp[MP_LAM2]
    delta = mp[MP_DELTA]
    ck1 = int(mp[MP_CK1])
    ck2 = int(mp[MP_CK2])
    zkind = int(mp[MP_ZKIND])
    zc = mp[MP_ZC]
    lam = lam1 + lam2
    p1frac = lam1 / lam
    rec_cap = rec_t.shape[0]

    for p in range(n_paths):
        if raw_seed:
            seed = master_seed
            ctr = start_counter
        else:
            seed = mix64(master_seed + (p + 1) * GOLDEN)
            ctr = 0
        x = x0
        t = 0.0
        run = 0.0
        njumps = 0
        status = STOPPED
        if x >= b:
            out_run[p] = 0.0
            out_state[p] = x
            out_time[p] = 0.0
            out_status[p] = EXIT_ABOVE
            out_njumps[p] = 0
            out_used[p] = ctr - start_counter if raw_seed else 0
            continue
        if x <= a:
            out_run[p] = 0.0
            out_state[p] = x
            out_time[p] = 0.0
            out_status[p] = EXIT_BELOW
            out_njumps[p] = 0
            out_used[p] = ctr - start_counter if raw_seed else 0
            continue
        # node = grid index when x sits exactly on a node, else -1
        j0 = int((x - a) / dx)
        if j0 > n - 1:
            j0 = n - 1
        node = -1
        if x == xs[j0]:
            node = j0
        elif j0 + 1 <= n - 1 and x == xs[j0 + 1]:
            node = j0 + 1

        done = False
        while not done:
            u = uniform_at(seed, ctr)
            ctr += 1
            s_len = -np.log1p(-u) / lam
            t_next = t + s_len
            jumping = True
            if t_next >= stop_time:
                t_next = stop_time
                jumping = False
            dur = t_next - t

            # deterministic flow across grid cells for `dur`
            while dur > 0.0:
                stuck = False
                moving_right = False
                dcur = 0.0
                target = 0
                if node >= 0:
                    k = node
                    if k == 0:
                        d0 = d_node[0]
                        if d0 < 0.0:
                            status = EXIT_BELOW
                            x = xs[0]
                            done = True
                            break
                        if d0 == 0.0:
                            stuck = True
                        else:
                            dcur = d0
                            target = run_hi[0] + 1
                            moving_right = True
                    elif k == n - 1:
                        db = d_node[n - 1]
                        if db > 0.0:
                            status = EXIT_ABOVE
                            x = xs[n - 1]
                            done = True
                            break
                        dleft = d_node[n - 2]
                        if db < 0.0 and dleft < 0.0:
                            dcur = dleft
                            target = run_lo[n - 2]
                        else:
                            stuck = True
                    else:
                        dk = d_node[k]
                        if dk > 0.0:
                            dcur = dk
                            target = run_hi[k] + 1
                            moving_right = True
                        elif dk < 0.0:
                            dleft = d_node[k - 1]
                            if dleft < 0.0:
                                dcur = dleft
                                target = run_lo[k - 1]
                            else:
                                stuck = True
                        else:
                            stuck = True
                else:
                    j = int((x - a) / dx)
                    if j > n - 2:
                        j = n - 2
                    dj = d_node[j]
                    if dj > 0.0:
                        dcur = dj
                        target = run_hi[j] + 1
                        moving_right = True
                    elif dj < 0.0:
                        dcur = dj
                        target = run_lo[j]
                    else:
                        stuck = True
                if stuck:
                    run += _zeta_segment(
                        zkind, zc, zeta_tab, xs, n, dx, delta, t, dur, x, 0.0
                    )
                    t += dur
                    dur = 0.0
                    break
                tt = (xs[target] - x) / dcur
                if tt > dur:
                    run += _zeta_segment(
                        zkind, zc, zeta_tab, xs, n, dx, delta, t, dur, x, dcur
                    )
                    x = x + dcur * dur
                    node = -1
                    t += dur
                    dur = 0.0
                else:
                    run += _zeta_segment(
                        zkind, zc, zeta_tab, xs, n, dx, delta, t, tt, x, dcur
                    )
                    x = xs[target]
                    node = target
                    t += tt
                    dur -= tt
            if done:
                break
            if not jumping:
                status = STOPPED
                break

            # marked jump
            um = uniform_at(seed, ctr)
            ctr += 1
            is1 = um < p1frac
            uy = uniform_at(seed, ctr)
            ctr += 1
            if node >= 0:
                idx = node
                # A node with inward drift on both sides parks the path there
                # (Filippov sliding).  The upwind scheme resolves such a node
                # as the theta-mixture of the two adjacent cells, so the jump
                # control is drawn from the same mixture.
                if node > 0 and d_node[node] < 0.0 and d_node[node - 1] >= 0.0:
                    theta = -d_node[node] / (d_node[node - 1] - d_node[node])
                    us = uniform_at(seed, ctr)
                    ctr += 1
                    if us < theta:
                        idx = node - 1
            else:
                idx = int((x - a) / dx)
                if idx > n - 1:
                    idx = n - 1
            if is1:
                y = _inv_cdf(ck1, mp[MP_CP11], mp[MP_CP12], uy)
                uc = u1vals[idx]
            else:
                y = _inv_cdf(ck2, mp[MP_CP21], mp[MP_CP22], uy)
                uc = u2vals[idx]
            r = _retention(rk, y, uc)
            x_post = x - r if is1 else x + r
            if record and njumps < rec_cap:
                rec_t[njumps] = t
                rec_player[njumps] = 1 if is1 else 2
                rec_y[njumps] = y
                rec_r[njumps] = r
                rec_x[njumps] = x_post
            njumps += 1
            if x_post < a:
                status = EXIT_BELOW
                x = x_post
                done = True
            elif x_post > b:
                status = EXIT_ABOVE
                x = x_post
                done = True
            else:
                x = x_post
                j0 = int((x - a) / dx)
                if j0 > n - 1:
                    j0 = n - 1
                node = -1
                if x == xs[j0]:
                    node = j0
                elif j0 + 1 <= n - 1 and x == xs[j0 + 1]:
                    node = j0 + 1

        out_run[p] = run
        out_state[p] = x
        out_time[p] = t
        out_status[p] = status
        out_njumps[p] = njumps
        out_used[p] = ctr - start_counter if raw_seed else ctr
