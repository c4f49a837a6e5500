"""Shared random problem generators for the test suite.

Every generator takes an explicit numpy Generator so runs are
reproducible.  Dimensions and horizons stay small enough that exact
two-point noise enumeration is cheap.
"""

from __future__ import annotations

import numpy as np

import hscontrol as hc


def dense(rng, dom, cod, scale=1.0):
    return hc.DenseOperator(scale * rng.standard_normal((cod.dim, dom.dim)), dom, cod)


def family(rng, dom, cod, steps, scale=1.0):
    return [dense(rng, dom, cod, scale) for _ in range(steps)]


def random_controlled(rng, dim_max=6, horizon_max=6, noisy=True):
    dim = int(rng.integers(1, dim_max + 1))
    du = int(rng.integers(1, dim + 1))
    horizon = int(rng.integers(0, horizon_max + 1))
    hs = hc.euclidean(dim)
    us = hc.euclidean(du)
    steps = horizon + 1
    s = 0.9 / np.sqrt(dim)
    a = family(rng, hs, hs, steps, s)
    b = family(rng, us, hs, steps, s)
    if noisy:
        c = family(rng, hs, hs, steps, 0.5 * s)
        d = family(rng, us, hs, steps, 0.5 * s)
    else:
        c = [hc.ZeroOperator(hs) for _ in range(steps)]
        d = [hc.ZeroOperator(us, hs) for _ in range(steps)]
    return hc.ControlledSystem(hs, us, horizon, a, b, c, d)


def random_psd_cost(rng, system):
    """Stage blocks [[M, L*], [L, R]] >= 0 with R > 0 and a PSD terminal."""
    hs = system.state_space
    us = system.control_space
    dim, du = hs.dim, us.dim
    m, l, r = [], [], []
    for _ in range(system.steps):
        g = rng.standard_normal((dim + du, dim + du)) / np.sqrt(dim + du)
        w = g @ g.T
        m.append(hc.DenseOperator(w[:dim, :dim], hs))
        l.append(hc.DenseOperator(w[dim:, :dim], hs, us))
        r.append(hc.DenseOperator(w[dim:, dim:] + 0.1 * np.eye(du), us))
    gt = rng.standard_normal((dim, dim)) / np.sqrt(dim)
    terminal = hc.DenseOperator(gt @ gt.T, hs)
    return hc.CostSpec(system, m, l, r, terminal)


def random_solved_problem(rng, dim_max=6, horizon_max=6, allow_indefinite=True):
    """A random LQ problem whose Riccati recursion is known to solve.

    Half the draws shift the state weight down so the stage cost is
    indefinite; those are kept only when the recursion still certifies
    uniform positivity, so every returned problem has status "solved".
    """
    for _ in range(50):
        system = random_controlled(rng, dim_max, horizon_max)
        cost = random_psd_cost(rng, system)
        if allow_indefinite and rng.random() < 0.5:
            hs = system.state_space
            shift = 0.05 * float(rng.random())
            m = [
                hc.DenseOperator(op.matrix - shift * np.eye(hs.dim), hs)
                for op in (cost.m(k) for k in range(system.steps))
            ]
            cost = hc.CostSpec(system, m, [cost.l(k) for k in range(system.steps)],
                               [cost.r(k) for k in range(system.steps)], cost.terminal)
        problem = hc.LQProblem(system, cost, random_x0(rng, system.state_space))
        if hc.solve_lq(problem).solved:
            return problem
    raise AssertionError("generator failed to produce a solvable problem")


def random_x0(rng, space):
    return hc.HVector(space, rng.standard_normal(space.dim))


def split_output_families(rng, hs, in_space, steps, state_rows, in_rows, zs,
                          state_scale=1.0, in_scale=0.5):
    """Cbar/Dbar pairs with disjoint output rows, so Dbar* Cbar = 0."""
    cbar, dbar = [], []
    for _ in range(steps):
        cm = np.zeros((zs.dim, hs.dim))
        cm[:state_rows] = state_scale * rng.standard_normal((state_rows, hs.dim))
        dm = np.zeros((zs.dim, in_space.dim))
        dm[state_rows:state_rows + in_rows] = in_scale * rng.standard_normal(
            (in_rows, in_space.dim))
        cbar.append(hc.DenseOperator(cm, hs, zs))
        dbar.append(hc.DenseOperator(dm, in_space, zs))
    return cbar, dbar


def random_disturbed(rng, dim_max=6, horizon_max=6, noisy=True, with_feedthrough=True):
    dim = int(rng.integers(1, dim_max + 1))
    dv = int(rng.integers(1, dim + 1))
    horizon = int(rng.integers(0, horizon_max + 1))
    hs = hc.euclidean(dim)
    vs = hc.euclidean(dv)
    p = dim
    q = dv if with_feedthrough else 0
    zs = hc.euclidean(p + max(q, 1) if q else p + 1)
    steps = horizon + 1
    s = 0.8 / np.sqrt(dim)
    a = family(rng, hs, hs, steps, s)
    b1 = family(rng, vs, hs, steps, s)
    if noisy:
        c = family(rng, hs, hs, steps, 0.4 * s)
        d1 = family(rng, vs, hs, steps, 0.4 * s)
    else:
        c = [hc.ZeroOperator(hs) for _ in range(steps)]
        d1 = [hc.ZeroOperator(vs, hs) for _ in range(steps)]
    cbar, dbar = split_output_families(rng, hs, vs, steps, p, q, zs)
    if not with_feedthrough:
        dbar = [hc.ZeroOperator(vs, zs) for _ in range(steps)]
    return hc.DisturbedSystem(hs, vs, zs, horizon, a, b1, c, d1, cbar, dbar)


def random_two_input(rng, dim_max=4, horizon_max=5, noisy=True, controlled=True):
    """Two-input plant with orthonormal control feedthrough columns.

    With ``controlled`` false the control channel is zeroed out, which
    makes the plant's disturbance gain independent of any feedback.
    """
    dim = int(rng.integers(2, dim_max + 1))
    dv = int(rng.integers(1, 3))
    du = int(rng.integers(1, 3))
    horizon = int(rng.integers(1, horizon_max + 1))
    hs = hc.euclidean(dim)
    vs = hc.euclidean(dv)
    us = hc.euclidean(du)
    zs = hc.euclidean(dim + du)
    steps = horizon + 1
    s = 0.8 / np.sqrt(dim)
    a = family(rng, hs, hs, steps, s)
    b1 = family(rng, vs, hs, steps, s)
    if controlled:
        b2 = family(rng, us, hs, steps, s)
    else:
        b2 = [hc.ZeroOperator(us, hs) for _ in range(steps)]
    if noisy:
        c = family(rng, hs, hs, steps, 0.4 * s)
        d1 = family(rng, vs, hs, steps, 0.4 * s)
        d2 = family(rng, us, hs, steps, 0.4 * s) if controlled else [
            hc.ZeroOperator(us, hs) for _ in range(steps)]
    else:
        c = [hc.ZeroOperator(hs) for _ in range(steps)]
        d1 = [hc.ZeroOperator(vs, hs) for _ in range(steps)]
        d2 = [hc.ZeroOperator(us, hs) for _ in range(steps)]
    cbar = []
    for _ in range(steps):
        cm = np.zeros((zs.dim, dim))
        cm[:dim] = rng.standard_normal((dim, dim))
        cbar.append(hc.DenseOperator(cm, hs, zs))
    gm = np.zeros((zs.dim, du))
    gm[dim:] = np.eye(du)
    gbar = hc.DenseOperator(gm, us, zs)
    return hc.TwoInputSystem(hs, vs, us, zs, horizon, a, b1, b2, c, d1, d2, cbar, gbar)


def open_loop_view(sys2):
    """The u = 0 closed loop: the plant's raw disturbance-to-output map."""
    zero = [hc.ZeroOperator(sys2.state_space, sys2.control_space)
            for _ in range(sys2.steps)]
    return hc.closed_loop(sys2, zero)


GAMMA_LADDER = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0)


def feasible_design(sys2, ladder=GAMMA_LADDER):
    """First ladder level where attenuation synthesis succeeds, or None."""
    for gamma in ladder:
        try:
            return gamma, hc.hinf_design(sys2, gamma)
        except hc.DesignInfeasibleError:
            continue
    return None


def solvable_game(rng, horizon_max=5, rho_choices=(0.0, 0.5, 1.0)):
    """A random plant, level, and start with a solved coupled recursion."""
    for _ in range(50):
        sys2 = random_two_input(rng, horizon_max=horizon_max)
        rho = float(rng.choice(rho_choices))
        x0 = random_x0(rng, sys2.state_space)
        for gamma in GAMMA_LADDER:
            if gamma < rho:
                continue
            params = hc.GameParams(gamma=gamma, rho=rho)
            sol = hc.solve_coupled_riccati(sys2, params, x0)
            if sol.solved:
                return sys2, params, x0, sol
    raise AssertionError("generator failed to produce a solvable game")
