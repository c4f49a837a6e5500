"""System and cost descriptions for finite-horizon stochastic control.

All dynamics are discrete-time with a single scalar multiplicative noise
channel: the state jumps by a drift term plus a diffusion term scaled by a
mean-zero, unit-variance random factor that is uncorrelated across steps.
Coefficient families may vary with the step; a single operator is accepted
anywhere a family is expected and is then used at every step.
"""

from __future__ import annotations

import numpy as np

from .errors import AssumptionError, DimensionError, NotSelfAdjointError
from .operators import Operator, ZeroOperator, _sframe
from .spaces import Space

ASSUMPTION_TOL = 1e-12
SELFADJOINT_TOL = 1e-10

FamilyLike = Operator | list[Operator] | tuple[Operator, ...]


class OperatorFamily:
    """Step-indexed coefficients A(0), ..., A(N) over a fixed pair of spaces."""

    def __init__(self, ops: FamilyLike, steps: int, domain: Space, codomain: Space, name: str):
        if isinstance(ops, Operator):
            ops = [ops] * steps
        ops = list(ops)
        if len(ops) != steps:
            raise DimensionError(f"{name}: expected {steps} stage operators, got {len(ops)}")
        for k, op in enumerate(ops):
            if op.domain != domain or op.codomain != codomain:
                raise DimensionError(f"{name}({k}): operator spaces do not match the system")
        self._ops = ops
        self.steps = steps
        self.domain = domain
        self.codomain = codomain

    def __call__(self, k: int) -> Operator:
        if not 0 <= k < self.steps:
            raise DimensionError(f"step {k} outside 0..{self.steps - 1}")
        return self._ops[k]

    def __iter__(self):
        return iter(self._ops)

    def __len__(self):
        return self.steps


def _check_selfadjoint(op: Operator, what: str, tol: float = SELFADJOINT_TOL) -> None:
    s = _sframe(op.matrix, op.codomain.weights, op.domain.weights)
    resid = np.linalg.norm(s - s.T, "fro") / (1.0 + np.linalg.norm(s, "fro"))
    if resid > tol:
        raise NotSelfAdjointError(f"{what}: symmetrization residual {resid:.3e} exceeds {tol:.1e}")


class ControlledSystem:
    """State recursion x(k+1) = A x + B u + (C x + D u) * noise, k = 0..N."""

    def __init__(
        self,
        state_space: Space,
        control_space: Space,
        horizon: int,
        a: FamilyLike,
        b: FamilyLike,
        c: FamilyLike,
        d: FamilyLike,
    ):
        if horizon < 0:
            raise DimensionError("horizon must be nonnegative")
        self.state_space = state_space
        self.control_space = control_space
        self.horizon = int(horizon)
        steps = self.horizon + 1
        self.a = OperatorFamily(a, steps, state_space, state_space, "A")
        self.b = OperatorFamily(b, steps, control_space, state_space, "B")
        self.c = OperatorFamily(c, steps, state_space, state_space, "C")
        self.d = OperatorFamily(d, steps, control_space, state_space, "D")

    @property
    def steps(self) -> int:
        return self.horizon + 1


class CostSpec:
    """Quadratic stage and terminal cost for a controlled system.

    Stage k contributes <M x, x> + 2 <L x, u> + <R u, u>; the horizon ends with
    <S x(N+1), x(N+1)>.  M, R and S must be self-adjoint, but no sign
    constraint is imposed: indefinite weights are part of the contract.
    """

    def __init__(
        self,
        system: ControlledSystem,
        m: FamilyLike,
        l: FamilyLike,
        r: FamilyLike,
        terminal: Operator,
    ):
        hs, us = system.state_space, system.control_space
        steps = system.steps
        self.m = OperatorFamily(m, steps, hs, hs, "M")
        self.l = OperatorFamily(l, steps, hs, us, "L")
        self.r = OperatorFamily(r, steps, us, us, "R")
        if terminal.domain != hs or terminal.codomain != hs:
            raise DimensionError("terminal weight must act on the state space")
        self.terminal = terminal
        for k in range(steps):
            _check_selfadjoint(self.m(k), f"M({k})")
            _check_selfadjoint(self.r(k), f"R({k})")
        _check_selfadjoint(terminal, "terminal weight")


def _check_orthogonality(left: Operator, right: Operator, what: str) -> None:
    # left* right == 0, measured in the orthonormal frame of the shared codomain.
    ls = _sframe(left.matrix, left.codomain.weights, left.domain.weights)
    rs = _sframe(right.matrix, right.codomain.weights, right.domain.weights)
    prod = ls.T @ rs
    scale = 1.0 + np.linalg.norm(ls, 2) * np.linalg.norm(rs, 2)
    resid = np.linalg.norm(prod, 2) / scale
    if resid > ASSUMPTION_TOL:
        raise AssumptionError(f"{what}: cross term has norm {resid:.3e}, expected zero")


class DisturbedSystem:
    """Disturbance-driven dynamics with a penalized output.

        x(k+1) = A x + B1 v + (C x + D1 v) * noise
        z(k)   = Cbar x + Dbar v

    The output blocks must satisfy Dbar* Cbar = 0 at every step, so the
    squared output splits into a state part and a disturbance part.
    """

    def __init__(
        self,
        state_space: Space,
        disturbance_space: Space,
        output_space: Space,
        horizon: int,
        a: FamilyLike,
        b1: FamilyLike,
        c: FamilyLike,
        d1: FamilyLike,
        cbar: FamilyLike,
        dbar: FamilyLike,
    ):
        if horizon < 0:
            raise DimensionError("horizon must be nonnegative")
        self.state_space = state_space
        self.disturbance_space = disturbance_space
        self.output_space = output_space
        self.horizon = int(horizon)
        steps = self.horizon + 1
        hs, vs, zs = state_space, disturbance_space, output_space
        self.a = OperatorFamily(a, steps, hs, hs, "A")
        self.b1 = OperatorFamily(b1, steps, vs, hs, "B1")
        self.c = OperatorFamily(c, steps, hs, hs, "C")
        self.d1 = OperatorFamily(d1, steps, vs, hs, "D1")
        self.cbar = OperatorFamily(cbar, steps, hs, zs, "Cbar")
        self.dbar = OperatorFamily(dbar, steps, vs, zs, "Dbar")
        for k in range(steps):
            _check_orthogonality(self.dbar(k), self.cbar(k), f"Dbar({k})* Cbar({k})")

    @property
    def steps(self) -> int:
        return self.horizon + 1

    def as_controlled(self) -> ControlledSystem:
        """View the disturbance channel as the control input of the recursion."""
        return ControlledSystem(
            self.state_space,
            self.disturbance_space,
            self.horizon,
            list(self.a),
            list(self.b1),
            list(self.c),
            list(self.d1),
        )


class TwoInputSystem:
    """Dynamics driven by a disturbance v and a control u, with output z.

        x(k+1) = A x + B1 v + B2 u + (C x + D1 v + D2 u) * noise
        z(k)   = Cbar x + Gbar u

    The output blocks must satisfy Gbar* Cbar = 0 and Gbar* Gbar = I at every
    step, so |z|^2 = |Cbar x|^2 + |u|^2.
    """

    def __init__(
        self,
        state_space: Space,
        disturbance_space: Space,
        control_space: Space,
        output_space: Space,
        horizon: int,
        a: FamilyLike,
        b1: FamilyLike,
        b2: FamilyLike,
        c: FamilyLike,
        d1: FamilyLike,
        d2: FamilyLike,
        cbar: FamilyLike,
        gbar: FamilyLike,
    ):
        if horizon < 0:
            raise DimensionError("horizon must be nonnegative")
        self.state_space = state_space
        self.disturbance_space = disturbance_space
        self.control_space = control_space
        self.output_space = output_space
        self.horizon = int(horizon)
        steps = self.horizon + 1
        hs, vs, us, zs = state_space, disturbance_space, control_space, output_space
        self.a = OperatorFamily(a, steps, hs, hs, "A")
        self.b1 = OperatorFamily(b1, steps, vs, hs, "B1")
        self.b2 = OperatorFamily(b2, steps, us, hs, "B2")
        self.c = OperatorFamily(c, steps, hs, hs, "C")
        self.d1 = OperatorFamily(d1, steps, vs, hs, "D1")
        self.d2 = OperatorFamily(d2, steps, us, hs, "D2")
        self.cbar = OperatorFamily(cbar, steps, hs, zs, "Cbar")
        self.gbar = OperatorFamily(gbar, steps, us, zs, "Gbar")
        for k in range(steps):
            _check_orthogonality(self.gbar(k), self.cbar(k), f"Gbar({k})* Cbar({k})")
            g = self.gbar(k)
            gs = _sframe(g.matrix, zs.weights, us.weights)
            resid = np.linalg.norm(gs.T @ gs - np.eye(us.dim), 2)
            if resid > ASSUMPTION_TOL:
                raise AssumptionError(
                    f"Gbar({k}): control channel is not isometric (residual {resid:.3e})"
                )

    @property
    def steps(self) -> int:
        return self.horizon + 1


def closed_loop(system: TwoInputSystem, control_gains: list[Operator]) -> DisturbedSystem:
    """Absorb a control feedback u = K x into a two-input system.

    The result is disturbance-driven with A + B2 K, C + D2 K, Cbar + Gbar K and
    no direct disturbance feedthrough in the output.
    """
    if len(control_gains) != system.steps:
        raise DimensionError("need one control gain per step")
    a_cl, c_cl, cbar_cl = [], [], []
    for k, gain in enumerate(control_gains):
        if gain.domain != system.state_space or gain.codomain != system.control_space:
            raise DimensionError(f"gain at step {k} does not map state to control")
        a_cl.append(system.a(k) + (system.b2(k) @ gain))
        c_cl.append(system.c(k) + (system.d2(k) @ gain))
        cbar_cl.append(system.cbar(k) + (system.gbar(k) @ gain))
    dbar = ZeroOperator(system.disturbance_space, system.output_space)
    return DisturbedSystem(
        system.state_space,
        system.disturbance_space,
        system.output_space,
        system.horizon,
        a_cl,
        list(system.b1),
        c_cl,
        list(system.d1),
        cbar_cl,
        [dbar] * system.steps,
    )
