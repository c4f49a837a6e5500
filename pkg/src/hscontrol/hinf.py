"""Disturbance attenuation analysis for noise-driven linear systems.

The perturbation map sends a disturbance sequence to the penalized output
sequence, with zero initial state.  Whether its gain stays below a level
gamma is decided by a backward recursion

    Y(k) = p1 - p2* p3^-1 p2,      Y at step N+1 = 0,

with (X the next iterate)

    p1 = A*XA + C*XC - Cbar*Cbar,
    p2 = B1*XA + D1*XC,
    p3 = gamma^2 I - Dbar*Dbar + B1*XB1 + D1*XD1,

the gain being below gamma exactly when every p3 stays uniformly positive.
The recursion is continued through indefinite p3 as long as it remains
boundedly invertible, so the p3 spectra are reported for every step even at
infeasible levels; only a conditioning breakdown stops the walk early.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DimensionError, EnumerationLimitError, OracleScopeError
from .operators import (
    KAPPA_MAX_DEFAULT,
    DenseOperator,
    Operator,
    SelfAdjointCert,
    _cert_from_eigs,
    _selfadjoint_eigs,
    _unsframe,
    opnorm,
    positivity_tolerance,
    weighted_symmetrize,
)
from .sim import ENUMERATION_MAX_STEPS, Policy, run_batch, sign_paths, simulate
from .spaces import HVector, zero_vector
from .systems import DisturbedSystem


def _wadj(m: np.ndarray, w_cod: np.ndarray, w_dom: np.ndarray) -> np.ndarray:
    return m.T * (w_cod[None, :] / w_dom[:, None])


def _pi_arrays(dsys: DisturbedSystem, x_next: np.ndarray, gamma: float, k: int):
    wh = dsys.state_space.weights
    wv = dsys.disturbance_space.weights
    wz = dsys.output_space.weights
    am, b1m = dsys.a(k).matrix, dsys.b1(k).matrix
    cm, d1m = dsys.c(k).matrix, dsys.d1(k).matrix
    cbm, dbm = dsys.cbar(k).matrix, dsys.dbar(k).matrix
    aadj = _wadj(am, wh, wh)
    cadj = _wadj(cm, wh, wh)
    b1adj = _wadj(b1m, wh, wv)
    d1adj = _wadj(d1m, wh, wv)
    p1 = aadj @ x_next @ am + cadj @ x_next @ cm - _wadj(cbm, wz, wh) @ cbm
    p2 = b1adj @ x_next @ am + d1adj @ x_next @ cm
    p3 = (gamma**2) * np.eye(wv.size) - _wadj(dbm, wz, wv) @ dbm
    p3 += b1adj @ x_next @ b1m + d1adj @ x_next @ d1m
    return weighted_symmetrize(p1, wh), p2, weighted_symmetrize(p3, wv)


def attenuation_terms(
    dsys: DisturbedSystem, y_next: Operator, gamma: float, k: int
) -> tuple[Operator, Operator, Operator]:
    """The triple (p1, p2, p3) at step k for the given next iterate."""
    p1, p2, p3 = _pi_arrays(dsys, y_next.matrix, gamma, k)
    hs, vs = dsys.state_space, dsys.disturbance_space
    return DenseOperator(p1, hs), DenseOperator(p2, hs, vs), DenseOperator(p3, vs)


def backward_f_equation(
    dsys: DisturbedSystem, gamma: float, f_gains: list[Operator]
) -> list[Operator]:
    """Backward iterates under a fixed disturbance feedback v = F x.

    Evaluates Y(k) = p1 + p2* F + F* p2 + F* p3 F from a zero terminal
    iterate.  With F(k) chosen as the worst-case gain this reproduces the
    closed recursion, which makes it a useful cross-check.
    """
    if len(f_gains) != dsys.steps:
        raise DimensionError("need one disturbance gain per step")
    wh = dsys.state_space.weights
    wv = dsys.disturbance_space.weights
    y = np.zeros((dsys.state_space.dim, dsys.state_space.dim))
    out = [None] * (dsys.steps + 1)
    out[dsys.steps] = DenseOperator(y, dsys.state_space)
    for k in range(dsys.steps - 1, -1, -1):
        p1, p2, p3 = _pi_arrays(dsys, y, gamma, k)
        f = f_gains[k].matrix
        fadj = _wadj(f, wv, wh)
        y = p1 + fadj @ p2 + _wadj(p2, wv, wh) @ f + fadj @ p3 @ f
        y = weighted_symmetrize(y, wh)
        out[k] = DenseOperator(y, dsys.state_space)
    return out


@dataclass
class BoundedRealRun:
    """Record of one feasibility sweep at a fixed level.

    ``feasible`` requires every p3 to be uniformly positive.  When it is not,
    ``failing_step`` is the largest step whose p3 is non-positive or not
    boundedly invertible (the first one met walking backward).  Iterates and
    worst-case gains below a conditioning breakdown are None.
    """

    gamma: float
    feasible: bool
    failing_step: int | None
    completed: bool
    y: list[Operator | None]
    pi3_certs: list[SelfAdjointCert | None]
    worst_gains: list[Operator | None]

    def min_pi3_eig(self, k: int) -> float:
        cert = self.pi3_certs[k]
        if cert is None:
            raise DimensionError(f"recursion never evaluated step {k}")
        return cert.min_eig


def brl_check(
    dsys: DisturbedSystem,
    gamma: float,
    kappa_max: float = KAPPA_MAX_DEFAULT,
    stop_at_failure: bool = False,
) -> BoundedRealRun:
    """Decide whether the disturbance gain is below gamma.

    ``stop_at_failure`` abandons the walk at the first non-positive p3, which
    is enough for bisection; by default the walk continues through indefinite
    but invertible p3 so every step's spectrum gets reported.
    """
    steps = dsys.steps
    hs, vs = dsys.state_space, dsys.disturbance_space
    y_mats: list[np.ndarray | None] = [None] * (steps + 1)
    y_mats[steps] = np.zeros((hs.dim, hs.dim))
    certs: list[SelfAdjointCert | None] = [None] * steps
    gains: list[Operator | None] = [None] * steps
    y_ops: list[Operator | None] = [None] * (steps + 1)
    y_ops[steps] = DenseOperator(y_mats[steps], hs)
    feasible = True
    failing = None
    completed = True
    for k in range(steps - 1, -1, -1):
        p1, p2, p3 = _pi_arrays(dsys, y_mats[k + 1], gamma, k)
        eigvals, eigvecs, resid = _selfadjoint_eigs(p3, vs.weights)
        cert = _cert_from_eigs(eigvals, resid)
        certs[k] = cert
        positive = cert.min_eig > positivity_tolerance(cert.norm)
        if not positive and feasible:
            feasible = False
            failing = k
        if not positive and stop_at_failure:
            completed = False
            break
        if not np.isfinite(cert.cond) or cert.cond > kappa_max:
            # no bounded inverse: the iterate below this step is undefined
            completed = False
            break
        p3_inv = _unsframe((eigvecs / eigvals[None, :]) @ eigvecs.T, vs.weights, vs.weights)
        f = -p3_inv @ p2
        gains[k] = DenseOperator(f, hs, vs)
        y = p1 - _wadj(p2, vs.weights, hs.weights) @ p3_inv @ p2
        y_mats[k] = weighted_symmetrize(y, hs.weights)
        y_ops[k] = DenseOperator(y_mats[k], hs)
    return BoundedRealRun(gamma, feasible, failing, completed, y_ops, certs, gains)


def eval_perturbation(
    dsys: DisturbedSystem, v_signal: list[np.ndarray], noises: np.ndarray
) -> list[HVector]:
    """Outputs z(k) produced by a disturbance sequence along one noise path.

    The initial state is pinned at zero, matching how the perturbation map
    is defined, so z depends on the disturbance and the noise alone.
    """
    if len(v_signal) != dsys.steps:
        raise DimensionError("need one disturbance vector per step")
    v_signal = [np.asarray(v, dtype=float) for v in v_signal]
    policy = Policy(dsys.as_controlled(), inputs=v_signal)
    bundle = simulate(dsys, policy, zero_vector(dsys.state_space), noises)
    return [HVector(dsys.output_space, bundle.outputs[k]) for k in range(dsys.steps)]


def feedthrough_margin(dsys: DisturbedSystem, gamma: float) -> float:
    """Smallest eigenvalue of gamma^2 I - Dbar*Dbar over all steps.

    A nonpositive margin already rules out feasibility at this level, no
    recursion needed.
    """
    wv = dsys.disturbance_space.weights
    wz = dsys.output_space.weights
    worst = np.inf
    for k in range(dsys.steps):
        dbm = dsys.dbar(k).matrix
        m = (gamma**2) * np.eye(wv.size) - _wadj(dbm, wz, wv) @ dbm
        eigvals, _, _ = _selfadjoint_eigs(weighted_symmetrize(m, wv), wv)
        worst = min(worst, float(eigvals[0]))
    return worst


def check_uniform_positivity(dsys: DisturbedSystem, gamma: float) -> bool:
    """True iff gamma^2 I - Dbar*Dbar stays uniformly positive at every step."""
    wv = dsys.disturbance_space.weights
    wz = dsys.output_space.weights
    for k in range(dsys.steps):
        dbm = dsys.dbar(k).matrix
        m = (gamma**2) * np.eye(wv.size) - _wadj(dbm, wz, wv) @ dbm
        eigvals, _, resid = _selfadjoint_eigs(weighted_symmetrize(m, wv), wv)
        cert = _cert_from_eigs(eigvals, resid)
        if cert.min_eig <= positivity_tolerance(cert.norm):
            return False
    return True


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    lo: float
    hi: float


def hinf_norm(
    dsys: DisturbedSystem,
    lo: float = 0.0,
    hi: float | None = None,
    tol: float = 1e-6,
    kappa_max: float = KAPPA_MAX_DEFAULT,
) -> NormEstimate:
    """Disturbance gain by bisection on the feasibility predicate.

    An infeasible level is a lower bound and a feasible one an upper bound,
    so the gain is bracketed and bisected to ``tol``.  When no upper bound is
    supplied, noise-free systems get twice the exact oracle value; otherwise
    the level is doubled from 1 until feasible, capped at 2**20.
    """
    iterations = 0

    def feasible(level: float) -> bool:
        nonlocal iterations
        iterations += 1
        return brl_check(dsys, level, kappa_max, stop_at_failure=True).feasible

    if lo < 0.0:
        raise BracketError("lower bound must be nonnegative")
    if hi is None:
        try:
            hi = max(2.0 * deterministic_norm_oracle(dsys).value, 1e-3)
        except OracleScopeError:
            hi = max(1.0, 2.0 * lo)
        while not feasible(hi):
            lo = hi
            hi *= 2.0
            if hi > 2.0**20:
                raise BracketError(f"no feasible level found up to {hi}")
    elif not feasible(hi):
        raise BracketError(f"supplied upper bound {hi} is not feasible")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return NormEstimate(0.5 * (lo + hi), iterations, lo, hi)


@dataclass(frozen=True)
class OracleNorm:
    value: float
    witness: list[np.ndarray]


def deterministic_norm_oracle(dsys: DisturbedSystem) -> OracleNorm:
    """Exact gain of a noise-free system via one singular value problem.

    With C = D1 = 0 the disturbance-to-output map is a known block lower
    triangular matrix; its largest singular value in the weighted geometry is
    the gain, and the top right singular vector is a maximizing disturbance.
    Refuses systems with noise in the loop, where no such reduction exists.
    """
    scale = max(opnorm(dsys.a(k)) + opnorm(dsys.b1(k)) for k in range(dsys.steps))
    for k in range(dsys.steps):
        if opnorm(dsys.c(k)) > 1e-14 * (1.0 + scale) or opnorm(dsys.d1(k)) > 1e-14 * (1.0 + scale):
            raise OracleScopeError("oracle only covers noise-free systems (C = D1 = 0)")
    steps = dsys.steps
    dv = dsys.disturbance_space.dim
    dz = dsys.output_space.dim
    big = np.zeros((steps * dz, steps * dv))
    for j in range(steps):
        big[j * dz : (j + 1) * dz, j * dv : (j + 1) * dv] = dsys.dbar(j).matrix
        cur = dsys.b1(j).matrix
        for k in range(j + 1, steps):
            big[k * dz : (k + 1) * dz, j * dv : (j + 1) * dv] = dsys.cbar(k).matrix @ cur
            cur = dsys.a(k).matrix @ cur
    row_w = np.sqrt(np.tile(dsys.output_space.weights, steps))
    col_w = np.sqrt(np.tile(dsys.disturbance_space.weights, steps))
    weighted = big * row_w[:, None] / col_w[None, :]
    u_mat, svals, vt = np.linalg.svd(weighted)
    top = vt[0] / col_w
    witness = [top[j * dv : (j + 1) * dv].copy() for j in range(steps)]
    return OracleNorm(float(svals[0]), witness)


def perturbation_gain(dsys: DisturbedSystem, v_signal: list[np.ndarray]) -> float:
    """Realized gain sqrt(E sum |z|^2 / sum |v|^2) for an open-loop disturbance.

    The expectation over the multiplicative noise is taken exactly by path
    enumeration, so any nonzero signal produces a certified lower bound on
    the system gain.
    """
    if dsys.steps > ENUMERATION_MAX_STEPS:
        raise EnumerationLimitError("horizon too long for exact enumeration")
    if len(v_signal) != dsys.steps:
        raise DimensionError("need one disturbance vector per step")
    wv = dsys.disturbance_space.weights
    wz = dsys.output_space.weights
    v_signal = [np.asarray(v, dtype=float) for v in v_signal]
    denom = sum(float(np.dot(wv * v, v)) for v in v_signal)
    if denom == 0.0:
        raise DimensionError("disturbance signal is identically zero")
    view = dsys.as_controlled()
    policy = Policy(view, inputs=v_signal)
    cb = [dsys.cbar(k).matrix for k in range(dsys.steps)]
    db = [dsys.dbar(k).matrix for k in range(dsys.steps)]

    def stage(k, x, u):
        z = x @ cb[k].T + u @ db[k].T
        return np.einsum("pi,pi->p", z * wz[None, :], z)

    vals = run_batch(view, policy, zero_vector(dsys.state_space), sign_paths(dsys.steps), stage)
    return float(np.sqrt(np.mean(vals) / denom))
