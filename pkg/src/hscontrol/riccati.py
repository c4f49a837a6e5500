"""Backward operator Riccati recursion with noise-coupled completion terms.

Starting from the terminal weight and stepping backward,

    P(k) = A*PA + C*PC + M - G* Rk^-1 G,    P at step N+1 = terminal,

with the completion pair (written for P = P(k+1))

    Rk = R + B*PB + D*PD,
    G  = L + B*PA + D*PC.

A step is inside the recursion domain when Rk has a bounded inverse on the
truncation, meaning it is invertible with condition number at most
``kappa_max``.  No sign is required for domain membership; the solved status
additionally demands that every Rk is uniformly positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .operators import (
    KAPPA_MAX_DEFAULT,
    DenseOperator,
    Operator,
    SelfAdjointCert,
    _cert_from_eigs,
    _selfadjoint_eigs,
    _unsframe,
    block_selfadjoint_cert,
    min_eig_selfadjoint,
    positivity_tolerance,
    weighted_symmetrize,
)
from .spaces import HVector, inner
from .systems import ControlledSystem, CostSpec

STATUS_SOLVED = "solved"
STATUS_DOMAIN_FAILURE = "domain_failure"
STATUS_NOT_UNIFORMLY_POSITIVE = "not_uniformly_positive"


def _wadj(m: np.ndarray, w_cod: np.ndarray, w_dom: np.ndarray) -> np.ndarray:
    # coordinate matrix of the weighted adjoint
    return m.T * (w_cod[None, :] / w_dom[:, None])


@dataclass
class _StepArrays:
    p: np.ndarray
    rk: np.ndarray
    gk: np.ndarray
    gain: np.ndarray
    cert: SelfAdjointCert


def _completion_arrays(system: ControlledSystem, cost: CostSpec, pn: np.ndarray, k: int):
    wh = system.state_space.weights
    wu = system.control_space.weights
    am, bm = system.a(k).matrix, system.b(k).matrix
    cm, dm = system.c(k).matrix, system.d(k).matrix
    badj = _wadj(bm, wh, wu)
    dadj = _wadj(dm, wh, wu)
    rk = cost.r(k).matrix + badj @ pn @ bm + dadj @ pn @ dm
    rk = weighted_symmetrize(rk, wu)
    gk = cost.l(k).matrix + badj @ pn @ am + dadj @ pn @ cm
    return rk, gk


def _step_arrays(
    system: ControlledSystem,
    cost: CostSpec,
    pn: np.ndarray,
    k: int,
    kappa_max: float,
) -> _StepArrays:
    wh = system.state_space.weights
    wu = system.control_space.weights
    rk, gk = _completion_arrays(system, cost, pn, k)
    eigvals, eigvecs, resid = _selfadjoint_eigs(rk, wu)
    cert = _cert_from_eigs(eigvals, resid)
    if not np.isfinite(cert.cond) or cert.cond > kappa_max:
        raise DomainError(k, f"step {k}: completion term has condition {cert.cond:.3e}")
    rinv = _unsframe((eigvecs / eigvals[None, :]) @ eigvecs.T, wu, wu)
    gain = -rinv @ gk
    am, cm = system.a(k).matrix, system.c(k).matrix
    aadj = _wadj(am, wh, wh)
    cadj = _wadj(cm, wh, wh)
    p = cost.m(k).matrix + aadj @ pn @ am + cadj @ pn @ cm
    p = p - _wadj(gk, wu, wh) @ rinv @ gk
    return _StepArrays(weighted_symmetrize(p, wh), rk, gk, gain, cert)


def completion_terms(
    system: ControlledSystem, cost: CostSpec, p_next: Operator, k: int
) -> tuple[Operator, Operator]:
    """The pair (Rk, G) entering the step-k completion of squares."""
    rk, gk = _completion_arrays(system, cost, p_next.matrix, k)
    us, hs = system.control_space, system.state_space
    return DenseOperator(rk, us), DenseOperator(gk, hs, us)


def riccati_step(
    system: ControlledSystem,
    cost: CostSpec,
    p_next: Operator,
    k: int,
    kappa_max: float = KAPPA_MAX_DEFAULT,
) -> tuple[Operator, Operator]:
    """One backward step; returns (P(k), gain K(k)) or raises DomainError."""
    res = _step_arrays(system, cost, p_next.matrix, k, kappa_max)
    hs, us = system.state_space, system.control_space
    return DenseOperator(res.p, hs), DenseOperator(res.gain, hs, us)


@dataclass
class RiccatiSolution:
    """Backward pass record.

    ``p[k]`` is defined for every step the recursion reached; on a domain
    failure at step k0, entries 0..k0 are None and ``failing_step`` is k0 (the
    largest step outside the domain, hit first when walking backward).  With
    all steps in the domain but some completion term not uniformly positive,
    the status reports the largest offending step instead.
    """

    status: str
    failing_step: int | None
    p: list[Operator | None]
    gains: list[Operator | None]
    rk: list[Operator | None]
    gk: list[Operator | None]
    rk_certs: list[SelfAdjointCert | None]

    @property
    def solved(self) -> bool:
        return self.status == STATUS_SOLVED

    def value(self, x0: HVector) -> float:
        """<P(0) x0, x0>, the optimal expected cost from x0."""
        if self.p[0] is None:
            raise DomainError(self.failing_step, "recursion never reached step 0")
        return inner(self.p[0].apply(x0), x0)


def solve_backward_riccati(
    system: ControlledSystem, cost: CostSpec, kappa_max: float = KAPPA_MAX_DEFAULT
) -> RiccatiSolution:
    """Run the full backward recursion and classify the outcome.

    Status is "solved" when every step is in the domain and every completion
    term is uniformly positive (minimum eigenvalue above the scale-aware
    tolerance); "domain_failure" when some completion term has no bounded
    inverse, stopping the recursion; "not_uniformly_positive" when the
    recursion completes but a completion term dips to or below the tolerance.
    """
    steps = system.steps
    hs, us = system.state_space, system.control_space
    p_mats: list[np.ndarray | None] = [None] * (steps + 1)
    p_mats[steps] = cost.terminal.matrix
    gains: list[Operator | None] = [None] * steps
    rk_ops: list[Operator | None] = [None] * steps
    gk_ops: list[Operator | None] = [None] * steps
    certs: list[SelfAdjointCert | None] = [None] * steps
    status = STATUS_SOLVED
    failing = None
    for k in range(steps - 1, -1, -1):
        try:
            res = _step_arrays(system, cost, p_mats[k + 1], k, kappa_max)
        except DomainError as err:
            status = STATUS_DOMAIN_FAILURE
            failing = err.step
            break
        p_mats[k] = res.p
        gains[k] = DenseOperator(res.gain, hs, us)
        rk_ops[k] = DenseOperator(res.rk, us)
        gk_ops[k] = DenseOperator(res.gk, hs, us)
        certs[k] = res.cert
    if status != STATUS_DOMAIN_FAILURE:
        for k in range(steps - 1, -1, -1):
            cert = certs[k]
            if cert.min_eig <= positivity_tolerance(cert.norm):
                status = STATUS_NOT_UNIFORMLY_POSITIVE
                failing = k
                break
    p_ops: list[Operator | None] = [
        DenseOperator(m, hs) if m is not None else None for m in p_mats
    ]
    return RiccatiSolution(status, failing, p_ops, gains, rk_ops, gk_ops, certs)


@dataclass(frozen=True)
class PsdCostCertificate:
    """Outcome of the sufficient positivity check on the cost data.

    ``ok`` means: terminal weight positive semidefinite, every stage weight
    R strictly positive, and every stage block [[M, L*], [L, R]] positive
    semidefinite on the product space.  Under these conditions the backward
    recursion is guaranteed to come back solved with P(k) >= 0 throughout.
    """

    ok: bool
    terminal_min_eig: float
    min_control_eig: float
    min_stage_block_eig: float


def psd_cost_certificate(system: ControlledSystem, cost: CostSpec) -> PsdCostCertificate:
    term_cert = min_eig_selfadjoint(cost.terminal)
    term_ok = term_cert.min_eig >= -positivity_tolerance(term_cert.norm)
    min_r = np.inf
    min_block = np.inf
    r_ok = True
    block_ok = True
    for k in range(system.steps):
        r_cert = min_eig_selfadjoint(cost.r(k))
        min_r = min(min_r, r_cert.min_eig)
        if r_cert.min_eig <= positivity_tolerance(r_cert.norm):
            r_ok = False
        blk = block_selfadjoint_cert(cost.m(k), cost.l(k), cost.r(k))
        min_block = min(min_block, blk.min_eig)
        if blk.min_eig < -positivity_tolerance(blk.norm):
            block_ok = False
    return PsdCostCertificate(
        term_ok and r_ok and block_ok,
        float(term_cert.min_eig),
        float(min_r),
        float(min_block),
    )
