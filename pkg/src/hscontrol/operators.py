"""Structured bounded linear operators on truncated Hilbert spaces.

Operators form a small expression language:

    ZeroOperator, IdentityOperator, ScaledOperator, DenseOperator,
    DiagonalOperator, RightShiftOperator, FillingOperator,
    GaussianConvolutionOperator, HeatSemigroupOperator,
    SumOperator, ComposeOperator, AdjointOperator

Adjoints are taken symbolically per variant.  Only the dense variant computes
its adjoint from its own matrix, using the quadrature weights of its domain and
codomain, so the pairing <A x, y> = <x, A* y> holds to round-off everywhere.
Spectral queries (minimum eigenvalue, condition number, positive inversion) are
evaluated in the symmetric frame S = W^(1/2) M W^(-1/2), which represents the
operator with respect to an orthonormal basis of the weighted space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    IllConditionedError,
    NotPositiveError,
    NotSelfAdjointError,
)
from .spaces import KIND_L2_INTERVAL, KIND_L2_LINE, HVector, Space

KAPPA_MAX_DEFAULT = 1e12
SYM_RTOL = 1e-8


def _sframe(m: np.ndarray, w_cod: np.ndarray, w_dom: np.ndarray) -> np.ndarray:
    """Map a coordinate matrix to the orthonormal-basis frame."""
    s_c = np.sqrt(w_cod)
    s_d = np.sqrt(w_dom)
    return m * (s_c[:, None] / s_d[None, :])


def _unsframe(s: np.ndarray, w_cod: np.ndarray, w_dom: np.ndarray) -> np.ndarray:
    s_c = np.sqrt(w_cod)
    s_d = np.sqrt(w_dom)
    return s * (1.0 / s_c[:, None]) * s_d[None, :]


class Operator:
    """Bounded linear map between two spaces.  Subclasses set domain/codomain."""

    domain: Space
    codomain: Space

    def apply_array(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply(self, x: HVector) -> HVector:
        if x.space != self.domain:
            raise DimensionError("vector does not live on the operator domain")
        return HVector(self.codomain, self.apply_array(x.coords))

    @property
    def matrix(self) -> np.ndarray:
        cached = getattr(self, "_matrix_cache", None)
        if cached is None:
            cached = self._build_matrix()
            self._matrix_cache = cached
        return cached

    def _build_matrix(self) -> np.ndarray:
        cols = [self.apply_array(col) for col in np.eye(self.domain.dim)]
        return np.column_stack(cols) if cols else np.zeros((self.codomain.dim, 0))

    def adjoint(self) -> "Operator":
        return AdjointOperator(self)

    def is_square(self) -> bool:
        return self.domain == self.codomain

    # Small algebra helpers; these build expression nodes, never matrices.
    def __add__(self, other: "Operator") -> "Operator":
        return SumOperator([self, other])

    def __matmul__(self, other: "Operator") -> "Operator":
        return ComposeOperator(self, other)

    def scaled(self, factor: float) -> "Operator":
        return ScaledOperator(factor, self)

    def __repr__(self):
        return f"{type(self).__name__}({self.domain.dim}->{self.codomain.dim})"


class ZeroOperator(Operator):
    def __init__(self, domain: Space, codomain: Space | None = None):
        self.domain = domain
        self.codomain = domain if codomain is None else codomain

    def apply_array(self, x):
        return np.zeros(self.codomain.dim)

    def _build_matrix(self):
        return np.zeros((self.codomain.dim, self.domain.dim))

    def adjoint(self):
        return ZeroOperator(self.codomain, self.domain)


class IdentityOperator(Operator):
    def __init__(self, space: Space):
        self.domain = self.codomain = space

    def apply_array(self, x):
        return np.array(x, dtype=float)

    def _build_matrix(self):
        return np.eye(self.domain.dim)

    def adjoint(self):
        return self


class ScaledOperator(Operator):
    def __init__(self, factor: float, inner_op: Operator):
        self.factor = float(factor)
        self.inner_op = inner_op
        self.domain = inner_op.domain
        self.codomain = inner_op.codomain

    def apply_array(self, x):
        return self.factor * self.inner_op.apply_array(x)

    def _build_matrix(self):
        return self.factor * self.inner_op.matrix

    def adjoint(self):
        return ScaledOperator(self.factor, self.inner_op.adjoint())


class DenseOperator(Operator):
    def __init__(self, matrix: np.ndarray, domain: Space, codomain: Space | None = None):
        m = np.asarray(matrix, dtype=float)
        self.domain = domain
        self.codomain = domain if codomain is None else codomain
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionError(
                f"matrix of shape {m.shape} does not map dim {self.domain.dim} to dim {self.codomain.dim}"
            )
        self._matrix_cache = m

    def apply_array(self, x):
        return self.matrix @ x

    def adjoint(self):
        # Weighted transpose: W_dom^-1 M^T W_cod.
        m = self.matrix.T * (self.codomain.weights[None, :] / self.domain.weights[:, None])
        return DenseOperator(m, self.codomain, self.domain)


class DiagonalOperator(Operator):
    """Coordinatewise multiplier on a single space; always self-adjoint."""

    def __init__(self, entries: np.ndarray, space: Space):
        e = np.asarray(entries, dtype=float)
        if e.shape != (space.dim,):
            raise DimensionError("diagonal entry count does not match the space dimension")
        self.entries = e
        self.domain = self.codomain = space

    def apply_array(self, x):
        return self.entries * x

    def _build_matrix(self):
        return np.diag(self.entries)

    def adjoint(self):
        return self


class RightShiftOperator(Operator):
    """(a1, a2, ...) -> (0, a1, a2, ...) on a sequence-space truncation.

    A square truncation drops the last coordinate.  Passing a codomain at
    least one dimension larger keeps every coordinate, which preserves the
    isometry of the untruncated shift exactly.
    """

    def __init__(self, space: Space, codomain: Space | None = None):
        self.domain = space
        self.codomain = space if codomain is None else codomain
        if self.codomain.dim < space.dim:
            raise DimensionError("shift codomain cannot be smaller than its domain")

    def apply_array(self, x):
        out = np.zeros(self.codomain.dim)
        keep = min(self.domain.dim, self.codomain.dim - 1)
        out[1 : keep + 1] = x[:keep]
        return out

    def _build_matrix(self):
        return np.eye(self.codomain.dim, self.domain.dim, k=-1)


class FillingOperator(Operator):
    """Copy the leading ``count`` coordinates into the codomain, zero the rest."""

    def __init__(self, domain: Space, codomain: Space, count: int | None = None):
        self.domain = domain
        self.codomain = codomain
        if count is None:
            count = min(domain.dim, codomain.dim)
        if not 1 <= count <= min(domain.dim, codomain.dim):
            raise DimensionError("filling count must fit inside both spaces")
        self.count = int(count)

    def apply_array(self, x):
        out = np.zeros(self.codomain.dim)
        out[: self.count] = x[: self.count]
        return out

    def _build_matrix(self):
        m = np.zeros((self.codomain.dim, self.domain.dim))
        idx = np.arange(self.count)
        m[idx, idx] = 1.0
        return m


class GaussianConvolutionOperator(Operator):
    """Convolution with the Gaussian density on a symmetric grid space.

    The kernel exp(-(t - s)^2 / (2 sigma^2)) / (sigma sqrt(2 pi)) is sampled on
    the grid and composed with the trapezoid quadrature weights, which makes
    the discretized operator exactly self-adjoint for the weighted inner
    product (the kernel is symmetric in t - s).
    """

    def __init__(self, space: Space, kernel_width: float = 1.0):
        if space.kind != KIND_L2_LINE:
            raise DimensionError("Gaussian convolution requires a grid-based line space")
        if kernel_width <= 0:
            raise DimensionError("kernel width must be positive")
        self.kernel_width = float(kernel_width)
        self.domain = self.codomain = space

    def _build_matrix(self):
        t = self.domain.grid()
        sig = self.kernel_width
        diff = t[:, None] - t[None, :]
        kernel = np.exp(-(diff**2) / (2.0 * sig * sig)) / (sig * np.sqrt(2.0 * np.pi))
        return kernel * self.domain.weights[None, :]

    def apply_array(self, x):
        return self.matrix @ x

    def adjoint(self):
        return self


class HeatSemigroupOperator(Operator):
    """Heat flow over one sampling interval on a spectral interval space.

    Acts diagonally on sine-mode coefficients, multiplying mode n by
    exp(-alpha (n pi / l)^2 tau).
    """

    def __init__(self, space: Space, alpha: float, tau: float):
        if space.kind != KIND_L2_INTERVAL:
            raise DimensionError("heat semigroup requires a spectral interval space")
        if alpha < 0 or tau < 0:
            raise DimensionError("diffusivity and sampling interval must be nonnegative")
        self.alpha = float(alpha)
        self.tau = float(tau)
        self.domain = self.codomain = space

    @property
    def factors(self) -> np.ndarray:
        n = self.domain.mode_index()
        rates = self.alpha * (n * np.pi / self.domain.length) ** 2
        return np.exp(-rates * self.tau)

    def apply_array(self, x):
        return self.factors * x

    def _build_matrix(self):
        return np.diag(self.factors)

    def adjoint(self):
        return self


class SumOperator(Operator):
    def __init__(self, terms: list[Operator]):
        if not terms:
            raise DimensionError("operator sum needs at least one term")
        flat: list[Operator] = []
        for t in terms:
            flat.extend(t.terms if isinstance(t, SumOperator) else [t])
        first = flat[0]
        for t in flat[1:]:
            if t.domain != first.domain or t.codomain != first.codomain:
                raise DimensionError("operator sum terms live on mismatched spaces")
        self.terms = flat
        self.domain = first.domain
        self.codomain = first.codomain

    def apply_array(self, x):
        out = self.terms[0].apply_array(x)
        for t in self.terms[1:]:
            out = out + t.apply_array(x)
        return out

    def _build_matrix(self):
        out = self.terms[0].matrix.copy()
        for t in self.terms[1:]:
            out += t.matrix
        return out

    def adjoint(self):
        return SumOperator([t.adjoint() for t in self.terms])


class ComposeOperator(Operator):
    """outer after inner: (outer @ inner)(x) = outer(inner(x))."""

    def __init__(self, outer: Operator, inner_op: Operator):
        if inner_op.codomain != outer.domain:
            raise DimensionError("composition spaces do not chain")
        self.outer = outer
        self.inner_op = inner_op
        self.domain = inner_op.domain
        self.codomain = outer.codomain

    def apply_array(self, x):
        return self.outer.apply_array(self.inner_op.apply_array(x))

    def _build_matrix(self):
        return self.outer.matrix @ self.inner_op.matrix

    def adjoint(self):
        return ComposeOperator(self.inner_op.adjoint(), self.outer.adjoint())


class AdjointOperator(Operator):
    """Weighted-transpose wrapper for variants without a closed-form adjoint."""

    def __init__(self, inner_op: Operator):
        self.inner_op = inner_op
        self.domain = inner_op.codomain
        self.codomain = inner_op.domain

    def apply_array(self, y):
        m = self.inner_op.matrix
        return (m.T @ (self.inner_op.codomain.weights * y)) / self.inner_op.domain.weights

    def _build_matrix(self):
        m = self.inner_op.matrix
        return m.T * (self.inner_op.codomain.weights[None, :] / self.inner_op.domain.weights[:, None])

    def adjoint(self):
        return self.inner_op


def adjoint(op: Operator) -> Operator:
    return op.adjoint()


def apply(op: Operator, x: HVector) -> HVector:
    return op.apply(x)


def opnorm(op: Operator) -> float:
    """Operator norm with respect to the weighted inner products."""
    s = _sframe(op.matrix, op.codomain.weights, op.domain.weights)
    if min(s.shape) == 0:
        return 0.0
    return float(np.linalg.norm(s, 2))


@dataclass(frozen=True)
class SelfAdjointCert:
    """Spectral certificate for a self-adjoint operator on the truncation."""

    min_eig: float
    max_eig: float
    cond: float
    sym_residual: float

    @property
    def norm(self) -> float:
        return max(abs(self.min_eig), abs(self.max_eig))


def _selfadjoint_eigs(m: np.ndarray, w: np.ndarray, rtol: float = SYM_RTOL):
    s = _sframe(m, w, w)
    scale = 1.0 + np.linalg.norm(s, "fro")
    resid = np.linalg.norm(s - s.T, "fro") / scale
    if resid > rtol:
        raise NotSelfAdjointError(f"symmetrization residual {resid:.3e} exceeds {rtol:.1e}")
    sym = 0.5 * (s + s.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    return eigvals, eigvecs, resid


def _cert_from_eigs(eigvals: np.ndarray, resid: float) -> SelfAdjointCert:
    lo = float(eigvals[0])
    hi = float(eigvals[-1])
    small = float(np.min(np.abs(eigvals)))
    big = float(np.max(np.abs(eigvals)))
    cond = np.inf if small == 0.0 else big / small
    return SelfAdjointCert(lo, hi, cond, resid)


def min_eig_selfadjoint(op: Operator) -> SelfAdjointCert:
    """Minimum eigenvalue and conditioning of a self-adjoint square operator."""
    if not op.is_square():
        raise DimensionError("spectral certificate requires a square operator")
    eigvals, _, resid = _selfadjoint_eigs(op.matrix, op.domain.weights)
    return _cert_from_eigs(eigvals, resid)


def positivity_tolerance(cert_norm: float) -> float:
    """Scale-aware threshold below which eigenvalues do not count as positive."""
    return 1e-9 * (1.0 + cert_norm)


def invert_positive(op: Operator, kappa_max: float = KAPPA_MAX_DEFAULT) -> Operator:
    """Invert a self-adjoint positive operator on the truncation.

    Raises NotPositiveError when the minimum eigenvalue sits at or below the
    scale-aware tolerance, and IllConditionedError when the condition number
    exceeds ``kappa_max`` (the truncation surrogate for bounded invertibility).
    """
    if isinstance(op, IdentityOperator):
        return op
    if isinstance(op, ScaledOperator) and isinstance(op.inner_op, IdentityOperator):
        if op.factor <= positivity_tolerance(abs(op.factor)):
            raise NotPositiveError(f"scaled identity with factor {op.factor} is not positive")
        return ScaledOperator(1.0 / op.factor, op.inner_op)
    if not op.is_square():
        raise DimensionError("only square operators can be inverted")
    w = op.domain.weights
    eigvals, eigvecs, resid = _selfadjoint_eigs(op.matrix, w)
    cert = _cert_from_eigs(eigvals, resid)
    tol = positivity_tolerance(cert.norm)
    if cert.min_eig <= tol:
        raise NotPositiveError(f"minimum eigenvalue {cert.min_eig:.3e} is not above {tol:.3e}")
    if cert.cond > kappa_max:
        raise IllConditionedError(f"condition number {cert.cond:.3e} exceeds cap {kappa_max:.1e}")
    inv_s = (eigvecs / eigvals[None, :]) @ eigvecs.T
    return DenseOperator(_unsframe(inv_s, w, w), op.domain)


def invert_selfadjoint(op: Operator, kappa_max: float = KAPPA_MAX_DEFAULT) -> Operator:
    """Invert a self-adjoint, possibly indefinite operator on the truncation.

    Membership in the recursion domain only needs a bounded inverse, so the
    sign of the spectrum is not restricted here; the condition cap plays the
    role of the bounded-inverse requirement.
    """
    if not op.is_square():
        raise DimensionError("only square operators can be inverted")
    w = op.domain.weights
    eigvals, eigvecs, resid = _selfadjoint_eigs(op.matrix, w)
    cert = _cert_from_eigs(eigvals, resid)
    if not np.isfinite(cert.cond) or cert.cond > kappa_max:
        raise IllConditionedError(
            f"condition number {cert.cond:.3e} exceeds cap {kappa_max:.1e}"
        )
    inv_s = (eigvecs / eigvals[None, :]) @ eigvecs.T
    return DenseOperator(_unsframe(inv_s, w, w), op.domain)


def weighted_symmetrize(m: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Project a coordinate matrix onto the self-adjoint part for weights w."""
    s = _sframe(m, w, w)
    return _unsframe(0.5 * (s + s.T), w, w)


def schur_complement(
    m11: Operator, m21: Operator, m22: Operator, kappa_max: float = KAPPA_MAX_DEFAULT
) -> Operator:
    """m11 - m21* m22^-1 m21 for a self-adjoint block [[m11, m21*], [m21, m22]]."""
    if m21.domain != m11.domain or m21.codomain != m22.domain:
        raise DimensionError("off-diagonal block does not link the diagonal blocks")
    inv22 = invert_positive(m22, kappa_max)
    m = m11.matrix - m21.adjoint().matrix @ inv22.matrix @ m21.matrix
    return DenseOperator(weighted_symmetrize(m, m11.domain.weights), m11.domain)


def block_selfadjoint_cert(m11: Operator, m21: Operator, m22: Operator) -> SelfAdjointCert:
    """Spectral certificate of [[m11, m21*], [m21, m22]] on the product space."""
    top = np.hstack([m11.matrix, m21.adjoint().matrix])
    bottom = np.hstack([m21.matrix, m22.matrix])
    block = np.vstack([top, bottom])
    w = np.concatenate([m11.domain.weights, m22.domain.weights])
    eigvals, _, resid = _selfadjoint_eigs(block, w)
    return _cert_from_eigs(eigvals, resid)
