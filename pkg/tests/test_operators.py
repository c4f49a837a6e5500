import numpy as np
import pytest

import hscontrol as hc


def pairing_residual(op, rng, trials=5):
    """max |<M x, y>_cod - <x, M* y>_dom| over random vectors."""
    adj = hc.adjoint(op)
    worst = 0.0
    for _ in range(trials):
        x = hc.HVector(op.domain, rng.standard_normal(op.domain.dim))
        y = hc.HVector(op.codomain, rng.standard_normal(op.codomain.dim))
        lhs = hc.inner(hc.apply(op, x), y)
        rhs = hc.inner(x, hc.apply(adj, y))
        worst = max(worst, abs(lhs - rhs))
    return worst


LINE = hc.l2_line(2.0, 0.25)
SEQ = hc.ell2(9)
SEQ_BIG = hc.ell2(10)
EUC = hc.euclidean(4)
MODES = hc.l2_interval(1.0, 6)


def operator_zoo(rng):
    return [
        hc.ZeroOperator(LINE, EUC),
        hc.IdentityOperator(SEQ),
        hc.ScaledOperator(-2.5, hc.IdentityOperator(LINE)),
        hc.DenseOperator(rng.standard_normal((EUC.dim, LINE.dim)), LINE, EUC),
        hc.DiagonalOperator(rng.standard_normal(LINE.dim), LINE),
        hc.FillingOperator(EUC, SEQ),
        hc.FillingOperator(EUC, SEQ, count=2),
        hc.RightShiftOperator(SEQ),
        hc.RightShiftOperator(SEQ, SEQ_BIG),
        hc.GaussianConvolutionOperator(LINE, kernel_width=0.7),
        hc.HeatSemigroupOperator(MODES, alpha=0.1, tau=0.3),
    ]


def test_adjoint_pairing_all_variants():
    rng = np.random.default_rng(0)
    for op in operator_zoo(rng):
        assert pairing_residual(op, rng) < 1e-10, type(op).__name__


def test_adjoint_pairing_composites():
    rng = np.random.default_rng(1)
    a = hc.DenseOperator(rng.standard_normal((LINE.dim, LINE.dim)), LINE)
    b = hc.DiagonalOperator(rng.standard_normal(LINE.dim), LINE)
    for op in [a + b, a @ b, a.scaled(3.0), hc.AdjointOperator(a)]:
        assert pairing_residual(op, rng) < 1e-9, type(op).__name__


def test_double_adjoint_returns_original_matrix():
    rng = np.random.default_rng(2)
    op = hc.DenseOperator(rng.standard_normal((EUC.dim, LINE.dim)), LINE, EUC)
    back = hc.adjoint(hc.adjoint(op))
    assert np.allclose(back.matrix, op.matrix)


def test_square_shift_drops_last_coordinate():
    op = hc.RightShiftOperator(SEQ)
    x = hc.HVector(SEQ, np.arange(1.0, 10.0))
    y = hc.apply(op, x)
    assert np.allclose(y.coords, [0, 1, 2, 3, 4, 5, 6, 7, 8])


def test_rectangular_shift_is_exact_isometry():
    op = hc.RightShiftOperator(SEQ, SEQ_BIG)
    gram = hc.adjoint(op).matrix @ op.matrix
    assert np.allclose(gram, np.eye(SEQ.dim))
    rng = np.random.default_rng(3)
    x = hc.HVector(SEQ, rng.standard_normal(SEQ.dim))
    assert np.isclose(hc.norm(hc.apply(op, x)), hc.norm(x))


def test_shift_codomain_must_not_shrink():
    with pytest.raises(hc.DimensionError):
        hc.RightShiftOperator(SEQ_BIG, SEQ)


def test_filling_embeds_leading_coordinates():
    op = hc.FillingOperator(EUC, SEQ, count=2)
    x = hc.HVector(EUC, np.array([1.0, 2.0, 3.0, 4.0]))
    y = hc.apply(op, x)
    assert np.allclose(y.coords[:2], [1.0, 2.0])
    assert np.all(y.coords[2:] == 0.0)
    assert op.count == 2


def test_gaussian_convolution_selfadjoint_and_smoothing():
    op = hc.GaussianConvolutionOperator(LINE, kernel_width=1.0)
    assert pairing_residual(op, np.random.default_rng(4)) < 1e-10
    wm = LINE.weights[:, None] * op.matrix
    assert np.allclose(wm, wm.T)
    # unit mass kernel preserves the integral of a bump away from the edges
    wide = hc.l2_line(6.0, 0.25)
    op_wide = hc.GaussianConvolutionOperator(wide, kernel_width=1.0)
    x = np.exp(-wide.grid() ** 2)
    out = op_wide.matrix @ x
    assert np.isclose(np.dot(wide.weights, out), np.dot(wide.weights, x), rtol=1e-3)


def test_heat_semigroup_composition():
    a = hc.HeatSemigroupOperator(MODES, alpha=0.1, tau=0.2)
    b = hc.HeatSemigroupOperator(MODES, alpha=0.1, tau=0.5)
    c = hc.HeatSemigroupOperator(MODES, alpha=0.1, tau=0.7)
    assert np.allclose((a @ b).matrix, c.matrix)


def test_heat_semigroup_decay_rates():
    op = hc.HeatSemigroupOperator(MODES, alpha=0.1, tau=1.0)
    n = MODES.mode_index()
    assert np.allclose(np.diag(op.matrix), np.exp(-0.1 * (n * np.pi) ** 2))


def test_opnorm_matches_reference():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((LINE.dim, LINE.dim))
    op = hc.DenseOperator(m, LINE)
    s = np.sqrt(LINE.weights)
    ref = np.linalg.norm((s[:, None] * m) / s[None, :], 2)
    assert np.isclose(hc.opnorm(op), ref)


def test_opnorm_identity_and_scaled():
    assert np.isclose(hc.opnorm(hc.IdentityOperator(LINE)), 1.0)
    assert np.isclose(hc.opnorm(hc.ScaledOperator(-3.0, hc.IdentityOperator(SEQ))), 3.0)


def test_min_eig_selfadjoint():
    rng = np.random.default_rng(6)
    g = rng.standard_normal((LINE.dim, LINE.dim))
    sym = 0.5 * (g + g.T)
    # W M must be symmetric for M to be self-adjoint under weights W
    op = hc.DenseOperator(sym / LINE.weights[:, None], LINE)
    cert = hc.min_eig_selfadjoint(op)
    assert np.isfinite(cert.min_eig)
    assert cert.min_eig <= cert.max_eig
    assert cert.sym_residual < 1e-12
    shifted = hc.DenseOperator(op.matrix + 10.0 * np.eye(LINE.dim), LINE)
    assert np.isclose(hc.min_eig_selfadjoint(shifted).min_eig, cert.min_eig + 10.0,
                      atol=1e-8)


def test_min_eig_rejects_nonselfadjoint():
    rng = np.random.default_rng(7)
    op = hc.DenseOperator(rng.standard_normal((4, 4)), EUC)
    with pytest.raises(hc.NotSelfAdjointError):
        hc.min_eig_selfadjoint(op)


def test_invert_positive_errors():
    neg = hc.ScaledOperator(-1.0, hc.IdentityOperator(EUC))
    with pytest.raises(hc.NotPositiveError):
        hc.invert_positive(neg)
    tiny = hc.DiagonalOperator(np.array([1.0, 1.0, 1.0, 1e-15]), EUC)
    with pytest.raises((hc.NotPositiveError, hc.IllConditionedError)):
        hc.invert_positive(tiny)


def test_invert_positive_inverse_property():
    rng = np.random.default_rng(8)
    g = rng.standard_normal((LINE.dim, LINE.dim))
    mat = g @ np.diag(LINE.weights) @ g.T / LINE.weights[:, None] + np.eye(LINE.dim)
    op = hc.DenseOperator(mat, LINE)
    inv = hc.invert_positive(op)
    assert np.allclose(inv.matrix @ op.matrix, np.eye(LINE.dim), atol=1e-8)


def test_invert_selfadjoint_indefinite():
    op = hc.DiagonalOperator(np.array([2.0, -3.0, 1.0, -1.0]), EUC)
    inv = hc.invert_selfadjoint(op)
    assert np.allclose(inv.matrix @ op.matrix, np.eye(4))
    bad = hc.DiagonalOperator(np.array([1.0, 0.0, 1.0, 1.0]), EUC)
    with pytest.raises(hc.IllConditionedError):
        hc.invert_selfadjoint(bad)


def test_positivity_tolerance_scales_with_norm():
    assert hc.positivity_tolerance(0.0) == pytest.approx(1e-9)
    assert hc.positivity_tolerance(1000.0) == pytest.approx(1e-9 * 1001.0)


def test_weighted_symmetrize_is_selfadjoint():
    rng = np.random.default_rng(9)
    m = rng.standard_normal((LINE.dim, LINE.dim))
    sym = hc.weighted_symmetrize(m, LINE.weights)
    op = hc.DenseOperator(sym, LINE)
    assert pairing_residual(op, rng) < 1e-10
    assert np.allclose(hc.adjoint(op).matrix, sym)
    # idempotent on already self-adjoint input
    assert np.allclose(hc.weighted_symmetrize(sym, LINE.weights), sym)


def test_schur_complement_certifies_block_positivity():
    rng = np.random.default_rng(10)
    g = rng.standard_normal((8, 8))
    w = g @ g.T + 0.5 * np.eye(8)
    sa = hc.euclidean(4)
    a = hc.DenseOperator(w[:4, :4], sa)
    b = hc.DenseOperator(w[4:, :4], sa, sa)
    d = hc.DenseOperator(w[4:, 4:], sa)
    sc = hc.schur_complement(a, b, d)
    assert hc.min_eig_selfadjoint(sc).min_eig > 0
    cert = hc.block_selfadjoint_cert(a, b, d)
    assert cert.min_eig > hc.positivity_tolerance(cert.norm)


def test_block_cert_detects_indefinite():
    sa = hc.euclidean(2)
    a = hc.DiagonalOperator(np.array([1.0, 1.0]), sa)
    b = hc.DiagonalOperator(np.array([5.0, 0.0]), sa)
    d = hc.DiagonalOperator(np.array([1.0, 1.0]), sa)
    cert = hc.block_selfadjoint_cert(a, b, d)
    assert cert.min_eig < 0


def test_dimension_mismatch_rejected():
    rng = np.random.default_rng(11)
    with pytest.raises(hc.DimensionError):
        hc.DenseOperator(rng.standard_normal((3, 3)), EUC)
    a = hc.IdentityOperator(EUC)
    b = hc.IdentityOperator(SEQ)
    with pytest.raises(hc.DimensionError):
        a @ b
    with pytest.raises(hc.DimensionError):
        a + b


def test_apply_checks_domain():
    op = hc.IdentityOperator(EUC)
    with pytest.raises(hc.DimensionError):
        hc.apply(op, hc.HVector(SEQ, np.zeros(SEQ.dim)))
