"""Second-order jet arithmetic against finite differences and hand values."""

import numpy as np
import pytest

from qcheis.jets import (AffineMapField, CombinationField, DomainError, Jet2,
                         JetField, PolynomialField, coordinate_jets,
                         fd_oracle, pack_sym, random_positive_polynomial,
                         unpack_sym)


def _close(a, b, tol=1e-12):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


def test_pack_unpack_round_trip():
    rng = np.random.default_rng(0)
    H = rng.normal(size=(5, 4, 4))
    H = H + np.swapaxes(H, 1, 2)
    assert _close(unpack_sym(pack_sym(H), 4), H)


def test_coordinate_jets_structure():
    pts = np.array([[1.0, -2.0, 3.0]])
    coords = coordinate_jets(pts, order=2)
    for i, c in enumerate(coords):
        assert c.value[0] == pts[0, i]
        expect = np.zeros(3)
        expect[i] = 1.0
        assert _close(c.grad[0], expect)
        assert _close(c.hess_full()[0], np.zeros((3, 3)))


def test_polynomial_field_hand_values():
    # f(x, y) = x^2 y + 3 y
    f = PolynomialField(2, {(2, 1): 1.0, (0, 1): 3.0})
    pts = np.array([[2.0, -1.0], [0.5, 4.0]])
    jf = f.jets(pts, order=2)
    for (x, y), v, g, H in zip(pts, jf.value, jf.grad, jf.hess_full()):
        assert np.isclose(v, x * x * y + 3 * y)
        assert _close(g, [2 * x * y, x * x + 3], 1e-12)
        assert _close(H, [[2 * y, 2 * x], [2 * x, 0.0]], 1e-12)


def test_product_rule():
    rng = np.random.default_rng(1)
    f = random_positive_polynomial(4, rng)
    g = random_positive_polynomial(4, rng)
    pts = rng.uniform(-1, 1, size=(20, 4))
    jf, jg = f.jets(pts), g.jets(pts)
    prod = jf * jg
    assert _close(prod.value, jf.value * jg.value, 1e-10)
    expect_grad = jf.grad * jg.value[:, None] + jg.grad * jf.value[:, None]
    assert _close(prod.grad, expect_grad, 1e-10)
    expect_hess = (jf.hess_full() * jg.value[:, None, None]
                   + jg.hess_full() * jf.value[:, None, None]
                   + np.einsum("ni,nj->nij", jf.grad, jg.grad)
                   + np.einsum("ni,nj->nij", jg.grad, jf.grad))
    assert _close(prod.hess_full(), expect_hess, 1e-10)


def test_reciprocal_and_division():
    rng = np.random.default_rng(2)
    f = random_positive_polynomial(3, rng)
    pts = rng.uniform(-1, 1, size=(15, 3))
    jf = f.jets(pts)
    rec = jf.reciprocal()
    ident = jf * rec
    assert _close(ident.value, 1.0, 1e-12)
    assert _close(ident.grad, 0.0, 1e-10)
    assert _close(ident.hess_full(), 0.0, 1e-9)
    quot = 1.0 / jf
    assert _close(quot.value, rec.value)


def test_pow_real_against_log_exp_relation():
    rng = np.random.default_rng(3)
    f = random_positive_polynomial(3, rng)
    pts = rng.uniform(-1, 1, size=(10, 3))
    jf = f.jets(pts)
    alpha = -0.8
    p = jf.pow_real(alpha)
    # d(f^a) = a f^(a-1) df
    expect = alpha * jf.value ** (alpha - 1)
    assert _close(p.grad, expect[:, None] * jf.grad, 1e-9)
    lg = jf.log()
    assert _close(lg.grad, jf.grad / jf.value[:, None], 1e-12)


def test_pow_and_log_refuse_nonpositive_values():
    j = Jet2(np.array([-1.0]), np.zeros((1, 2)), np.zeros((1, 3)))
    with pytest.raises(DomainError):
        j.pow_real(0.5)
    with pytest.raises(DomainError):
        j.log()


def test_jets_match_finite_differences():
    rng = np.random.default_rng(4)
    f = random_positive_polynomial(5, rng)
    pts = rng.uniform(-1, 1, size=(6, 5))
    jf = f.jets(pts, order=2)
    fd = fd_oracle(f, pts)
    assert _close(jf.value, fd.value, 1e-10)
    assert _close(jf.grad, fd.grad, 1e-7)
    assert _close(jf.hess_full(), fd.hess_full(), 1e-5)


def test_affine_map_field_chain_rule():
    rng = np.random.default_rng(5)
    inner = random_positive_polynomial(3, rng)
    A = rng.normal(size=(3, 3))
    b = rng.normal(size=3)
    mapped = AffineMapField(inner, A, b, scale=1.5)
    pts = rng.uniform(-0.5, 0.5, size=(8, 3))
    jm = mapped.jets(pts, order=2)
    ji = inner.jets(pts @ A.T + b, order=2)
    assert _close(jm.value, 1.5 * ji.value, 1e-12)
    assert _close(jm.grad, 1.5 * np.einsum("nj,ji->ni", ji.grad, A), 1e-11)
    expect_h = 1.5 * np.einsum("ji,njk,kl->nil", A, ji.hess_full(), A)
    assert _close(jm.hess_full(), expect_h, 1e-10)
    fd = fd_oracle(mapped, pts)
    assert _close(jm.grad, fd.grad, 1e-6)


def test_combination_field_linearity():
    rng = np.random.default_rng(6)
    f = random_positive_polynomial(4, rng)
    g = random_positive_polynomial(4, rng)
    comb = CombinationField([f, g], [2.0, -0.5])
    pts = rng.uniform(-1, 1, size=(12, 4))
    jc = comb.jets(pts, order=2)
    jf, jg = f.jets(pts), g.jets(pts)
    assert _close(jc.value, 2.0 * jf.value - 0.5 * jg.value, 1e-12)
    assert _close(jc.grad, 2.0 * jf.grad - 0.5 * jg.grad, 1e-12)
    assert _close(jc.hess_full(),
                  2.0 * jf.hess_full() - 0.5 * jg.hess_full(), 1e-12)


def test_order_one_jets_have_no_hessian():
    rng = np.random.default_rng(7)
    f = random_positive_polynomial(3, rng)
    j1 = f.jets(rng.uniform(-1, 1, size=(4, 3)), order=1)
    assert j1.order == 1
    assert j1.hess is None


def test_random_positive_polynomial_positivity_and_determinism():
    rng = np.random.default_rng(8)
    f = random_positive_polynomial(7, rng, box=2.0)
    pts = np.random.default_rng(99).uniform(-2, 2, size=(4000, 7))
    assert np.min(f.values(pts)) >= 1.0
    g = random_positive_polynomial(7, np.random.default_rng(8), box=2.0)
    assert _close(f.values(pts[:50]), g.values(pts[:50]))


def test_jet_field_wraps_custom_builder():
    def builder(points, order):
        coords = coordinate_jets(points, order)
        return coords[0] * coords[0] + coords[1]

    f = JetField(2, builder)
    pts = np.array([[3.0, 2.0]])
    jf = f.jets(pts, order=2)
    assert np.isclose(jf.value[0], 11.0)
    assert _close(jf.grad[0], [6.0, 1.0])
    assert _close(jf.hess_full()[0], [[2.0, 0.0], [0.0, 0.0]])
