"""Group law, contact structure, frame audit, and frame differential ops."""

from fractions import Fraction

import numpy as np
import pytest

from qcheis.heis import (ContactForm, GroupPoint, HorizontalFrame,
                         build_frame, dilate, dilation_affine, frame_audit,
                         frame_first_order, frame_second_order, group_inverse,
                         group_multiply, horiz_divergence, left_translation_affine,
                         sublaplacian)
from qcheis.jets import (PolynomialField, fd_oracle,
                         random_positive_polynomial)
from qcheis.quat import HVector, ImQuaternion, Quaternion, rational_quaternion


def _rational_point(n, rng):
    q = HVector([rational_quaternion(rng) for _ in range(n)])
    w = ImQuaternion(*(rational_quaternion(rng).im().components()))
    return GroupPoint(q, w)


@pytest.mark.parametrize("n", [1, 2])
def test_group_axioms_exact(n):
    rng = np.random.default_rng(10 + n)
    e = GroupPoint.identity(n)
    for _ in range(8):
        a = _rational_point(n, rng)
        b = _rational_point(n, rng)
        c = _rational_point(n, rng)
        assert group_multiply(a, e) == a
        assert group_multiply(e, a) == a
        assert group_multiply(group_multiply(a, b), c) \
            == group_multiply(a, group_multiply(b, c))
        assert group_multiply(a, group_inverse(a)) == e
        assert group_multiply(group_inverse(a), a) == e


@pytest.mark.parametrize("n", [1, 2])
def test_dilations_are_automorphisms(n):
    rng = np.random.default_rng(20 + n)
    lam, mu = Fraction(3, 2), Fraction(2, 3)
    for _ in range(5):
        a = _rational_point(n, rng)
        b = _rational_point(n, rng)
        assert dilate(lam, dilate(mu, a)) == dilate(lam * mu, a)
        assert group_multiply(dilate(lam, a), dilate(lam, b)) \
            == dilate(lam, group_multiply(a, b))
    # the center scales quadratically
    p = _rational_point(n, rng)
    d = dilate(lam, p)
    assert d.w == p.w * (lam * lam)


@pytest.mark.parametrize("n", [1, 2])
def test_left_translation_affine_matches_group_law(n):
    rng = np.random.default_rng(30 + n)
    p0 = _rational_point(n, rng)
    A, b = left_translation_affine(p0)
    for _ in range(5):
        p = _rational_point(n, rng)
        flat = p.flat()
        image = [sum(A[i][j] * flat[j] for j in range(len(flat))) + b[i]
                 for i in range(len(flat))]
        assert image == group_multiply(p0, p).flat()


@pytest.mark.parametrize("n", [1, 2])
def test_dilation_affine_matches_dilate(n):
    rng = np.random.default_rng(40 + n)
    lam = Fraction(5, 4)
    A, b = dilation_affine(lam, n)
    p = _rational_point(n, rng)
    flat = p.flat()
    image = [sum(A[i][j] * flat[j] for j in range(len(flat))) + b[i]
             for i in range(len(flat))]
    assert image == dilate(lam, p).flat()


@pytest.mark.parametrize("n", [1, 2])
def test_frame_audit_is_exactly_zero(n):
    frame = build_frame(n)
    report = frame_audit(frame, n_points=30, seed=1)
    assert report.all_zero
    assert report.max_violation == 0


def test_frame_audit_flags_broken_reeb():
    frame = build_frame(1)
    bad_reeb = [[Fraction(0)] * 7 for _ in range(3)]
    for s in range(3):
        bad_reeb[s][4 + s] = Fraction(3)  # should be 2
    report = frame_audit(frame, n_points=10, seed=2, reeb=bad_reeb)
    assert not report.all_zero
    assert report.violations["reeb_normalization"] > 0


def test_frame_audit_flags_broken_complex_structure():
    frame = build_frame(1)
    Is = frame.exact_Is()
    Is[0] = [[-v for v in row] for row in Is[0]]  # flip the sign of I_1
    report = frame_audit(frame, n_points=10, seed=3, Is=Is)
    assert not report.all_zero
    assert report.violations["quaternion_relations"] > 0


@pytest.mark.parametrize("n", [1, 2])
def test_contact_coefficients_batch_matches_exact_rows(n):
    contact = ContactForm(n)
    frame = HorizontalFrame(n)
    rng = np.random.default_rng(50 + n)
    p = _rational_point(n, rng)
    pts = np.array([[float(x) for x in p.flat()]])
    batch = contact.coefficient_batch(pts)
    rows = contact.coefficient_rows(p)
    assert np.max(np.abs(batch[0] - np.array(rows, dtype=float))) < 1e-15
    # frame coefficient rows agree with the batch evaluation too
    C = frame.coefficients(pts)
    for b in range(4 * n):
        row = frame.coefficient_row(b, p)
        assert np.max(np.abs(C[0, b] - np.array(row, dtype=float))) < 1e-15


@pytest.mark.parametrize("n", [1, 2])
def test_frame_derivatives_match_finite_differences(n):
    d = 4 * n + 3
    rng = np.random.default_rng(60 + n)
    field = random_positive_polynomial(d, rng)
    pts = rng.uniform(-1, 1, size=(5, d))
    frame = HorizontalFrame(n)
    value, fg, fh, xi = frame_second_order(field, pts, frame)

    fd = fd_oracle(field, pts)
    C = frame.coefficients(pts)
    fg_fd = np.einsum("nbj,nj->nb", C, fd.grad)
    assert np.max(np.abs(fg - fg_fd)) < 1e-6
    assert np.max(np.abs(xi - 2.0 * fd.grad[:, 4 * n:4 * n + 3])) < 1e-6

    # second order: e_a(e_b f) via finite differences of the first-order op
    step = 1e-5
    for a in range(4 * n):
        for b in range(4 * n):
            shift = C[:, a, :] * step
            up, _ = frame_first_order(field, pts + shift, frame)
            dn, _ = frame_first_order(field, pts - shift, frame)
            fd_ab = (up[:, b] - dn[:, b]) / (2 * step)
            assert np.max(np.abs(fh[:, a, b] - fd_ab)) < 1e-5


@pytest.mark.parametrize("n", [1, 2])
def test_hessian_antisymmetric_part_is_vertical(n):
    # e_a(e_b f) - e_b(e_a f) = [e_a, e_b] f = -sum_s 2 (I_s)_{ba} xi_s f,
    # which is the commutation relation behind the symmetrized Hessian
    d = 4 * n + 3
    rng = np.random.default_rng(70 + n)
    field = random_positive_polynomial(d, rng)
    pts = rng.uniform(-1.5, 1.5, size=(25, d))
    frame = HorizontalFrame(n)
    _, _, fh, xi = frame_second_order(field, pts, frame)
    anti = fh - np.swapaxes(fh, 1, 2)
    expect = np.zeros_like(anti)
    for s in range(3):
        expect -= xi[:, s, None, None] * (frame.omega(s)[None, :, :]
                                          - frame.omega(s).T[None, :, :])
    assert np.max(np.abs(anti - expect)) < 1e-10


def test_sublaplacian_on_explicit_polynomial():
    # f = |q|^2 on the n=1 group: e_a e_a f = 2 for each of the 4 horizontal
    # directions, so the sub-Laplacian is 8; the vertical tail contributes 0
    f = PolynomialField(7, {
        (2, 0, 0, 0, 0, 0, 0): 1.0,
        (0, 2, 0, 0, 0, 0, 0): 1.0,
        (0, 0, 2, 0, 0, 0, 0): 1.0,
        (0, 0, 0, 2, 0, 0, 0): 1.0,
    })
    frame = HorizontalFrame(1)
    pts = np.random.default_rng(0).uniform(-2, 2, size=(40, 7))
    lap = sublaplacian(f, pts, frame)
    assert np.max(np.abs(lap - 8.0)) < 1e-12


def test_horiz_divergence_of_constant_forms_vanishes():
    # constant-coefficient horizontal one-forms are divergence free because
    # the frame coefficient gradients trace to zero
    frame = HorizontalFrame(1)
    comps = [PolynomialField(7, {(0,) * 7: float(k + 1)}) for k in range(4)]
    pts = np.random.default_rng(1).uniform(-2, 2, size=(30, 7))
    div = horiz_divergence(comps, pts, frame)
    assert np.max(np.abs(div)) < 1e-14


def test_horiz_divergence_recovers_sublaplacian_for_linear_gradient():
    # with f = x_1^2 + ... the components e_b f are polynomials we can write
    # down, and div(grad) must equal the sub-Laplacian
    frame = HorizontalFrame(1)
    pts = np.random.default_rng(2).uniform(-1, 1, size=(20, 7))
    f = PolynomialField(7, {(2, 0, 0, 0, 0, 0, 0): 1.0})
    # e_b f for f = x^2 depends only on the Euclidean gradient (2x, 0, ...)
    # through the coefficient rows, whose first column is delta_{b,0}
    comps = [PolynomialField(7, {(1, 0, 0, 0, 0, 0, 0): 2.0 if b == 0 else 0.0})
             for b in range(4)]
    div = horiz_divergence(comps, pts, frame)
    lap = sublaplacian(f, pts, frame)
    assert np.max(np.abs(div - lap)) < 1e-12
