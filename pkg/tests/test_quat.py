"""Quaternion arithmetic checks, exact where the inputs are exact."""

from fractions import Fraction

import numpy as np
import pytest

from qcheis.quat import (HVector, ImQuaternion, Quaternion, hermitian_product,
                         im_product, qmul, rational_quaternion)


def test_hamilton_table():
    one, i, j, k = (Quaternion.unit(m) for m in range(4))
    minus_one = Quaternion(-1, 0, 0, 0)
    assert qmul(i, j) == k
    assert qmul(j, k) == i
    assert qmul(k, i) == j
    assert qmul(j, i) == -k
    assert qmul(i, i) == minus_one
    assert qmul(j, j) == minus_one
    assert qmul(k, k) == minus_one
    for u in (one, i, j, k):
        assert qmul(one, u) == u
        assert qmul(u, one) == u


def test_product_is_bilinear_over_fractions():
    rng = np.random.default_rng(3)
    p = rational_quaternion(rng)
    q = rational_quaternion(rng)
    r = rational_quaternion(rng)
    lam = Fraction(3, 7)
    left = qmul(p + lam * q, r)
    right = qmul(p, r) + lam * qmul(q, r)
    assert left == right


def test_conjugation_antiautomorphism():
    rng = np.random.default_rng(5)
    for _ in range(10):
        p = rational_quaternion(rng)
        q = rational_quaternion(rng)
        assert qmul(p, q).conj() == qmul(q.conj(), p.conj())


def test_norm_multiplicative():
    rng = np.random.default_rng(7)
    for _ in range(10):
        p = rational_quaternion(rng)
        q = rational_quaternion(rng)
        assert qmul(p, q).norm2() == p.norm2() * q.norm2()


def test_real_imaginary_split():
    q = Quaternion(Fraction(2), Fraction(-1), Fraction(3), Fraction(5))
    assert q.re() == Fraction(2)
    im = q.im()
    assert isinstance(im, ImQuaternion)
    assert im.components() == [Fraction(-1), Fraction(3), Fraction(5)]
    assert q.conj() + q == Quaternion(Fraction(4), 0, 0, 0)


def test_imquaternion_arithmetic():
    a = ImQuaternion(1, 2, 3)
    b = ImQuaternion(-1, 0, 1)
    assert (a + b).components() == [0, 2, 4]
    assert (a - b).components() == [2, 2, 2]
    assert (-a).components() == [-1, -2, -3]
    assert (a * 2).components() == [2, 4, 6]
    assert a.norm2() == 14
    back = a.as_quaternion()
    assert back.re() == 0 and back.im() == a


def test_hvector_round_trip_and_norm():
    q1 = Quaternion(1, 2, 3, 4)
    q2 = Quaternion(-1, 0, 0, 2)
    v = HVector([q1, q2])
    assert v.n == 2
    flat = v.flat()
    assert flat == [1, 2, 3, 4, -1, 0, 0, 2]
    assert HVector.from_flat(flat) == v
    assert v.norm2() == q1.norm2() + q2.norm2()


def test_hvector_dimension_mismatch():
    v = HVector([Quaternion(1, 0, 0, 0)])
    w = HVector([Quaternion(1, 0, 0, 0), Quaternion(0, 1, 0, 0)])
    with pytest.raises(ValueError):
        v + w


def test_hermitian_product_conjugate_symmetry():
    rng = np.random.default_rng(11)
    p = HVector([rational_quaternion(rng) for _ in range(2)])
    q = HVector([rational_quaternion(rng) for _ in range(2)])
    assert hermitian_product(p, q).conj() == hermitian_product(q, p)
    # the diagonal is real and recovers the squared norm
    diag = hermitian_product(p, p)
    assert diag.im() == ImQuaternion(0, 0, 0)
    assert diag.re() == p.norm2()


def test_im_product_is_imaginary_part():
    rng = np.random.default_rng(13)
    p = HVector([rational_quaternion(rng) for _ in range(2)])
    q = HVector([rational_quaternion(rng) for _ in range(2)])
    assert im_product(p, q) == hermitian_product(p, q).im()
    # antisymmetric because the real part is the symmetric piece
    assert im_product(q, p) == -im_product(p, q)


def test_rational_quaternion_is_seeded_and_rational():
    a = rational_quaternion(np.random.default_rng(42))
    b = rational_quaternion(np.random.default_rng(42))
    assert a == b
    for c in a.components():
        assert isinstance(c, Fraction)
        assert c.denominator in (1, 2, 4, 8, 16)
