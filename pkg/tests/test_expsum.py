import cmath
import itertools
from fractions import Fraction

import numpy as np
import pytest

from circlekit.config import Budget, BudgetExceeded
from circlekit.expsum import (
    complete_sum_table,
    count_via_dft,
    major_arc_residual,
    nearest_offset,
    s_q,
    t_sum,
    v_box,
    value_histogram,
)
from circlekit.lattice import count_Nm_b
from circlekit.points import ArcPoint, RationalPoint, frac_mul


def naive_t(exp, P, vec):
    total = 0j
    for x in itertools.product(range(-P, P + 1), repeat=exp.ms):
        phase = sum(a * f(list(x)) for a, f in zip(vec, exp.system))
        total += cmath.exp(2j * cmath.pi * phase)
    return total


def naive_s(exp, q, vec):
    total = 0j
    for x in itertools.product(range(q), repeat=exp.ms):
        k = sum(a * f(list(x)) for a, f in zip(vec, exp.system)) % q
        total += cmath.exp(2j * cmath.pi * k / q)
    return total


class TestPhase:
    def test_frac_mul_exact_for_large_k(self):
        alpha = 0.1234567891234
        k = np.array([10**12 + 7, -(10**11) - 3, 0, 1])
        exact = [float((Fraction(alpha) * int(v)) % 1) for v in k]
        got = frac_mul(alpha, k) % 1.0
        assert np.allclose(got, exact, atol=1e-9)

    def test_rational_point_reduction(self):
        rp = RationalPoint(6, 8, {(1, 1): 9})
        assert rp.a0 == 2 and rp.a[(1, 1)] == 3
        assert not RationalPoint(6, 2, {(1, 1): 4}).reduced
        assert RationalPoint(6, 2, {(1, 1): 3}).reduced


class TestWeylSums:
    def test_zero_phase_counts_box(self, any_toy):
        assert t_sum(any_toy, 1, ArcPoint.zero(any_toy.index_set)) == pytest.approx(3**any_toy.ms)

    def test_against_naive(self, product, squares):
        rng = np.random.default_rng(0)
        for exp in (product, squares):
            vec = rng.random(exp.r + 1)
            got = t_sum(exp, 1, ArcPoint.from_vector(exp.index_set, vec))
            assert abs(got - naive_t(exp, 1, vec)) < 1e-9

    def test_periodic(self, product):
        vec = np.array([0.3, 0.1, 0.7, 0.05])
        a = t_sum(product, 2, ArcPoint.from_vector(product.index_set, vec))
        b = t_sum(product, 2, ArcPoint.from_vector(product.index_set, vec + [1, -2, 3, 5], on_torus=False))
        assert abs(a - b) < 1e-8

    def test_conjugation(self, product):
        pt = ArcPoint.from_vector(product.index_set, [0.3, 0.1, 0.7, 0.05])
        assert abs(t_sum(product, 2, -pt) - t_sum(product, 2, pt).conjugate()) < 1e-8

    def test_budget(self, product):
        with pytest.raises(BudgetExceeded):
            t_sum(product, 100, ArcPoint.zero(product.index_set), Budget(max_evaluations=10))


class TestCompleteSums:
    def test_against_naive(self, any_toy):
        rng = np.random.default_rng(1)
        for q in (2, 3):
            vec = rng.integers(0, q, any_toy.r + 1).tolist()
            rp = RationalPoint.from_vector(any_toy.index_set, q, vec)
            assert abs(s_q(any_toy, rp) - naive_s(any_toy, q, vec)) < 1e-8

    def test_q1(self, product):
        assert s_q(product, RationalPoint(1, 0)) == pytest.approx(1)

    def test_histogram_total(self, any_toy):
        q = 3
        hist = value_histogram(any_toy, q)
        assert hist.shape == (q,) * (any_toy.r + 1)
        assert hist.sum() == q**any_toy.ms

    def test_table_matches_pointwise(self, product):
        q = 4
        table = complete_sum_table(product, q)
        for a in itertools.product(range(q), repeat=product.r + 1):
            rp = RationalPoint.from_vector(product.index_set, q, list(a))
            assert abs(table[a] - s_q(product, rp)) < 1e-8

    def test_table_zero_entry(self, cubic):
        assert complete_sum_table(cubic, 2)[(0,) * (cubic.r + 1)] == pytest.approx(2**cubic.ms)


class TestCountingOracle:
    @pytest.mark.parametrize("P", [0, 1, 2])
    def test_product(self, product, P):
        for b in (0, 1, 4):
            assert count_via_dft(product, P, b) == count_Nm_b(product, P, b)

    def test_headline_value(self, product):
        assert count_via_dft(product, 1, 0) == 17
        assert count_via_dft(product, 2, 0) == 49

    def test_squares(self, squares):
        assert count_via_dft(squares, 1, 0) == count_Nm_b(squares, 1, 0) == 1
        assert count_via_dft(squares, 2, 0) == count_Nm_b(squares, 2, 0) == 1

    def test_cubic(self, cubic):
        assert count_via_dft(cubic, 1, 0) == count_Nm_b(cubic, 1, 0) == 25

    def test_cubic_p2_refused(self, cubic):
        with pytest.raises(BudgetExceeded):
            count_via_dft(cubic, 2, 0)


class TestMajorArc:
    def test_offset_wraps(self, product):
        alpha = ArcPoint.from_vector(product.index_set, [0.98, 0.02, 0.5, 0.26])
        rp = RationalPoint.from_vector(product.index_set, 4, [0, 0, 2, 1])
        assert np.allclose(nearest_offset(alpha, rp, product.index_set), [-0.02, 0.02, 0.0, 0.01])

    def test_box_integral_scale(self, product):
        assert v_box(product, 2.0, np.zeros(4)).value == pytest.approx(4.0**4)

    def test_residual_ratio_bounded(self, product):
        # the error term carries an implicit constant; at a rational point it stays O(1) as P grows
        rp = RationalPoint.from_vector(product.index_set, 3, [1, 2, 0, 1])
        alpha = rp.as_arc_point(product.index_set)
        ratios = [major_arc_residual(product, P, alpha, rp).ratio for P in (2, 4, 8, 16)]
        assert max(ratios) < 8
