import itertools

import numpy as np
import pytest

from circlekit.config import Budget
from circlekit.forms import expand_parametric, parse_form
from circlekit.local import (
    DualFormulaMismatch,
    character_density,
    chi_p_truncated,
    congruence_count,
    euler_product,
    is_prime,
    local_density_series,
    reduced_mask,
    series_term,
    singular_series_partial,
    sq_bound_harness,
    sq_bounds,
)

PRODUCT_SERIES_TERMS = [1, 6, 16, 33, 48, 96, 96, 168]


def brute_congruence(exp, q, b):
    n = 0
    for x in itertools.product(range(q), repeat=exp.ms):
        x = list(x)
        if all(f(x) % q == 0 for f in exp.phi_map.values()) and (exp.disc(x) - b) % q == 0:
            n += 1
    return n


class TestCongruenceCounts:
    def test_product_mod_2(self, product):
        assert congruence_count(product, 2, 0) == brute_congruence(product, 2, 0) == 7

    def test_against_brute_force(self, any_toy):
        cases = [(2, 1), (3, 0)] if any_toy.ms == 6 else [(3, 0), (4, 0), (4, 1), (5, 2)]
        for q, b in cases:
            assert congruence_count(any_toy, q, b) == brute_congruence(any_toy, q, b)

    def test_workers_agree(self, cubic):
        assert congruence_count(cubic, 9, 0, Budget(workers=2)) == congruence_count(cubic, 9, 0)

    def test_modulus_one(self, product):
        assert congruence_count(product, 1, 5) == 1


class TestDensities:
    @pytest.mark.parametrize(
        "name,p,expected",
        [
            ("product", 2, [7, 40, 208]),
            ("product", 3, [17, 225, 2673]),
            ("product", 5, [49, 1825]),
            ("sum_of_squares", 2, [4, 16]),
            ("sum_of_squares", 3, [1, 81]),
            ("sum_of_squares", 5, [49, 1825]),
            ("cubic", 2, [5, 52]),
            ("cubic", 3, [27, 2025]),
        ],
    )
    def test_frozen_values(self, name, p, expected):
        from conftest import toy

        exp = toy(name)
        budget = Budget(max_evaluations=10**9)
        got = [chi_p_truncated(exp, p, i, 0, budget).count for i in range(1, len(expected) + 1)]
        assert got == expected

    def test_count_form_beyond_table_limit(self, product):
        # 125^4 complete sums do not fit in a table; the congruence count still does
        assert congruence_count(product, 125, 0) == 60625

    def test_depth_zero(self, product):
        assert chi_p_truncated(product, 3, 0, 0).count == 1

    def test_dual_forms_with_nonzero_b(self, product):
        res = chi_p_truncated(product, 3, 2, 4)
        assert abs(res.character - res.count) < 1e-6

    def test_not_prime(self, product):
        with pytest.raises(ValueError):
            chi_p_truncated(product, 4, 1, 0)

    def test_truncation_is_sum_of_series_terms(self, product):
        for p in (2, 3):
            for i in (1, 2):
                partial = sum(series_term(product, p**k, 0).real for k in range(i + 1))
                assert chi_p_truncated(product, p, i, 0).count == pytest.approx(partial)

    def test_character_density_counts(self, product):
        assert character_density(product, 7, 0).real == pytest.approx(97)

    def test_mismatch_error_type(self):
        assert issubclass(DualFormulaMismatch, Exception)

    def test_stabilisation_rule(self, product):
        loose = local_density_series(product, 2, 0, 4, tolerance=1e9)
        assert loose.stabilized and len(loose.values) == 3
        strict = local_density_series(product, 2, 0, 3)
        assert not strict.stabilized and [v for _, v in strict.values] == [7, 40, 208]

    def test_euler_product(self, product):
        value, series = euler_product(product, [2, 3], 0, 1)
        assert value == 7 * 17
        assert [s.p for s in series] == [2, 3]

    def test_is_prime(self):
        assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


class TestSingularSeries:
    def test_product_terms(self, product):
        res = singular_series_partial(product, 8, 0)
        assert [round(t, 9) for _, t in res.terms] == PRODUCT_SERIES_TERMS
        assert res.value == pytest.approx(464)
        assert abs(res.imag) < 1e-9

    def test_multiplicative(self, product):
        for a, b in ((2, 3), (4, 3), (2, 5)):
            assert series_term(product, a * b, 0) == pytest.approx(series_term(product, a, 0) * series_term(product, b, 0))

    def test_reduced_mask(self):
        mask = reduced_mask(6, 2)
        assert mask.sum() == 36 - 9 - 4 + 1 - 1 + 1  # pairs with joint gcd 1 modulo 6
        assert not mask[0, 0] and mask[1, 0] and not mask[2, 4] and mask[2, 3]

    def test_requires_positive_q(self, product):
        with pytest.raises(ValueError):
            singular_series_partial(product, 0, 0)


class TestBounds:
    def test_envelopes_case_split(self, product, cubic):
        lo = sq_bounds(cubic, 9, (1, 0, 0, 0, 3), 1.5, 0.375)
        assert all(0 < v <= 1 for v in lo)
        exp = expand_parametric(parse_form("x1^5 + x2^5", 2), 2)
        hi = sq_bounds(exp, 8, (2,) * (exp.r + 1), 0.125, 0.25)
        assert all(0 < v <= 1 for v in hi)
        with pytest.raises(ValueError):
            sq_bounds(expand_parametric(parse_form("x1^4 + x2^4", 2), 2), 3, (1,) * 6, 1, 1)

    def test_gcd_reduces_first_envelope(self, cubic):
        full, _ = sq_bounds(cubic, 9, (1, 0, 0, 0, 1), 1.5, 0.375)
        shared, _ = sq_bounds(cubic, 9, (1, 0, 0, 0, 3), 1.5, 0.375)
        assert shared > full

    def test_harness_rows(self, product):
        rows = sq_bound_harness(product, 4, 1.0, 0.25)
        assert rows and all(0 <= r.value <= 1 + 1e-12 for r in rows)
        assert all(np.isfinite(r.ratio) for r in rows)
        assert {r.q for r in rows} == {1, 2, 3, 4}
