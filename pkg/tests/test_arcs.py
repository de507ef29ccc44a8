import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from circlekit.arcs import (
    FAMILIES,
    PRUNING_KINDS,
    ArcParams,
    PruningInfeasible,
    arc_membership,
    arc_volume_mc,
    convergents,
    dn_growth_exponent,
    dn_zero_count,
    hypothesis_check,
    main_threshold,
    members,
    omega,
    pruning_schedule,
    rational_approx,
    sample_inside,
    smallest_s,
    volume_exponent,
    weyl_harness,
)
from circlekit.forms import d_form
from circlekit.points import ArcPoint


def brute_best(alpha, Q):
    """Smallest q <= Q minimising ||q alpha||, with its nearest numerator."""
    best = min(range(1, Q + 1), key=lambda q: (abs(q * alpha - round(q * alpha)), q))
    return best, round(best * alpha)


class TestDiophantine:
    @pytest.mark.parametrize("alpha,Q,expected", [(math.pi, 6, (1, 3)), (0.0, 10, (1, 0)), (1.6, 50, (5, 8))])
    def test_examples(self, alpha, Q, expected):
        assert rational_approx(alpha, Q) == expected

    def test_against_brute_force(self):
        rng = np.random.default_rng(0)
        for alpha in rng.random(1000):
            assert rational_approx(float(alpha), 50) == brute_best(float(alpha), 50)

    def test_convergents_of_rational(self):
        assert convergents(Fraction(13, 8)) == [(1, 1), (1, 2), (2, 3), (3, 5), (8, 13)]

    def test_rejects_small_q(self):
        with pytest.raises(ValueError):
            rational_approx(0.5, 0)


class TestParams:
    def test_coupling(self):
        p = ArcParams.from_theta(0.1, 1.5, 0.375)
        assert p.eta == pytest.approx(0.4)
        assert ArcParams.from_eta(p.eta, 1.5, 0.375).theta == pytest.approx(0.1)

    @pytest.mark.parametrize("kwargs", [{"eta": 0, "theta": 0.1}, {"eta": 0.1, "theta": 1.5}])
    def test_range(self, kwargs):
        with pytest.raises(ValueError):
            ArcParams(k=1, l=1, coupled=False, **kwargs)

    def test_uncoupled_mismatch(self):
        with pytest.raises(ValueError):
            ArcParams(0.2, 0.1, 1, 1)

    def test_omega_cases(self):
        p = ArcParams.from_theta(0.1, 2, 1)
        assert omega(p, 2, 3, 4) == pytest.approx((4 * 2 + 3 * 2) * 0.1)
        assert omega(p, 2, 5, 6) == pytest.approx((3 + 12 * 0.5) * 0.2)


class TestMembership:
    def test_rational_points_are_members(self):
        params = ArcParams.from_theta(0.2, 1, 1)
        pt = ArcPoint.from_vector(((1, 1), (1, 2), (2, 2)), [1 / 3, 2 / 3, 0, 1 / 2])
        res = arc_membership(pt, 100, params, "N", 2, 3)
        assert res.member and res.witness.q == 6

    def test_far_point_is_not_a_member(self):
        params = ArcParams.from_theta(0.05, 1, 1)
        pt = ArcPoint.from_vector(((1, 1), (1, 2), (2, 2)), [0.37, 0.41, 0.29, 0.4142])
        for fam in FAMILIES:
            assert not arc_membership(pt, 10**4, params, fam, 2, 3).member

    def test_witness_is_close(self):
        params = ArcParams.from_theta(0.1, 1.5, 0.375)
        pts = sample_inside("M_theta_eta", 1000, params, 2, 3, 50, seed=1)
        index = ((1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2))
        for row in pts:
            res = arc_membership(ArcPoint.from_vector(index, row), 1000, params, "M_theta_eta", 2, 3)
            assert res.member and res.witness.reduced
            err = row - res.witness.vector(index) / res.witness.q
            assert np.all(np.abs(err - np.rint(err)) < 0.05)

    def test_vectorised_matches_scalar(self):
        params = ArcParams.from_theta(0.1, 1, 1)
        rng = np.random.default_rng(2)
        pts = np.vstack([sample_inside("Md", 100, params, 2, 3, 20, seed=2), rng.random((20, 5))])
        pts[:, -1] = rng.random(40)
        index = ((1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2))
        for fam in FAMILIES:
            vec = members(pts, 100, params, fam, 2, 3)
            scal = [arc_membership(ArcPoint.from_vector(index, p), 100, params, fam, 2, 3).member for p in pts]
            assert vec.tolist() == scal

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            members(np.zeros((1, 4)), 10, ArcParams.from_theta(0.1, 1, 1), "M9", 2, 2)

    def test_major_inside_homogenised(self):
        params = ArcParams.from_theta(0.05, 1, 1)
        pts = sample_inside("M_theta_eta", 1000, params, 2, 3, 10_000, seed=0)
        inside = members(pts, 1000, params, "M_theta_eta", 2, 3)
        assert inside.mean() > 0.99
        assert members(pts[inside], 1000, params, "N", 2, 3).all()


class TestVolumes:
    def test_m0_ratio(self):
        params = ArcParams.from_eta(0.5, 1, 1)
        est = arc_volume_mc("M0", 1000, params, 2, 3, 10_000, seed=0)
        assert est.ci_low <= est.value <= est.ci_high
        assert 0.2 < est.ratio < 5

    def test_minimum_sample_size(self):
        with pytest.raises(ValueError):
            arc_volume_mc("M0", 10, ArcParams.from_theta(0.1, 1, 1), 2, 3, 100)

    def test_exponents(self):
        p = ArcParams.from_theta(0.1, 1, 1)
        assert volume_exponent("M0", p, 2, 3, 4) == pytest.approx(-4 + 6 * 0.1)
        assert volume_exponent("Md", p, 2, 3, 4) == pytest.approx(-12 + 16 * 0.1)

    def test_deterministic(self):
        p = ArcParams.from_theta(0.1, 1, 1)
        assert arc_volume_mc("N", 50, p, 2, 3, 10_000, seed=4) == arc_volume_mc("N", 50, p, 2, 3, 10_000, seed=4)


class TestPruning:
    def test_eta_first(self):
        sched = pruning_schedule("eta_first", m=2, d=2, k=100, l=100, end=0.5)
        gaps = np.diff(sched.values)
        assert sched.values[0] == 1.0 and sched.values[-1] == 0.5
        assert np.all(-gaps < sched.gap_bound)

    def test_chain_low_degree(self):
        first = pruning_schedule("eta_first", m=2, d=2, k=200, l=60, end=0.25)
        second = pruning_schedule("theta_second", m=2, d=2, k=200, l=60, start=first.values[-1], end=0.05)
        assert second.values[0] == pytest.approx(60 / 200 * 0.25)
        assert np.all(-np.diff(second.values) < second.gap_bound)

    def test_chain_high_degree(self):
        first = pruning_schedule("theta_first", m=2, d=5, k=2000, l=2000, end=0.05)
        second = pruning_schedule("eta_second", m=2, d=5, k=2000, l=2000, start=0.05, end=0.01)
        assert first.values[-1] == 0.05 and second.values[-1] == 0.01

    @pytest.mark.parametrize("start,label", [(0.5, "theta_small"), (0.1, "theta_star_fit"), (0.001, "theta_star_large")])
    def test_eta_second_start_conditions(self, start, label):
        with pytest.raises(PruningInfeasible, match=label):
            pruning_schedule("eta_second", m=2, d=5, k=2000, l=2000, start=start, end=start / 2)

    @pytest.mark.parametrize(
        "kind,kwargs,label",
        [
            ("eta_first", {"k": 1, "l": 1, "end": 0.5}, "l_large"),
            ("theta_first", {"k": 1, "l": 1, "end": 0.5}, "k_large"),
            ("eta_first", {"k": 100, "l": 100, "end": 0.01}, "eta_star_admissible"),
        ],
    )
    def test_infeasible(self, kind, kwargs, label):
        with pytest.raises(PruningInfeasible, match=label):
            pruning_schedule(kind, m=2, d=2 if kind == "eta_first" else 5, **kwargs)

    def test_kinds(self):
        assert len(PRUNING_KINDS) == 4
        with pytest.raises(ValueError):
            pruning_schedule("sideways", m=2, d=2, end=0.5)


class TestHypotheses:
    @pytest.mark.parametrize("d,threshold", [(2, 204), (3, 384), (5, 2080)])
    def test_thresholds(self, d, threshold):
        assert main_threshold(d, 2) == threshold
        assert not hypothesis_check(threshold, d, 2).verdicts["main"]
        assert hypothesis_check(threshold + 1, d, 2).verdicts["main"]
        assert smallest_s(d, 2) == threshold + 1

    def test_monotone_in_s(self):
        for d in (2, 3, 5):
            flags = [hypothesis_check(s, d, 2).verdicts["main"] for s in range(1, 2500)]
            first = flags.index(True)
            assert all(flags[first:]) and not any(flags[:first])

    def test_excluded_case(self):
        rep = hypothesis_check(500, 4, 2)
        assert rep.excluded and not any(rep.verdicts.values())
        with pytest.raises(ValueError):
            main_threshold(4, 2)

    def test_singular_locus_blocks_main(self):
        rep = hypothesis_check(10_000, 3, 2, dim_sing=1)
        assert not rep.verdicts["main"] and rep.verdicts["case_2m_gt_d"]

    def test_exact_rationals(self):
        rep = hypothesis_check(205, 3, 2)
        assert rep.k == Fraction(205, 4) and rep.l == Fraction(205, 8)
        rec = rep.record("minor_arcs_balance")
        assert rec.lhs == 2 * 4 * 2 / rep.k + 6 * 3 / rep.l

    def test_serialisable(self):
        import json

        json.dumps(hypothesis_check(300, 5, 2).as_dict())

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            hypothesis_check(0, 2, 2)


class TestHarnesses:
    def test_dn_zero_count_oracle(self):
        expected = sum(
            all(d_form([h[0:2], h[2:4], h[4:6]], n) == 0 for n in (1, 2))
            for h in itertools.product(range(-1, 2), repeat=6)
        )
        assert dn_zero_count(2, 2, 1) == expected == 249

    def test_dn_growth(self):
        counts, slope = dn_growth_exponent(2, 2, [1, 2, 3])
        assert counts == [249, 2089, 8017]
        assert slope <= 3 * 2 - 2 + 0.5

    def test_weyl_rows(self, cubic):
        params = ArcParams.from_theta(0.1, 1.5, 0.375)
        grid = np.random.default_rng(0).random((5, cubic.r + 1))
        rows = weyl_harness(cubic, [1, 2], params, grid)
        assert [r.P for r in rows] == [1, 2]
        assert all(r.max_abs <= r.trivial + 1e-9 for r in rows)
