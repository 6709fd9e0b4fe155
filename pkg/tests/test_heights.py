import random
from fractions import Fraction as Q

import mpmath as mp
import pytest

from relesc.divisors import (Divisor, MinCritMap, critical_divisor,
                             unicritical_map)
from relesc.forms import HomogeneousForm as HF
from relesc.heights import (good_reduction, height_divisor, main_bound_constants,
                            matrix_height, point_height,
                            relative_canonical_height, relative_critical_height,
                            relative_height, relative_height_by_places,
                            thm_main_bounds)
from relesc.places import INF
from relesc.rational import DomainError, vp


def near(x, y, tol=1e-25):
    return abs(mp.mpf(x) - mp.mpf(y)) < tol


def random_sl2z(rng, word=3, bound=2):
    A = [[Q(1), Q(0)], [Q(0), Q(1)]]
    for _ in range(word):
        m = Q(rng.randint(-bound, bound))
        if rng.random() < 0.5:
            A = [[A[0][0] + m * A[1][0], A[0][1] + m * A[1][1]], A[1]]
        else:
            A = [A[0], [A[1][0] + m * A[0][0], A[1][1] + m * A[0][1]]]
    return A


class TestNaiveHeights:
    def test_height_divisor(self):
        assert near(height_divisor(Divisor.point(Q(3))), mp.log(3))
        assert near(height_divisor(Divisor.point(Q(2, 3))), mp.log(3))
        f = MinCritMap(2, 2, [[Q(1), Q(0)], [Q(0), Q(1)]], [Q(5), Q(7)])
        assert near(height_divisor(critical_divisor(f)), 0)

    def test_height_scale_invariant(self):
        F = HF(2, 2, {(2, 0): Q(6), (0, 2): Q(-10)})
        assert near(height_divisor(Divisor(F)),
                    height_divisor(Divisor(F.scale(Q(-7, 3)))))

    def test_relative_height_is_weil_height(self):
        assert near(relative_height(Divisor.point(Q(3))), mp.log(3))
        assert near(relative_height(Divisor.point(Q(2, 3))), mp.log(3))
        f = MinCritMap(2, 2, [[Q(1), Q(0)], [Q(0), Q(1)]], [Q(5), Q(7)])
        assert near(relative_height(critical_divisor(f)), 0)

    def test_relative_height_matches_place_sum(self):
        rng = random.Random(47)
        from test_forms import rand_form
        for _ in range(12):
            D = Divisor(rand_form(rng, 3, rng.randint(1, 3), bound=30))
            if D.contains_hyperplane_at_infinity():
                continue
            assert near(relative_height(D), relative_height_by_places(D))
            assert relative_height(D) >= -mp.mpf("1e-30")

    def test_relative_height_rejects_H(self):
        with pytest.raises(DomainError):
            relative_height(Divisor(HF(2, 1, {(0, 1): Q(1)})))

    def test_point_and_matrix_heights(self):
        assert near(point_height([Q(3, 2)]), mp.log(3))
        assert near(point_height([Q(0), Q(0)]), 0)
        assert near(matrix_height([[Q(1), Q(0)], [Q(0), Q(1)]]), 0)
        assert near(matrix_height([[Q(1, 2), Q(0)], [Q(0), Q(2)]]), mp.log(4))


class TestRelativeCanonicalHeight:
    def test_fixed_point_zero(self):
        g = relative_canonical_height(unicritical_map(2, Q(0)),
                                      Divisor.point(Q(0)))
        assert abs(float(g.value)) <= 1e-6
        assert float(g.error) < 1e-4

    def test_c3_only_infinity_contributes(self):
        g = relative_canonical_height(unicritical_map(2, Q(3)),
                                      Divisor.point(Q(0)))
        assert "inf" in [repr(p) for p in g.places_iterated]
        # 3 is integral everywhere: every finite place contributes exactly 0
        for key, est in g.per_place.items():
            if key != "inf":
                assert est.value.r == 0 and est.error.r == 0
        assert abs(float(g.value) - 0.6238127498859630) < 1e-6

    def test_chalf_adds_2adic_part(self):
        g = relative_canonical_height(unicritical_map(2, Q(1, 2)),
                                      Divisor.point(Q(0)))
        assert "2" in [repr(p) for p in g.places_iterated]
        arch = g.per_place["inf"].value.to_mpf()
        two = g.per_place["2"].value
        assert two.r == Q(1, 2)
        assert near(g.value, arch + mp.log(2) / 2, tol=1e-20)

    def test_global_exact_agrees_with_per_place(self):
        f = unicritical_map(2, Q(5, 3))
        D = Divisor.point(Q(2))
        a = relative_canonical_height(f, D, 8, mode="global-exact")
        b = relative_canonical_height(f, D, 8, mode="per-place")
        assert abs(float(a.value) - float(b.value)) \
            <= float(a.error) + float(b.error) + 1e-9

    def test_global_exact_agrees_n2(self):
        f = MinCritMap(2, 2, [[Q(1), Q(1)], [Q(0), Q(1)]], [Q(1, 2), Q(3)])
        D = Divisor(HF(3, 1, {(1, 0, 0): Q(1), (0, 1, 0): Q(1), (0, 0, 1): Q(4)}))
        a = relative_canonical_height(f, D, 3, mode="global-exact")
        b = relative_canonical_height(f, D, 3, mode="per-place")
        assert abs(float(a.value) - float(b.value)) \
            <= float(a.error) + float(b.error) + 1e-9

    def test_budget_fallback_warns(self):
        # global-exact overflows the tiny budget, falls back per-place
        f = unicritical_map(2, Q(10))
        g = relative_canonical_height(f, Divisor.point(Q(0)), 9,
                                      bit_budget=256)
        assert g.mode == "per-place"
        assert any("bit budget" in w for w in g.warnings)
        assert abs(float(g.value) - float(
            relative_canonical_height(f, Divisor.point(Q(0)), 9).value)) < 1e-6

    def test_padic_budget_degrades_depth(self):
        # a bad prime whose exact iteration cannot reach k_padic in budget
        f = unicritical_map(2, Q(999998, 7))
        g = relative_canonical_height(f, Divisor.point(Q(0)), 12,
                                      bit_budget=2048)
        assert any("retrying" in w for w in g.warnings)
        est = g.per_place["7"]
        assert est.iterations_used < 8

    def test_divisor_content_primes_counted(self):
        # D = [1/5]: Delta_5 = log 5 exactly even at a good-reduction place
        f = unicritical_map(2, Q(3))
        g = relative_canonical_height(f, Divisor.point(Q(1, 5)))
        assert "5" in [repr(p) for p in g.places_iterated]
        assert g.per_place["5"].value.r == 1
        assert g.per_place["5"].error.r == 0


class TestCriticalHeight:
    def test_preperiodic_families(self):
        assert abs(float(relative_critical_height(unicritical_map(2, Q(0))).value)) <= 1e-5
        assert abs(float(relative_critical_height(unicritical_map(2, Q(-1))).value)) <= 1e-5

    def test_c3_value(self):
        g = relative_critical_height(unicritical_map(2, Q(3)))
        assert abs(float(g.value) - 0.6238127498859630) < 1e-6

    def test_n2_b0_preperiodic(self):
        f = MinCritMap(2, 2, [[Q(2), Q(5)], [Q(1), Q(3)]], [Q(0), Q(0)])
        g = relative_critical_height(f)
        assert abs(float(g.value)) <= 1e-5


class TestTheoremBounds:
    def test_c3_containment(self):
        rep = thm_main_bounds(unicritical_map(2, Q(3)))
        assert rep["verdict"] == "within-bounds"
        # N=1 instantiation: hand-checkable sandwich around 0.6238
        assert float(rep["lower_bound"]) <= 0.6238 <= float(rep["upper_bound"])
        C1, C2 = main_bound_constants(1, 2)
        assert near(rep["lower_bound"], mp.log(3) / 2 - C1, tol=1e-15)

    def test_b0_lower_nonpositive(self):
        rep = thm_main_bounds(unicritical_map(2, Q(0)))
        assert float(rep["lower_bound"]) <= 0
        assert rep["verdict"] == "within-bounds"

    def test_constants_positive(self):
        for N, d in ((1, 2), (1, 3), (2, 2), (2, 3)):
            C1, C2 = main_bound_constants(N, d)
            assert C1 > 0 and C2 > 0

    def test_prime_sum_in_c1(self):
        # C1 contains the exact finite sum over p <= d of log p/((p-1)(d-1))
        C1_d2, _ = main_bound_constants(1, 2)
        from relesc.places import place_constants, Place
        arch_c9 = place_constants(1, 2, INF).c9.to_mpf()
        padic_c9 = place_constants(1, 2, Place(2)).c9.to_mpf()
        want = Q(1, 2) * (arch_c9 + padic_c9)
        assert near(C1_d2, want, tol=1e-20)


class TestGoodReduction:
    def test_examples(self):
        assert good_reduction(unicritical_map(2, Q(1, 2)), 2)[0] == "bad"
        assert good_reduction(unicritical_map(2, Q(3)), 2)[0] == "good"
        A = [[Q(0), Q(-1)], [Q(1), Q(0)]]
        f = MinCritMap(2, 2, A, [Q(1, 3), Q(0)])
        assert good_reduction(f, 3)[0] == "bad"
        assert good_reduction(f, 2)[0] == "good"

    def test_hypothesis_gate(self):
        f = MinCritMap(2, 2, [[Q(1, 5), Q(0)], [Q(0), Q(5)]], [Q(0), Q(0)])
        assert good_reduction(f, 5)[0] == "hypothesis-not-met"
        # but at other primes A is integral, so the criterion applies
        assert good_reduction(f, 3)[0] == "good"

    def test_integrality_matches_resultant_scan(self):
        rng = random.Random(53)
        for _ in range(40):
            A = random_sl2z(rng)
            b = [Q(rng.randint(-20, 20), rng.randint(1, 12)) for _ in range(2)]
            f = MinCritMap(2, 2, A, b)
            for p in (2, 3, 5, 7):
                status, _ = good_reduction(f, p)
                expect = "good" if all(
                    x == 0 or vp(x, p) >= 0 for x in b) else "bad"
                assert status == expect
