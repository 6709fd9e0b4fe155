import random
from fractions import Fraction as Q

import pytest

from relesc.forms import (CyclotomicPoly, HomogeneousForm as HF,
                          compose_linear, cyclotomic_coeffs, form_product,
                          power_pullback, power_pushforward, slice_form)
from relesc.rational import InternalError, UsageError


def rand_form(rng, n, deg, bound=9, maxterms=6):
    def tuples(n, deg):
        if n == 1:
            return [(deg,)]
        out = []
        for e in range(deg + 1):
            out.extend((e,) + r for r in tuples(n - 1, deg - e))
        return out
    pool = tuples(n, deg)
    terms = {}
    for e in rng.sample(pool, min(len(pool), rng.randint(2, maxterms))):
        c = 0
        while c == 0:
            c = rng.randint(-bound, bound)
        terms[e] = Q(c)
    return HF(n, deg, terms)


def naive_product(fs):
    """Independent expansion oracle: accumulate over all term tuples."""
    n = fs[0].num_vars
    out = {}
    items = [list(f.terms.items()) for f in fs]

    def rec(i, exps, coeff):
        if i == len(items):
            out[exps] = out.get(exps, Q(0)) + coeff
            return
        for e, c in items[i]:
            rec(i + 1, tuple(a + b for a, b in zip(exps, e)), coeff * c)

    rec(0, (0,) * n, Q(1))
    return {e: c for e, c in out.items() if c != 0}


class TestFormBasics:
    def test_invariants_enforced(self):
        with pytest.raises(UsageError):
            HF(2, 2, {(1, 0): Q(1)})  # exponents do not sum to degree
        with pytest.raises(UsageError):
            HF(2, 1, {(1, 0, 0): Q(1)})  # wrong arity
        z = HF(3, 4, {})
        assert z.is_zero() and z.degree == 4

    def test_zero_coefficients_dropped(self):
        F = HF(2, 1, {(1, 0): Q(1), (0, 1): Q(0)})
        assert (0, 1) not in F.terms

    def test_json_roundtrip(self):
        F = HF(3, 2, {(2, 0, 0): Q(1), (0, 1, 1): Q(-3, 7)})
        assert HF.from_json(F.to_json()) == F
        # zero form needs explicit degree
        z = HF(2, 3, {})
        assert HF.from_json(z.to_json()) == z

    def test_json_validates(self):
        with pytest.raises(UsageError):
            HF.from_json('{"vars": 2, "terms": [{"exps": [1, 1], "coeff": "1"}], "degree": 1}')


class TestProduct:
    def test_difference_of_squares(self):
        a = Q(5)
        F1 = HF(2, 1, {(1, 0): Q(1), (0, 1): -a})
        F2 = HF(2, 1, {(1, 0): Q(1), (0, 1): a})
        assert form_product([F1, F2]) == HF(2, 2, {(2, 0): Q(1), (0, 2): -a * a})

    def test_unit_identity(self):
        rng = random.Random(1)
        F = rand_form(rng, 3, 2)
        assert form_product([F, HF.unit(3)]) == F

    def test_against_naive_oracle(self):
        rng = random.Random(7)
        for _ in range(10):
            fs = [rand_form(rng, 3, 2) for _ in range(3)]
            assert form_product(fs).terms == naive_product(fs)

    def test_associative_commutative(self):
        rng = random.Random(3)
        a, b, c = (rand_form(rng, 2, 2) for _ in range(3))
        p1 = form_product([form_product([a, b]), c])
        p2 = form_product([a, form_product([b, c])])
        p3 = form_product([c, b, a])
        assert p1 == p2 == p3

    def test_mismatched_vars(self):
        with pytest.raises(UsageError):
            form_product([HF.unit(2), HF.unit(3)])


class TestComposeLinear:
    def test_identity(self):
        F = HF(2, 1, {(1, 0): Q(1)})
        assert compose_linear(F, [[1, 0], [0, 1]]) == F

    def test_translation_substitution(self):
        b = Q(4)
        F = HF(2, 1, {(1, 0): Q(1), (0, 1): Q(-3)})
        M = [[Q(1), b], [Q(0), Q(1)]]
        assert compose_linear(F, M) == HF(2, 1, {(1, 0): Q(1), (0, 1): b - 3})

    def test_roundtrip_inverse(self):
        from relesc.rational import matrix_inverse_exact
        rng = random.Random(11)
        M = [[Q(2), Q(3), Q(1)], [Q(1), Q(2), Q(0)], [Q(0), Q(1), Q(1)]]
        Minv = matrix_inverse_exact(M)
        for _ in range(5):
            F = rand_form(rng, 3, 3)
            assert compose_linear(compose_linear(F, M), Minv) == F

    def test_singular_rejected(self):
        F = HF(2, 1, {(1, 0): Q(1)})
        with pytest.raises(UsageError):
            compose_linear(F, [[1, 1], [1, 1]])


class TestPowerMaps:
    def test_pullback_example(self):
        a = Q(3)
        F = HF(2, 1, {(1, 0): Q(1), (0, 1): -a})
        assert power_pullback(F, 2) == HF(2, 2, {(2, 0): Q(1), (0, 2): -a})

    def test_pullback_monomial(self):
        F = HF(2, 4, {(4, 0): Q(1)})
        assert power_pullback(F, 3) == HF(2, 12, {(12, 0): Q(1)})

    def test_pullback_requires_d2(self):
        with pytest.raises(UsageError):
            power_pullback(HF.unit(2), 1)

    def test_pushforward_point(self):
        # [a] -> [a^d] on P^1
        for d in (2, 3, 4):
            a = Q(2, 3)
            F = HF(2, 1, {(1, 0): Q(1), (0, 1): -a})
            G = power_pushforward(F, d)
            ratio = G.terms[(1, 0)]
            assert G.terms == {(1, 0): ratio, (0, 1): -a**d * ratio}

    def test_pushforward_critical_monomial(self):
        # (X1...XN)^(d-1) pushes to (Y1...YN)^((d-1)d^(N-1)) up to sign
        for N, d in ((1, 2), (1, 3), (2, 2), (2, 3)):
            exps = tuple([d - 1] * N + [0])
            F = HF(N + 1, N * (d - 1), {exps: Q(1)})
            G = power_pushforward(F, d)
            key = tuple([(d - 1) * d ** (N - 1)] * N + [0])
            assert set(G.terms) == {key}
            assert abs(G.terms[key]) == 1

    def test_pushforward_degree_law(self):
        rng = random.Random(5)
        for N, d in ((1, 2), (1, 3), (2, 2), (2, 3)):
            F = rand_form(rng, N + 1, rng.randint(1, 2))
            G = power_pushforward(F, d)
            assert G.degree == d ** (N - 1) * F.degree

    def test_pull_of_push_is_twist_product(self):
        # phi^* phi_* F = prod of sign twists (d = 2, N = 2), exactly
        rng = random.Random(9)
        for _ in range(5):
            F = rand_form(rng, 3, 2)
            G = power_pushforward(F, 2)
            lhs = power_pullback(G, 2)
            tw = []
            for s1 in (1, -1):
                for s2 in (1, -1):
                    tw.append(HF(3, F.degree,
                                 {e: c * s1**e[0] * s2**e[1]
                                  for e, c in F.terms.items()}))
            assert lhs == form_product(tw)

    def test_push_of_pull_is_power(self):
        # phi_* phi^* D = d^N D: the form comes back as F^(d^N) up to scalar
        rng = random.Random(13)
        for N, d in ((1, 2), (1, 3), (2, 2)):
            F = rand_form(rng, N + 1, 1)
            G = power_pushforward(power_pullback(F, d), d)
            expected = form_product([F] * d**N)
            keys = set(G.terms)
            assert keys == set(expected.terms)
            k0 = next(iter(keys))
            ratio = expected.terms[k0] / G.terms[k0]
            assert ratio != 0
            assert all(expected.terms[k] == ratio * G.terms[k] for k in keys)

    def test_pushforward_rejects_zero(self):
        with pytest.raises(UsageError):
            power_pushforward(HF(2, 1, {}), 2)


class TestSlices:
    def test_point_slices(self):
        F = HF(2, 1, {(1, 0): Q(1), (0, 1): Q(-3)})
        assert slice_form(F, 0) == HF(1, 1, {(1,): Q(1)})
        assert slice_form(F, 1) == HF(1, 0, {(0,): Q(-3)})

    def test_mixed_slices(self):
        F = HF(3, 2, {(1, 1, 0): Q(1), (0, 0, 2): Q(1)})
        assert slice_form(F, 2) == HF(2, 0, {(0, 0): Q(1)})
        assert slice_form(F, 1).is_zero()
        assert slice_form(F, 0) == HF(2, 2, {(1, 1): Q(1)})

    def test_reassembly(self):
        rng = random.Random(21)
        for _ in range(5):
            F = rand_form(rng, 3, 3)
            rebuilt = {}
            for k in range(F.degree + 1):
                Fk = slice_form(F, k)
                for e, c in Fk.terms.items():
                    rebuilt[e + (k,)] = c
            assert rebuilt == F.terms

    def test_out_of_range(self):
        with pytest.raises(UsageError):
            slice_form(HF.unit(2), 1)


class TestCyclotomic:
    def test_phi_polynomials(self):
        assert cyclotomic_coeffs(1) == (-1, 1)
        assert cyclotomic_coeffs(2) == (1, 1)
        assert cyclotomic_coeffs(3) == (1, 1, 1)
        assert cyclotomic_coeffs(4) == (1, 0, 1)
        assert cyclotomic_coeffs(6) == (1, -1, 1)

    def test_rationality_detection(self):
        # 1 + t + t^2 reduces to 0 mod Phi_3
        x = CyclotomicPoly(3, (1, 1, 1))
        assert x.is_rational_zero()
        # t itself is not rational mod Phi_3
        with pytest.raises(InternalError):
            CyclotomicPoly(3, (0, 1, 0)).rational()
        # t is rational (= -1) mod Phi_2
        assert CyclotomicPoly(2, (0, 1)).rational() == -1

    def test_cyclic_multiplication(self):
        # (1 + t) * t = t + t^2, exponents mod 3
        a = CyclotomicPoly(3, (1, 1, 0))
        b = CyclotomicPoly(3, (0, 1, 0))
        assert (a * b).coeffs == (0, 1, 1)
