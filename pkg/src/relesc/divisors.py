"""Divisors on P^N, the local functionals lambda and mu, push-forward and
pull-back under maps f = L o phi, and the truncated relative escape rate
with a certified tail bound.

A divisor is stored by its canonical defining form: primitive integer
coefficients with the first coefficient (in lexicographic term order)
positive.  Everything downstream (heights, the lemma harness) relies on
that normalization being unique.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from .forms import (HomogeneousForm, _subst_raw, compose_linear, form_product,
                    power_pullback, pushforward_terms, slice_form)
from . import places as _places
from .places import (LocalLog, Place, gauss_norm_log, local_min,
                     log_plus_int, matrix_lambda, matrix_norm_log)
from .rational import (BitBudgetError, DomainError, UsageError, content,
                       det_exact, lcm_denominators, matrix_inverse_exact,
                       parse_rational, format_rational)
from .scaled import SlicedForm

DEFAULT_BIT_BUDGET = 1 << 20


def canonical_form(F: HomogeneousForm) -> HomogeneousForm:
    """Primitive integer model of F with sign-normalized leading term."""
    if F.is_zero():
        raise UsageError("a divisor needs a nonzero defining form")
    den = lcm_denominators(F.coefficients())
    ints = {e: c.numerator * (den // c.denominator) for e, c in F.terms.items()}
    g = content(ints.values())
    ints = {e: c // g for e, c in ints.items()}
    leading = max(ints)  # lexicographically leading exponent tuple
    if ints[leading] < 0:
        ints = {e: -c for e, c in ints.items()}
    return HomogeneousForm(F.num_vars, F.degree,
                           {e: Fraction(c) for e, c in ints.items()})


class Divisor:
    """Effective divisor on P^N given by a canonicalized homogeneous form."""

    __slots__ = ("form", "degree")

    def __init__(self, form: HomogeneousForm):
        object.__setattr__(self, "form", canonical_form(form))
        object.__setattr__(self, "degree", form.degree)

    def __setattr__(self, *a):
        raise AttributeError("Divisor is immutable")

    @property
    def num_vars(self) -> int:
        return self.form.num_vars

    @property
    def N(self) -> int:
        return self.form.num_vars - 1

    def __eq__(self, other):
        return isinstance(other, Divisor) and self.form == other.form

    def __hash__(self):
        return hash(self.form)

    def __add__(self, other: "Divisor") -> "Divisor":
        """Sum of divisors = product of defining forms."""
        return Divisor(form_product([self.form, other.form]))

    def __rmul__(self, m: int) -> "Divisor":
        if not isinstance(m, int) or m < 1:
            raise UsageError("divisor multiple must be a positive integer")
        acc = self.form
        out = HomogeneousForm.unit(self.num_vars)
        e = m
        while e:
            if e & 1:
                out = form_product([out, acc])
            e >>= 1
            if e:
                acc = form_product([acc, acc])
        return Divisor(out)

    def __repr__(self):
        return f"Divisor({self.form!r})"

    def contains_hyperplane_at_infinity(self) -> bool:
        return slice_form(self.form, 0).is_zero()

    def contains_origin_point(self) -> bool:
        # the point (0, ..., 0, 1)
        return slice_form(self.form, self.degree).is_zero()

    def to_json_dict(self) -> dict:
        return self.form.to_json_dict()

    @staticmethod
    def from_json_dict(obj: dict) -> "Divisor":
        return Divisor(HomogeneousForm.from_json_dict(obj))

    @staticmethod
    def point(z: Fraction) -> "Divisor":
        """The divisor [z] on P^1 (form X1 - z X2)."""
        z = Fraction(z)
        return Divisor(HomogeneousForm(2, 1, {(1, 0): Fraction(1), (0, 1): -z}))


class MinCritMap:
    """f(X) = A X^d + b with A in SL_N, together with the block matrix
    L = [[A, b], [0, 1]] and its exact inverse; f = L o phi."""

    __slots__ = ("N", "d", "A", "b", "L", "L_inv", "A_inv")

    def __init__(self, N: int, d: int, A, b):
        if N < 1 or d < 2:
            raise UsageError("need N >= 1 and d >= 2")
        A = [[Fraction(x) for x in row] for row in A]
        b = [Fraction(x) for x in b]
        if len(A) != N or any(len(r) != N for r in A) or len(b) != N:
            raise UsageError("A must be NxN and b length N")
        if det_exact(A) != 1:
            raise UsageError("A must have determinant exactly 1")
        L = [row + [b[i]] for i, row in enumerate(A)]
        L.append([Fraction(0)] * N + [Fraction(1)])
        A_inv = matrix_inverse_exact(A)
        minus_Ainv_b = [-sum(A_inv[i][j] * b[j] for j in range(N)) for i in range(N)]
        L_inv = [A_inv[i] + [minus_Ainv_b[i]] for i in range(N)]
        L_inv.append([Fraction(0)] * N + [Fraction(1)])
        # exactness guard on the block inverse
        n = N + 1
        for i in range(n):
            for j in range(n):
                s = sum(L[i][k] * L_inv[k][j] for k in range(n))
                if s != (1 if i == j else 0):
                    raise UsageError("L * L_inv is not the identity")
        self.N, self.d = N, d
        self.A, self.b, self.L, self.L_inv, self.A_inv = A, b, L, L_inv, A_inv

    @staticmethod
    def from_json_dict(obj: dict) -> "MinCritMap":
        try:
            N = int(obj["N"])
            d = int(obj["d"])
            A = [[parse_rational(x) for x in row] for row in obj["A"]]
            b = [parse_rational(x) for x in obj["b"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed map JSON: {exc}") from exc
        return MinCritMap(N, d, A, b)

    @staticmethod
    def from_json(s: str) -> "MinCritMap":
        return MinCritMap.from_json_dict(json.loads(s))

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "d": self.d,
            "A": [[format_rational(x) for x in row] for row in self.A],
            "b": [format_rational(x) for x in self.b],
        }

    def __repr__(self):
        return f"MinCritMap(N={self.N}, d={self.d}, A={self.A}, b={self.b})"


def unicritical_map(d: int, c: Fraction) -> MinCritMap:
    """The N=1 map z -> z^d + c (A is forced to (1) in SL_1)."""
    return MinCritMap(1, d, [[Fraction(1)]], [Fraction(c)])


# ---------------------------------------------------------------------------
# local functionals
# ---------------------------------------------------------------------------

def lambda_local(D: Divisor, v: Place) -> LocalLog:
    """lambda_v(D) = log||F||_v - log||F|_H||_v; +inf if D contains H."""
    F = D.form
    bottom = slice_form(F, 0)
    if bottom.is_zero():
        return LocalLog.pos_inf(v)
    return gauss_norm_log(F, v) - gauss_norm_log(bottom, v)


def mu_local(D: Divisor, v: Place) -> LocalLog:
    """mu_v(D) = min over 0 <= k < deg of
    (log|F_deg|_v - log||F_k||_v) / (deg - k).

    Requires D to contain neither H nor the point (0,...,0,1); slices with
    F_k = 0 contribute +inf and drop out of the min.
    """
    F = D.form
    deg = D.degree
    if slice_form(F, 0).is_zero():
        raise DomainError("mu undefined: slice 0 vanishes (divisor contains H)")
    top = slice_form(F, deg)
    if top.is_zero():
        raise DomainError(
            f"mu undefined: slice {deg} vanishes (divisor contains (0,..,0,1))")
    top_log = gauss_norm_log(top, v)
    candidates = []
    for k in range(deg):
        Fk = slice_form(F, k)
        if Fk.is_zero():
            continue
        gap = (top_log - gauss_norm_log(Fk, v)).scaled(Fraction(1, deg - k))
        candidates.append(gap)
    return local_min(candidates)


# ---------------------------------------------------------------------------
# push-forward / pull-back
# ---------------------------------------------------------------------------

def pushforward_map(f: MinCritMap, D: Divisor, bit_budget: int = DEFAULT_BIT_BUDGET) -> Divisor:
    """f_* D = L_* phi_* D with L_* = (L^{-1})^*, exactly.

    Equivalent to compose_linear(power_pushforward(F, d), L_inv) but run on
    raw integer coefficients (the canonical form is integral, and L_inv is
    cleared to an integer matrix; the scalar drops out in canonicalization).
    """
    _check_dim(f, D)
    n = f.N + 1
    terms = {e: c.numerator for e, c in D.form.terms.items()}
    terms = pushforward_terms(terms, f.d, n)
    den = lcm_denominators(x for row in f.L_inv for x in row)
    rows = [
        {tuple(int(k == j) for k in range(n)): int(x * den)
         for j, x in enumerate(row) if x != 0}
        for row in f.L_inv
    ]
    terms = _subst_raw(terms, rows, n)
    G = HomogeneousForm(n, D.degree * f.d ** (f.N - 1),
                        {e: Fraction(c) for e, c in terms.items()})
    out = Divisor(G)
    _check_budget(out.form, bit_budget)
    return out


def pullback_map(f: MinCritMap, D: Divisor) -> Divisor:
    """f^* D, defined by F(L(X^d))."""
    _check_dim(f, D)
    G = compose_linear(D.form, f.L)
    return Divisor(power_pullback(G, f.d))


def pullback_translation(c, D: Divisor) -> Divisor:
    """T_c^* D for the translation X_i -> X_i + c_i X_{N+1}."""
    n = D.num_vars
    c = [Fraction(x) for x in c]
    if len(c) != n - 1:
        raise UsageError("translation vector must have length N")
    M = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i, ci in enumerate(c):
        M[i][n - 1] = ci
    return Divisor(compose_linear(D.form, M))


def critical_divisor(f: MinCritMap) -> Divisor:
    """C_f: the finite part of the critical locus, (X_1...X_N)^(d-1) = 0."""
    exps = tuple([f.d - 1] * f.N + [0])
    return Divisor(HomogeneousForm(f.N + 1, f.N * (f.d - 1), {exps: Fraction(1)}))


def _check_dim(f: MinCritMap, D: Divisor) -> None:
    if D.num_vars != f.N + 1:
        raise UsageError(f"divisor lives on P^{D.N}, map on P^{f.N}")


def _check_budget(F: HomogeneousForm, bit_budget: int) -> None:
    for c in F.terms.values():
        if c.numerator.bit_length() > bit_budget or c.denominator.bit_length() > bit_budget:
            raise BitBudgetError(
                f"coefficient exceeds {bit_budget} bits; use scaled mode or lower k")


# ---------------------------------------------------------------------------
# truncated relative escape rate with certified tail
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    """A value with a certified error radius: the limit quantity lies in
    [value - error, value + error]."""

    value: LocalLog
    error: LocalLog
    iterations_used: int
    place: Place
    mode: str = "exact"

    def value_float(self) -> float:
        return self.value.to_float()

    def error_float(self) -> float:
        return self.error.to_float()

    def to_json_dict(self, digits: int = 17) -> dict:
        return {
            "value": mp.nstr(self.value.to_mpf(), digits),
            "error": mp.nstr(self.error.to_mpf(), digits),
            "k": self.iterations_used,
            "place": repr(self.place),
            "mode": self.mode,
        }


def delta_step_constant(f: MinCritMap, v: Place) -> LocalLog:
    """Per-step contraction constant of the telescoping bound:
    d^{-1}(log||L|| - log||A|| + lambda(L) + lambda(A) + c2) + 4N log^+|2|.
    """
    N, d = f.N, f.d
    consts = _places.place_constants(N, d, v)
    inner = (matrix_norm_log(f.L, v) - matrix_norm_log(f.A, v)
             + matrix_lambda(f.L, v) + matrix_lambda(f.A, v) + consts.c2)
    return inner.scaled(Fraction(1, d)) + log_plus_int(2, v).scaled(4 * N)


def delta_tail_bound(f: MinCritMap, deg: int, k: int, v: Place) -> LocalLog:
    """Certified bound on |Delta_f(D) - lambda(f_*^k D)/d^{kN}| for an
    effective divisor of the given degree (telescoped from the one-step
    estimate)."""
    N, d = f.N, f.d
    consts = _places.place_constants(N, d, v)
    step = delta_step_constant(f, v)
    geom = Fraction(d) ** (-k) / (1 - Fraction(1, d))
    tail = step.scaled(deg * geom)
    c1_geom = Fraction(d) ** (-N * (k + 1)) / (1 - Fraction(d) ** (-N))
    return tail + consts.c1.scaled(c1_geom)


def delta_estimate(f: MinCritMap, D: Divisor, k: int, v: Place,
                   mode: str | None = None,
                   bit_budget: int = DEFAULT_BIT_BUDGET) -> Estimate:
    """Truncation lambda_v(f_*^k D) / d^{kN} of the relative escape rate,
    with the certified tail bound as error.

    mode 'exact' iterates primitive integer forms (any place; aborts past
    the coefficient bit budget); 'scaled' (archimedean only) iterates
    renormalized floats.  Default: scaled at the archimedean place, exact
    p-adically.
    """
    _check_dim(f, D)
    if k < 0:
        raise UsageError("k must be >= 0")
    if D.contains_hyperplane_at_infinity():
        raise DomainError("Delta is undefined for divisors containing H")
    if mode is None:
        mode = "scaled" if v.is_arch else "exact"
    if mode == "scaled" and not v.is_arch:
        raise UsageError("scaled mode is only valid at the archimedean place")
    if mode not in ("scaled", "exact"):
        raise UsageError(f"unknown mode {mode!r}")
    d, N = f.d, f.N
    if mode == "exact":
        G = D
        for _ in range(k):
            G = pushforward_map(f, G, bit_budget=bit_budget)
        lam = lambda_local(G, v)
    else:
        S = SlicedForm.from_form(D.form)
        for _ in range(k):
            S = S.power_push(d).compose_lshape(f.L_inv)
        lam = LocalLog.arch(mp.mpf(S.lam()))
    scale = Fraction(1, Fraction(d) ** (N * k))
    value = lam.scaled(scale)
    error = delta_tail_bound(f, D.degree, k, v)
    return Estimate(value=value, error=error, iterations_used=k, place=v, mode=mode)


def delta_relative_critical(f: MinCritMap, k: int, v: Place,
                            mode: str | None = None) -> Estimate:
    """delta_estimate at the critical divisor C_f."""
    return delta_estimate(f, critical_divisor(f), k, v, mode=mode)
