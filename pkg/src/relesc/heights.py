"""Global heights over Q and the theorem-level checks built from them.

All global quantities are finite sums of local ones.  With divisors held
in primitive-integer form, the finite places contribute through explicit
prime sets (denominators of the map data, content of the slice-0 form),
and everything else vanishes exactly: at a place where L is integral with
unit norm the per-step contraction constant is zero, so the escape rate
equals lambda there with zero error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import mpmath as mp

from .divisors import (DEFAULT_BIT_BUDGET, Divisor, Estimate, MinCritMap,
                       critical_divisor, delta_estimate, delta_tail_bound,
                       lambda_local, pushforward_map, slice_form)
from . import places as _places
from .places import INF, LocalLog, Place, constants_prime_bound
from .rational import (BitBudgetError, DomainError, UsageError, content,
                       prime_factors, primes_upto, support_primes, vp)

PADIC_K_MAX = {1: 8, 2: 5}
PADIC_DEGREE_CAP = 32


def padic_k_default(N: int, d: int, deg: int) -> int:
    """Exact p-adic truncation depth: capped at 8 for N=1 and 5 for N=2,
    further limited so the iterated form degree deg*d^(k(N-1)) stays at or
    below PADIC_DEGREE_CAP (integer-coefficient bit growth makes deeper
    exact iteration at N=2 disproportionately expensive while the
    non-archimedean tails are already O(log p) * d^-k)."""
    cap = PADIC_K_MAX.get(N, 4)
    if N == 1:
        return cap
    k = 1
    while k < cap and deg * d ** ((k + 1) * (N - 1)) <= PADIC_DEGREE_CAP:
        k += 1
    return k


def _log_int(n: int):
    return mp.log(mp.mpf(n)) if n > 1 else mp.mpf(0)


# ---------------------------------------------------------------------------
# naive heights
# ---------------------------------------------------------------------------

def height_divisor(D: Divisor):
    """h(D) = sum_v log||F||_v; equals log max|coefficient| of the
    canonical primitive integer form."""
    big = max(abs(c) for c in D.form.coefficients())
    return _log_int(int(big))


def relative_height(D: Divisor):
    """h_rel(D) = h(D) - h(D|_H) = sum_v lambda_v(D), >= 0.

    With a primitive integer form F: log max|F| - log max|F_0| +
    log content(F_0); the content term is the finite-place part.
    """
    F = D.form
    F0 = slice_form(F, 0)
    if F0.is_zero():
        raise DomainError("relative height undefined: divisor contains H")
    big = int(max(abs(c) for c in F.coefficients()))
    big0 = int(max(abs(c) for c in F0.coefficients()))
    g0 = content(int(c) for c in F0.coefficients())
    return _log_int(big) - _log_int(big0) + _log_int(g0)


def relative_height_by_places(D: Divisor):
    """Explicit sum of lambda_v(D) over the supporting places (used as a
    cross-check of the primitive-integer shortcut)."""
    F = D.form
    F0 = slice_form(F, 0)
    if F0.is_zero():
        raise DomainError("relative height undefined: divisor contains H")
    primes = set()
    for c in F.coefficients():
        primes |= prime_factors(int(c))
    total = lambda_local(D, INF).to_mpf()
    for p in sorted(primes):
        total += lambda_local(D, Place(p)).to_mpf()
    return total


def point_height(b):
    """Weil height of the affine tuple b, h(b) = sum_v log^+ max|b_i|_v."""
    coords = [Fraction(1)] + [Fraction(x) for x in b]
    den = 1
    for x in coords:
        den = den * x.denominator // _gcd(den, x.denominator)
    ints = [int(x * den) for x in coords]
    g = content(ints)
    return _log_int(max(abs(i) for i in ints) // g)


def _gcd(a, b):
    from math import gcd
    return gcd(a, b)


def matrix_height(A):
    """Projective height of the matrix entry tuple (no affine 1 appended,
    unlike point_height)."""
    entries = [Fraction(x) for row in A for x in row]
    if all(x == 0 for x in entries):
        raise UsageError("zero matrix has no projective height")
    den = 1
    for x in entries:
        den = den * x.denominator // _gcd(den, x.denominator)
    ints = [int(x * den) for x in entries]
    g = content(ints)
    return _log_int(max(abs(i) for i in ints) // g)


# ---------------------------------------------------------------------------
# global (relative) canonical heights
# ---------------------------------------------------------------------------

@dataclass
class GlobalEstimate:
    """Certified global value: true quantity in [value-error, value+error]."""

    value: mp.mpf
    error: mp.mpf
    places_iterated: list
    k: int
    mode: str = "per-place"
    warnings: list = field(default_factory=list)
    per_place: dict = field(default_factory=dict)

    def to_json_dict(self, digits: int = 17) -> dict:
        return {
            "value": mp.nstr(self.value, digits),
            "error": mp.nstr(self.error, digits),
            "k": self.k,
            "mode": self.mode,
            "places": [repr(p) for p in self.places_iterated],
            "warnings": list(self.warnings),
        }


def map_bad_primes(f: MinCritMap) -> list[int]:
    """Primes where L is not integral (denominators of A or b entries).

    A in SL_N integral at p forces A^{-1} = adj(A) integral at p, so the
    inverse contributes nothing new.
    """
    xs = [x for row in f.A for x in row] + list(f.b)
    return sorted(p for p in support_primes(xs)
                  if any(vp(x, p) < 0 for x in xs if x != 0))


def divisor_content_primes(D: Divisor) -> list[int]:
    """Primes dividing the content of the slice-0 form (where lambda_v is
    nonzero for a primitive form)."""
    F0 = slice_form(D.form, 0)
    if F0.is_zero():
        return []
    g = content(int(c) for c in F0.coefficients())
    return sorted(prime_factors(g)) if g > 1 else []


def auto_places(f: MinCritMap, D: Divisor | None = None) -> list[Place]:
    """The finite place set outside which every local contribution and
    every tail constant vanishes exactly: infinity, the small primes where
    the per-place constants can be nonzero, primes in the denominators of
    the map data, and primes dividing the content of the slice-0 form.
    (The small primes contribute zero whenever L is integral there; they
    are carried through the zero-cost shortcut.)"""
    ps = set(primes_upto(constants_prime_bound(f.N, f.d)))
    ps |= set(map_bad_primes(f))
    if D is not None:
        ps |= set(divisor_content_primes(D))
    return [INF] + [Place(p) for p in sorted(ps)]


def relative_canonical_height(f: MinCritMap, D: Divisor, k: int | None = None,
                              k_padic: int | None = None,
                              mode: str = "auto",
                              bit_budget: int = DEFAULT_BIT_BUDGET) -> GlobalEstimate:
    """hat{h}_f(D) - hat{h}_{f|H}(D|_H) = sum_v Delta_{f,v}(D), truncated,
    with the certified per-place tails summed into the error.

    mode 'global-exact' iterates the divisor once over Z and takes the
    relative height of the k-th push-forward; 'per-place' sums per-place
    estimates (scaled floats at infinity, exact p-adic at the bad primes);
    'auto' tries global-exact for small k and falls back.
    """
    if D.contains_hyperplane_at_infinity():
        raise DomainError("relative canonical height undefined for D containing H")
    N, d = f.N, f.d
    if k is None:
        k = 20 if N == 1 else 5
    if k_padic is None:
        k_padic = min(k, padic_k_default(N, d, D.degree))
    places = auto_places(f, D)
    warnings: list[str] = []

    if mode not in ("auto", "global-exact", "per-place"):
        raise UsageError(f"unknown mode {mode!r}")
    want_global = mode == "global-exact" or (
        mode == "auto" and ((N == 1 and k <= 10) or (N == 2 and k <= 3)))
    if want_global:
        try:
            G = D
            for _ in range(k):
                G = pushforward_map(f, G, bit_budget=bit_budget)
            scale = mp.mpf(d) ** (N * k)
            value = relative_height(G) / scale
            err = mp.mpf(0)
            for v in places:
                err += delta_tail_bound(f, D.degree, k, v).to_mpf()
            return GlobalEstimate(value=value, error=err,
                                  places_iterated=places, k=k,
                                  mode="global-exact")
        except BitBudgetError as exc:
            if mode == "global-exact":
                raise
            warnings.append(f"global-exact overflowed bit budget: {exc}")

    # per-place mode
    bad = set(map_bad_primes(f))
    value = mp.mpf(0)
    err = mp.mpf(0)
    per_place: dict[str, Estimate] = {}
    for v in places:
        if v.is_arch:
            est = delta_estimate(f, D, k, v, mode="scaled")
        elif v.p in bad:
            k_v = min(k, k_padic)
            while True:
                try:
                    est = delta_estimate(f, D, k_v, v, mode="exact",
                                         bit_budget=bit_budget)
                    break
                except BitBudgetError:
                    if k_v == 0:
                        raise
                    k_v //= 2
                    warnings.append(
                        f"bit budget at {v}: retrying with k={k_v}")
        else:
            # L is v-integral with unit norm: the per-step constant is 0,
            # so Delta_v(D) = lambda_v(D) exactly
            est = Estimate(value=lambda_local(D, v), error=LocalLog.zero(v),
                           iterations_used=0, place=v, mode="exact")
        per_place[repr(v)] = est
        value += est.value.to_mpf()
        err += est.error.to_mpf()
    return GlobalEstimate(value=value, error=err, places_iterated=places,
                          k=k, mode="per-place", warnings=warnings,
                          per_place=per_place)


def relative_critical_height(f: MinCritMap, k: int | None = None,
                             **kw) -> GlobalEstimate:
    """Relative canonical height of the critical divisor C_f."""
    return relative_canonical_height(f, critical_divisor(f), k, **kw)


# ---------------------------------------------------------------------------
# Theorem-level sandwich
# ---------------------------------------------------------------------------

def _sum_c9(N: int, d: int):
    total = _places.place_constants(N, d, INF).c9.to_mpf()
    for p in primes_upto(constants_prime_bound(N, d)):
        total += _places.place_constants(N, d, Place(p)).c9.to_mpf()
    return total


def main_bound_constants(N: int, d: int) -> tuple:
    """The explicit global constants (C1, C2) of the height sandwich,
    assembled as exact finite sums of the per-place constants."""
    C1 = (_log_int(factorial(N)) / (N * d) + _log_int(N)
          + Fraction(d - 1, d) * _sum_c9(N, d))
    C2 = ((N + 1) * _log_int(factorial(N)) + N * _log_int(factorial(N + 1))
          + _log_int(factorial(N)) + N * _log_int(4 * N * (N + 1))
          + (4 * N * N * d + Fraction(2 * N - 1, d**N - 1)) * mp.log(2))
    return C1, C2


def thm_main_bounds(f: MinCritMap, k: int | None = None,
                    k_padic: int | None = None,
                    rch: GlobalEstimate | None = None) -> dict:
    """Check the explicit height sandwich for the relative critical height.

    lower = (d-1)/d h(b) - h(A) - (1 + 1/d) h(A^{-1}) - C1
    upper = N(N+2) h(b) + N(N+1) h(A) + C2

    The lower bound keeps h(A^{-1}) as an exact quantity rather than
    bounding it by (N-1) h(A); the h(A)-only variant follows from it.
    A verdict of 'inconclusive' means the certified interval straddles a
    bound; 'violation' (interval strictly outside) would indicate a bug.
    """
    N, d = f.N, f.d
    if rch is None:
        rch = relative_critical_height(f, k, k_padic=k_padic)
    h_b = point_height(f.b)
    h_A = matrix_height(f.A)
    h_Ainv = matrix_height(f.A_inv)
    C1, C2 = main_bound_constants(N, d)
    lower = (Fraction(d - 1, d) * h_b - h_A
             - (1 + Fraction(1, d)) * h_Ainv - C1)
    upper = N * (N + 2) * h_b + N * (N + 1) * h_A + C2
    lo_i, hi_i = rch.value - rch.error, rch.value + rch.error
    if lower <= lo_i and hi_i <= upper:
        verdict = "within-bounds"
    elif hi_i < lower or lo_i > upper:
        verdict = "violation"
    else:
        verdict = "inconclusive"
    return {
        "value": rch.value,
        "error": rch.error,
        "k": rch.k,
        "lower_bound": lower,
        "upper_bound": upper,
        "C1": C1,
        "C2": C2,
        "h_b": h_b,
        "h_A": h_A,
        "h_Ainv": h_Ainv,
        "verdict": verdict,
    }


# ---------------------------------------------------------------------------
# good reduction
# ---------------------------------------------------------------------------

def good_reduction(f: MinCritMap, p: int) -> tuple[str, str]:
    """('good'|'bad'|'hypothesis-not-met', reason).

    Hypothesis: A integral at p (det A = 1 holds by construction).  The
    integrality criterion on b is cross-validated by the scaling test on
    the resultant det(L)^(d^N) of the defining forms.
    """
    v = Place(p)
    if any(x != 0 and vp(x, p) < 0 for row in f.A for x in row):
        return ("hypothesis-not-met",
                f"A is not {p}-integral, the criterion does not apply")
    b_integral = all(x == 0 or vp(x, p) >= 0 for x in f.b)

    # scaling/resultant route: clear p from L, then the resultant of the
    # scaled defining forms is det(p^eps L)^(d^N) = p^((N+1) eps d^N)
    entries = [x for row in f.L for x in row]
    eps = max(0, max(-vp(x, p) for x in entries if x != 0))
    scaled = [x * Fraction(p) ** eps for x in entries]
    if not any(x != 0 and vp(x, p) == 0 for x in scaled):
        raise AssertionError("scaled L has no unit entry despite det 1")
    resultant_val = (f.N + 1) * eps * (f.d ** f.N)
    resultant_unit = resultant_val == 0
    if resultant_unit != b_integral:
        raise AssertionError(
            "integrality and resultant routes disagree; implementation bug")
    if b_integral:
        return ("good", f"b is {p}-integral and resultant is a unit")
    return ("bad", f"some entry of b is not {p}-integral "
                   f"(resultant valuation {resultant_val})")
