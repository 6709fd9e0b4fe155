"""Exact sparse arithmetic for homogeneous forms over the rationals.

A form in n variables is stored as a map from exponent tuples (length n,
entries summing to the degree) to nonzero Fractions.  The operations here
are the ones the divisor calculus is built from: products, substitution by
an invertible matrix, pull-back under the coordinate power map
phi(X) = (X_1^d : ... : X_n^d), and the push-forward under phi, which is
computed as an exact roots-of-unity product.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .rational import (InternalError, UsageError, det_exact, parse_rational,
                       format_rational)

ExpTuple = tuple[int, ...]


class HomogeneousForm:
    """Sparse homogeneous polynomial with exact rational coefficients.

    The zero form is allowed and carries an explicit degree (empty term
    map).  Instances are immutable; all operations return new forms.
    """

    __slots__ = ("num_vars", "degree", "terms", "_key")

    def __init__(self, num_vars: int, degree: int, terms: Mapping[ExpTuple, Fraction]):
        if num_vars < 1:
            raise UsageError("num_vars must be >= 1")
        if degree < 0:
            raise UsageError("degree must be >= 0")
        clean: dict[ExpTuple, Fraction] = {}
        for exps, c in terms.items():
            c = Fraction(c)
            if c == 0:
                continue
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars or any(e < 0 for e in exps):
                raise UsageError(f"bad exponent tuple {exps} for {num_vars} variables")
            if sum(exps) != degree:
                raise UsageError(f"exponents {exps} do not sum to degree {degree}")
            clean[exps] = clean.get(exps, Fraction(0)) + c
        object.__setattr__(self, "num_vars", num_vars)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", {e: c for e, c in clean.items() if c != 0})
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("HomogeneousForm is immutable")

    # -- canonical identity -------------------------------------------------

    def key(self):
        if self._key is None:
            object.__setattr__(
                self, "_key",
                (self.num_vars, self.degree, tuple(sorted(self.terms.items()))),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, HomogeneousForm) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.is_zero():
            return f"HomogeneousForm(0; vars={self.num_vars}, deg={self.degree})"
        bits = []
        for exps, c in sorted(self.terms.items()):
            mono = "*".join(f"X{i+1}^{e}" for i, e in enumerate(exps) if e)
            bits.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(bits)

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coefficients(self) -> list[Fraction]:
        return list(self.terms.values())

    def scale(self, c: Fraction) -> "HomogeneousForm":
        c = Fraction(c)
        if c == 0:
            return HomogeneousForm(self.num_vars, self.degree, {})
        return HomogeneousForm(self.num_vars, self.degree,
                               {e: c * v for e, v in self.terms.items()})

    def __add__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        if self.num_vars != other.num_vars or self.degree != other.degree:
            raise UsageError("can only add forms of equal degree and num_vars")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return HomogeneousForm(self.num_vars, self.degree, terms)

    def __neg__(self):
        return self.scale(Fraction(-1))

    def __sub__(self, other):
        return self + (-other)

    @staticmethod
    def monomial(num_vars: int, exps: Sequence[int], coeff=1) -> "HomogeneousForm":
        exps = tuple(exps)
        return HomogeneousForm(num_vars, sum(exps), {exps: Fraction(coeff)})

    @staticmethod
    def unit(num_vars: int) -> "HomogeneousForm":
        return HomogeneousForm(num_vars, 0, {(0,) * num_vars: Fraction(1)})

    # -- JSON wire format ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vars": self.num_vars,
            "terms": [
                {"exps": list(e), "coeff": format_rational(c)}
                for e, c in sorted(self.terms.items())
            ],
            "degree": self.degree,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(obj: dict) -> "HomogeneousForm":
        try:
            n = int(obj["vars"])
            raw = obj["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed form JSON: {exc}") from exc
        terms: dict[ExpTuple, Fraction] = {}
        degree = obj.get("degree")
        for t in raw:
            exps = tuple(int(e) for e in t["exps"])
            coeff = parse_rational(t["coeff"])
            if degree is None:
                degree = sum(exps)
            terms[exps] = terms.get(exps, Fraction(0)) + coeff
        if degree is None:
            raise UsageError("zero form JSON must carry an explicit 'degree'")
        return HomogeneousForm(n, int(degree), terms)

    @staticmethod
    def from_json(s: str) -> "HomogeneousForm":
        return HomogeneousForm.from_json_dict(json.loads(s))


# ---------------------------------------------------------------------------
# raw dict-level polynomial helpers (not necessarily homogeneous-checked)
# ---------------------------------------------------------------------------

def _dict_mul(a: dict, b: dict) -> dict:
    """Sparse polynomial product; works for any exact coefficient type."""
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = ca * cb
            if e in out:
                s = out[e] + c
                if s:
                    out[e] = s
                else:
                    del out[e]
            else:
                out[e] = c
    return out


def _subst_raw(terms: dict, rows: list[dict], n: int) -> dict:
    """Substitute the linear forms rows[i] for variable i in a sparse
    polynomial, by nested Horner; exact for any coefficient type."""

    def _acc_add(acc: dict, extra: dict) -> None:
        for k, v in extra.items():
            s = acc.get(k, 0) + v
            if s:
                acc[k] = s
            elif k in acc:
                del acc[k]

    def subst(sub_terms: dict, var: int) -> dict:
        if var == n:
            return dict(sub_terms)
        by_e: dict[int, dict] = {}
        for exps, c in sub_terms.items():
            rest = exps[:var] + (0,) + exps[var + 1 :]
            bucket = by_e.setdefault(exps[var], {})
            bucket[rest] = bucket.get(rest, 0) + c
        acc: dict = {}
        for e in range(max(by_e), -1, -1):
            if acc:
                acc = _dict_mul(acc, rows[var])
            if e in by_e:
                _acc_add(acc, subst(by_e[e], var + 1))
        return acc

    return subst(terms, 0)


def form_product(fs: Sequence[HomogeneousForm]) -> HomogeneousForm:
    """Exact product of forms sharing num_vars; degree adds."""
    if not fs:
        raise UsageError("form_product of an empty list")
    n = fs[0].num_vars
    if any(f.num_vars != n for f in fs):
        raise UsageError("form_product: mismatched num_vars")
    degree = sum(f.degree for f in fs)
    if any(f.is_zero() for f in fs):
        return HomogeneousForm(n, degree, {})
    acc = dict(fs[0].terms)
    for f in fs[1:]:
        acc = _dict_mul(acc, f.terms)
    return HomogeneousForm(n, degree, acc)


def compose_linear(F: HomogeneousForm, M: Sequence[Sequence[Fraction]]) -> HomogeneousForm:
    """F(M X), exactly.  M must be an invertible (num_vars x num_vars) matrix.

    Evaluated by a nested Horner scheme over the variables, so the cost
    stays near (number of partial coefficients) x (terms of the linear
    forms) instead of a full multinomial expansion per monomial.
    """
    n = F.num_vars
    if len(M) != n or any(len(row) != n for row in M):
        raise UsageError(f"matrix must be {n}x{n}")
    M = [[Fraction(x) for x in row] for row in M]
    if det_exact(M) == 0:
        raise UsageError("compose_linear: singular matrix")
    if F.is_zero():
        return F
    # row i of M as a linear form in the target variables
    rows = [
        {tuple(int(k == j) for k in range(n)): c for j, c in enumerate(row) if c != 0}
        for row in M
    ]
    result = _subst_raw(dict(F.terms), rows, n)
    return HomogeneousForm(n, F.degree, result)


def power_pullback(F: HomogeneousForm, d: int) -> HomogeneousForm:
    """phi^* at the form level: F(X_1^d, ..., X_n^d)."""
    if d < 2:
        raise UsageError("power_pullback needs d >= 2")
    return HomogeneousForm(
        F.num_vars, F.degree * d,
        {tuple(e * d for e in exps): c for exps, c in F.terms.items()},
    )


def slice_form(F: HomogeneousForm, k: int) -> HomogeneousForm:
    """The coefficient form F_k of X_n^k:  F = sum_k X_n^k F_k(X_1..X_{n-1}).

    Returns a form in one fewer variable, of degree deg(F) - k.
    """
    if not (0 <= k <= F.degree):
        raise UsageError(f"slice index {k} out of range for degree {F.degree}")
    n = F.num_vars
    if n < 2:
        raise UsageError("slice needs at least 2 variables")
    terms = {
        exps[:-1]: c for exps, c in F.terms.items() if exps[-1] == k
    }
    return HomogeneousForm(n - 1, F.degree - k, terms)


# ---------------------------------------------------------------------------
# cyclotomic carrier for the push-forward product
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def cyclotomic_coeffs(d: int) -> tuple[int, ...]:
    """Integer coefficients (ascending) of the d-th cyclotomic polynomial."""
    # (t^d - 1) divided by the product of Phi_e for proper divisors e of d;
    # every divisor in the chain is monic, so the arithmetic stays in Z
    num = [-1] + [0] * (d - 1) + [1]
    for e in range(1, d):
        if d % e == 0:
            num = _polydiv_monic(num, list(cyclotomic_coeffs(e)))
    return tuple(num)


def _polydiv_monic(num: list[int], den: list[int]) -> list[int]:
    if den[-1] != 1:
        raise InternalError("cyclotomic divisor is not monic")
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        q = num[i + len(den) - 1]
        out[i] = q
        if q:
            for j, dc in enumerate(den):
                num[i + j] -= q * dc
    if any(num):
        raise InternalError("inexact cyclotomic division")
    return out


class CyclotomicPoly:
    """Element of Q[t]/(t^d - 1), the carrier ring for root-of-unity twists.

    Arithmetic reduces exponents mod d (cyclic convolution).  Rationality
    of a result is decided in the primitive component: the vector is
    reduced mod Phi_d(t), where t genuinely ranges over primitive d-th
    roots, and the reduction must be a constant.  (Reducing mod t^d - 1
    alone is not enough: the components at non-primitive roots of unity
    retain junk from partial twist products.)
    """

    __slots__ = ("d", "coeffs")

    def __init__(self, d: int, coeffs: Sequence):
        if len(coeffs) != d:
            raise UsageError("coefficient vector must have length d")
        self.d = d
        self.coeffs = tuple(coeffs)  # int or Fraction entries, kept as given

    @staticmethod
    def constant(d: int, c) -> "CyclotomicPoly":
        return CyclotomicPoly(d, (c,) + (0,) * (d - 1))

    @staticmethod
    def root_power(d: int, j: int) -> "CyclotomicPoly":
        v = [0] * d
        v[j % d] = 1
        return CyclotomicPoly(d, v)

    def __mul__(self, other: "CyclotomicPoly") -> "CyclotomicPoly":
        d = self.d
        out = [0] * d
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[(i + j) % d] += a * b
        return CyclotomicPoly(d, out)

    def __add__(self, other: "CyclotomicPoly") -> "CyclotomicPoly":
        return CyclotomicPoly(self.d, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def is_zero_vector(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def reduce_primitive(self) -> list:
        """Remainder of the vector mod Phi_d(t), ascending coefficients.
        Phi_d is monic over Z, so no division is ever needed."""
        phi = cyclotomic_coeffs(self.d)
        rem = list(self.coeffs)
        deg_phi = len(phi) - 1
        for i in range(len(rem) - 1, deg_phi - 1, -1):
            q = rem[i]
            if q:
                for j, pc in enumerate(phi):
                    rem[i - deg_phi + j] -= q * pc
        return rem[:deg_phi]

    def rational(self):
        """The rational value, if this element is rational in the primitive
        component; raises InternalError otherwise."""
        rem = self.reduce_primitive()
        if any(rem[1:]):
            raise InternalError(f"cyclotomic coordinate not rational: {rem}")
        return rem[0] if rem else 0

    def is_rational_zero(self) -> bool:
        rem = self.reduce_primitive()
        return not any(rem)


def pushforward_terms(terms: dict, d: int, n: int) -> dict:
    """Raw-terms phi_* product (see power_pushforward); coefficient type is
    preserved, so integer inputs stay in Z throughout."""
    N = n - 1  # twisted variables
    cur = dict(terms)
    for var in range(N):
        if d == 2:
            # the only twist is X_var -> -X_var; no cyclotomic carrier needed
            twisted = {e: (-c if (e[var] & 1) else c) for e, c in cur.items()}
            nxt = _dict_mul(cur, twisted)
            cur = {}
            for e, c in nxt.items():
                if e[var] & 1:
                    raise InternalError(
                        f"push-forward kept odd exponent {e[var]} of X{var+1}")
                cur[e] = c
            continue
        acc: dict[ExpTuple, CyclotomicPoly] = {
            e: CyclotomicPoly.constant(d, c) for e, c in cur.items()
        }
        for j in range(1, d):
            twisted = {
                e: CyclotomicPoly.root_power(d, j * e[var]) * CyclotomicPoly.constant(d, c)
                for e, c in cur.items()
            }
            nxt: dict[ExpTuple, CyclotomicPoly] = {}
            for ea, ca in acc.items():
                for eb, cb in twisted.items():
                    e = tuple(x + y for x, y in zip(ea, eb))
                    prod = ca * cb
                    if e in nxt:
                        nxt[e] = nxt[e] + prod
                    else:
                        nxt[e] = prod
            acc = {e: c for e, c in nxt.items() if not c.is_zero_vector()}
        cur = {}
        for e, c in acc.items():
            if c.is_rational_zero():
                continue
            val = c.rational()  # raises InternalError when not rational
            if e[var] % d != 0:
                raise InternalError(
                    f"push-forward produced exponent {e[var]} not divisible by {d}"
                )
            cur[e] = val
    out = {}
    for e, c in cur.items():
        if any(x % d for x in e):
            raise InternalError(f"push-forward exponents {e} not divisible by {d}")
        out[tuple(x // d for x in e)] = c
    return out


def power_pushforward(F: HomogeneousForm, d: int) -> HomogeneousForm:
    """phi_* at the form level.

    Returns the unique G with
        G(X_1^d, ..., X_n^d) = prod over all tuples zeta in mu_d^{n-1} of
                               F(zeta_1 X_1, ..., zeta_{n-1} X_{n-1}, X_n).
    The product is taken one variable at a time in the cyclotomic carrier
    Q[t]/(t^d - 1) (a plain sign twist when d = 2); after each variable
    the coefficients must come out rational -- in the primitive component,
    i.e. mod Phi_d(t) -- and the matching exponents must be multiples of d
    (each stage is a full Galois-stable product).  Any residue signals an
    implementation bug and aborts.
    """
    if d < 2:
        raise UsageError("power_pushforward needs d >= 2")
    if F.is_zero():
        raise UsageError("power_pushforward of the zero form")
    n = F.num_vars
    out = pushforward_terms(dict(F.terms), d, n)
    return HomogeneousForm(n, F.degree * d ** (n - 2), out)
