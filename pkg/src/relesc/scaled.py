"""Renormalized floating-point forms for archimedean escape-rate iteration.

Pushing a divisor forward k times scales log||F|| by d^{kN}, so raw
coefficients overflow/underflow any fixed-precision format almost
immediately.  This backend stores a homogeneous form slice by slice in the
last variable, each slice as a dense numpy vector over the X_1 exponent
together with a log-scale offset, renormalized to unit max-norm after
every operation.  lambda and the Gauss log-norm only need coefficient
ratios, so the offsets carry all the magnitude information.

Only N = 1 and N = 2 (2 or 3 variables) are supported here, which is what
the escape-rate machinery iterates; exact mode in divisors.py covers the
general operations.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .forms import HomogeneousForm
from .rational import InternalError, UsageError

_NEG_INF = float("-inf")


def _log_abs_fraction(x) -> float:
    # robust for huge numerators/denominators
    if x == 0:
        return _NEG_INF
    n, d = abs(x.numerator), x.denominator
    return (math.log2(n) - math.log2(d)) * math.log(2.0)


class SlicedForm:
    """slices[s] = (offset, arr); true coefficient of
    X1^e1 X2^(deg-s-e1) X3^s  (N=2)  or  X1^(deg-s) X2^s  (N=1)
    is exp(offset) * arr[e1] (arr has length 1 and e1 is implicit for N=1).
    """

    __slots__ = ("N", "degree", "slices")

    def __init__(self, N: int, degree: int, slices: dict):
        if N not in (1, 2):
            raise UsageError("scaled forms support N = 1 or 2 only")
        self.N = N
        self.degree = degree
        self.slices = slices

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_form(F: HomogeneousForm) -> "SlicedForm":
        N = F.num_vars - 1
        if F.is_zero():
            raise UsageError("cannot scale the zero form")
        out: dict[int, np.ndarray] = {}
        deg = F.degree
        raw: dict[int, dict[int, object]] = {}
        for exps, c in F.terms.items():
            s = exps[-1]
            raw.setdefault(s, {})[exps[0] if N == 2 else 0] = c
        slices = {}
        for s, bucket in raw.items():
            length = (deg - s + 1) if N == 2 else 1
            big = max(abs(c) for c in bucket.values())
            off = _log_abs_fraction(big)
            arr = np.zeros(length)
            for e1, c in bucket.items():
                arr[e1] = float(c / big)
            slices[s] = (off, arr)
        return SlicedForm(N, deg, slices)

    def copy(self) -> "SlicedForm":
        return SlicedForm(self.N, self.degree,
                          {s: (o, a.copy()) for s, (o, a) in self.slices.items()})

    @staticmethod
    def _renorm(off: float, arr: np.ndarray):
        m = float(np.max(np.abs(arr)))
        if m == 0.0 or not math.isfinite(m):
            return None
        return (off + math.log(m), arr / m)

    # -- norms -------------------------------------------------------------

    def slice_log_norm(self, s: int) -> float:
        if s not in self.slices:
            return _NEG_INF
        off, arr = self.slices[s]
        return off + math.log(float(np.max(np.abs(arr))))

    def log_norm(self) -> float:
        return max(self.slice_log_norm(s) for s in self.slices)

    def lam(self) -> float:
        """log||F|| - log||F_0||; +inf when the slice-0 part vanishes."""
        top = self.log_norm()
        bottom = self.slice_log_norm(0)
        if bottom == _NEG_INF:
            return float("inf")
        return top - bottom

    # -- ring-ish operations -------------------------------------------------

    def add(self, other: "SlicedForm") -> "SlicedForm":
        if self.N != other.N or self.degree != other.degree:
            raise UsageError("degree/N mismatch in scaled add")
        slices = {}
        for s in set(self.slices) | set(other.slices):
            parts = []
            for src in (self, other):
                if s in src.slices:
                    parts.append(src.slices[s])
            if len(parts) == 1:
                slices[s] = parts[0]
                continue
            (o1, a1), (o2, a2) = parts
            o = max(o1, o2)
            length = max(len(a1), len(a2))
            acc = np.zeros(length, dtype=np.result_type(a1, a2))
            acc[: len(a1)] += a1 * math.exp(o1 - o)
            acc[: len(a2)] += a2 * math.exp(o2 - o)
            ren = self._renorm(o, acc)
            if ren is not None:
                slices[s] = ren
        return SlicedForm(self.N, self.degree, slices)

    def mul(self, other: "SlicedForm") -> "SlicedForm":
        if self.N != other.N:
            raise UsageError("N mismatch in scaled mul")
        deg = self.degree + other.degree
        buckets: dict[int, list] = {}
        for s1, (o1, a1) in self.slices.items():
            for s2, (o2, a2) in other.slices.items():
                conv = np.convolve(a1, a2)
                buckets.setdefault(s1 + s2, []).append((o1 + o2, conv))
        slices = {}
        for s, parts in buckets.items():
            o = max(p[0] for p in parts)
            length = (deg - s + 1) if self.N == 2 else 1
            acc = np.zeros(length, dtype=np.result_type(*(p[1] for p in parts)))
            for po, parr in parts:
                acc[: len(parr)] += parr * math.exp(po - o)
            ren = self._renorm(o, acc)
            if ren is not None:
                slices[s] = ren
        return SlicedForm(self.N, deg, slices)

    def mul_linear(self, off_l: float, coeffs) -> "SlicedForm":
        """Multiply by exp(off_l) * (c[0] X_1 + ... + c[N] X_{N+1});
        coeffs is a length-(N+1) array with max-norm <= 1."""
        deg = self.degree + 1
        shift = 1 if self.N == 2 else 0
        buckets: dict[int, list] = {}
        for s, (o, arr) in self.slices.items():
            if coeffs[0] != 0:  # X1
                a = np.concatenate(([0.0 * coeffs[0]], arr * coeffs[0])) if shift else arr * coeffs[0]
                buckets.setdefault(s, []).append((o + off_l, a))
            if self.N == 2 and coeffs[1] != 0:  # X2: e2 grows, same e1 index
                buckets.setdefault(s, []).append((o + off_l, arr * coeffs[1]))
            if coeffs[self.N] != 0:  # last variable: slice moves up
                buckets.setdefault(s + 1, []).append((o + off_l, arr * coeffs[self.N]))
        slices = {}
        for s, parts in buckets.items():
            o = max(p[0] for p in parts)
            length = (deg - s + 1) if self.N == 2 else 1
            acc = np.zeros(length, dtype=np.result_type(*(p[1] for p in parts)))
            for po, parr in parts:
                acc[: len(parr)] += parr * math.exp(po - o)
            ren = self._renorm(o, acc)
            if ren is not None:
                slices[s] = ren
        return SlicedForm(self.N, deg, slices)

    # -- power-map push-forward ----------------------------------------------

    def _twisted(self, var: int, zeta) -> "SlicedForm":
        """Coefficients multiplied by zeta^(exponent of X_{var+1}); var < N."""
        slices = {}
        for s, (o, arr) in self.slices.items():
            if var == 0:
                if self.N == 1:
                    phases = zeta ** (self.degree - s)
                else:
                    phases = zeta ** np.arange(len(arr))
            else:  # var == 1, N == 2: e2 = deg - s - e1
                phases = zeta ** (self.degree - s - np.arange(len(arr)))
            slices[s] = (o, arr * phases)
        return SlicedForm(self.N, self.degree, slices)

    def power_push(self, d: int) -> "SlicedForm":
        """phi_* : the root-of-unity product with exponents divided by d."""
        if d < 2:
            raise UsageError("power_push needs d >= 2")
        prod = self
        for var in range(self.N):
            acc = prod
            for j in range(1, d):
                zeta = cmath.exp(2j * cmath.pi * j / d) if d > 2 else -1.0
                acc = acc.mul(prod._twisted(var, zeta))
            prod = acc
        deg = prod.degree
        if deg % d:
            raise InternalError("push-forward degree not divisible by d")
        out = {}
        for s, (o, arr) in prod.slices.items():
            if s % d:
                # exact cancellation structurally; float residue is noise
                continue
            kept = arr[::d] if self.N == 2 else arr
            if np.iscomplexobj(kept):
                kept = kept.real
            ren = self._renorm(o, np.array(kept, dtype=float))
            if ren is not None:
                out[s // d] = ren
        return SlicedForm(self.N, deg // d, out)

    # -- linear substitution by an L-shaped matrix ----------------------------

    def compose_lshape(self, M) -> "SlicedForm":
        """F(M X) for M with last row (0,...,0,1) (exact rational entries).

        Uses nested Horner over the first variable(s); every intermediate is
        renormalized, so arbitrarily large matrix entries are fine.
        """
        n = self.N + 1
        if len(M) != n or any(len(r) != n for r in M):
            raise UsageError(f"matrix must be {n}x{n}")
        if any(M[n - 1][j] != (1 if j == n - 1 else 0) for j in range(n)):
            raise UsageError("compose_lshape needs last row (0,...,0,1)")
        lins = []
        for i in range(n - 1):
            big = max(abs(x) for x in M[i])
            if big == 0:
                raise UsageError("zero row in matrix")
            off = _log_abs_fraction(big)
            lins.append((off, np.array([float(x / big) for x in M[i]])))
        if self.N == 1:
            return self._horner_last(lins[0], None)
        return self._horner_n2(lins[0], lins[1])

    def _monomial_term(self, s: int, off: float, value: float, degree: int) -> "SlicedForm":
        length = (degree - s + 1) if self.N == 2 else 1
        arr = np.zeros(length)
        arr[0] = value
        return SlicedForm(self.N, degree, {s: (off, arr)})

    def _horner_last(self, lin1, _unused) -> "SlicedForm":
        # N=1: F(LX) = sum_s c_s l1^(deg-s) X2^s, Horner over descending
        # X1-powers (ascending s)
        out = None
        for s in range(0, self.degree + 1):
            if out is not None:
                out = out.mul_linear(*lin1)
            if s in self.slices:
                o, arr = self.slices[s]
                term = self._monomial_term(s, o, float(arr[0]),
                                           out.degree if out is not None else s)
                out = term if out is None else out.add(term)
        if out is None:
            raise InternalError("empty scaled form")
        return out

    def _horner_n2(self, lin1, lin2) -> "SlicedForm":
        deg = self.degree
        # group coefficients by e1: g_{e1} lives on slices s with value arr[e1]
        out = None
        for e1 in range(deg, -1, -1):
            if out is not None:
                out = out.mul_linear(*lin1)
            inner = self._inner_subst(e1, lin2)
            if inner is not None:
                out = inner if out is None else out.add(inner)
        if out is None:
            raise InternalError("empty scaled form")
        return out

    def _inner_subst(self, e1: int, lin2) -> "SlicedForm | None":
        # g_{e1}(l2, X3) = sum_s c_{e1,s} l2^(deg-e1-s) X3^s
        m = self.degree - e1
        out = None
        seen = False
        for s in range(0, m + 1):
            if out is not None:
                out = out.mul_linear(*lin2)
            if s in self.slices:
                o, arr = self.slices[s]
                if e1 < len(arr) and arr[e1] != 0.0:
                    seen = True
                    term = self._monomial_term(s, o, float(arr[e1]),
                                               out.degree if out is not None else s)
                    out = term if out is None else out.add(term)
        if not seen and out is None:
            return None
        return out
