"""The N = 1 specialization as a cross-check bed.

On P^1 the push-forward of a point divisor is just the image point, so the
escape rate has an independent implementation: iterate the critical orbit
and average log^+.  cross_check runs both and insists they agree within
combined certified errors.  PCF detection and Mandelbrot membership are
exact rational computations.
"""

from fractions import Fraction as Q

from relesc import (INF, Place, UnicriticalMap, cross_check,
                    escape_rate_oracle, is_pcf, mandelbrot_member)

# The generic form calculus against the direct orbit oracle.
for c, v in ((Q(3), INF), (Q(-1), INF), (Q(1, 2), Place(2))):
    r = cross_check(UnicriticalMap(2, c), 12, v)
    print(f"c={str(c):>4} at {r['place']}: generic and oracle agree: "
          f"{r['agree']}  |diff| = {r['difference']:.2e}")

# Exact Mandelbrot membership for rational c: inside needs a detected
# cycle; escape needs the orbit to clear the radius; everything else is
# honestly undecided (the boundary is not decidable by finite iteration).
for c in (Q(-2), Q(0), Q(1), Q(1, 4), Q(-3, 2)):
    v = mandelbrot_member(UnicriticalMap(2, c), max_iter=2000)
    print(f"c={str(c):>4}: {v.verdict}"
          + (f" (step {v.step})" if v.step else ""))

# PCF detection is exact and terminating: non-integral c fails by bad
# reduction, integral orbits either escape or cycle.
for c in (Q(0), Q(-1), Q(-2), Q(1), Q(1, 2)):
    r = is_pcf(UnicriticalMap(2, c))
    print(f"c={str(c):>4}: {'PCF' if r.pcf else 'not PCF'} - {r.reason}")

# The full PCF list for z^2 + c over the integers in [-2, 2]:
pcf = [c for c in range(-2, 3) if is_pcf(UnicriticalMap(2, Q(c))).pcf]
print("d=2 integer PCF parameters:", pcf)
