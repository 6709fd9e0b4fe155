"""The relative escape rate Delta_f(D) = lim lambda(f_*^k D) / d^{kN}.

The library truncates the limit at k push-forwards and certifies the tail:
the Estimate carries [value - error, value + error] containing the limit.
Preperiodic divisors have rate exactly 0; orbits that escape pick up the
growth rate of their coordinates.
"""

from fractions import Fraction as Q

from relesc import (Divisor, INF, MinCritMap, Place, delta_estimate,
                    delta_relative_critical, pushforward_map, unicritical_map)

# z -> z^2 + 3: the critical orbit 0 -> 3 -> 12 -> 147 -> ... escapes, and
# the escape rate converges fast: truncations at increasing depth.
f = unicritical_map(2, Q(3))
D = Divisor.point(Q(0))
for k in (2, 5, 10, 20):
    est = delta_estimate(f, D, k, INF)
    print(f"k={k:>2}  value={est.value_float():.12f}  +- {est.error_float():.2e}")

# z -> z^2 - 1: 0 -> -1 -> 0 is periodic, so the rate is exactly 0.
est = delta_estimate(unicritical_map(2, Q(-1)), D, 20, INF)
print("preperiodic c=-1:", est.value_float())

# p-adic places are exact.  For c = 1/2 the 2-adic valuations of the orbit
# are -1, -2, -4, ...: every truncation equals (1/2) log 2 on the nose.
f = unicritical_map(2, Q(1, 2))
for k in (1, 4, 8):
    est = delta_estimate(f, D, k, Place(2))
    print(f"2-adic k={k}: {est.value}  (error {est.error})")

# Functoriality: pushing the divisor forward multiplies the rate by d^N.
f = unicritical_map(2, Q(2))
D = Divisor.point(Q(1, 2))
a = delta_estimate(f, D, 15, INF)
b = delta_estimate(f, pushforward_map(f, D), 15, INF)
print(f"Delta(f_* D) = {b.value_float():.9f} ~= "
      f"{2 * a.value_float():.9f} = d^N Delta(D)")

# N = 2: the critical divisor of A X^2 + b, with a certified interval.
f = MinCritMap(2, 2, [[Q(1), Q(0)], [Q(0), Q(1)]], [Q(5), Q(7)])
est = delta_relative_critical(f, 5, INF)
print(f"N=2 critical rate: {est.value_float():.6f} +- {est.error_float():.4f}")
