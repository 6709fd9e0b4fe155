"""Local size functionals on divisors of P^N.

A divisor is stored by a defining homogeneous form.  Two numbers summarize
how the divisor sits relative to the hyperplane at infinity H = {X_{N+1}=0}:

  lambda(D) = log||F|| - log||F restricted to H||   (relative size)
  mu(D)     = the minimum normalized gap between the coefficient at the
              point (0,...,0,1) and the other slices (how uniformly "near
              infinity" D is)

Both are computed per place of Q: exactly as rational multiples of log p at
p-adic places, as 50-digit reals at the archimedean place.
"""

from fractions import Fraction as Q

from relesc import (Divisor, HomogeneousForm, INF, Place, lambda_local,
                    mu_local)

# On P^1 the divisor [z] of a rational point has lambda([z]) = log^+|z|.
for z in (Q(3), Q(1, 3), Q(-7, 2)):
    D = Divisor.point(z)
    print(f"lambda([{z}]) at inf = {lambda_local(D, INF).to_float():.6f}")

# At a p-adic place everything is an exact rational multiple of log p.
D = Divisor.point(Q(1, 4))
print("lambda([1/4]) at 2 =", lambda_local(D, Place(2)))  # 2 * log 2

# mu sees all the slices.  For X^2 + 5XY + Y^2 the middle slice is large,
# so mu is negative even though lambda is small.
F = HomogeneousForm(2, 2, {(2, 0): Q(1), (1, 1): Q(5), (0, 2): Q(1)})
D = Divisor(F)
print(f"lambda = {lambda_local(D, INF).to_float():.6f}, "
      f"mu = {mu_local(D, INF).to_float():.6f}  (= -log 5)")

# mu <= lambda/deg always; there is no bound the other way.
print("mu <= lambda/deg:",
      mu_local(D, INF).to_float() <= lambda_local(D, INF).to_float() / D.degree)
