"""A weighted direct sum of matrix algebras, its trace, norms and spectral calculus."""

import numpy as np

from ncerg import AlgebraSpec, absolute_value, measure_ball_membership, schatten_norm, spectral_projection, trace
from ncerg.algebra import ginibre

# M_2 with the plain trace, plus a second copy of M_2 whose trace counts half.
alg = AlgebraSpec([(2, 1.0), (2, 0.5)])
print("tau(1) =", trace(alg.identity()).real)

x = alg.diag([3, -4, 1, 2])
for p in (1, 2, np.inf):
    print(f"||x||_{p} = {schatten_norm(x, p):.4f}")

# |x| is computed from the spectral decomposition of x* x
print("|x| diagonal:", np.round(absolute_value(x).to_dense().diagonal().real, 6))

# spectral projection of a self-adjoint element on a closed window
e = spectral_projection(x, (-10, 1.5))
print("e = chi_[-10, 1.5](x) diagonal:", e.to_dense().diagonal().real, " tau(1 - e) =", e.trace_complement())

# membership in the measure-topology neighbourhood V(eps, delta)
y = ginibre(alg, np.random.default_rng(0))
w = measure_ball_membership(y, eps=1.0, delta=2.0)
if w is None:
    print("spectral construction exceeded the budget")
else:
    print(f"||y e|| = {schatten_norm(y @ w, np.inf):.3f} <= 1 with tau(1 - e) = {w.trace_complement():.2f}")
