"""Subsequential weighted averages and the exact rescaling identities."""

import numpy as np

from ncerg import (
    AlgebraSpec,
    ComplementOfSparse,
    ExplicitWeights,
    MixedUnitary,
    averages_at,
    evens,
    example_blocks,
    fixed_space_projector,
    schatten_norm,
    theorem31_gap,
    transfer_identity_check,
)
from ncerg.algebra import ginibre

rng = np.random.default_rng(2)
alg = AlgebraSpec([(3, 1.0), (2, 0.5)])
T = MixedUnitary.random(alg, 3, rng)
x = ginibre(alg, rng)
beta = ExplicitWeights(rng.normal(size=1000) + 1j * rng.normal(size=1000))

for k in (evens(), example_blocks(), ComplementOfSparse("squares")):
    r31 = transfer_identity_check("prop31", T, beta, k, x, 150)
    r32 = transfer_identity_check("prop32", T, beta, k, x, 150)
    print(f"{type(k).__name__:>22}: identity residuals {r31:.1e}, {r32:.1e}")

measured, bound = theorem31_gap(T, None, ComplementOfSparse("squares"), x, 10**4)
print(f"gap between M_(k_n) and A_n at n = 10^4: {measured:.2e} <= {bound:.2e}")

E = fixed_space_projector(T)
ms = averages_at(T, x, [10, 100, 1000, 10000])
for n, m in ms.items():
    print(f"||M_{n}(x) - E(x)|| = {schatten_norm(m - E(x), np.inf):.2e}")
