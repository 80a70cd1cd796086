"""Projection witnesses for almost-uniform convergence and the equicontinuity probe."""

import numpy as np

from ncerg import (
    AlgebraSpec,
    ComplementOfSparse,
    LimitInstance,
    MixedUnitary,
    au_report,
    au_report_from_terms,
    buem_gamma,
    buem_probe,
    example_blocks,
    find_witness,
    limit_check,
)
from ncerg.algebra import ginibre

m2 = AlgebraSpec.matrix(2)
w = find_witness([m2.diag([10, 0.01])], eps=1.0)
print("witness for diag(10, 0.01):", w.projection.to_dense().diagonal().real, "level", w.level)

rng = np.random.default_rng(3)
alg = AlgebraSpec.matrix(8)
T = MixedUnitary.random(alg, 3, rng)
x = ginibre(alg, rng)
rep = au_report(T, x, eps=0.8, horizon=10**4, mode="onesided", sequence=ComplementOfSparse("squares"))
print("a.u. report:", rep.decision, "tail levels", np.round(rep.envelope, 5).tolist())

bad = {n: m2.diag([1, -1]) * (-1) ** n for n in range(16, 80)}
print("alternating stream:", au_report_from_terms(bad, m2.zero(), eps=0.5).decision)

print("gamma(p=1, eps=0.8, delta=0.05, C=1) =", buem_gamma(1, 0.8, 0.05, 1))
res = buem_probe(T, p=1, eps=0.8, delta=0.05, sample_count=20)
print(f"probe: {res.passed_count}/{res.attempted} passed, worst sup {res.worst_sup:.1e}")

y = ginibre(alg, rng)
cob = limit_check("thm51_decomposition", LimitInstance(T, None, 10**4, sequence=example_blocks(), y=y))
print(f"coboundary: max(measured - bound) over the grid = {cob.residual:.3f}")
