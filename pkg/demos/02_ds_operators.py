"""Dunford-Schwartz recipes, the sampling verifier, and the fixed-point projection."""

import numpy as np

from ncerg import (
    AlgebraSpec,
    BlockConditionalExpectation,
    Composition,
    MixedUnitary,
    UnitaryConjugation,
    fixed_space_projector,
    scaling_hook,
    verify_ds_plus,
)

rng = np.random.default_rng(1)
m2 = AlgebraSpec.matrix(2)
swap = m2.element([np.array([[0, 1], [1, 0]])])

half = MixedUnitary([(0.5, m2.identity()), (0.5, swap)])
print("half-swap mixture of diag(1, 0):", half(m2.diag([1, 0])).to_dense().diagonal().real)

alg = AlgebraSpec.matrix(4)
op = Composition([MixedUnitary.random(alg, 3, rng), BlockConditionalExpectation(alg, [[2, 2]])])
print("composed recipe:", verify_ds_plus(op, sample_count=50).to_json())
print("x -> 2x hook:   ", verify_ds_plus(scaling_hook(alg), sample_count=5).to_json())

# conjugating by a cyclic shift averages a diagonal around the cycle in the limit
shift = UnitaryConjugation(alg.element([np.roll(np.eye(4), 1, axis=0)]))
E = fixed_space_projector(shift)
print("E(diag(1, 2, 3, 10)) =", np.round(E(alg.diag([1, 2, 3, 10])).to_dense().diagonal().real, 10))
