"""Block sequences, density-one complements and rotation return times."""

import numpy as np

from ncerg import (
    Apparatus,
    ComplementOfSparse,
    example_blocks,
    partial_density,
    sup_ratio,
    uniform_sequence_from_rotation,
)

blocks = example_blocks()  # union of [n^2, n^2 + n]
print("k   :", blocks.prefix(11).tolist())
print("N_I :", blocks.interval_index(11).tolist())
# The interval index grows like sqrt(2n), e.g. N_I(3) = 2 although floor(sqrt(3)) = 1.
n = np.arange(1, 8)
print("enumerated N_I(n):", blocks.interval_index(8)[1:].tolist(), " floor(sqrt(n)):", np.floor(np.sqrt(n)).astype(int).tolist())
print(f"density at 10^6: {partial_density(blocks, 10**6):.4f}, sup k_n/n up to 10^5: {sup_ratio(blocks, 10**5):.4f}")

co = ComplementOfSparse("squares")
print("complement of squares:", co.prefix(10).tolist(), f"density at 10^6: {partial_density(co, 10**6):.6f}")

for arc in [(0.0, 0.5), (0.0, 1 / 3)]:
    k = uniform_sequence_from_rotation(Apparatus.golden(arc), 10**5 + 1)
    print(f"golden rotation, Y = [0, {arc[1]:.3f}): n/k_n at n = 10^5 is {10**5 / k[-1]:.6f}")

try:
    Apparatus(0.25, (0.0, 0.5)).validate()
except ValueError as exc:
    print("rejected:", exc)
