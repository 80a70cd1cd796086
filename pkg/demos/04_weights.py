"""Trigonometric-polynomial weights, Besicovich deviation and correlations."""

import numpy as np

from ncerg import (
    TrigPoly,
    TrigPolynomial,
    TrigPolyPlusDecay,
    besicovich_certificate,
    correlation_estimate,
    eval_trig_poly,
    trig_poly_stream,
)

poly = TrigPolynomial.from_frequencies([0.7, 0.3j], [np.exp(1j * np.sqrt(2)), -1])
k = 10**6
direct = eval_trig_poly(poly, k)
streamed = trig_poly_stream(poly, k + 1)[-1]
print(f"P(10^6) direct {direct:.12f}, streamed {streamed:.12f}, gap {abs(direct - streamed):.1e}")

# (-1)^k + 1/(k+1) sits within H_n / n of the polynomial (-1)^k
flip = TrigPolynomial((1,), (np.pi,))
ok, devs = besicovich_certificate(TrigPolyPlusDecay(flip, "harmonic"), flip, eps=0.01, n0=1000, doublings=4)
print("deviation on a doubling grid:", np.round(devs, 5).tolist(), "sustained below 0.01:", ok)

# correlation of a trig polynomial tends to sum_j |r_j|^2 lambda_j^m
target = 0.49 * np.exp(1j * np.sqrt(2) * 3) + 0.09 * (-1) ** 3
for n in (100, 10_000):
    print(f"gamma(3) estimate at n={n}: {correlation_estimate(TrigPoly(poly), 3, n):.5f} (limit {target:.5f})")
