"""Ergodic averages and the exact rescaling identities between them.

All four families are one formula,

    M_n^{beta,k}(T)(x) = (1/n) sum_{j<n} beta_{k_j} T^{k_j}(x),

with ``beta = 1`` and/or ``k_j = j`` as defaults. The stream advances a single
running power ``T^{k_j}(x)`` by ``k_j - k_{j-1}`` applications per term.
"""

import numpy as np

from .algebra import OperatorElement, schatten_norm
from .sequences import Full, counting_function
from .weights import ONE, Indicator, Product


def _checkpoints(horizon, stride):
    if stride is None:
        return None
    if stride == "geometric":
        pts = {1 << i for i in range(horizon.bit_length()) if (1 << i) <= horizon}
    elif isinstance(stride, int):
        if stride < 1:
            raise ValueError("stride must be positive")
        pts = set(range(stride, horizon + 1, stride))
    else:
        pts = {int(n) for n in stride if 1 <= n <= horizon}
    pts.add(horizon)
    return pts


class AverageStream:
    """Iterator over ``(n, M_n)`` for ``n = 1..horizon``.

    Parameters
    ----------
    op : DSOperator
    x : OperatorElement
    weights : WeightSequence, optional
        Defaults to the constant sequence 1.
    sequence : SubsequenceSpec, optional
        Defaults to ``k_j = j``.
    horizon : int
        Last ``n`` emitted.
    stride : None, int, ``"geometric"`` or iterable of int
        Which ``n`` to emit. ``None`` emits every ``n``; ``"geometric"``
        emits powers of two. The horizon is always emitted.
    """

    def __init__(self, op, x, weights=None, sequence=None, horizon=1, stride=None):
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        if x.algebra != op.algebra:
            raise ValueError("x and T live in different algebras")
        self.op = op
        self.x = x
        self.weights = ONE if weights is None else weights
        self.sequence = Full() if sequence is None else sequence
        self.horizon = int(horizon)
        self._emit = _checkpoints(self.horizon, stride)
        if not np.isfinite(self.weights.bound):
            raise ValueError("weights must be bounded")
        self.n = 0

    def __iter__(self):
        k = self.sequence.prefix(self.horizon)
        if len(k) < self.horizon or np.any(np.diff(k) <= 0) or (len(k) and k[0] < 0):
            raise ValueError("index sequence must be strictly increasing and nonnegative")
        beta = self.weights.prefix(int(k[-1]) + 1)[k]
        power = self.x
        pos = 0
        acc = [np.zeros_like(a) for a in self.x.blocks]
        alg = self.x.algebra
        for j in range(self.horizon):
            target = int(k[j])
            while pos < target:
                power = self.op.apply(power)
                pos += 1
            self.n = n = j + 1
            # running mean M_n = M_{n-1} + (beta T^k x - M_{n-1}) / n keeps constant terms exact
            b = beta[j]
            for a, p in zip(acc, power.blocks):
                a += (b * p - a) / n
            if self._emit is None or n in self._emit:
                yield n, OperatorElement(alg, [a.copy() for a in acc])


def average_stream(op, x, weights=None, sequence=None, horizon=1, stride=None):
    return iter(AverageStream(op, x, weights, sequence, horizon, stride))


def averages_at(op, x, ns, weights=None, sequence=None):
    """``{n: M_n}`` for the requested ``n`` values, from a single pass."""
    ns = sorted({int(n) for n in ns})
    if not ns or ns[0] < 1:
        raise ValueError("need at least one n >= 1")
    return dict(AverageStream(op, x, weights, sequence, ns[-1], stride=ns))


def average(op, x, n, weights=None, sequence=None):
    """``M_n^{beta,k}(T)(x)``."""
    return averages_at(op, x, [n], weights, sequence)[n]


def transfer_identity_check(variant, op, weights, sequence, x, n):
    """Residual ``||LHS - RHS||_inf`` of an exact rescaling identity.

    ``"prop31"``:
        ``M_n^{beta,k} = ((k_{n-1} + 1)/n) M_{k_{n-1}+1}^{c beta}``
    ``"prop32"``:
        ``M_n^{c beta} = (c(n-1)/n) M_{c(n-1)}^{beta,k}``

    where ``c`` is the indicator of ``k`` and ``c(m)`` counts terms ``<= m``.
    Both sides are evaluated as separate averages.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    weights = ONE if weights is None else weights
    cbeta = Product(Indicator(sequence), weights)
    if variant == "prop31":
        last = int(sequence.prefix(n)[n - 1])
        lhs = average(op, x, n, weights, sequence)
        rhs = average(op, x, last + 1, cbeta) * ((last + 1) / n)
    elif variant == "prop32":
        count = counting_function(sequence, n - 1)
        if count < 1:
            raise ValueError(f"no sequence terms <= {n - 1}; identity needs c(n-1) >= 1")
        lhs = average(op, x, n, cbeta)
        rhs = average(op, x, count, weights, sequence) * (count / n)
    else:
        raise ValueError(f"unknown identity {variant!r}")
    return schatten_norm(lhs - rhs, np.inf)


def theorem31_gap(op, weights, sequence, x, n):
    """Gap between ``M_{k_n}^beta`` and ``A_n = (1/k_n) sum_{j<n} beta_{k_j} T^{k_j} x``.

    Returns ``(measured, bound)`` where
    ``bound = ((k_n - n)/k_n) * max_{j<k_n} |beta_j| * ||x||_inf``.
    """
    weights = ONE if weights is None else weights
    k = sequence.prefix(n + 1)
    kn = int(k[n])
    if kn < 1:
        raise ValueError("k_n must be at least 1")
    full = average(op, x, kn, weights)
    if n == 0:
        a_n = x.algebra.zero()
    else:
        a_n = average(op, x, n, weights, sequence) * (n / kn)
    measured = schatten_norm(full - a_n, np.inf)
    beta_sup = float(np.abs(weights.prefix(kn)).max())
    bound = (kn - n) / kn * beta_sup * schatten_norm(x, np.inf)
    return measured, bound
