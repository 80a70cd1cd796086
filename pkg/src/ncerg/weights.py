"""Bounded complex weight sequences ``beta_0, beta_1, ...``."""

from dataclasses import dataclass

import numpy as np

from .sequences import SequenceExhausted, SubsequenceSpec, sequence_from_json

UNIT_MODULUS_TOL = 1e-12
PHASE_ANCHOR = 10_000


def _split_exact(theta):
    # theta = hi + lo with hi carrying 26 significant bits, so k * hi is exact for k < 2**27
    m, e = np.frexp(theta)
    hi = float(np.ldexp(np.floor(m * 2.0**26), int(e) - 26))
    return hi, theta - hi


def _unit_powers(theta, ks):
    """``exp(i theta k)`` for integer ``ks`` with the phase ``theta * k`` formed exactly."""
    ks = np.asarray(ks, dtype=np.float64)
    hi, lo = _split_exact(theta)
    return np.exp(1j * (ks * hi)) * np.exp(1j * (ks * lo))


@dataclass(frozen=True)
class TrigPolynomial:
    """``P(k) = sum_j r_j lambda_j^k`` with ``lambda_j = exp(i theta_j)``."""

    r: tuple
    args: tuple

    def __post_init__(self):
        if len(self.r) != len(self.args):
            raise ValueError("need one coefficient per frequency")
        object.__setattr__(self, "r", tuple(complex(v) for v in self.r))
        object.__setattr__(self, "args", tuple(float(v) for v in self.args))

    @classmethod
    def from_frequencies(cls, r, lambdas):
        lambdas = np.asarray(lambdas, dtype=complex)
        bad = np.abs(np.abs(lambdas) - 1.0) > UNIT_MODULUS_TOL
        if np.any(bad):
            raise ValueError(f"frequencies must have modulus 1, got {lambdas[bad]}")
        return cls(tuple(r), tuple(np.angle(lambdas)))

    @property
    def lambdas(self):
        return np.exp(1j * np.asarray(self.args))

    @property
    def bound(self):
        return float(sum(abs(v) for v in self.r))

    def __call__(self, k):
        return eval_trig_poly(self, k)

    def to_json(self):
        return {
            "r": [[v.real, v.imag] for v in self.r],
            "lambda_args": list(self.args),
        }

    @classmethod
    def from_json(cls, obj):
        extra = set(obj) - {"r", "lambda_args"}
        if extra:
            raise ValueError(f"trig polynomial: unknown fields {sorted(extra)}")
        r = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in obj["r"]]
        return cls(tuple(r), tuple(obj["lambda_args"]))


def eval_trig_poly(poly, k):
    """Direct evaluation of ``P(k)`` for integer ``k >= 0`` (scalar or array)."""
    ks = np.asarray(k)
    if np.any(ks < 0):
        raise ValueError("k must be nonnegative")
    out = np.zeros(ks.shape, dtype=complex)
    for r, theta in zip(poly.r, poly.args):
        out = out + r * _unit_powers(theta, ks)
    return complex(out) if out.ndim == 0 else out


def trig_poly_stream(poly, n_terms, anchor=PHASE_ANCHOR):
    """``P(0), ..., P(n_terms - 1)`` by repeated multiplication with ``lambda_j``.

    Every ``anchor`` steps the running power is reset from the exact phase,
    which removes both modulus and phase drift.
    """
    out = np.zeros(n_terms, dtype=complex)
    for r, theta in zip(poly.r, poly.args):
        lam = np.exp(1j * theta)
        for start in range(0, n_terms, anchor):
            count = min(anchor, n_terms - start)
            steps = np.full(count, lam)
            steps[0] = _unit_powers(theta, [start])[0]
            out[start:start + count] += r * np.cumprod(steps)
    return out


class WeightSequence:
    """Base class. ``bound`` is a cached upper bound for ``sup_j |beta_j|``."""

    bound: float

    def prefix(self, n_terms):
        raise NotImplementedError

    def __getitem__(self, j):
        return complex(self.prefix(j + 1)[j])

    def to_json(self):
        raise TypeError(f"{type(self).__name__} is not serializable")


class Constant(WeightSequence):
    def __init__(self, c=1.0):
        self.c = complex(c)
        self.bound = abs(self.c)

    def prefix(self, n_terms):
        return np.full(n_terms, self.c, dtype=complex)

    def to_json(self):
        return {"kind": "constant", "c": [self.c.real, self.c.imag]}


ONE = Constant(1.0)


class ExplicitWeights(WeightSequence):
    def __init__(self, values):
        self.values = np.asarray(values, dtype=complex)
        self.bound = float(np.abs(self.values).max(initial=0.0))

    def prefix(self, n_terms):
        if n_terms > len(self.values):
            raise SequenceExhausted(f"only {len(self.values)} explicit weights")
        return self.values[:n_terms].copy()

    def to_json(self):
        return {"kind": "explicit", "values": [[v.real, v.imag] for v in self.values]}


class TrigPoly(WeightSequence):
    def __init__(self, poly):
        self.poly = poly
        self.bound = poly.bound

    def prefix(self, n_terms):
        return trig_poly_stream(self.poly, n_terms)

    def to_json(self):
        return {"kind": "trig", "poly": self.poly.to_json()}


_DECAYS = ("harmonic", "geometric")


class TrigPolyPlusDecay(WeightSequence):
    """``P(k) + d_k`` with ``d_k = 1/(k+1)`` (harmonic) or ``d_k = rate^k`` (geometric, ``|rate| < 1``)."""

    def __init__(self, poly, decay="harmonic", rate=None):
        if decay not in _DECAYS:
            raise ValueError(f"decay must be one of {_DECAYS}")
        if decay == "geometric" and not (rate is not None and abs(rate) < 1):
            raise ValueError("geometric decay needs |rate| < 1")
        self.poly = poly
        self.decay = decay
        self.rate = None if rate is None else complex(rate)
        self.bound = poly.bound + 1.0

    def decay_terms(self, n_terms):
        k = np.arange(n_terms)
        if self.decay == "harmonic":
            return 1.0 / (k + 1.0)
        return self.rate ** k

    def prefix(self, n_terms):
        return trig_poly_stream(self.poly, n_terms) + self.decay_terms(n_terms)

    def to_json(self):
        out = {"kind": "trig_plus_decay", "poly": self.poly.to_json(), "decay": self.decay}
        if self.rate is not None:
            out["rate"] = [self.rate.real, self.rate.imag]
        return out


class Indicator(WeightSequence):
    """``c_j = 1`` if ``j`` is a term of ``k``, else 0."""

    def __init__(self, sequence):
        self.sequence = sequence
        self.bound = 1.0

    def prefix(self, n_terms):
        if n_terms == 0:
            return np.zeros(0, dtype=complex)
        return self.sequence.indicator(n_terms).astype(complex)

    def to_json(self):
        return {"kind": "indicator", "sequence": self.sequence.to_json()}


class Product(WeightSequence):
    """Pointwise product ``a_j b_j``."""

    def __init__(self, a, b):
        self.a = a
        self.b = b
        self.bound = a.bound * b.bound

    def prefix(self, n_terms):
        return self.a.prefix(n_terms) * self.b.prefix(n_terms)

    def to_json(self):
        return {"kind": "product", "a": self.a.to_json(), "b": self.b.to_json()}


def derive_weights(kind, *components, n_terms=None):
    """``derive_weights("indicator", k)`` or ``derive_weights("product", a, b)``.

    Returns the weight sequence, or its first ``n_terms`` values when
    ``n_terms`` is given.
    """
    if kind == "indicator":
        (seq,) = components
        if not isinstance(seq, SubsequenceSpec):
            raise TypeError("indicator weights need a SubsequenceSpec")
        w = Indicator(seq)
    elif kind == "product":
        a, b = components
        w = Product(a, b)
    else:
        raise ValueError(f"unknown derived weight kind {kind!r}")
    return w if n_terms is None else w.prefix(n_terms)


def besicovich_deviation(beta, poly, n):
    """``(1/n) sum_{k<n} |beta_k - P(k)|``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return float(np.mean(np.abs(beta.prefix(n) - trig_poly_stream(poly, n))))


def besicovich_certificate(beta, poly, eps, n0=1000, doublings=6):
    """Empirical check that the deviation stays below ``eps`` at ``n0, 2 n0, 4 n0, ...``.

    A prefix cannot decide a limsup; this only reports that no violation was
    seen on the doubling grid. Returns ``(ok, deviations)``.
    """
    devs = [besicovich_deviation(beta, poly, n0 * 2**i) for i in range(doublings + 1)]
    return all(d < eps for d in devs), devs


def correlation_estimate(alpha, m, n):
    """``(1/(n+1)) sum_{k=0}^{n} conj(alpha_k) alpha_{k+m}``; negative ``m`` by conjugate symmetry."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if m < 0:
        return correlation_estimate(alpha, -m, n).conjugate()
    a = alpha.prefix(n + m + 1)
    return complex(np.vdot(a[: n + 1], a[m:m + n + 1]) / (n + 1))


def _complex(v):
    if isinstance(v, (list, tuple)):
        return complex(*v)
    return complex(v)


def weights_from_json(obj):
    kind = obj.get("kind")
    keys = set(obj) - {"kind"}

    def expect(*allowed):
        extra = keys - set(allowed)
        if extra:
            raise ValueError(f"weights kind {kind!r}: unknown fields {sorted(extra)}")

    if kind == "constant":
        expect("c")
        return Constant(_complex(obj.get("c", 1.0)))
    if kind == "explicit":
        expect("values")
        return ExplicitWeights([_complex(v) for v in obj["values"]])
    if kind == "trig":
        expect("poly")
        return TrigPoly(TrigPolynomial.from_json(obj["poly"]))
    if kind == "trig_plus_decay":
        expect("poly", "decay", "rate")
        rate = obj.get("rate")
        return TrigPolyPlusDecay(
            TrigPolynomial.from_json(obj["poly"]),
            obj.get("decay", "harmonic"),
            None if rate is None else _complex(rate),
        )
    if kind == "indicator":
        expect("sequence")
        return Indicator(sequence_from_json(obj["sequence"]))
    if kind == "product":
        expect("a", "b")
        return Product(weights_from_json(obj["a"]), weights_from_json(obj["b"]))
    raise ValueError(f"unknown weights kind {kind!r}")
