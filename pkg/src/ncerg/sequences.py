"""Strictly increasing index sequences ``k_0 < k_1 < ...`` and their statistics.

Every generator exposes two materializations:

* ``prefix(N)`` - the first ``N`` terms,
* ``upto(n)`` - all terms ``<= n``.

Both return ``int64`` arrays and are deterministic given the spec.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

ARC_SLACK = 1e-12
ROTATION_STEP_CAP = 10**9
_CHUNK = 1 << 16


class SequenceExhausted(ValueError):
    """An explicit (finite) sequence was asked for more terms than it holds."""


class SubsequenceSpec:
    """Base class; subclasses implement ``prefix`` and ``upto``."""

    def prefix(self, n_terms):
        raise NotImplementedError

    def upto(self, n):
        raise NotImplementedError

    def __getitem__(self, j):
        return int(self.prefix(j + 1)[j])

    def indicator(self, length):
        """``c_j = 1`` iff ``j`` is a term, for ``j < length``."""
        out = np.zeros(length, dtype=bool)
        out[self.upto(length - 1)] = True
        return out

    def to_json(self):
        raise TypeError(f"{type(self).__name__} is not serializable")


def _by_growth(spec, n_terms, first_guess):
    # generic prefix from upto(): grow the search bound until enough terms appear
    bound = max(int(first_guess), 16)
    while True:
        terms = spec.upto(bound)
        if len(terms) >= n_terms:
            return terms[:n_terms]
        bound *= 2


class Full(SubsequenceSpec):
    def prefix(self, n_terms):
        return np.arange(n_terms, dtype=np.int64)

    def upto(self, n):
        return np.arange(max(n + 1, 0), dtype=np.int64)

    def to_json(self):
        return {"kind": "full"}


class Explicit(SubsequenceSpec):
    """A finite, user-supplied prefix."""

    def __init__(self, terms):
        terms = np.asarray(list(terms), dtype=np.int64)
        if terms.size and (terms[0] < 0 or np.any(np.diff(terms) <= 0)):
            raise ValueError("explicit terms must be strictly increasing nonnegative integers")
        self.terms = terms

    def prefix(self, n_terms):
        if n_terms > len(self.terms):
            raise SequenceExhausted(f"explicit sequence has {len(self.terms)} terms, {n_terms} requested")
        return self.terms[:n_terms].copy()

    def upto(self, n):
        if not len(self.terms) or n > self.terms[-1]:
            raise SequenceExhausted(
                f"explicit sequence is only known up to {self.terms[-1] if len(self.terms) else None}"
            )
        return self.terms[self.terms <= n].copy()

    def to_json(self):
        return {"kind": "explicit", "terms": self.terms.tolist()}


class ArithmeticProgression(SubsequenceSpec):
    def __init__(self, stride, offset=0):
        if stride < 1 or offset < 0:
            raise ValueError("need stride >= 1 and offset >= 0")
        self.stride = int(stride)
        self.offset = int(offset)

    def prefix(self, n_terms):
        return self.offset + self.stride * np.arange(n_terms, dtype=np.int64)

    def upto(self, n):
        if n < self.offset:
            return np.zeros(0, dtype=np.int64)
        return self.prefix((n - self.offset) // self.stride + 1)

    def to_json(self):
        return {"kind": "progression", "stride": self.stride, "offset": self.offset}


def evens():
    return ArithmeticProgression(2, 0)


# --- density-one sequences: complements of sparse sets -----------------------------


def _powers_upto(base, n):
    out, v = [], 1
    while v <= n:
        out.append(v)
        v *= base
    return np.array(out, dtype=np.int64)


_SPARSE_RULES = {
    # squares and cubes of positive integers, so 0 stays in every complement
    "squares": (lambda n: np.arange(1, math.isqrt(max(n, 0)) + 1, dtype=np.int64) ** 2, True),
    "cubes": (lambda n: np.arange(1, int(round(max(n, 0) ** (1 / 3))) + 2, dtype=np.int64) ** 3, True),
    "powers_of_two": (lambda n: _powers_upto(2, n), True),
    "evens": (lambda n: np.arange(0, n + 1, 2, dtype=np.int64), False),
    "empty": (lambda n: np.zeros(0, dtype=np.int64), True),
}


class ComplementOfSparse(SubsequenceSpec):
    """``N_0`` minus a sparse set given by a named rule or a finite list.

    ``density_one`` records whether the removed set has density zero, i.e.
    whether the result meets the density-one hypothesis. Removing the evens
    is allowed (it yields the odds) but is flagged.
    """

    def __init__(self, rule="squares"):
        if isinstance(rule, str):
            if rule not in _SPARSE_RULES:
                raise ValueError(f"unknown sparse rule {rule!r}; choose from {sorted(_SPARSE_RULES)}")
            self._sparse, self.density_one = _SPARSE_RULES[rule]
        else:
            removed = np.unique(np.asarray(list(rule), dtype=np.int64))
            if removed.size and removed[0] < 0:
                raise ValueError("sparse set must contain nonnegative integers")
            self._sparse = lambda n: removed[removed <= n]
            self.density_one = True
        self.rule = rule

    def sparse_upto(self, n):
        s = self._sparse(n)
        return s[s <= n]

    def upto(self, n):
        if n < 0:
            return np.zeros(0, dtype=np.int64)
        mask = np.ones(n + 1, dtype=bool)
        mask[self.sparse_upto(n)] = False
        return np.flatnonzero(mask).astype(np.int64)

    def prefix(self, n_terms):
        guess = 2 * n_terms + 16 if not self.density_one else n_terms + 2 * math.isqrt(n_terms) + 16
        return _by_growth(self, n_terms, guess)

    def to_json(self):
        rule = self.rule if isinstance(self.rule, str) else [int(v) for v in self.rule]
        return {"kind": "complement", "sparse": rule}


def density_one_complement(rule, n_terms):
    """First ``n_terms`` of the complement of a sparse set, plus the density-one flag."""
    spec = ComplementOfSparse(rule)
    return spec.prefix(n_terms), spec.density_one


# --- block sequences ---------------------------------------------------------------


class IntervalBlocks:
    """Integer intervals ``I_n = [a_n, b_n]`` with ``a_n <= b_n < a_{n+1}``.

    ``rule`` is either ``"squares"`` for ``[n^2, n^2 + n]`` or an explicit
    list of ``(a, b)`` pairs (a finite family).
    """

    def __init__(self, rule="squares"):
        if isinstance(rule, str):
            if rule != "squares":
                raise ValueError(f"unknown interval rule {rule!r}")
            self._explicit = None
        else:
            ends = np.asarray(list(rule), dtype=np.int64).reshape(-1, 2)
            if ends.size == 0:
                raise ValueError("need at least one interval")
            a, b = ends[:, 0], ends[:, 1]
            if a[0] < 0 or np.any(a > b):
                raise ValueError("intervals need 0 <= a_n <= b_n")
            bad = np.flatnonzero(b[:-1] >= a[1:])
            if bad.size:
                i = int(bad[0])
                raise ValueError(f"intervals overlap or touch out of order: b_{i}={b[i]} >= a_{i+1}={a[i+1]}")
            self._explicit = ends
        self.rule = rule

    def endpoints(self, count):
        """``(a, b)`` arrays for the first ``count`` intervals."""
        if self._explicit is None:
            n = np.arange(count, dtype=np.int64)
            return n * n, n * n + n
        if count > len(self._explicit):
            raise SequenceExhausted(f"only {len(self._explicit)} intervals defined")
        return self._explicit[:count, 0].copy(), self._explicit[:count, 1].copy()

    @property
    def finite(self):
        return self._explicit is not None

    def count(self):
        return None if self._explicit is None else len(self._explicit)

    def to_json(self):
        return self.rule if isinstance(self.rule, str) else self._explicit.tolist()


def block_sequence(blocks, n_terms):
    """First ``n_terms`` of the enumeration of ``U I_n``, with ``N_I``.

    Returns ``(k, interval_index)`` where ``interval_index[n]`` is the index
    of the interval containing ``k[n]``.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    count = 1
    while True:
        if blocks.finite:
            count = blocks.count()
        a, b = blocks.endpoints(count)
        lengths = b - a + 1
        if lengths.sum() >= n_terms or blocks.finite:
            break
        count *= 2
    if lengths.sum() < n_terms:
        raise SequenceExhausted(f"intervals hold only {int(lengths.sum())} terms")
    idx = np.repeat(np.arange(count, dtype=np.int64), lengths)[:n_terms]
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    pos = np.arange(n_terms, dtype=np.int64) - starts[idx]
    return a[idx] + pos, idx


class Blocks(SubsequenceSpec):
    def __init__(self, blocks=None):
        self.blocks = blocks if isinstance(blocks, IntervalBlocks) else IntervalBlocks(blocks or "squares")

    def prefix(self, n_terms):
        if n_terms == 0:
            return np.zeros(0, dtype=np.int64)
        return block_sequence(self.blocks, n_terms)[0]

    def interval_index(self, n_terms):
        """``N_I(0), ..., N_I(n_terms - 1)``."""
        return block_sequence(self.blocks, n_terms)[1]

    def upto(self, n):
        if n < 0:
            return np.zeros(0, dtype=np.int64)
        if self.blocks.finite:
            a, b = self.blocks.endpoints(self.blocks.count())
            if n > b[-1]:
                raise SequenceExhausted(f"block family ends at {b[-1]}")
        else:
            count = math.isqrt(n) + 2
            a, b = self.blocks.endpoints(count)
        parts = [np.arange(lo, min(hi, n) + 1, dtype=np.int64) for lo, hi in zip(a, b) if lo <= n]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def to_json(self):
        rule = self.blocks.to_json()
        if isinstance(rule, str):
            return {"kind": "blocks", "rule": rule}
        return {"kind": "blocks", "intervals": rule}


def example_blocks():
    """``I_n = [n^2, n^2 + n]``."""
    return Blocks(IntervalBlocks("squares"))


def run_decomposition(k):
    """Interval index of each term when a prefix is split into maximal runs of consecutive integers."""
    k = np.asarray(k)
    if k.size == 0:
        return np.zeros(0, dtype=np.int64)
    breaks = np.concatenate([[0], (np.diff(k) > 1).astype(np.int64)])
    return np.cumsum(breaks)


# --- uniform sequences from circle rotations ---------------------------------------


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class Apparatus:
    """Rotation ``w -> w + alpha mod 1`` on the circle, arc ``Y = [u, v)``, start ``omega0``.

    A double cannot certify irrationality, so ``alpha`` must be vouched for
    through ``irrational``; the named constructors set it.
    """

    alpha: float
    arc: tuple = (0.0, 0.5)
    omega0: float = 0.0
    irrational: bool = False
    label: str = ""

    def __post_init__(self):
        u, v = self.arc
        if not (0.0 <= u < v <= 1.0):
            raise ValueError(f"arc must satisfy 0 <= u < v <= 1, got {self.arc}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"rotation angle must lie in (0, 1), got {self.alpha}")
        if not (0.0 <= self.omega0 < 1.0):
            raise ValueError(f"base point must lie in [0, 1), got {self.omega0}")

    @classmethod
    def golden(cls, arc=(0.0, 0.5), omega0=0.0):
        return cls(GOLDEN, tuple(arc), omega0, True, "golden")

    @classmethod
    def sqrt2(cls, arc=(0.0, 0.5), omega0=0.0):
        return cls(SQRT2_MINUS_1, tuple(arc), omega0, True, "sqrt2")

    @classmethod
    def asserted(cls, alpha, arc=(0.0, 0.5), omega0=0.0):
        """Caller vouches that ``alpha`` stands for an irrational number."""
        return cls(float(alpha), tuple(arc), omega0, True, "asserted")

    @property
    def arc_length(self):
        return self.arc[1] - self.arc[0]

    def validate(self):
        if not self.irrational:
            raise ValueError(
                "apparatus.alpha: rotation angle is not attested irrational; "
                "use Apparatus.golden(), Apparatus.sqrt2() or Apparatus.asserted()"
            )
        near = Fraction(self.alpha).limit_denominator(1000)
        if abs(float(near) - self.alpha) < 1e-15:
            raise ValueError(f"apparatus.alpha: {self.alpha!r} equals the rational {near}")

    def orbit(self, start, count):
        """``omega0 + j alpha mod 1`` for ``start <= j < start + count``."""
        # anchor each chunk with a freshly reduced base point; drift stays ~count * ulp
        base = math.fmod(self.omega0 + math.fmod(start * self.alpha, 1.0), 1.0)
        return np.mod(base + self.alpha * np.arange(count), 1.0)

    def in_arc(self, w):
        u = self.arc[0]
        # half-open [u, v); points within ARC_SLACK below u count as hits
        return (np.mod(w - u, 1.0) < self.arc_length) | (np.mod(u - w, 1.0) <= ARC_SLACK)

    def to_json(self):
        alpha = self.label if self.label in ("golden", "sqrt2") else self.alpha
        out = {"kind": "rotation", "alpha": alpha, "Y": list(self.arc), "omega0": self.omega0}
        if self.label == "asserted":
            out["assert_irrational"] = True
        return out


def uniform_sequence_from_rotation(apparatus, n_terms, step_cap=ROTATION_STEP_CAP):
    """First ``n_terms`` visit times of the orbit of ``omega0`` to the arc."""
    apparatus.validate()
    out = []
    have = 0
    start = 0
    while have < n_terms:
        if start >= step_cap:
            raise RuntimeError(
                f"only {have} of {n_terms} visits within {step_cap} rotation steps; arc too small"
            )
        count = min(_CHUNK, step_cap - start)
        hits = np.flatnonzero(apparatus.in_arc(apparatus.orbit(start, count))) + start
        out.append(hits[: n_terms - have])
        have += min(len(hits), n_terms - have)
        start += count
    return np.concatenate(out).astype(np.int64)


class RotationReturnTimes(SubsequenceSpec):
    def __init__(self, apparatus):
        apparatus.validate()
        self.apparatus = apparatus

    def prefix(self, n_terms):
        if n_terms == 0:
            return np.zeros(0, dtype=np.int64)
        return uniform_sequence_from_rotation(self.apparatus, n_terms)

    def upto(self, n):
        if n < 0:
            return np.zeros(0, dtype=np.int64)
        w = self.apparatus.orbit(0, n + 1)
        return np.flatnonzero(self.apparatus.in_arc(w)).astype(np.int64)

    def to_json(self):
        return self.apparatus.to_json()


# --- statistics --------------------------------------------------------------------


def partial_density(k, n):
    """``card({0..n} & k) / (n + 1)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return len(k.upto(n)) / (n + 1)


def partial_densities(k, n):
    """Partial densities for every ``m = 0..n`` at once."""
    c = np.cumsum(k.indicator(n + 1))
    return c / np.arange(1, n + 2)


def lower_density_estimate(k, n, start=None):
    """Minimum partial density over ``m`` in ``[start, n]`` (default ``start = n // 10``)."""
    start = n // 10 if start is None else start
    return float(partial_densities(k, n)[start:].min())


def counting_function(k, n):
    """``c(n) = max{j : k_j <= n} + 1``, the number of terms ``<= n``."""
    return len(k.upto(n))


def sup_ratio(k, n_terms):
    """``max_{1 <= n <= N} k_n / n``.

    Bounded values across growing ``N`` indicate positive lower density.
    """
    if n_terms < 1:
        raise ValueError("N must be at least 1")
    terms = k.prefix(n_terms + 1)
    n = np.arange(1, n_terms + 1)
    return float(np.max(terms[1:] / n))


# --- JSON --------------------------------------------------------------------------


def _apparatus_from_json(obj):
    extra = set(obj) - {"kind", "alpha", "Y", "omega0", "assert_irrational"}
    if extra:
        raise ValueError(f"apparatus: unknown fields {sorted(extra)}")
    arc = tuple(obj.get("Y", (0.0, 0.5)))
    omega0 = float(obj.get("omega0", 0.0))
    alpha = obj["alpha"]
    if alpha == "golden":
        return Apparatus.golden(arc, omega0)
    if alpha == "sqrt2":
        return Apparatus.sqrt2(arc, omega0)
    if isinstance(alpha, str):
        raise ValueError(f"apparatus.alpha: unknown named angle {alpha!r}")
    if obj.get("assert_irrational", False):
        app = Apparatus.asserted(alpha, arc, omega0)
    else:
        app = Apparatus(float(alpha), arc, omega0)
    app.validate()
    return app


def sequence_from_json(obj):
    kind = obj.get("kind")
    keys = set(obj) - {"kind"}

    def expect(*allowed):
        extra = keys - set(allowed)
        if extra:
            raise ValueError(f"sequence kind {kind!r}: unknown fields {sorted(extra)}")

    if kind == "full":
        expect()
        return Full()
    if kind == "explicit":
        expect("terms")
        return Explicit(obj["terms"])
    if kind == "progression":
        expect("stride", "offset")
        return ArithmeticProgression(obj["stride"], obj.get("offset", 0))
    if kind == "complement":
        expect("sparse")
        return ComplementOfSparse(obj.get("sparse", "squares"))
    if kind == "blocks":
        expect("rule", "intervals")
        if "intervals" in obj:
            return Blocks(IntervalBlocks(obj["intervals"]))
        return Blocks(IntervalBlocks(obj.get("rule", "squares")))
    if kind == "rotation":
        return RotationReturnTimes(_apparatus_from_json(obj))
    raise ValueError(f"unknown sequence kind {kind!r}")
