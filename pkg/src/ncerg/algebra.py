"""Finite-dimensional tracial von Neumann algebras.

An algebra is a direct sum of full matrix algebras ``M_{d_1} + ... + M_{d_r}``
with trace ``tau(x) = sum_i t_i Tr(x_i)`` for strictly positive weights
``t_i``. Elements are stored block by block; all values are immutable.
"""

from dataclasses import dataclass
from numbers import Number

import numpy as np

from .linalg import jacobi_eigh, singular_values

PROJECTION_TOL = 1e-10
INTERVAL_SLACK = 1e-9
SELF_ADJOINT_RTOL = 1e-8


class AlgebraMismatch(ValueError):
    """Raised when elements from different algebras are combined."""


@dataclass(frozen=True)
class Block:
    dim: int
    weight: float = 1.0


class AlgebraSpec:
    """A direct sum of matrix blocks, each carrying a positive trace weight."""

    def __init__(self, blocks):
        blocks = tuple(b if isinstance(b, Block) else Block(*b) for b in blocks)
        if not blocks:
            raise ValueError("an algebra needs at least one block")
        for b in blocks:
            if int(b.dim) != b.dim or b.dim < 1:
                raise ValueError(f"block dimension must be a positive integer, got {b.dim!r}")
            if not (b.weight > 0 and np.isfinite(b.weight)):
                raise ValueError(f"trace weight must be positive and finite, got {b.weight!r}")
        self.blocks = tuple(Block(int(b.dim), float(b.weight)) for b in blocks)

    @classmethod
    def matrix(cls, dim, weight=1.0):
        """The full matrix algebra ``M_dim`` with trace ``weight * Tr``."""
        return cls([(dim, weight)])

    @classmethod
    def diagonal(cls, weights):
        """The commutative algebra ``C^n`` with point masses ``weights``."""
        return cls([(1, w) for w in weights])

    @property
    def dims(self):
        return tuple(b.dim for b in self.blocks)

    @property
    def weights(self):
        return tuple(b.weight for b in self.blocks)

    @property
    def total_dim(self):
        return sum(self.dims)

    @property
    def vector_dim(self):
        """Dimension of the algebra as a complex vector space."""
        return sum(d * d for d in self.dims)

    @property
    def trace_of_identity(self):
        return sum(b.dim * b.weight for b in self.blocks)

    def offsets(self):
        out, pos = [], 0
        for d in self.dims:
            out.append(pos)
            pos += d
        return out

    def __eq__(self, other):
        return isinstance(other, AlgebraSpec) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        inner = ", ".join(f"({b.dim}, {b.weight:g})" for b in self.blocks)
        return f"AlgebraSpec([{inner}])"

    # construction helpers

    def identity(self):
        return OperatorElement(self, [np.eye(d, dtype=complex) for d in self.dims])

    def zero(self):
        return OperatorElement(self, [np.zeros((d, d), dtype=complex) for d in self.dims])

    def element(self, blocks):
        return OperatorElement(self, blocks)

    def from_dense(self, matrix):
        """Extract the diagonal blocks of a ``total_dim x total_dim`` matrix."""
        matrix = np.asarray(matrix)
        if matrix.shape != (self.total_dim, self.total_dim):
            raise ValueError(f"expected shape {(self.total_dim,) * 2}, got {matrix.shape}")
        return OperatorElement(
            self, [matrix[o:o + d, o:o + d] for o, d in zip(self.offsets(), self.dims)]
        )

    def from_vector(self, vec):
        """Inverse of :meth:`OperatorElement.to_vector`."""
        vec = np.asarray(vec)
        if vec.shape != (self.vector_dim,):
            raise ValueError(f"expected length {self.vector_dim}, got {vec.shape}")
        blocks, pos = [], 0
        for d in self.dims:
            blocks.append(vec[pos:pos + d * d].reshape(d, d))
            pos += d * d
        return OperatorElement(self, blocks)

    def diag(self, values):
        """Element with the given diagonal across the concatenated blocks."""
        values = np.asarray(values, dtype=complex)
        if values.shape != (self.total_dim,):
            raise ValueError(f"expected {self.total_dim} diagonal values, got {values.shape}")
        return OperatorElement(
            self, [np.diag(values[o:o + d]) for o, d in zip(self.offsets(), self.dims)]
        )

    def to_json(self):
        return {"blocks": [{"dim": b.dim, "weight": b.weight} for b in self.blocks]}

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or set(obj) != {"blocks"}:
            raise ValueError('algebra must be an object with the single key "blocks"')
        blocks = []
        for i, b in enumerate(obj["blocks"]):
            extra = set(b) - {"dim", "weight"}
            if extra or "dim" not in b:
                raise ValueError(f"algebra.blocks[{i}]: expected keys dim, weight; got {sorted(b)}")
            blocks.append((b["dim"], b.get("weight", 1.0)))
        return cls(blocks)


def _as_block(m, d):
    m = np.array(m, dtype=np.complex128)
    if m.shape != (d, d):
        raise ValueError(f"block shape {m.shape} does not match dimension {d}")
    m.setflags(write=False)
    return m


class OperatorElement:
    """An element of an :class:`AlgebraSpec`, stored as a tuple of blocks."""

    __slots__ = ("algebra", "blocks")
    __array_ufunc__ = None

    def __init__(self, algebra, blocks):
        blocks = list(blocks)
        if len(blocks) != len(algebra.blocks):
            raise ValueError(f"expected {len(algebra.blocks)} blocks, got {len(blocks)}")
        self.algebra = algebra
        self.blocks = tuple(_as_block(m, d) for m, d in zip(blocks, algebra.dims))

    def _check(self, other):
        if not isinstance(other, OperatorElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise AlgebraMismatch(f"{self.algebra!r} vs {other.algebra!r}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return OperatorElement(self.algebra, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return OperatorElement(self.algebra, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return OperatorElement(self.algebra, [-a for a in self.blocks])

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return OperatorElement(self.algebra, [c * a for a in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return OperatorElement(self.algebra, [a / c for a in self.blocks])

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return OperatorElement(self.algebra, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __repr__(self):
        return f"OperatorElement({self.algebra!r}, {[b.tolist() for b in self.blocks]!r})"

    @property
    def H(self):
        """Adjoint ``x*``."""
        return OperatorElement(self.algebra, [a.conj().T for a in self.blocks])

    adjoint = H

    def to_dense(self):
        out = np.zeros((self.algebra.total_dim,) * 2, dtype=complex)
        for o, a in zip(self.algebra.offsets(), self.blocks):
            out[o:o + a.shape[0], o:o + a.shape[0]] = a
        return out

    def to_vector(self):
        """Concatenation of the row-major flattened blocks."""
        return np.concatenate([a.ravel() for a in self.blocks])

    def allclose(self, other, atol=1e-10):
        self._check(other)
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def max_abs(self):
        return max(float(np.abs(a).max()) for a in self.blocks)

    def is_self_adjoint(self, rtol=SELF_ADJOINT_RTOL):
        return self_adjoint_defect(self) <= rtol * (1.0 + schatten_norm(self, np.inf))

    def to_json(self):
        return {
            "algebra": self.algebra.to_json(),
            "blocks": [_interleave(a) for a in self.blocks],
        }

    @classmethod
    def from_json(cls, obj, algebra=None):
        if algebra is None:
            algebra = AlgebraSpec.from_json(obj["algebra"])
        return cls(algebra, [_deinterleave(b, d) for b, d in zip(obj["blocks"], algebra.dims)])


def _interleave(a):
    flat = np.asarray(a).ravel()
    out = np.empty(2 * flat.size)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out.tolist()


def _deinterleave(values, d):
    values = np.asarray(values, dtype=float)
    if values.shape != (2 * d * d,):
        raise ValueError(f"expected {2 * d * d} interleaved re/im values, got {values.size}")
    return (values[0::2] + 1j * values[1::2]).reshape(d, d)


class Projection(OperatorElement):
    """A self-adjoint idempotent ``e = e* = e^2``."""

    __slots__ = ()

    def __init__(self, algebra, blocks, validate=True):
        super().__init__(algebra, blocks)
        if validate:
            for a in self.blocks:
                if np.abs(a - a.conj().T).max(initial=0.0) > PROJECTION_TOL:
                    raise ValueError("projection is not self-adjoint")
                if np.abs(a @ a - a).max(initial=0.0) > PROJECTION_TOL:
                    raise ValueError("projection is not idempotent")

    @classmethod
    def of(cls, element):
        return cls(element.algebra, element.blocks)

    def complement(self):
        return Projection(
            self.algebra, [np.eye(a.shape[0]) - a for a in self.blocks], validate=False
        )

    def trace_complement(self):
        """``tau(1 - e)``."""
        return float(trace(self.complement()).real)

    def rank(self):
        return sum(int(round(np.trace(a).real)) for a in self.blocks)


# --- trace, norms, spectral calculus ------------------------------------------------


def trace(x):
    """Weighted trace ``sum_i t_i Tr(x_i)``."""
    return complex(sum(w * np.trace(a) for w, a in zip(x.algebra.weights, x.blocks)))


def _block_singular_values(x):
    return [singular_values(a) for a in x.blocks]


def schatten_norm(x, p):
    """``||x||_p = tau(|x|^p)^(1/p)``; ``p = inf`` gives the operator norm.

    Trace weights enter only for finite ``p``.
    """
    p = float(p)
    if not p >= 1:
        raise ValueError(f"Schatten exponent must satisfy p >= 1, got {p}")
    if np.isinf(p):
        return max(_operator_norm_block(a) for a in x.blocks)
    total = 0.0
    for w, s in zip(x.algebra.weights, _block_singular_values(x)):
        if p == 1:
            total += w * s.sum()
        else:
            total += w * np.sum(s ** p)
    return float(total ** (1.0 / p))


def _operator_norm_block(a):
    if not np.any(a):
        return 0.0
    # largest singular value is well conditioned through a^H a
    w = jacobi_eigh(a.conj().T @ a)[0]
    return float(np.sqrt(max(w[-1], 0.0)))


def operator_norm(x):
    return schatten_norm(x, np.inf)


def self_adjoint_defect(x):
    """``||x - x*||_inf``."""
    best = 0.0
    for a in x.blocks:
        skew = a - a.conj().T
        if np.any(skew):
            w = jacobi_eigh(1j * skew)[0]
            best = max(best, float(np.abs(w).max()))
    return best


@dataclass(frozen=True)
class SpectralDecomposition:
    """Per-block eigenvalues and orthonormal eigenvectors of a self-adjoint element."""

    algebra: AlgebraSpec
    values: tuple
    vectors: tuple

    def eigenvalues(self):
        """All eigenvalues with the trace weight of their block, as two flat arrays."""
        vals = np.concatenate(self.values)
        wts = np.concatenate([np.full(len(v), w) for v, w in zip(self.values, self.algebra.weights)])
        return vals, wts

    def projection(self, lo, hi, slack=INTERVAL_SLACK):
        blocks = []
        for vals, vecs in zip(self.values, self.vectors):
            keep = (vals >= lo - slack) & (vals <= hi + slack)
            u = vecs[:, keep]
            blocks.append(u @ u.conj().T)
        return Projection(self.algebra, blocks, validate=False)

    def apply(self, f):
        """Functional calculus ``f(a)``."""
        return OperatorElement(
            self.algebra,
            [(vecs * f(vals)) @ vecs.conj().T for vals, vecs in zip(self.values, self.vectors)],
        )


def _hermitian_part(a, check=True):
    if check:
        defect = self_adjoint_defect(a)
        if defect > 0.0:
            h = OperatorElement(a.algebra, [0.5 * (m + m.conj().T) for m in a.blocks])
            if defect > SELF_ADJOINT_RTOL * (1.0 + operator_norm(h)):
                raise ValueError(
                    f"element is not self-adjoint (||x - x*|| = {defect:.3e})"
                )
            return h
        return a
    return OperatorElement(a.algebra, [0.5 * (m + m.conj().T) for m in a.blocks])


def spectral_decomposition(a, check=True):
    """Eigendecomposition of a self-adjoint element, block by block.

    Inputs within the self-adjointness tolerance are symmetrized first;
    others raise ``ValueError``.
    """
    h = _hermitian_part(a, check=check)
    values, vectors = [], []
    for m in h.blocks:
        w, v = jacobi_eigh(m)
        values.append(w)
        vectors.append(v)
    return SpectralDecomposition(a.algebra, tuple(values), tuple(vectors))


def spectral_projection(a, interval):
    """Spectral projection of self-adjoint ``a`` for the closed window ``[lo, hi]``.

    Eigenvalues within ``1e-9`` of the window edges count as inside.
    """
    lo, hi = interval
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return spectral_decomposition(a).projection(lo, hi)


def _abs_decomposition(x):
    xx = OperatorElement(x.algebra, [m.conj().T @ m for m in x.blocks])
    dec = spectral_decomposition(xx, check=False)
    return SpectralDecomposition(
        x.algebra, tuple(np.sqrt(np.clip(w, 0.0, None)) for w in dec.values), dec.vectors
    )


def absolute_value(x):
    """``|x| = (x* x)^(1/2)``."""
    return _abs_decomposition(x).apply(lambda w: w)


def measure_ball_membership(x, eps, delta):
    """Look for ``e`` with ``||x e||_inf <= eps`` and ``tau(1 - e) <= delta``.

    Uses the spectral projection of ``|x|`` on ``[0, eps]``. Returns the
    projection, or ``None`` when that construction exceeds the ``delta``
    budget (which does not prove ``x`` lies outside ``V(eps, delta)``).
    """
    if not (eps > 0 and delta > 0):
        raise ValueError(f"eps and delta must be positive, got {eps}, {delta}")
    e = _abs_decomposition(x).projection(0.0, eps)
    if e.trace_complement() > delta:
        return None
    return e


# --- random elements ---------------------------------------------------------------


def ginibre(algebra, rng):
    """Block-diagonal matrix with i.i.d. standard complex Gaussian entries."""
    return OperatorElement(
        algebra,
        [(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2) for d in algebra.dims],
    )


def random_positive(algebra, rng):
    g = ginibre(algebra, rng)
    return g.H @ g


def random_self_adjoint(algebra, rng):
    g = ginibre(algebra, rng)
    return (g + g.H) * 0.5


def haar_unitary_matrix(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_unitary(algebra, rng):
    return OperatorElement(algebra, [haar_unitary_matrix(d, rng) for d in algebra.dims])
