"""Positive Dunford-Schwartz maps on a finite-dimensional tracial algebra.

Every constructible recipe is unital, trace preserving and positive, which
is enough for it to contract both the trace norm and the operator norm.
Arbitrary linear maps are available only through :class:`LinearMapHook`,
which exists so that the verifier has something to reject.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AlgebraMismatch,
    AlgebraSpec,
    OperatorElement,
    _deinterleave,
    ginibre,
    haar_unitary,
    jacobi_eigh,
    random_positive,
    schatten_norm,
)

UNITARY_TOL = 1e-10
PROBABILITY_TOL = 1e-12
FIXED_SPACE_TOL = 1e-8


class DSOperator:
    """Base class for the composable recipes."""

    algebra: AlgebraSpec

    def _apply(self, x):
        raise NotImplementedError

    def apply(self, x):
        if x.algebra != self.algebra:
            raise AlgebraMismatch(f"operator acts on {self.algebra!r}, got element of {x.algebra!r}")
        return self._apply(x)

    __call__ = apply

    def superoperator(self):
        """Matrix of the map on the vectorized algebra (see ``OperatorElement.to_vector``)."""
        n = self.algebra.vector_dim
        cols = np.empty((n, n), dtype=complex)
        basis = np.zeros(n, dtype=complex)
        for i in range(n):
            basis[i] = 1.0
            cols[:, i] = self._apply(self.algebra.from_vector(basis)).to_vector()
            basis[i] = 0.0
        return cols

    def then(self, other):
        """``other`` applied after ``self``."""
        return Composition([self, other])

    def to_json(self):
        raise TypeError(f"{type(self).__name__} is not serializable")


def _check_unitary(u, what="unitary"):
    for a in u.blocks:
        err = np.abs(a.conj().T @ a - np.eye(a.shape[0])).max()
        if err > UNITARY_TOL:
            raise ValueError(f"{what} is not unitary (||u*u - 1|| = {err:.2e})")


class UnitaryConjugation(DSOperator):
    """``x -> u x u*``."""

    def __init__(self, u):
        _check_unitary(u)
        self.algebra = u.algebra
        self.u = u

    def _apply(self, x):
        return OperatorElement(
            self.algebra, [u @ a @ u.conj().T for u, a in zip(self.u.blocks, x.blocks)]
        )

    def to_json(self):
        return {"kind": "unitary_conjugation", "u": _blocks_json(self.u)}


class MixedUnitary(DSOperator):
    """``x -> sum_i p_i u_i x u_i*`` with a probability vector ``p``."""

    def __init__(self, terms):
        terms = [(float(p), u) for p, u in terms]
        if not terms:
            raise ValueError("mixed unitary needs at least one term")
        probs = np.array([p for p, _ in terms])
        if np.any(probs <= 0):
            raise ValueError("mixture probabilities must be positive")
        if abs(probs.sum() - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"mixture probabilities sum to {probs.sum()!r}, not 1")
        self.algebra = terms[0][1].algebra
        for i, (_, u) in enumerate(terms):
            if u.algebra != self.algebra:
                raise AlgebraMismatch("all unitaries must live in the same algebra")
            _check_unitary(u, f"term {i}")
        self.terms = terms
        # stacked per block: (m, d, d)
        self._stack = [np.stack([u.blocks[b] for _, u in terms]) for b in range(len(self.algebra.blocks))]
        self._probs = probs

    @classmethod
    def random(cls, algebra, n_terms, rng, probs=None):
        """Haar unitaries with Dirichlet(1, ..., 1) weights unless ``probs`` given."""
        if probs is None:
            probs = rng.dirichlet(np.ones(n_terms))
            probs = probs / probs.sum()
        return cls([(p, haar_unitary(algebra, rng)) for p in probs])

    def _apply(self, x):
        out = []
        for us, a in zip(self._stack, x.blocks):
            conj = us @ a @ us.conj().transpose(0, 2, 1)
            out.append(np.tensordot(self._probs, conj, axes=1))
        return OperatorElement(self.algebra, out)

    def to_json(self):
        return {
            "kind": "mixed_unitary",
            "terms": [{"p": p, "u": _blocks_json(u)} for p, u in self.terms],
        }


def identity_operator(algebra):
    return MixedUnitary([(1.0, algebra.identity())])


class PermutationConjugation(DSOperator):
    """``x -> P x P^T`` for a permutation of the concatenated basis.

    The permutation must carry each block's index range onto the index
    range of a block with the same dimension and trace weight, so that the
    map is a trace-preserving *-automorphism of the algebra.
    """

    def __init__(self, algebra, perm):
        perm = np.asarray(perm, dtype=int)
        n = algebra.total_dim
        if perm.shape != (n,) or sorted(perm.tolist()) != list(range(n)):
            raise ValueError(f"expected a permutation of range({n})")
        offsets = algebra.offsets()
        starts = {o: i for i, o in enumerate(offsets)}
        self.block_map = []
        for i, (o, b) in enumerate(zip(offsets, algebra.blocks)):
            image = perm[o:o + b.dim]
            lo = int(image.min())
            j = starts.get(lo)
            if j is None or algebra.blocks[j] != b or set(image.tolist()) != set(range(lo, lo + b.dim)):
                raise ValueError(f"permutation does not map block {i} onto a matching block")
            self.block_map.append((j, image - lo))
        self.algebra = algebra
        self.perm = perm

    def _apply(self, x):
        out = [None] * len(x.blocks)
        for i, (j, local) in enumerate(self.block_map):
            d = len(local)
            p = np.zeros((d, d))
            p[local, np.arange(d)] = 1.0
            out[j] = p @ x.blocks[i] @ p.T
        return OperatorElement(self.algebra, out)

    def to_json(self):
        return {"kind": "permutation", "perm": self.perm.tolist()}


class BlockConditionalExpectation(DSOperator):
    """Pinching onto diagonal sub-blocks: entries outside them are zeroed.

    ``partition[i]`` lists sub-block sizes summing to the dimension of block
    ``i``; all ones gives the conditional expectation onto the diagonal.
    """

    def __init__(self, algebra, partition=None):
        if partition is None:
            partition = [[1] * d for d in algebra.dims]
        partition = [list(map(int, p)) for p in partition]
        if len(partition) != len(algebra.blocks):
            raise ValueError("need one partition per block")
        masks = []
        for i, (sizes, d) in enumerate(zip(partition, algebra.dims)):
            if any(s < 1 for s in sizes) or sum(sizes) != d:
                raise ValueError(f"partition {sizes} of block {i} does not sum to {d}")
            labels = np.repeat(np.arange(len(sizes)), sizes)
            masks.append(labels[:, None] == labels[None, :])
        self.algebra = algebra
        self.partition = partition
        self._masks = masks

    def _apply(self, x):
        return OperatorElement(self.algebra, [a * m for a, m in zip(x.blocks, self._masks)])

    def to_json(self):
        return {"kind": "conditional_expectation", "partition": self.partition}


class Composition(DSOperator):
    """Apply ``ops[0]`` first, then ``ops[1]``, and so on."""

    def __init__(self, ops):
        ops = list(ops)
        if not ops:
            raise ValueError("composition of zero operators")
        self.algebra = ops[0].algebra
        if any(op.algebra != self.algebra for op in ops):
            raise AlgebraMismatch("composed operators act on different algebras")
        self.ops = ops

    def _apply(self, x):
        for op in self.ops:
            x = op._apply(x)
        return x

    def to_json(self):
        return {"kind": "composition", "ops": [op.to_json() for op in self.ops]}


class LinearMapHook(DSOperator):
    """Wrap an arbitrary linear map. For negative tests of the verifier only."""

    def __init__(self, algebra, fn, name="hook"):
        self.algebra = algebra
        self.fn = fn
        self.name = name

    def _apply(self, x):
        return self.fn(x)


def scaling_hook(algebra, factor=2.0):
    return LinearMapHook(algebra, lambda x: x * factor, name=f"scaling({factor:g})")


# --- serialization -----------------------------------------------------------------


def _blocks_json(u):
    return u.to_json()["blocks"]


def operator_from_json(obj, algebra, allow_hooks=False):
    """Build a recipe from its tagged-union JSON form."""

    def element(blocks):
        return OperatorElement(algebra, [_deinterleave(b, d) for b, d in zip(blocks, algebra.dims)])

    kind = obj.get("kind")
    keys = set(obj) - {"kind"}

    def expect(*allowed):
        extra = keys - set(allowed)
        if extra:
            raise ValueError(f"operator kind {kind!r}: unknown fields {sorted(extra)}")

    if kind == "identity":
        expect()
        return identity_operator(algebra)
    if kind == "unitary_conjugation":
        expect("u")
        return UnitaryConjugation(element(obj["u"]))
    if kind == "mixed_unitary":
        expect("terms")
        return MixedUnitary([(t["p"], element(t["u"])) for t in obj["terms"]])
    if kind == "permutation":
        expect("perm")
        return PermutationConjugation(algebra, obj["perm"])
    if kind == "conditional_expectation":
        expect("partition")
        return BlockConditionalExpectation(algebra, obj.get("partition"))
    if kind == "composition":
        expect("ops")
        return Composition([operator_from_json(o, algebra, allow_hooks) for o in obj["ops"]])
    if kind == "scaling_hook":
        if not allow_hooks:
            raise ValueError("scaling_hook is a test hook and cannot be used here")
        expect("factor")
        return scaling_hook(algebra, obj.get("factor", 2.0))
    raise ValueError(f"unknown operator kind {kind!r}")


# --- verification ------------------------------------------------------------------


@dataclass
class DSReport:
    samples: int
    tol: float
    max_ratio_1: float
    max_ratio_inf: float
    min_eigenvalue: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(
            self.max_ratio_1 <= 1 + self.tol
            and self.max_ratio_inf <= 1 + self.tol
            and self.min_eigenvalue >= -self.tol
        )

    def to_json(self):
        return {
            "samples": self.samples,
            "tol": self.tol,
            "max_ratio_1": self.max_ratio_1,
            "max_ratio_inf": self.max_ratio_inf,
            "min_eigenvalue": self.min_eigenvalue,
            "passed": self.passed,
        }


def verify_ds_plus(op, sample_count=100, tol=1e-10, seed=0):
    """Empirical check of the trace-norm and operator-norm contractions and of positivity.

    Draws Ginibre samples ``x`` and positives ``g* g``. A failing report is a
    normal return value.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    rng = np.random.default_rng(seed)
    alg = op.algebra
    r1 = rinf = 0.0
    min_eig = np.inf
    for _ in range(sample_count):
        x = ginibre(alg, rng)
        tx = op.apply(x)
        r1 = max(r1, schatten_norm(tx, 1) / schatten_norm(x, 1))
        rinf = max(rinf, schatten_norm(tx, np.inf) / schatten_norm(x, np.inf))
        ta = op.apply(random_positive(alg, rng))
        for m in ta.blocks:
            min_eig = min(min_eig, jacobi_eigh(m)[0][0])
    return DSReport(sample_count, tol, float(r1), float(rinf), float(min_eig))


class FixedSpaceProjector:
    """Projection ``E`` onto the fixed points of ``T`` along the range of ``I - T``.

    ``E = R (L^H R)^{-1} L^H`` where the columns of ``R`` and ``L`` span the
    right and left null spaces of ``S - I`` for the superoperator ``S``.
    For a power-bounded ``T`` the eigenvalue 1 is semisimple and ``E`` is
    the limit of the Cesaro means ``M_n(T)``.
    """

    def __init__(self, op, tol=FIXED_SPACE_TOL):
        self.algebra = op.algebra
        s = op.superoperator()
        n = s.shape[0]
        a = s - np.eye(n)
        u, sv, vh = np.linalg.svd(a)
        scale = max(1.0, sv[0]) if n else 1.0
        null = sv <= tol * scale
        right = vh[null].conj().T
        left = u[:, null]
        eig = np.linalg.eigvals(s)
        mult = int(np.sum(np.abs(eig - 1.0) <= tol))
        if right.shape[1] != mult:
            raise np.linalg.LinAlgError(
                f"eigenvalue 1 has algebraic multiplicity {mult} but the fixed space "
                f"has dimension {right.shape[1]}"
            )
        if right.shape[1] == 0:
            self.matrix = np.zeros((n, n), dtype=complex)
        elif right.shape[1] == n:
            # every element is fixed, so E is exactly the identity
            self.matrix = np.eye(n, dtype=complex)
        else:
            self.matrix = right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
        self.rank = right.shape[1]
        self.superoperator = s

    def apply(self, x):
        if x.algebra != self.algebra:
            raise AlgebraMismatch("projector and element live in different algebras")
        return self.algebra.from_vector(self.matrix @ x.to_vector())

    __call__ = apply


def fixed_space_projector(op, tol=FIXED_SPACE_TOL):
    return FixedSpaceProjector(op, tol)
