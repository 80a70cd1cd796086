import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncerg.algebra import (
    AlgebraMismatch,
    AlgebraSpec,
    OperatorElement,
    Projection,
    absolute_value,
    ginibre,
    haar_unitary,
    measure_ball_membership,
    random_positive,
    random_self_adjoint,
    schatten_norm,
    self_adjoint_defect,
    spectral_decomposition,
    spectral_projection,
    trace,
)

block_lists = st.lists(
    st.tuples(st.integers(1, 4), st.floats(0.25, 4.0)), min_size=1, max_size=3
)


def _dense_schatten(x, p):
    """Oracle: numpy SVD per block, weights applied for finite p."""
    if p == np.inf:
        return max(np.linalg.svd(a, compute_uv=False).max() for a in x.blocks)
    total = sum(w * np.sum(np.linalg.svd(a, compute_uv=False) ** p) for w, a in zip(x.algebra.weights, x.blocks))
    return total ** (1 / p)


def test_trace_examples(m2):
    assert trace(m2.identity()) == 2
    assert trace(m2.diag([1, -1])) == 0
    alg = AlgebraSpec([(2, 1.0), (2, 0.5)])
    assert trace(alg.identity()) == 3
    assert alg.trace_of_identity == 3


def test_algebra_validation():
    with pytest.raises(ValueError):
        AlgebraSpec([])
    with pytest.raises(ValueError):
        AlgebraSpec([(0, 1.0)])
    with pytest.raises(ValueError):
        AlgebraSpec([(2, -1.0)])
    with pytest.raises(ValueError):
        AlgebraSpec.from_json({"blocks": [{"dim": 2, "weight": 1.0, "color": "red"}]})
    alg = AlgebraSpec.diagonal([1.0, 2.0])
    assert alg.dims == (1, 1) and alg.total_dim == 2


def test_schatten_examples(m2):
    x = m2.diag([3, -4])
    assert schatten_norm(x, 1) == pytest.approx(7)
    assert schatten_norm(x, np.inf) == pytest.approx(4)
    nil = m2.element([np.array([[0, 1], [0, 0]])])
    assert schatten_norm(nil, 2) == pytest.approx(1)
    with pytest.raises(ValueError):
        schatten_norm(x, 0.5)


def test_weights_enter_only_finite_p():
    alg = AlgebraSpec([(1, 3.0), (1, 0.5)])
    x = alg.diag([2.0, 1.0])
    assert schatten_norm(x, 1) == pytest.approx(3 * 2 + 0.5 * 1)
    assert schatten_norm(x, np.inf) == pytest.approx(2.0)


@given(block_lists, st.sampled_from([1, 2, 3.5, np.inf]), st.integers(0, 2**32 - 1))
def test_schatten_matches_svd_oracle(blocks, p, seed):
    alg = AlgebraSpec(blocks)
    x = ginibre(alg, np.random.default_rng(seed))
    assert schatten_norm(x, p) == pytest.approx(_dense_schatten(x, p), rel=1e-10)


@given(block_lists, st.integers(0, 2**32 - 1))
def test_trace_properties(blocks, seed):
    alg = AlgebraSpec(blocks)
    rng = np.random.default_rng(seed)
    x, y = ginibre(alg, rng), ginibre(alg, rng)
    assert trace(x.H @ x).real >= -1e-12
    assert abs(trace(x.H @ x).imag) <= 1e-10
    assert trace(x @ y) == pytest.approx(trace(y @ x), rel=1e-10, abs=1e-10)
    assert trace(x * 2 + y) == pytest.approx(2 * trace(x) + trace(y))


@given(block_lists, st.sampled_from([1, 2, 4]), st.integers(0, 2**32 - 1))
def test_holder_consistency(blocks, p, seed):
    alg = AlgebraSpec(blocks)
    x = ginibre(alg, np.random.default_rng(seed))
    bound = alg.trace_of_identity ** (1 - 1 / p) * schatten_norm(x, p)
    assert schatten_norm(x, 1) <= bound * (1 + 1e-12)


@given(block_lists, st.integers(0, 2**32 - 1))
def test_norm_axioms(blocks, seed):
    alg = AlgebraSpec(blocks)
    rng = np.random.default_rng(seed)
    x, y = ginibre(alg, rng), ginibre(alg, rng)
    for p in (1, 2, np.inf):
        assert schatten_norm(x + y, p) <= schatten_norm(x, p) + schatten_norm(y, p) + 1e-10
        assert schatten_norm(x * (-2.5j), p) == pytest.approx(2.5 * schatten_norm(x, p))
    assert schatten_norm(alg.zero(), 2) == 0


def test_absolute_value_examples(m2, rng):
    assert absolute_value(m2.diag([-2, 5])).allclose(m2.diag([2, 5]))
    assert absolute_value(m2.zero()).allclose(m2.zero())
    u = haar_unitary(AlgebraSpec([(3, 1.0), (2, 2.0)]), rng)
    assert absolute_value(u).allclose(u.algebra.identity())


@given(block_lists, st.integers(0, 2**32 - 1))
def test_absolute_value_squares_to_gram(blocks, seed):
    alg = AlgebraSpec(blocks)
    rng = np.random.default_rng(seed)
    x = ginibre(alg, rng)
    a = absolute_value(x)
    assert (a @ a).allclose(x.H @ x, atol=1e-10 * (1 + x.max_abs() ** 2))
    assert min(spectral_decomposition(a).eigenvalues()[0]) >= -1e-10
    pos = random_positive(alg, rng)
    assert absolute_value(pos).allclose(pos, atol=1e-10 * (1 + pos.max_abs()))


def test_spectral_projection_examples(m2):
    a = m2.diag([1, 3])
    assert spectral_projection(a, (0, 2)).allclose(m2.diag([1, 0]))
    assert spectral_projection(a, (-10, 10)).allclose(m2.identity())
    assert spectral_projection(a, (5, 6)).allclose(m2.zero())
    with pytest.raises(ValueError):
        spectral_projection(m2.element([np.array([[0, 1], [0, 0]])]), (0, 1))


def test_near_self_adjoint_input_is_symmetrized(m2):
    a = m2.element([np.array([[1.0, 1e-12], [0.0, 2.0]])])
    e = spectral_projection(a, (0.5, 1.5))
    assert e.allclose(m2.diag([1, 0]), atol=1e-10)


@given(block_lists, st.integers(0, 2**32 - 1))
def test_spectral_projection_properties(blocks, seed):
    alg = AlgebraSpec(blocks)
    a = random_self_adjoint(alg, np.random.default_rng(seed))
    dec = spectral_decomposition(a)
    vals = np.sort(dec.eigenvalues()[0])
    cut = 0.5 * (vals[0] + vals[-1])
    lo_e = spectral_projection(a, (vals[0] - 1, cut))
    hi_e = spectral_projection(a, (np.nextafter(cut, np.inf) + 2e-9, vals[-1] + 1))
    if not np.any(np.abs(vals - cut) < 1e-8):
        assert (lo_e + hi_e).allclose(alg.identity(), atol=1e-10)
    assert (lo_e @ a).allclose(a @ lo_e, atol=1e-9 * (1 + a.max_abs()))
    assert spectral_projection(a, (vals[0] - 1, vals[-1] + 1)).allclose(alg.identity(), atol=1e-10)
    recon = dec.apply(lambda w: w)
    assert recon.allclose(a, atol=1e-9 * (1 + a.max_abs()))


def test_measure_ball_membership(m2):
    assert measure_ball_membership(m2.zero(), 0.1, 0.1).allclose(m2.identity())
    x = m2.diag([5, 0.1])
    assert measure_ball_membership(x, 6, 0.01).allclose(m2.identity())
    e = measure_ball_membership(x, 0.2, 1.0)
    assert e.allclose(m2.diag([0, 1]))
    assert e.trace_complement() == pytest.approx(1.0)
    assert measure_ball_membership(x, 0.2, 0.5) is None
    with pytest.raises(ValueError):
        measure_ball_membership(x, 0, 1)


@given(block_lists, st.floats(0.1, 3.0), st.integers(0, 2**32 - 1))
def test_measure_ball_witness_is_sound(blocks, eps, seed):
    alg = AlgebraSpec(blocks)
    x = ginibre(alg, np.random.default_rng(seed))
    e = measure_ball_membership(x, eps, alg.trace_of_identity)
    assert e is not None
    assert schatten_norm(x @ e, np.inf) <= eps + 1e-9


def test_element_arithmetic_and_mismatch(mixed_alg, rng):
    x = ginibre(mixed_alg, rng)
    y = ginibre(mixed_alg, rng)
    assert (x + y - y).allclose(x)
    assert (x.H.H).allclose(x)
    assert ((x @ y).H).allclose(y.H @ x.H)
    dense = x.to_dense()
    assert mixed_alg.from_dense(dense).allclose(x)
    assert mixed_alg.from_vector(x.to_vector()).allclose(x)
    other = AlgebraSpec.matrix(6)
    with pytest.raises(AlgebraMismatch):
        x + other.identity()
    with pytest.raises(ValueError):
        OperatorElement(mixed_alg, [np.eye(2)])


def test_json_roundtrip(mixed_alg, rng):
    x = ginibre(mixed_alg, rng)
    text = json.dumps(x.to_json())
    back = OperatorElement.from_json(json.loads(text))
    assert back.algebra == mixed_alg
    assert np.array_equal(back.to_vector(), x.to_vector())
    assert AlgebraSpec.from_json(mixed_alg.to_json()) == mixed_alg
    # row-major interleaved re/im
    m = AlgebraSpec.matrix(2).element([np.array([[1 + 2j, 3], [4, 5 - 1j]])])
    assert m.to_json()["blocks"][0] == [1, 2, 3, 0, 4, 0, 5, -1]


def test_projection_validation(m2):
    with pytest.raises(ValueError):
        Projection(m2, [np.array([[2.0, 0], [0, 0]])])
    e = Projection(m2, [np.diag([1.0, 0.0])])
    assert e.rank() == 1 and e.complement().rank() == 1
    assert self_adjoint_defect(m2.element([np.array([[0, 1], [0, 0]])])) == pytest.approx(1.0)
