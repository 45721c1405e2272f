import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from orthomeasure.algebra import (
    BlockKind,
    add_orthogonal,
    bloch_vector,
    complement,
    diagonal,
    identity,
    is_orthogonal,
    make_projection,
    off_diagonal,
    realize,
    zero,
)
from orthomeasure.base_space import AtomicMeasureSpace, BaseProjection, ScalarField, UnimodularField
from orthomeasure.errors import DomainError, PreconditionError, StructuralError

S1 = AtomicMeasureSpace([("w", 1.0)])
S2 = AtomicMeasureSpace([("a", 1.0), ("b", 1.0)])
I2 = np.eye(2)


def rank_one(space, x, v, ids):
    n = space.n
    return off_diagonal(space.constant(x), space.unimodular(np.full(n, v)), space.projection(ids))


def test_realize_examples():
    e11 = diagonal(S1.full(), S1.empty())
    np.testing.assert_array_equal(realize(e11)[0], [[1, 0], [0, 0]])
    np.testing.assert_array_equal(realize(zero(S1))[0], np.zeros((2, 2)))
    np.testing.assert_array_equal(realize(identity(S1))[0], I2)
    half = realize(rank_one(S1, 0.5, 1.0, ["w"]))[0]
    np.testing.assert_allclose(half, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)
    imag = realize(rank_one(S1, 0.5, 1j, ["w"]))[0]
    np.testing.assert_allclose(imag, [[0.5, 0.5j], [-0.5j, 0.5]], atol=1e-15)


def test_degenerate_off_diagonal_rejected():
    for x in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError, match="degenerate"):
            rank_one(S1, x, 1.0, ["w"])


def test_overlapping_parts_rejected():
    with pytest.raises(StructuralError):
        make_projection(S1.full(), S1.empty(), S1.full(), S1.constant(0.5), UnimodularField.ones(S1))


def test_normalization_off_support():
    p = off_diagonal(S2.scalar([0.3, 0.9]), S2.unimodular([1j, -1.0]), S2.projection(["a"]))
    assert p.x.values.tolist() == [0.3, 0.0]
    assert p.v.values.tolist() == [1j, 1.0]
    assert p == off_diagonal(S2.scalar([0.3, 0.2]), S2.unimodular([1j, 1j]), S2.projection(["a"]))


def test_complement_examples():
    assert complement(zero(S2)) == identity(S2)
    assert complement(identity(S2)) == zero(S2)
    e11 = diagonal(S1.full(), S1.empty())
    assert complement(e11) == diagonal(S1.empty(), S1.full())
    c = complement(rank_one(S1, 0.25, 1j, ["w"]))
    assert c.block(0) == (BlockKind.RANK_ONE, 0.75, -1j)


def test_orthogonality_examples():
    e11 = diagonal(S1.full(), S1.empty())
    e22 = diagonal(S1.empty(), S1.full())
    assert is_orthogonal(e11, e22)
    assert not is_orthogonal(e11, e11)
    p = rank_one(S1, 0.3, cmath.exp(0.4j), ["w"])
    q = rank_one(S1, 0.7, -cmath.exp(0.4j), ["w"])
    assert is_orthogonal(p, q)
    assert not is_orthogonal(p, rank_one(S1, 0.7, cmath.exp(0.4j), ["w"]))
    assert not is_orthogonal(p, e11)
    # a rank-one block is not orthogonal to any diagonal unit on its atom
    assert not is_orthogonal(p, e22)


def test_add_examples():
    e11 = diagonal(S1.full(), S1.empty())
    e22 = diagonal(S1.empty(), S1.full())
    assert add_orthogonal(e11, e22) == identity(S1)
    p = rank_one(S1, 0.3, 1j, ["w"])
    assert add_orthogonal(p, complement(p)) == identity(S1)
    # disjoint off-diagonal supports are kept piecewise
    pa = rank_one(S2, 0.2, 1j, ["a"])
    pb = rank_one(S2, 0.6, -1.0, ["b"])
    s = add_orthogonal(pa, pb)
    assert s.block(0) == (BlockKind.RANK_ONE, 0.2, 1j)
    assert s.block(1) == (BlockKind.RANK_ONE, 0.6, -1.0)
    with pytest.raises(PreconditionError):
        add_orthogonal(e11, e11)


def test_bloch_vector_examples():
    np.testing.assert_allclose(bloch_vector(0.5, 1.0), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(bloch_vector(0.5, 1j), [0, -1, 0], atol=1e-15)
    np.testing.assert_allclose(bloch_vector(0.3, cmath.exp(1.1j)), -bloch_vector(0.7, -cmath.exp(1.1j)), atol=1e-15)


# property tests against an independent matrix model

x_open = st.floats(0.01, 0.99)
phase = st.floats(0.0, 2 * math.pi).map(lambda t: complex(math.cos(t), math.sin(t)))
block = st.one_of(
    st.sampled_from(["0", "e11", "e22", "I"]).map(lambda k: (k, 0.0, 1.0)),
    st.tuples(st.just("r"), x_open, phase),
)


def build(space, blocks):
    n = space.n
    pi1 = np.array([k in ("e11", "I") for k, _, _ in blocks])
    pi2 = np.array([k in ("e22", "I") for k, _, _ in blocks])
    supp = np.array([k == "r" for k, _, _ in blocks])
    x = np.array([b[1] if b[0] == "r" else 0.0 for b in blocks])
    v = np.array([b[2] if b[0] == "r" else 1.0 for b in blocks])
    return make_projection(
        BaseProjection(space, pi1), BaseProjection(space, pi2), BaseProjection(space, supp),
        ScalarField(space, x), UnimodularField(space, v),
    )


def matrix(b):
    kind, x, v = b
    if kind == "0":
        return np.zeros((2, 2))
    if kind == "e11":
        return np.diag([1.0, 0.0])
    if kind == "e22":
        return np.diag([0.0, 1.0])
    if kind == "I":
        return I2
    s = math.sqrt(x * (1 - x))
    return np.array([[x, v * s], [np.conj(v) * s, 1 - x]])


def space_of(n):
    return AtomicMeasureSpace.from_weights([1.0] * n)


blocks_list = st.lists(block, min_size=1, max_size=4)


@given(blocks_list)
def test_realize_matches_model_and_is_projection(blocks):
    p = build(space_of(len(blocks)), blocks)
    P = realize(p)
    for i, b in enumerate(blocks):
        np.testing.assert_allclose(P[i], matrix(b), atol=1e-15)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, P.conj().transpose(0, 2, 1), atol=0)


@given(blocks_list)
def test_complement_laws(blocks):
    sp = space_of(len(blocks))
    p = build(sp, blocks)
    c = complement(p)
    np.testing.assert_allclose(realize(c), I2 - realize(p), atol=1e-12)
    cc = complement(c)
    assert (cc.pi1, cc.pi2, cc.supp, cc.v) == (p.pi1, p.pi2, p.supp, p.v)
    np.testing.assert_allclose(cc.x.values, p.x.values, atol=2e-16)
    assert is_orthogonal(p, c)
    assert add_orthogonal(p, c) == identity(sp)


@st.composite
def orthogonal_pair(draw):
    blocks = draw(blocks_list)
    partner = []
    for kind, x, v in blocks:
        keep = draw(st.booleans())
        if kind == "0":
            partner.append(draw(block))
        elif kind == "e11":
            partner.append(("e22", 0.0, 1.0) if keep else ("0", 0.0, 1.0))
        elif kind == "e22":
            partner.append(("e11", 0.0, 1.0) if keep else ("0", 0.0, 1.0))
        elif kind == "r" and keep:
            partner.append(("r", 1.0 - x, -v))
        else:
            partner.append(("0", 0.0, 1.0))
    return blocks, partner


@given(orthogonal_pair())
def test_orthogonal_sum_matches_matrices(pair):
    a, b = pair
    sp = space_of(len(a))
    p, q = build(sp, a), build(sp, b)
    assert is_orthogonal(p, q) and is_orthogonal(q, p)
    s = add_orthogonal(p, q)
    np.testing.assert_allclose(realize(s), realize(p) + realize(q), atol=1e-12)
    assert s == add_orthogonal(q, p)


@settings(max_examples=200)
@given(blocks_list.flatmap(lambda a: st.tuples(st.just(a), st.lists(block, min_size=len(a), max_size=len(a)))))
def test_orthogonality_agrees_with_product(pair):
    a, b = pair
    sp = space_of(len(a))
    p, q = build(sp, a), build(sp, b)
    prod = max(np.abs(matrix(x) @ matrix(y)).max() for x, y in zip(a, b))
    assume(not 1e-9 < prod < 1e-6)
    assert is_orthogonal(p, q) == (prod <= 1e-9)


def test_exhaustive_diagonal_orthogonality():
    kinds = ["0", "e11", "e22", "I"]
    for ka in kinds:
        for kb in kinds:
            p = build(S1, [(ka, 0.0, 1.0)])
            q = build(S1, [(kb, 0.0, 1.0)])
            expect = np.abs(matrix((ka, 0, 1)) @ matrix((kb, 0, 1))).max() == 0
            assert is_orthogonal(p, q) == expect
