import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orthomeasure.base_space import (
    AtomicMeasureSpace,
    ScalarField,
    UnimodularField,
    integrate,
    meet,
    minus,
    range_projection,
    sym_diff,
)
from orthomeasure.errors import DomainError, StructuralError

S3 = AtomicMeasureSpace([("1", 1.0), ("2", 1.0), ("3", 1.0)])


def P(*ids):
    return S3.projection(ids)


def test_meet_examples():
    assert meet(P("1", "2"), P("2", "3")) == P("2")
    assert meet(P("1", "3"), S3.full()) == P("1", "3")
    assert meet(P("1", "3"), S3.empty()) == S3.empty()


def test_minus_examples():
    assert minus(P("1", "2"), P("2", "3")) == P("1")
    assert minus(P("1", "2"), P("1", "2")) == S3.empty()
    assert minus(P("1", "2"), S3.empty()) == P("1", "2")


def test_sym_diff_examples():
    assert sym_diff(P("1", "2"), P("2", "3")) == P("1", "3")
    assert sym_diff(P("2"), P("2")) == S3.empty()
    assert sym_diff(P("2", "3"), S3.empty()) == P("2", "3")


def test_mismatched_space_is_structural_error():
    other = AtomicMeasureSpace([("1", 1.0), ("2", 1.0), ("3", 2.0)])
    for op in (meet, minus, sym_diff):
        with pytest.raises(StructuralError):
            op(P("1"), other.projection(["1"]))


def test_range_projection_examples():
    sp = AtomicMeasureSpace([("a", 1.0), ("b", 1.0), ("c", 1.0)])
    assert range_projection(sp.scalar([0.5, 0.0, 1.0])).members == ("a", "c")
    assert range_projection(sp.constant(0.0)).is_empty()
    two = AtomicMeasureSpace([("p", 1.0), ("q", 1.0)])
    x = two.scalar([0.3, 1.0])
    assert range_projection(x * (1.0 - x)).members == ("p",)


def test_range_projection_rejects_negative():
    with pytest.raises(DomainError):
        range_projection(S3.scalar([0.1, -1e-300, 0.0]))


def test_integrate_examples():
    sp = AtomicMeasureSpace([("a", 2.0), ("b", 3.0)])
    assert integrate(sp.constant(1.0), sp.full()) == 5.0
    assert integrate(sp.scalar([7.0, -2.0]), sp.empty()) == 0.0
    one = AtomicMeasureSpace([("a", 2.0)])
    assert integrate(one.scalar([4.0]), one.full()) == 8.0


def test_space_invariants():
    with pytest.raises(DomainError):
        AtomicMeasureSpace([("a", 0.0)])
    with pytest.raises(DomainError):
        AtomicMeasureSpace([("a", math.inf)])
    with pytest.raises(StructuralError):
        AtomicMeasureSpace([("a", 1.0), ("a", 2.0)])
    sp = AtomicMeasureSpace([("z", 1.0), ("a", 2.0)])
    assert sp.ids == ("z", "a")


def test_field_invariants():
    with pytest.raises(DomainError):
        ScalarField(S3, [0.0, math.nan, 1.0])
    with pytest.raises(DomainError):
        UnimodularField(S3, [1.0, 1j, 1.0 + 1e-10])
    UnimodularField(S3, [1.0, 1j, np.exp(0.3j)])
    f = S3.scalar([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        f.values[0] = 5.0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_boolean_laws_exhaustive(n):
    sp = AtomicMeasureSpace.from_weights([1.0] * n)
    subsets = [sp.projection(c) for r in range(n + 1) for c in itertools.combinations(sp.ids, r)]
    for a, b in itertools.product(subsets, repeat=2):
        assert meet(a, b) == meet(b, a)
        m, d = meet(a, b), minus(a, b)
        assert meet(m, d).is_empty()
        assert (m | d) == a
        assert sym_diff(a, b) == (minus(a, b) | minus(b, a))
    for a, b, c in itertools.product(subsets, repeat=3):
        assert sym_diff(sym_diff(a, b), c) == sym_diff(a, sym_diff(b, c))


@given(
    st.lists(st.floats(0.01, 100.0), min_size=1, max_size=6).flatmap(
        lambda w: st.tuples(
            st.just(w),
            st.lists(st.floats(-1e3, 1e3), min_size=len(w), max_size=len(w)),
            st.lists(st.integers(0, 2), min_size=len(w), max_size=len(w)),
        )
    )
)
def test_integrate_additive_over_disjoint(args):
    weights, values, labels = args
    sp = AtomicMeasureSpace.from_weights(weights)
    f = sp.scalar(values)
    pi = sp.projection(a for a, l in zip(sp.ids, labels) if l == 1)
    rho = sp.projection(a for a, l in zip(sp.ids, labels) if l == 2)
    whole = integrate(f, pi | rho)
    scale = sum(abs(v) * w for v, w in zip(values, weights)) or 1.0
    assert abs(integrate(f, pi) + integrate(f, rho) - whole) <= 4e-16 * scale


@given(st.lists(st.sampled_from([0.0, 0.0, 1e-300, 0.5, 3.0]), min_size=1, max_size=6))
def test_range_projection_is_minimal_support(values):
    sp = AtomicMeasureSpace.from_weights([1.0] * len(values))
    x = sp.scalar(values)
    rp = range_projection(x)
    assert x * rp == x
    for i, val in enumerate(values):
        assert (val != 0.0) == bool(rp.mask[i])
