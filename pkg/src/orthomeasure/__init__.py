"""Orthogonal vector measures for measures on projections of type-I_2 algebras.

Given a completely additive measure m on the projections of M (x) M_2 over a
finite atomic measure space, build a Hilbert-space valued orthogonal vector
measure mu with ||mu(p)||^2 = m(p), and check it against independent oracles.
"""
from .algebra import (
    CanonicalProjection,
    add_orthogonal,
    complement,
    diagonal,
    identity,
    is_orthogonal,
    make_projection,
    off_diagonal,
    realize,
    zero,
)
from .base_space import (
    AtomicMeasureSpace,
    BaseProjection,
    ScalarField,
    UnimodularField,
    integrate,
    meet,
    minus,
    range_projection,
    sym_diff,
)
from .constructor import (
    Direction,
    DirectionRegistry,
    HVector,
    VectorMeasure,
    build_base,
    build_vector_measure,
    coincidence,
    evaluate,
    extend_direction,
    solve_lemma4,
    subalgebra_projection,
)
from .measure import (
    FrameFunctionMeasure,
    ProjectionMeasure,
    StateMeasure,
    TabulatedMeasure,
    abs_nz,
    base_densities,
    densities_for_direction,
    eval_measure,
    validate,
)

__version__ = "0.1.0"
