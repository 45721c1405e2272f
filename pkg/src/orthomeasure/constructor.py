"""Construction of an orthogonal vector measure mu with ||mu(p)||^2 = m(p).

H is realized as L^2(Omega, nu) (+) L^2(Omega, nu): an ``HVector`` is a pair of
real scalar fields with inner product sum_w nu(w) (f1 g1 + f2 g2).

The construction runs over a finite, ordered registry of directions (x, v).
Index 0 stands for the diagonal subalgebra and is handled by the base
densities h0, k0. For each later direction d, per atom, either

* d coincides with an earlier direction e (directly, or as (1-x, -v)), and
  the quadruple stored for e is copied (swapped in the second case), or
* the four-equation splitting system is solved in closed form.

Evaluation then reads mu(p) off the stored quadruples atom by atom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .algebra import CanonicalProjection, add_orthogonal, off_diagonal
from .base_space import AtomicMeasureSpace, BaseProjection, ScalarField, UnimodularField, integrate
from .errors import (
    DirectionNotRegisteredError,
    DomainError,
    InconsistentDensitiesError,
    PreconditionError,
    StructuralError,
)
from .measure import DensityPair, ProjectionMeasure, base_densities, densities_for_direction

DIAGONAL_INDEX = 0
MATCH_TOL = 1e-9
CONSISTENCY_TOL = 1e-9
DEGENERATE_S = 1e-30


# directions


@dataclass(frozen=True, eq=False)
class Direction:
    """Admissible pair (x, v): 0 < x < 1 and |v| = 1 at every atom."""

    x: ScalarField
    v: UnimodularField
    index: int

    def __post_init__(self):
        if self.x.space != self.v.space:
            raise StructuralError("x and v live on different spaces")
        if self.index < 1:
            raise StructuralError("direction indices start at 1; 0 is the diagonal subalgebra")
        xs = self.x.values
        if np.any(xs <= 0.0) or np.any(xs >= 1.0):
            raise DomainError(f"direction {self.index}: x must lie strictly in (0, 1) at every atom")

    @property
    def space(self) -> AtomicMeasureSpace:
        return self.x.space

    def complement_pair(self) -> tuple[ScalarField, UnimodularField]:
        return 1.0 - self.x, -self.v


class Coincidence(Enum):
    NONE = "none"
    DIRECT = "direct"
    SWAPPED = "swapped"


def _match(x1: float, v1: complex, x2: float, v2: complex, tol: float = MATCH_TOL) -> Coincidence:
    if abs(x1 - x2) <= tol and abs(v1 - v2) <= tol:
        return Coincidence.DIRECT
    if abs(x1 - (1.0 - x2)) <= tol and abs(v1 + v2) <= tol:
        return Coincidence.SWAPPED
    return Coincidence.NONE


def coincidence(d: Direction, e: Direction, atom: int) -> Coincidence:
    """How d relates to an earlier direction e at one atom."""
    return _match(d.x[atom], d.v[atom], e.x[atom], e.v[atom])


class DirectionRegistry:
    """Ordered directions 1..N; index 0 is reserved for the diagonal subalgebra."""

    def __init__(self, space: AtomicMeasureSpace, directions: Sequence[Direction] = ()):
        directions = tuple(directions)
        for pos, d in enumerate(directions, start=1):
            if d.space != space:
                raise StructuralError(f"direction {d.index} lives on a different space")
            if d.index != pos:
                raise StructuralError(f"direction indices must be dense and ascending from 1; got {d.index} at {pos}")
        for j, d in enumerate(directions):
            for e in directions[:j]:
                if all(coincidence(d, e, i) is not Coincidence.NONE for i in range(space.n)):
                    raise StructuralError(
                        f"direction {d.index} spans the same subalgebra as direction {e.index}"
                    )
        self.space = space
        self.directions = directions

    @classmethod
    def from_pairs(cls, space: AtomicMeasureSpace, pairs: Iterable[tuple]) -> DirectionRegistry:
        dirs = []
        for pos, (x, v) in enumerate(pairs, start=1):
            if not isinstance(x, ScalarField):
                x = ScalarField(space, x)
            if not isinstance(v, UnimodularField):
                v = UnimodularField(space, v)
            dirs.append(Direction(x, v, pos))
        return cls(space, dirs)

    def __len__(self) -> int:
        return len(self.directions)

    def __iter__(self) -> Iterator[Direction]:
        return iter(self.directions)

    def __getitem__(self, index: int) -> Direction:
        if not 1 <= index <= len(self.directions):
            raise KeyError(index)
        return self.directions[index - 1]

    @property
    def indices(self) -> tuple[int, ...]:
        return (DIAGONAL_INDEX, *(d.index for d in self.directions))


# circle-intersection splitting


def solve_lemma4(lam0: float, mu0: float, lam: float, mu: float, sign: int = 1) -> tuple[float, float, float, float]:
    """Solve l1 + m1 = lam0, l2 + m2 = mu0, l1^2 + l2^2 = lam^2, m1^2 + m2^2 = mu^2.

    Geometrically (l1, l2) is a point at distance lam from the origin and mu
    from V0 = (lam0, mu0); the right angle at that point gives l1 m1 + l2 m2 = 0.
    ``sign`` picks which of the two mirror solutions is returned.
    Returns (l1, l2, m1, m2).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if min(lam0, mu0, lam, mu) < 0.0:
        raise DomainError("solve_lemma4 takes nonnegative inputs")
    s = lam0 * lam0 + mu0 * mu0
    if abs(s - lam * lam - mu * mu) > CONSISTENCY_TOL * max(1.0, s):
        raise InconsistentDensitiesError(
            f"inconsistent densities: lam0^2 + mu0^2 = {s!r} but lam^2 + mu^2 = {lam * lam + mu * mu!r}"
        )
    if s <= DEGENERATE_S:
        return 0.0, 0.0, 0.0, 0.0
    along = lam * lam / s
    across = sign * lam * mu / s
    l1 = along * lam0 - across * mu0
    l2 = along * mu0 + across * lam0
    return l1, l2, lam0 - l1, mu0 - l2


class AtomSolutionQuadruple(NamedTuple):
    h1: float
    h2: float
    k1: float
    k2: float

    def swapped(self) -> AtomSolutionQuadruple:
        return AtomSolutionQuadruple(self.k1, self.k2, self.h1, self.h2)

    def residuals(self, h0: float, k0: float, hg: float, kg: float) -> tuple[float, ...]:
        """Defects of the five defining identities."""
        return (
            abs(self.h1 + self.k1 - h0),
            abs(self.h2 + self.k2 - k0),
            abs(self.h1**2 + self.h2**2 - hg**2),
            abs(self.k1**2 + self.k2**2 - kg**2),
            abs(self.h1 * self.k1 + self.h2 * self.k2),
        )


# H vectors


@dataclass(frozen=True, eq=False)
class HVector:
    first: ScalarField
    second: ScalarField

    @classmethod
    def zeros(cls, space: AtomicMeasureSpace) -> HVector:
        return cls(space.constant(0.0), space.constant(0.0))

    @property
    def space(self) -> AtomicMeasureSpace:
        return self.first.space

    def inner(self, other: HVector) -> float:
        w = self.space.weights
        return math.fsum(
            float(w[i]) * (self.first[i] * other.first[i] + self.second[i] * other.second[i])
            for i in range(self.space.n)
        )

    def norm2(self) -> float:
        full = self.space.full()
        return integrate(self.first**2, full) + integrate(self.second**2, full)

    def __add__(self, other: HVector) -> HVector:
        return HVector(self.first + other.first, self.second + other.second)

    def __sub__(self, other: HVector) -> HVector:
        return HVector(self.first - other.first, self.second - other.second)

    def max_abs(self) -> float:
        return float(max(np.abs(self.first.values).max(initial=0.0), np.abs(self.second.values).max(initial=0.0)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HVector):
            return NotImplemented
        return self.first == other.first and self.second == other.second

    __hash__ = None


# the vector measure


@dataclass(frozen=True, eq=False)
class VectorMeasure:
    """mu as stored data: base densities plus one quadruple table per extended direction.

    ``solutions[index]`` is an (n, 4) array with rows (h1, h2, k1, k2).
    """

    space: AtomicMeasureSpace
    base: DensityPair
    sign: int = 1
    directions: tuple[Direction, ...] = ()
    solutions: dict[int, np.ndarray] = field(default_factory=dict)

    def quadruple(self, index: int, atom: int) -> AtomSolutionQuadruple:
        return AtomSolutionQuadruple(*(float(t) for t in self.solutions[index][atom]))

    def direction(self, index: int) -> Direction:
        return self.directions[index - 1]

    def with_direction(self, d: Direction, table: np.ndarray) -> VectorMeasure:
        table = np.array(table, dtype=float)
        table.setflags(write=False)
        sols = dict(self.solutions)
        sols[d.index] = table
        return VectorMeasure(self.space, self.base, self.sign, (*self.directions, d), sols)

    def __call__(self, p: CanonicalProjection) -> HVector:
        return evaluate(self, p)


def build_base(m: ProjectionMeasure, sign: int = 1) -> VectorMeasure:
    """mu on diagonal projections: mu(pi1 (+) pi2) = (pi1 h0, pi2 k0)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return VectorMeasure(m.space, base_densities(m), sign)


def extend_direction(state: VectorMeasure, m: ProjectionMeasure, d: Direction) -> VectorMeasure:
    """Extend mu to the subalgebra of direction d.

    Atoms where d coincides with an earlier direction reuse that direction's
    quadruple (earliest match wins); the rest are solved afresh.
    """
    expected = tuple(range(1, d.index))
    if tuple(e.index for e in state.directions) != expected:
        raise PreconditionError(f"directions 1..{d.index - 1} must be extended before direction {d.index}")
    if d.space != state.space:
        raise StructuralError("direction lives on a different space")
    dens = densities_for_direction(m, d, state.base)
    h0, k0 = state.base.h, state.base.k
    table = np.zeros((state.space.n, 4))
    for i in range(state.space.n):
        for e in state.directions:
            c = coincidence(d, e, i)
            if c is Coincidence.DIRECT:
                table[i] = state.solutions[e.index][i]
                break
            if c is Coincidence.SWAPPED:
                table[i] = state.quadruple(e.index, i).swapped()
                break
        else:
            try:
                table[i] = solve_lemma4(h0[i], k0[i], dens.h[i], dens.k[i], state.sign)
            except InconsistentDensitiesError as exc:
                raise InconsistentDensitiesError(
                    f"direction {d.index}, atom {state.space.ids[i]!r}: {exc}"
                ) from None
    return state.with_direction(d, table)


def build_vector_measure(m: ProjectionMeasure, registry: DirectionRegistry, sign: int = 1) -> VectorMeasure:
    if registry.space != m.space:
        raise StructuralError("registry and measure live on different spaces")
    mu = build_base(m, sign)
    for d in registry:
        mu = extend_direction(mu, m, d)
    return mu


def _locate(mu: VectorMeasure, x: float, v: complex, atom: int) -> tuple[int, Coincidence]:
    for e in mu.directions:
        c = _match(x, v, e.x[atom], e.v[atom])
        if c is not Coincidence.NONE:
            return e.index, c
    raise DirectionNotRegisteredError(
        f"direction not registered: atom {mu.space.ids[atom]!r} has (x={x!r}, v={v!r})"
    )


def evaluate(mu: VectorMeasure, p: CanonicalProjection) -> HVector:
    """mu(p) = (pi1 h0 + pi3 h_g1 + pi4 k_g1, pi2 k0 + pi3 h_g2 + pi4 k_g2).

    pi3 collects atoms whose (x, v) equals a registered direction and pi4 those
    equal to its complement (1-x, -v).
    """
    if p.space != mu.space:
        raise StructuralError("projection and vector measure live on different spaces")
    first = np.where(p.pi1.mask, mu.base.h.values, 0.0)
    second = np.where(p.pi2.mask, mu.base.k.values, 0.0)
    for i in p.supp:
        index, c = _locate(mu, p.x[i], p.v[i], i)
        h1, h2, k1, k2 = mu.solutions[index][i]
        if c is Coincidence.DIRECT:
            first[i] += h1
            second[i] += h2
        else:
            first[i] += k1
            second[i] += k2
    return HVector(ScalarField(mu.space, first), ScalarField(mu.space, second))


def subalgebra_projection(d: Direction, pi1: BaseProjection, pi2: BaseProjection) -> CanonicalProjection:
    """p(x pi1, v, pi1) + p((1-x) pi2, -v, pi2), an element of the subalgebra of d."""
    cx, cv = d.complement_pair()
    return add_orthogonal(off_diagonal(d.x, d.v, pi1), off_diagonal(cx, cv, pi2))
