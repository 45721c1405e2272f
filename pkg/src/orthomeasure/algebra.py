"""Projections of N = M (x) M_2 in canonical form pi1 (+) pi2 + p(x, v, supp).

Per atom a canonical projection is one of five 2x2 blocks: 0, diag(1,0),
diag(0,1), I, or the rank-one block

    [[x,              v*sqrt(x(1-x))],
     [conj(v)*sqrt(x(1-x)), 1 - x   ]]   with 0 < x < 1, |v| = 1.

Boundary values x in {0, 1} are never stored in the off-diagonal part; such
atoms belong to pi1/pi2.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .base_space import (
    AtomicMeasureSpace,
    BaseProjection,
    ScalarField,
    UnimodularField,
)
from .errors import DomainError, PreconditionError, StructuralError

ORTHO_TOL = 1e-9

# alias for the (n, 2, 2) complex array returned by realize()
MatrixRealization = np.ndarray


class BlockKind(Enum):
    ZERO = "zero"
    E11 = "e11"
    E22 = "e22"
    IDENTITY = "identity"
    RANK_ONE = "rank_one"


@dataclass(frozen=True, eq=False)
class CanonicalProjection:
    pi1: BaseProjection
    pi2: BaseProjection
    supp: BaseProjection
    x: ScalarField
    v: UnimodularField

    @property
    def space(self) -> AtomicMeasureSpace:
        return self.supp.space

    def block(self, i: int) -> tuple[BlockKind, float, complex]:
        """Kind of the 2x2 block at atom ``i`` plus its (x, v) payload."""
        if self.supp.mask[i]:
            return BlockKind.RANK_ONE, self.x[i], self.v[i]
        a, b = bool(self.pi1.mask[i]), bool(self.pi2.mask[i])
        if a and b:
            return BlockKind.IDENTITY, 0.0, 1.0
        if a:
            return BlockKind.E11, 0.0, 1.0
        if b:
            return BlockKind.E22, 0.0, 1.0
        return BlockKind.ZERO, 0.0, 1.0

    def is_zero(self) -> bool:
        return self.pi1.is_empty() and self.pi2.is_empty() and self.supp.is_empty()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CanonicalProjection):
            return NotImplemented
        return (
            self.pi1 == other.pi1
            and self.pi2 == other.pi2
            and self.supp == other.supp
            and self.x == other.x
            and self.v == other.v
        )

    __hash__ = None

    def __repr__(self) -> str:
        off = ", ".join(
            f"{self.space.ids[i]}:(x={self.x[i]:.6g}, v={self.v[i]:.6g})" for i in self.supp
        )
        return f"CanonicalProjection(pi1={self.pi1}, pi2={self.pi2}, off=[{off}])"


def make_projection(
    pi1: BaseProjection,
    pi2: BaseProjection,
    supp: BaseProjection | None = None,
    x: ScalarField | None = None,
    v: UnimodularField | None = None,
) -> CanonicalProjection:
    """Validate and normalize a canonical projection.

    ``x`` must lie strictly inside (0, 1) on ``supp``; off ``supp`` it is reset
    to 0 and ``v`` to 1.
    """
    space = pi1.space
    if supp is None:
        supp = space.empty()
    if x is None:
        x = space.constant(0.0)
    if v is None:
        v = UnimodularField.ones(space)
    for obj in (pi2, supp, x, v):
        if obj.space != space:
            raise StructuralError("parts of a projection live on different spaces")
    if not (pi1 & supp).is_empty() or not (pi2 & supp).is_empty():
        raise StructuralError("diagonal parts must be disjoint from the off-diagonal support")
    xs = x.values[supp.mask]
    if np.any(xs <= 0.0) or np.any(xs >= 1.0):
        bad = [space.ids[i] for i in supp if not 0.0 < x.values[i] < 1.0]
        raise DomainError(f"degenerate off-diagonal atom(s) {bad}: x must lie in (0, 1); use pi1/pi2")
    x = ScalarField(space, np.where(supp.mask, x.values, 0.0))
    v = v.where(supp, 1.0)
    return CanonicalProjection(pi1, pi2, supp, x, v)


def zero(space: AtomicMeasureSpace) -> CanonicalProjection:
    return make_projection(space.empty(), space.empty())


def identity(space: AtomicMeasureSpace) -> CanonicalProjection:
    return make_projection(space.full(), space.full())


def diagonal(pi1: BaseProjection, pi2: BaseProjection) -> CanonicalProjection:
    """pi1 (+) pi2."""
    return make_projection(pi1, pi2)


def off_diagonal(x: ScalarField, v: UnimodularField, supp: BaseProjection) -> CanonicalProjection:
    """p(x*supp, v, supp)."""
    space = supp.space
    return make_projection(space.empty(), space.empty(), supp, x, v)


def bloch_vector(x: float, v: complex) -> np.ndarray:
    """Bloch vector n of the rank-one block p(x, v), so that p = (I + n.sigma)/2."""
    vs = v * np.sqrt(x * (1.0 - x))
    return np.array([2.0 * vs.real, -2.0 * vs.imag, 2.0 * x - 1.0])


def block_bloch(kind: BlockKind, x: float, v: complex) -> np.ndarray | None:
    """Bloch vector of a rank-one block; None for 0 and I."""
    if kind is BlockKind.E11:
        return np.array([0.0, 0.0, 1.0])
    if kind is BlockKind.E22:
        return np.array([0.0, 0.0, -1.0])
    if kind is BlockKind.RANK_ONE:
        return bloch_vector(x, v)
    return None


def realize(p: CanonicalProjection) -> MatrixRealization:
    """Per-atom 2x2 matrices of p, shape (n, 2, 2)."""
    n = p.space.n
    out = np.zeros((n, 2, 2), dtype=complex)
    out[:, 0, 0] = p.pi1.indicator()
    out[:, 1, 1] = p.pi2.indicator()
    m = p.supp.mask
    x = p.x.values[m]
    s = np.sqrt(x * (1.0 - x))
    vs = p.v.values[m] * s
    out[m, 0, 0] += x
    out[m, 1, 1] += 1.0 - x
    out[m, 0, 1] = vs
    out[m, 1, 0] = vs.conj()
    return out


def complement(p: CanonicalProjection) -> CanonicalProjection:
    """1 - p."""
    return make_projection(~(p.pi1 | p.supp), ~(p.pi2 | p.supp), p.supp, 1.0 - p.x, -p.v)


def is_orthogonal(p: CanonicalProjection, q: CanonicalProjection, tol: float = ORTHO_TOL) -> bool:
    if p.space != q.space:
        raise StructuralError("projections live on different spaces")
    for a, b in (
        (p.pi1, q.pi1),
        (p.pi2, q.pi2),
        (p.pi1, q.supp),
        (p.pi2, q.supp),
        (q.pi1, p.supp),
        (q.pi2, p.supp),
    ):
        if (a.mask & b.mask).any():
            return False
    both = p.supp.mask & q.supp.mask
    if not both.any():
        return True
    dx = np.abs(q.x.values[both] - (1.0 - p.x.values[both]))
    dv = np.abs(q.v.values[both] + p.v.values[both])
    return bool(np.all(dx <= tol) and np.all(dv <= tol))


def add_orthogonal(p: CanonicalProjection, q: CanonicalProjection) -> CanonicalProjection:
    """Canonical form of p + q for orthogonal p, q.

    On the common off-diagonal support the two rank-one blocks add up to the
    identity; elsewhere the off-diagonal data is taken piecewise.
    """
    if not is_orthogonal(p, q):
        raise PreconditionError("add_orthogonal needs orthogonal projections")
    both = p.supp & q.supp
    only_p = p.supp - q.supp
    z = p.x.where(only_p, q.x)
    u = p.v.where(only_p, q.v)
    return make_projection(
        p.pi1 | q.pi1 | both,
        p.pi2 | q.pi2 | both,
        p.supp ^ q.supp,
        z,
        u,
    )


def product_max_abs(p: CanonicalProjection, q: CanonicalProjection) -> float:
    """Largest entry modulus of the per-atom matrix product P Q."""
    prod = realize(p) @ realize(q)
    return float(np.abs(prod).max()) if prod.size else 0.0
