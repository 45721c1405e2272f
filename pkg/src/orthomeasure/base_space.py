"""Finite atomic measure space and the commutative algebra M = L^inf(Omega, nu).

Everything here is a thin, immutable wrapper around numpy arrays indexed by
atom position. Projections of M are subsets of atoms, scalar fields are real
functions on atoms, and unimodular fields are phase functions on atoms.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, StructuralError

UNIMODULAR_TOL = 1e-12


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class AtomicMeasureSpace:
    """Ordered finite list of atoms with strictly positive weights."""

    __slots__ = ("ids", "weights", "_index")

    def __init__(self, atoms: Iterable[tuple[str, float]]):
        ids: list[str] = []
        weights: list[float] = []
        for atom_id, weight in atoms:
            weight = float(weight)
            if not math.isfinite(weight) or weight <= 0.0:
                raise DomainError(f"atom {atom_id!r}: weight must be finite and > 0, got {weight!r}")
            ids.append(str(atom_id))
            weights.append(weight)
        if len(set(ids)) != len(ids):
            raise StructuralError("atom ids must be pairwise distinct")
        self.ids: tuple[str, ...] = tuple(ids)
        self.weights = _readonly(np.array(weights, dtype=float))
        self._index = {a: i for i, a in enumerate(ids)}

    @classmethod
    def from_weights(cls, weights: Sequence[float], ids: Sequence[str] | None = None) -> AtomicMeasureSpace:
        if ids is None:
            ids = [f"a{i}" for i in range(len(weights))]
        return cls(zip(ids, weights))

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, atom_id: str) -> int:
        try:
            return self._index[atom_id]
        except KeyError:
            raise StructuralError(f"unknown atom {atom_id!r}") from None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, AtomicMeasureSpace):
            return NotImplemented
        return self.ids == other.ids and bool(np.array_equal(self.weights, other.weights))

    def __hash__(self) -> int:
        return hash((self.ids, tuple(self.weights.tolist())))

    def __repr__(self) -> str:
        atoms = ", ".join(f"{a}:{w:g}" for a, w in zip(self.ids, self.weights))
        return f"AtomicMeasureSpace({atoms})"

    # constructors for objects living on this space

    def full(self) -> BaseProjection:
        return BaseProjection(self, np.ones(self.n, dtype=bool))

    def empty(self) -> BaseProjection:
        return BaseProjection(self, np.zeros(self.n, dtype=bool))

    def projection(self, atom_ids: Iterable[str]) -> BaseProjection:
        mask = np.zeros(self.n, dtype=bool)
        for a in atom_ids:
            mask[self.index(a)] = True
        return BaseProjection(self, mask)

    def singleton(self, i: int) -> BaseProjection:
        mask = np.zeros(self.n, dtype=bool)
        mask[i] = True
        return BaseProjection(self, mask)

    def scalar(self, values) -> ScalarField:
        return ScalarField(self, values)

    def constant(self, c: float) -> ScalarField:
        return ScalarField(self, np.full(self.n, float(c)))

    def unimodular(self, values) -> UnimodularField:
        return UnimodularField(self, values)


def _check_same(a, b) -> None:
    if a.space != b.space:
        raise StructuralError("objects live on different measure spaces")


class BaseProjection:
    """A projection of M, i.e. the characteristic function of a set of atoms."""

    __slots__ = ("space", "mask")

    def __init__(self, space: AtomicMeasureSpace, mask):
        mask = np.array(mask, dtype=bool)
        if mask.shape != (space.n,):
            raise StructuralError(f"mask shape {mask.shape} does not match {space.n} atoms")
        self.space = space
        self.mask = _readonly(mask)

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(a for a, m in zip(self.space.ids, self.mask) if m)

    def indicator(self) -> np.ndarray:
        return self.mask.astype(float)

    def is_empty(self) -> bool:
        return not self.mask.any()

    def __contains__(self, atom_id: str) -> bool:
        return bool(self.mask[self.space.index(atom_id)])

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __iter__(self):
        return iter(np.flatnonzero(self.mask).tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BaseProjection):
            return NotImplemented
        return self.space == other.space and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self) -> int:
        return hash((self.space, self.mask.tobytes()))

    def __repr__(self) -> str:
        return "{" + ", ".join(self.members) + "}"

    def __and__(self, other: BaseProjection) -> BaseProjection:
        return meet(self, other)

    def __sub__(self, other: BaseProjection) -> BaseProjection:
        return minus(self, other)

    def __xor__(self, other: BaseProjection) -> BaseProjection:
        return sym_diff(self, other)

    def __or__(self, other: BaseProjection) -> BaseProjection:
        _check_same(self, other)
        return BaseProjection(self.space, self.mask | other.mask)

    def __invert__(self) -> BaseProjection:
        return BaseProjection(self.space, ~self.mask)


class ScalarField:
    """Real function on the atoms; finite everywhere."""

    __slots__ = ("space", "values")

    def __init__(self, space: AtomicMeasureSpace, values):
        arr = np.array(values, dtype=float)
        if arr.shape != (space.n,):
            raise StructuralError(f"field shape {arr.shape} does not match {space.n} atoms")
        if not np.all(np.isfinite(arr)):
            raise DomainError("scalar field must be finite at every atom")
        self.space = space
        self.values = _readonly(arr)

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, ScalarField):
            _check_same(self, other)
            return other.values
        if isinstance(other, BaseProjection):
            _check_same(self, other)
            return other.indicator()
        return np.asarray(other, dtype=float)

    def __add__(self, other) -> ScalarField:
        return ScalarField(self.space, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> ScalarField:
        return ScalarField(self.space, self.values - self._coerce(other))

    def __rsub__(self, other) -> ScalarField:
        return ScalarField(self.space, self._coerce(other) - self.values)

    def __mul__(self, other) -> ScalarField:
        return ScalarField(self.space, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> ScalarField:
        return ScalarField(self.space, -self.values)

    def __pow__(self, k) -> ScalarField:
        return ScalarField(self.space, self.values**k)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScalarField):
            return NotImplemented
        return self.space == other.space and bool(np.array_equal(self.values, other.values))

    __hash__ = None

    def where(self, pi: BaseProjection, other) -> ScalarField:
        """Self on ``pi``, ``other`` off ``pi``."""
        _check_same(self, pi)
        return ScalarField(self.space, np.where(pi.mask, self.values, self._coerce(other)))

    def __repr__(self) -> str:
        return f"ScalarField({self.values.tolist()})"


class UnimodularField:
    """Complex function on the atoms with |v| = 1 everywhere."""

    __slots__ = ("space", "values")

    def __init__(self, space: AtomicMeasureSpace, values):
        arr = np.array(values, dtype=complex)
        if arr.shape != (space.n,):
            raise StructuralError(f"field shape {arr.shape} does not match {space.n} atoms")
        if not np.all(np.isfinite(arr)):
            raise DomainError("unimodular field must be finite")
        dev = np.abs(np.abs(arr) - 1.0)
        if np.any(dev > UNIMODULAR_TOL):
            raise DomainError(f"|v| deviates from 1 by {dev.max():.3e}")
        self.space = space
        self.values = _readonly(arr)

    @classmethod
    def ones(cls, space: AtomicMeasureSpace) -> UnimodularField:
        return cls(space, np.ones(space.n, dtype=complex))

    def __getitem__(self, i: int) -> complex:
        return complex(self.values[i])

    def __len__(self) -> int:
        return len(self.values)

    def __neg__(self) -> UnimodularField:
        return UnimodularField(self.space, -self.values)

    def conj(self) -> UnimodularField:
        return UnimodularField(self.space, self.values.conj())

    def where(self, pi: BaseProjection, other: UnimodularField | complex) -> UnimodularField:
        _check_same(self, pi)
        alt = other.values if isinstance(other, UnimodularField) else other
        return UnimodularField(self.space, np.where(pi.mask, self.values, alt))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UnimodularField):
            return NotImplemented
        return self.space == other.space and bool(np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self) -> str:
        return f"UnimodularField({self.values.tolist()})"


def meet(pi: BaseProjection, rho: BaseProjection) -> BaseProjection:
    """Product pi*rho, i.e. set intersection."""
    _check_same(pi, rho)
    return BaseProjection(pi.space, pi.mask & rho.mask)


def minus(pi: BaseProjection, rho: BaseProjection) -> BaseProjection:
    """pi \\ rho = pi - pi*rho."""
    _check_same(pi, rho)
    return BaseProjection(pi.space, pi.mask & ~rho.mask)


def sym_diff(pi: BaseProjection, rho: BaseProjection) -> BaseProjection:
    _check_same(pi, rho)
    return BaseProjection(pi.space, pi.mask ^ rho.mask)


def range_projection(x: ScalarField) -> BaseProjection:
    """Support of a nonnegative field. Exact comparison with zero."""
    if np.any(x.values < 0.0):
        raise DomainError("range projection needs a nonnegative field")
    return BaseProjection(x.space, x.values > 0.0)


def integrate(f: ScalarField, pi: BaseProjection) -> float:
    """Sum of f(w) * nu(w) over atoms of pi, in atom order."""
    _check_same(f, pi)
    w = f.space.weights
    return math.fsum(float(f.values[i]) * float(w[i]) for i in range(f.space.n) if pi.mask[i])
