"""Completely additive measures on the projections of a finite type-I_2 algebra.

On a finite atomic algebra every such measure splits as a sum over atoms,
m(p) = sum_w m_w(p_w), and each m_w is a frame function on the 2x2 block:
a nonnegative function of the Bloch vector n with m_w(n) + m_w(-n) fixed.
Three concrete families are provided:

* ``StateMeasure``: m_w(P) = nu(w) Tr(D_w P), the Gleason-regular case;
* ``FrameFunctionMeasure``: an arbitrary per-atom frame function, which in
  dimension two need not be quadratic;
* ``TabulatedMeasure``: finitely many per-atom values, looked up by Bloch
  vector.

All per-atom values returned by the ``atom_*`` methods are already weighted
by nu(w), so m(p) is their plain sum.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

import numpy as np

from .algebra import (
    BlockKind,
    CanonicalProjection,
    block_bloch,
    bloch_vector,
    complement,
    diagonal,
    off_diagonal,
    realize,
)
from .base_space import AtomicMeasureSpace, ScalarField
from .errors import DomainError, NotAMeasureError, OrthoMeasureError, StructuralError, TableLookupError

if TYPE_CHECKING:
    from .constructor import Direction

DENSITY_TOL = 1e-9
BLOCH_MATCH_TOL = 1e-9
NEG_CLAMP = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

PLUS_Z = np.array([0.0, 0.0, 1.0])
MINUS_Z = np.array([0.0, 0.0, -1.0])


def bloch_projector(n: np.ndarray) -> np.ndarray:
    """(I + n.sigma) / 2."""
    return 0.5 * (np.eye(2) + np.tensordot(n, PAULI, axes=1))


class ProjectionMeasure(ABC):
    """Evaluator m: projections -> [0, inf), built atom by atom."""

    space: AtomicMeasureSpace

    @abstractmethod
    def atom_total(self, i: int) -> float:
        """m of the identity block at atom i."""

    @abstractmethod
    def atom_rank_one(self, i: int, n: np.ndarray) -> float:
        """m of the rank-one projector with Bloch vector n at atom i."""

    def atom_value(self, p: CanonicalProjection, i: int) -> float:
        kind, x, v = p.block(i)
        if kind is BlockKind.ZERO:
            return 0.0
        if kind is BlockKind.IDENTITY:
            return self.atom_total(i)
        return self.atom_rank_one(i, block_bloch(kind, x, v))

    def sample_bloch(self) -> list[list[np.ndarray]] | None:
        """Per-atom Bloch vectors the measure is defined on, or None if unrestricted."""
        return None

    def __call__(self, p: CanonicalProjection) -> float:
        return eval_measure(self, p)

    def total(self) -> float:
        return math.fsum(self.atom_total(i) for i in range(self.space.n))


def eval_measure(m: ProjectionMeasure, p: CanonicalProjection) -> float:
    if p.space != m.space:
        raise StructuralError("projection and measure live on different spaces")
    return math.fsum(m.atom_value(p, i) for i in range(m.space.n))


class StateMeasure(ProjectionMeasure):
    """m(p) = sum_w nu(w) Tr(D_w p_w) for positive semidefinite blocks D_w."""

    def __init__(self, space: AtomicMeasureSpace, blocks, psd_tol: float = 1e-9):
        d = np.array(blocks, dtype=complex)
        if d.shape != (space.n, 2, 2):
            raise StructuralError(f"expected {space.n} blocks of shape 2x2, got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise DomainError("density blocks must be finite")
        herm = np.abs(d - d.conj().transpose(0, 2, 1)).max(initial=0.0)
        if herm > psd_tol:
            raise DomainError(f"density block not Hermitian (deviation {herm:.3e})")
        d = 0.5 * (d + d.conj().transpose(0, 2, 1))
        for i, block in enumerate(d):
            if np.linalg.eigvalsh(block).min() < -psd_tol:
                raise DomainError(f"density block at atom {space.ids[i]!r} is not positive semidefinite")
        d.setflags(write=False)
        self.space = space
        self.blocks = d

    def atom_total(self, i: int) -> float:
        return float(self.space.weights[i] * self.blocks[i].trace().real)

    def atom_rank_one(self, i: int, n: np.ndarray) -> float:
        return float(self.space.weights[i] * np.trace(self.blocks[i] @ bloch_projector(n)).real)

    def atom_value(self, p: CanonicalProjection, i: int) -> float:
        kind, _, _ = p.block(i)
        if kind is BlockKind.ZERO:
            return 0.0
        block = realize(p)[i]
        return float(self.space.weights[i] * np.trace(self.blocks[i] @ block).real)


class FrameFunctionMeasure(ProjectionMeasure):
    """Per-atom frame functions f_w(n) with f_w(n) + f_w(-n) = c_w.

    The sum rule is not enforced here; ``validate`` reports violations.
    """

    def __init__(
        self,
        space: AtomicMeasureSpace,
        functions: Sequence[Callable[[np.ndarray], float]],
        constants: Sequence[float],
        samples: Sequence[Sequence[np.ndarray]] | None = None,
    ):
        if len(functions) != space.n or len(constants) != space.n:
            raise StructuralError("need one frame function and one constant per atom")
        constants = [float(c) for c in constants]
        for c in constants:
            if not math.isfinite(c) or c < 0.0:
                raise DomainError(f"frame constant must be finite and >= 0, got {c!r}")
        self.space = space
        self.functions = tuple(functions)
        self.constants = tuple(constants)
        self._samples = None if samples is None else [list(s) for s in samples]

    def atom_total(self, i: int) -> float:
        return float(self.space.weights[i] * self.constants[i])

    def atom_rank_one(self, i: int, n: np.ndarray) -> float:
        return float(self.space.weights[i] * self.functions[i](n))

    def sample_bloch(self):
        return self._samples


def _upper_hemisphere(n: np.ndarray) -> bool:
    # antipodal points always land on opposite sides, including on the equator
    for comp in (n[2], n[1], n[0]):
        if comp != 0.0:
            return comp > 0.0
    return True


def abs_nz(space: AtomicMeasureSpace, constants: Sequence[float]) -> FrameFunctionMeasure:
    """Frame function (c/2)|n_z| on the upper hemisphere, c - (c/2)|n_z| below.

    With c = 2 this is |n_z| on the upper hemisphere; f(+z) = f(-z) = c/2.
    It jumps across the equator, so no linear functional reproduces it.
    """

    def make(c: float):
        def f(n: np.ndarray) -> float:
            half = 0.5 * c * abs(float(n[2]))
            return half if _upper_hemisphere(n) else c - half

        return f

    return FrameFunctionMeasure(space, [make(float(c)) for c in constants], constants)


def quadratic(space: AtomicMeasureSpace, constants: Sequence[float], a: Sequence[Sequence[float]]) -> FrameFunctionMeasure:
    """f(n) = (c/2)(1 + a.n); a state measure in frame-function clothing when |a| <= 1."""

    def make(c: float, vec: np.ndarray):
        def f(n: np.ndarray) -> float:
            return 0.5 * c * (1.0 + float(vec @ n))

        return f

    vecs = [np.asarray(x, dtype=float) for x in a]
    if len(vecs) != space.n or any(v.shape != (3,) for v in vecs):
        raise StructuralError("quadratic family needs one 3-vector per atom")
    return FrameFunctionMeasure(space, [make(float(c), v) for c, v in zip(constants, vecs)], constants)


def _lookup(entries: Sequence[tuple[np.ndarray, float]], n: np.ndarray, atom: str) -> float:
    for key, value in entries:
        if np.max(np.abs(key - n)) <= BLOCH_MATCH_TOL:
            return value
    raise TableLookupError(f"no table entry at atom {atom!r} for Bloch vector {np.round(n, 12).tolist()}")


def custom_table(
    space: AtomicMeasureSpace,
    constants: Sequence[float],
    tables: Sequence[Sequence[tuple[Sequence[float], float]]],
) -> FrameFunctionMeasure:
    """Frame function given by finitely many (n, f(n)) pairs per atom."""
    if len(tables) != space.n:
        raise StructuralError("custom table needs one entry list per atom")
    norm = [[(np.asarray(n, dtype=float), float(val)) for n, val in tab] for tab in tables]

    def make(i: int):
        return lambda n: _lookup(norm[i], n, space.ids[i])

    samples = [[n for n, _ in tab] for tab in norm]
    return FrameFunctionMeasure(space, [make(i) for i in range(space.n)], constants, samples)


class TabulatedMeasure(ProjectionMeasure):
    """Finite table of already-weighted values m(P) of per-atom rank-one projectors.

    The identity value at an atom is m(e11) + m(e22), so both must be present.
    """

    def __init__(self, space: AtomicMeasureSpace, entries: Sequence[Sequence[tuple[Sequence[float], float]]]):
        if len(entries) != space.n:
            raise StructuralError("table needs one entry list per atom")
        self.space = space
        self.entries = [[(np.asarray(n, dtype=float), float(val)) for n, val in tab] for tab in entries]
        for i, tab in enumerate(self.entries):
            for n, _ in tab:
                if not any(np.max(np.abs(k + n)) <= BLOCH_MATCH_TOL for k, _ in tab):
                    raise StructuralError(f"table at atom {space.ids[i]!r} is not complement-closed")

    def atom_total(self, i: int) -> float:
        return self.atom_rank_one(i, PLUS_Z) + self.atom_rank_one(i, MINUS_Z)

    def atom_rank_one(self, i: int, n: np.ndarray) -> float:
        return _lookup(self.entries[i], n, self.space.ids[i])

    def sample_bloch(self):
        return [[n for n, _ in tab] for tab in self.entries]

    @classmethod
    def from_measure(cls, m: ProjectionMeasure, bloch: Iterable[np.ndarray]) -> TabulatedMeasure:
        """Tabulate m at +-z and +-n for the given Bloch vectors, on every atom."""
        keys = [PLUS_Z, MINUS_Z]
        for n in bloch:
            n = np.asarray(n, dtype=float)
            keys.extend([n, -n])
        entries = [[(k, m.atom_rank_one(i, k)) for k in keys] for i in range(m.space.n)]
        return cls(m.space, entries)


# densities


@dataclass(frozen=True)
class DensityPair:
    h: ScalarField
    k: ScalarField


def _density(value: float, weight: float, total: float, what: str) -> float:
    if value < 0.0:
        if value < -NEG_CLAMP * max(1.0, abs(total)):
            raise DomainError(f"negative measure value {value!r} for {what}")
        value = 0.0
    return math.sqrt(value / weight)


def base_densities(m: ProjectionMeasure) -> DensityPair:
    """h0, k0 with m(pi1 (+) pi2) = int_pi1 h0^2 + int_pi2 k0^2."""
    space = m.space
    h = np.zeros(space.n)
    k = np.zeros(space.n)
    empty = space.empty()
    for i in range(space.n):
        chi = space.singleton(i)
        w = float(space.weights[i])
        tot = m.atom_total(i)
        h[i] = _density(m(diagonal(chi, empty)), w, tot, f"e11 at {space.ids[i]!r}")
        k[i] = _density(m(diagonal(empty, chi)), w, tot, f"e22 at {space.ids[i]!r}")
    return DensityPair(ScalarField(space, h), ScalarField(space, k))


def densities_for_direction(
    m: ProjectionMeasure, d: Direction, base: DensityPair | None = None
) -> DensityPair:
    """h_g, k_g with m(p(x pi, v, pi)) = int_pi h_g^2 and m(p((1-x) pi, -v, pi)) = int_pi k_g^2."""
    space = m.space
    if base is None:
        base = base_densities(m)
    h = np.zeros(space.n)
    k = np.zeros(space.n)
    cx = 1.0 - d.x
    cv = -d.v
    for i in range(space.n):
        chi = space.singleton(i)
        w = float(space.weights[i])
        tot = m.atom_total(i)
        h[i] = _density(m(off_diagonal(d.x, d.v, chi)), w, tot, f"direction {d.index} at {space.ids[i]!r}")
        k[i] = _density(m(off_diagonal(cx, cv, chi)), w, tot, f"direction {d.index} at {space.ids[i]!r}")
        lhs = h[i] ** 2 + k[i] ** 2
        rhs = base.h[i] ** 2 + base.k[i] ** 2
        if abs(lhs - rhs) > DENSITY_TOL * max(1.0, rhs):
            raise NotAMeasureError(
                f"density identity fails at atom {space.ids[i]!r}, direction {d.index}: "
                f"h^2 + k^2 = {lhs!r} vs h0^2 + k0^2 = {rhs!r}"
            )
    return DensityPair(ScalarField(space, h), ScalarField(space, k))


# validation


@dataclass
class Violation:
    check: str
    atom: str | None
    magnitude: float
    detail: str = ""


@dataclass
class ValidationReport:
    checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, check: str, atom: str | None, magnitude: float, detail: str = "") -> None:
        self.violations.append(Violation(check, atom, magnitude, detail))


def validate(m: ProjectionMeasure, samples: Iterable[CanonicalProjection], tol: float = DENSITY_TOL) -> ValidationReport:
    """Check additivity against complements, positivity and the per-atom sum rule.

    Never raises on a bad measure; every problem becomes a ``Violation``.
    """
    report = ValidationReport()
    space = m.space
    ids = space.ids
    try:
        total = m.total()
    except OrthoMeasureError as exc:
        report.add("evaluable", None, math.inf, str(exc))
        return report
    scale = max(1.0, abs(total))

    for i in range(space.n):
        report.checked += 1
        try:
            t = m.atom_total(i)
            up = m.atom_rank_one(i, PLUS_Z)
            down = m.atom_rank_one(i, MINUS_Z)
        except OrthoMeasureError as exc:
            report.add("evaluable", ids[i], math.inf, str(exc))
            continue
        for name, val in (("identity", t), ("e11", up), ("e22", down)):
            if val < -NEG_CLAMP * scale:
                report.add("nonnegative", ids[i], -val, name)
        if abs(up + down - t) > tol * scale:
            report.add("sum_rule", ids[i], abs(up + down - t), "m(e11) + m(e22) != m(1)")

    for p in samples:
        report.checked += 1
        try:
            mp = m(p)
            mc = m(complement(p))
        except OrthoMeasureError as exc:
            report.add("evaluable", None, math.inf, str(exc))
            continue
        if mp < -NEG_CLAMP * scale:
            report.add("nonnegative", None, -mp, repr(p))
        gap = abs(mp + mc - total)
        if gap > tol * scale:
            atom = _worst_atom(m, p)
            report.add("complement_additivity", atom, gap, repr(p))
        for i in p.supp:
            up = m.atom_rank_one(i, PLUS_Z) / space.weights[i]
            down = m.atom_rank_one(i, MINUS_Z) / space.weights[i]
            n = bloch_vector(p.x[i], p.v[i])
            try:
                hg = m.atom_rank_one(i, n) / space.weights[i]
                kg = m.atom_rank_one(i, -n) / space.weights[i]
            except OrthoMeasureError as exc:
                report.add("evaluable", ids[i], math.inf, str(exc))
                continue
            if abs(hg + kg - up - down) > tol * max(1.0, abs(up + down)):
                report.add("density_identity", ids[i], abs(hg + kg - up - down), f"n={n.tolist()}")
    return report


def _worst_atom(m: ProjectionMeasure, p: CanonicalProjection) -> str | None:
    c = complement(p)
    worst, where = -1.0, None
    for i in range(m.space.n):
        gap = abs(m.atom_value(p, i) + m.atom_value(c, i) - m.atom_total(i))
        if gap > worst:
            worst, where = gap, m.space.ids[i]
    return where


def linear_fit_residual(m: ProjectionMeasure, bloch: Sequence[np.ndarray]) -> float:
    """Relative least-squares residual of the best linear functional fit to m.

    A linear functional restricted to an atom is nu(w) Tr(A P) for Hermitian A,
    i.e. alpha + beta.n in Bloch coordinates. The fit uses the values of m at
    +-n for every given n on every atom; returns ||m - fit|| / ||m||.
    """
    resid_sq = 0.0
    norm_sq = 0.0
    for i in range(m.space.n):
        rows, vals = [], []
        for n in bloch:
            n = np.asarray(n, dtype=float)
            for s in (n, -n):
                rows.append([1.0, *s])
                vals.append(m.atom_rank_one(i, s))
        a = np.array(rows)
        b = np.array(vals)
        coef, *_ = np.linalg.lstsq(a, b, rcond=None)
        resid_sq += float(np.sum((a @ coef - b) ** 2))
        norm_sq += float(np.sum(b**2))
    if norm_sq == 0.0:
        return 0.0
    return math.sqrt(resid_sq / norm_sq)


__all__ = [
    "ProjectionMeasure",
    "StateMeasure",
    "FrameFunctionMeasure",
    "TabulatedMeasure",
    "DensityPair",
    "ValidationReport",
    "Violation",
    "abs_nz",
    "quadratic",
    "custom_table",
    "eval_measure",
    "validate",
    "base_densities",
    "densities_for_direction",
    "linear_fit_residual",
    "bloch_projector",
]
