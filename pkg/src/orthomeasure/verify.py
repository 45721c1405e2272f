"""Independent oracles and law checks for the projection calculus and for mu.

Every suite returns a ``VerificationReport``: one ``CheckRecord`` per named
check carrying the largest violation seen over all trials. Records are never
dropped, so a failed trial always surfaces as a failed record.
"""
from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    BlockKind,
    CanonicalProjection,
    add_orthogonal,
    bloch_vector,
    complement,
    diagonal,
    identity,
    is_orthogonal,
    make_projection,
    realize,
    zero,
)
from .base_space import AtomicMeasureSpace, BaseProjection, ScalarField, UnimodularField
from .constructor import (
    Coincidence,
    DirectionRegistry,
    HVector,
    VectorMeasure,
    coincidence,
    evaluate,
    solve_lemma4,
    subalgebra_projection,
)
from .errors import PreconditionError
from .measure import DensityPair, ProjectionMeasure, base_densities, densities_for_direction, linear_fit_residual

NORM_TOL = 1e-9
ORTHO_TOL = 1e-9
ADD_TOL = 1e-12
MATRIX_TOL = 1e-12
PRODUCT_TOL = 1e-9
BOUNDARY_HI = 1e-6
SOLVER_TOL = 1e-9
ORACLE_MATCH_TOL = 1e-8
ORACLE_RESIDUAL = 1e-10
ORACLE_GRID = 10**6

X_LOW, X_HIGH = 0.05, 0.95


# reports


@dataclass
class CheckRecord:
    check: str
    seed: int | None
    max_violation: float
    tolerance: float
    passed: bool
    digest: str = ""
    excluded: int = 0

    def to_json(self) -> str:
        rec = {
            "check": self.check,
            "seed": self.seed,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "digest": self.digest,
        }
        if self.excluded:
            rec["excluded"] = self.excluded
        return json.dumps(rec)


@dataclass
class VerificationReport:
    records: list[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def record(
        self,
        check: str,
        violation: float,
        tolerance: float,
        seed: int | None = None,
        inputs: object = None,
        excluded: int = 0,
    ) -> CheckRecord:
        violation = float(violation)
        passed = bool(violation <= tolerance) and not math.isnan(violation)
        rec = CheckRecord(check, seed, violation, tolerance, passed, _digest(check, seed, inputs), excluded)
        self.records.append(rec)
        return rec

    def extend(self, other: VerificationReport) -> VerificationReport:
        self.records.extend(other.records)
        return self

    def __getitem__(self, check: str) -> CheckRecord:
        for r in self.records:
            if r.check == check:
                return r
        raise KeyError(check)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)


def _digest(check: str, seed: int | None, inputs: object) -> str:
    payload = json.dumps([check, seed, inputs], default=repr, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# random objects

Block = tuple[BlockKind, float, complex]


def assemble(space: AtomicMeasureSpace, blocks: Sequence[Block]) -> CanonicalProjection:
    """Canonical projection from one (kind, x, v) block per atom."""
    n = space.n
    pi1 = np.zeros(n, dtype=bool)
    pi2 = np.zeros(n, dtype=bool)
    supp = np.zeros(n, dtype=bool)
    x = np.zeros(n)
    v = np.ones(n, dtype=complex)
    for i, (kind, xi, vi) in enumerate(blocks):
        if kind is BlockKind.E11 or kind is BlockKind.IDENTITY:
            pi1[i] = True
        if kind is BlockKind.E22 or kind is BlockKind.IDENTITY:
            pi2[i] = True
        if kind is BlockKind.RANK_ONE:
            supp[i] = True
            x[i] = xi
            v[i] = vi
    return make_projection(
        BaseProjection(space, pi1),
        BaseProjection(space, pi2),
        BaseProjection(space, supp),
        ScalarField(space, x),
        UnimodularField(space, v),
    )


def random_phase(rng: np.random.Generator) -> complex:
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return complex(math.cos(theta), math.sin(theta))


def _free_rank_one(rng: np.random.Generator, i: int) -> Block:
    return BlockKind.RANK_ONE, float(rng.uniform(X_LOW, X_HIGH)), random_phase(rng)


def _registered_rank_one(registry: DirectionRegistry):
    def pick(rng: np.random.Generator, i: int) -> Block:
        d = registry[int(rng.integers(1, len(registry) + 1))]
        if rng.random() < 0.5:
            return BlockKind.RANK_ONE, d.x[i], d.v[i]
        return BlockKind.RANK_ONE, 1.0 - d.x[i], -d.v[i]

    return pick


_KINDS = (BlockKind.ZERO, BlockKind.E11, BlockKind.E22, BlockKind.IDENTITY, BlockKind.RANK_ONE)


def _random_block(rng, i, rank_one) -> Block:
    kinds = _KINDS if rank_one is not None else _KINDS[:4]
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind is BlockKind.RANK_ONE:
        return rank_one(rng, i)
    return kind, 0.0, 1.0


def random_projection(
    space: AtomicMeasureSpace, rng: np.random.Generator, registry: DirectionRegistry | None = None
) -> CanonicalProjection:
    """Random canonical projection; off-diagonal atoms use registered directions if given."""
    rank_one = _free_rank_one if registry is None else (_registered_rank_one(registry) if len(registry) else None)
    return assemble(space, [_random_block(rng, i, rank_one) for i in range(space.n)])


def random_orthogonal_partner(
    p: CanonicalProjection, rng: np.random.Generator, registry: DirectionRegistry | None = None
) -> CanonicalProjection:
    """Random q with q <= 1 - p, hence orthogonal to p."""
    rank_one = _free_rank_one if registry is None else (_registered_rank_one(registry) if len(registry) else None)
    blocks: list[Block] = []
    for i in range(p.space.n):
        kind, x, v = p.block(i)
        keep = rng.random() < 0.5
        if kind is BlockKind.ZERO:
            blocks.append(_random_block(rng, i, rank_one))
        elif kind is BlockKind.E11:
            blocks.append((BlockKind.E22, 0.0, 1.0) if keep else (BlockKind.ZERO, 0.0, 1.0))
        elif kind is BlockKind.E22:
            blocks.append((BlockKind.E11, 0.0, 1.0) if keep else (BlockKind.ZERO, 0.0, 1.0))
        elif kind is BlockKind.RANK_ONE and keep:
            blocks.append((BlockKind.RANK_ONE, 1.0 - x, -v))
        else:
            blocks.append((BlockKind.ZERO, 0.0, 1.0))
    return assemble(p.space, blocks)


def random_decomposition(
    registry: DirectionRegistry,
    rng: np.random.Generator,
    min_parts: int = 3,
    max_parts: int = 8,
) -> list[CanonicalProjection]:
    """Random family of mutually orthogonal nonzero projections summing to 1.

    Each atom's identity block is split into {I}, {e11, e22} or a registered
    rank-one pair {P, 1 - P}; the pieces are then dealt out to the parts.
    """
    space = registry.space
    pick = _registered_rank_one(registry) if len(registry) else None
    splits = ["whole", "diag"] + (["dir"] if pick else [])
    choice = [splits[int(rng.integers(len(splits)))] for _ in range(space.n)]
    if 2 * space.n < min_parts:
        raise PreconditionError(f"{space.n} atoms cannot be split into {min_parts} parts")
    while sum(1 if c == "whole" else 2 for c in choice) < min_parts:
        choice[int(rng.choice([i for i, c in enumerate(choice) if c == "whole"]))] = "diag"
    pieces: list[tuple[int, Block]] = []
    for i, c in enumerate(choice):
        if c == "whole":
            pieces.append((i, (BlockKind.IDENTITY, 0.0, 1.0)))
        elif c == "diag":
            pieces += [(i, (BlockKind.E11, 0.0, 1.0)), (i, (BlockKind.E22, 0.0, 1.0))]
        else:
            kind, x, v = pick(rng, i)
            pieces += [(i, (kind, x, v)), (i, (BlockKind.RANK_ONE, 1.0 - x, -v))]
    k = int(rng.integers(min_parts, min(max_parts, len(pieces)) + 1))
    order = rng.permutation(len(pieces))
    owner = np.empty(len(pieces), dtype=int)
    owner[order[:k]] = np.arange(k)
    owner[order[k:]] = rng.integers(0, k, size=len(pieces) - k)
    parts = []
    for j in range(k):
        blocks: list[Block] = [(BlockKind.ZERO, 0.0, 1.0)] * space.n
        for (i, blk), o in zip(pieces, owner):
            if o != j:
                continue
            # two pieces on one atom are complementary
            blocks[i] = (BlockKind.IDENTITY, 0.0, 1.0) if blocks[i][0] is not BlockKind.ZERO else blk
        parts.append(assemble(space, blocks))
    return parts


def random_bloch_set(count: int, seed: int) -> list[np.ndarray]:
    """Bloch vectors of ``count`` random directions drawn like random projections."""
    rng = np.random.default_rng(seed)
    return [bloch_vector(float(rng.uniform(X_LOW, X_HIGH)), random_phase(rng)) for _ in range(count)]


# brute-force splitting oracle


@functools.lru_cache(maxsize=4)
def _circle_grid(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    theta = np.arange(n) * (2.0 * math.pi / n)
    c, s = np.cos(theta), np.sin(theta)
    for a in (theta, c, s):
        a.setflags(write=False)
    return theta, c, s


def lemma4_oracle(
    lam0: float, mu0: float, lam: float, mu: float, grid: int = ORACLE_GRID
) -> list[tuple[float, float]]:
    """All points P on the circle |P| = lam with |V0 - P| = mu, found by scanning.

    The circle is sampled at ``grid`` angles, sign changes of
    g(theta) = |V0 - P(theta)| - mu are bracketed and bisected, and the grid
    minimum of g is refined separately to catch tangencies.
    """
    if lam == 0.0:
        return [(0.0, 0.0)]

    def g(theta: float) -> float:
        return math.hypot(lam0 - lam * math.cos(theta), mu0 - lam * math.sin(theta)) - mu

    theta, c, s = _circle_grid(grid)
    step = 2.0 * math.pi / grid
    # sign of g equals sign of |V0 - P|^2 - mu^2, linear in (cos, sin)
    proj = lam0 * c
    proj += mu0 * s
    threshold = (lam0 * lam0 + mu0 * mu0 + lam * lam - mu * mu) / (2.0 * lam)
    inside = proj > threshold
    flips = np.flatnonzero(inside != np.roll(inside, -1))

    roots: list[float] = []
    for k in flips.tolist():
        a, b = float(theta[k]), float(theta[k]) + step
        ga = g(a)
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            gm = g(mid)
            if (gm > 0.0) == (ga > 0.0):
                a, ga = mid, gm
            else:
                b = mid
        best = a if abs(g(a)) <= abs(g(b)) else b
        if abs(g(best)) < ORACLE_RESIDUAL:
            roots.append(best)

    # tangency: both crossings inside one grid cell, or a double root
    k = int(np.argmax(proj))
    a, b = float(theta[k]) - step, float(theta[k]) + step
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(200):
        c1, c2 = b - phi * (b - a), a + phi * (b - a)
        if g(c1) < g(c2):
            b = c2
        else:
            a = c1
        if b - a < 1e-15:
            break
    tmin = 0.5 * (a + b)
    if abs(g(tmin)) < ORACLE_RESIDUAL:
        roots.append(tmin)

    points: list[tuple[float, float]] = []
    for t in roots:
        pt = (lam * math.cos(t), lam * math.sin(t))
        if all(math.hypot(pt[0] - q[0], pt[1] - q[1]) > 1e-9 for q in points):
            points.append(pt)
    return points


def random_feasible_splitting(rng: np.random.Generator) -> tuple[float, float, float, float]:
    lam0, mu0 = rng.uniform(0.0, 2.0, size=2)
    r = math.hypot(lam0, mu0)
    phi = rng.uniform(0.0, math.pi / 2.0)
    return float(lam0), float(mu0), r * math.cos(phi), r * math.sin(phi)


def splitting_residual(lam0, mu0, lam, mu, sol) -> float:
    l1, l2, m1, m2 = sol
    return max(
        abs(l1 + m1 - lam0),
        abs(l2 + m2 - mu0),
        abs(l1 * l1 + l2 * l2 - lam * lam),
        abs(m1 * m1 + m2 * m2 - mu * mu),
        abs(l1 * m1 + l2 * m2),
    )


def splitting_oracle_suite(count: int, seed: int, grid: int = ORACLE_GRID) -> VerificationReport:
    """Closed-form splitting vs the scanning oracle on random feasible inputs."""
    report = VerificationReport()
    rng = np.random.default_rng(seed)
    worst_match = 0.0
    worst_eq = 0.0
    cases = [(1.0, 0.0, math.sqrt(0.5), math.sqrt(0.5)), (0.0, 0.0, 0.0, 0.0)]
    cases += [random_feasible_splitting(rng) for _ in range(count)]
    for lam0, mu0, lam, mu in cases:
        pts = lemma4_oracle(lam0, mu0, lam, mu, grid)
        for sign in (1, -1):
            sol = solve_lemma4(lam0, mu0, lam, mu, sign)
            worst_eq = max(worst_eq, splitting_residual(lam0, mu0, lam, mu, sol))
            dist = min((math.hypot(sol[0] - p[0], sol[1] - p[1]) for p in pts), default=math.inf)
            worst_match = max(worst_match, dist)
    report.record("splitting_oracle_match", worst_match, ORACLE_MATCH_TOL, seed, {"count": count, "grid": grid})
    report.record("splitting_identities", worst_eq, SOLVER_TOL, seed, {"count": count})
    return report


# projection calculus vs 2x2 matrices


def matrix_oracle_suite(
    space: AtomicMeasureSpace,
    random_seed: int,
    trials: int,
    add: Callable[[CanonicalProjection, CanonicalProjection], CanonicalProjection] = add_orthogonal,
) -> VerificationReport:
    """Symbolic orthogonality, sums and complements against per-atom matrices.

    ``add`` can be swapped for a faulty implementation to exercise the report.
    """
    rng = np.random.default_rng(random_seed)
    eye = np.broadcast_to(np.eye(2), (space.n, 2, 2))
    worst_proj = worst_sum = worst_comp = 0.0
    disagreements = 0
    excluded = 0
    comp_law = 0

    fixed = [zero(space), identity(space)]
    cases = [(p, random_projection(space, rng)) for p in fixed]
    for t in range(trials):
        p = random_projection(space, rng)
        q = random_orthogonal_partner(p, rng) if t % 2 == 0 else random_projection(space, rng)
        cases.append((p, q))

    for p, q in cases:
        P, Q = realize(p), realize(q)
        for M in (P, Q):
            worst_proj = max(
                worst_proj,
                float(np.abs(M @ M - M).max()),
                float(np.abs(M - M.conj().transpose(0, 2, 1)).max()),
            )
        prod = float(np.abs(P @ Q).max())
        if PRODUCT_TOL < prod < BOUNDARY_HI:
            excluded += 1
        else:
            if is_orthogonal(p, q) != (prod <= PRODUCT_TOL):
                disagreements += 1
            if prod <= PRODUCT_TOL:
                worst_sum = max(worst_sum, float(np.abs(realize(add(p, q)) - (P + Q)).max()))
        c = complement(p)
        worst_comp = max(worst_comp, float(np.abs(realize(c) - (eye - P)).max()))
        if not is_orthogonal(p, c) or add_orthogonal(p, c) != identity(space):
            comp_law += 1

    info = {"atoms": space.ids, "trials": trials}
    report = VerificationReport()
    report.record("realize_hermitian_idempotent", worst_proj, MATRIX_TOL, random_seed, info)
    report.record("orthogonality_matrix_oracle", disagreements, 0, random_seed, info, excluded)
    report.record("sum_matrix_oracle", worst_sum, MATRIX_TOL, random_seed, info)
    report.record("complement_oracle", worst_comp, MATRIX_TOL, random_seed, info)
    report.record("complement_sums_to_identity", comp_law, 0, random_seed, info)
    return report


# laws of mu


def _scale(m: ProjectionMeasure) -> float:
    return max(1.0, abs(m.total()))


def structural_checks(m: ProjectionMeasure, mu: VectorMeasure, registry: DirectionRegistry) -> VerificationReport:
    """Deterministic checks: mu(0), mu(1), solver identities, patching copies."""
    report = VerificationReport()
    space = m.space
    scale = _scale(m)
    one = evaluate(mu, identity(space))
    report.record("mu_zero", evaluate(mu, zero(space)).max_abs(), 0.0)
    report.record("mu_identity_norm", abs(one.norm2() - m.total()) / scale, NORM_TOL)

    worst = 0.0
    copy_faults = 0
    h0, k0 = mu.base.h, mu.base.k
    truth = base_densities(m)
    for d in registry:
        # densities come from m, not from mu, so a corrupted mu is reported rather than rejected
        dens = densities_for_direction(m, d, truth)
        for i in range(space.n):
            q = mu.quadruple(d.index, i)
            worst = max(worst, *q.residuals(h0[i], k0[i], dens.h[i], dens.k[i]))
            for e in registry.directions[: d.index - 1]:
                c = coincidence(d, e, i)
                if c is Coincidence.NONE:
                    continue
                src = mu.quadruple(e.index, i)
                if (c is Coincidence.DIRECT and q != src) or (c is Coincidence.SWAPPED and q != src.swapped()):
                    copy_faults += 1
                break
    report.record("solver_identities", worst, SOLVER_TOL, inputs={"directions": len(registry)})
    report.record("patching_copies", copy_faults, 0, inputs={"directions": len(registry)})
    return report


def truncation_deficits(m: ProjectionMeasure, decomposition: Sequence[CanonicalProjection]) -> list[float]:
    """m(1) - sum_{j<k} m(p_j) for k = 0..len(decomposition)."""
    values = [m(p) for p in decomposition]
    total = m.total()
    return [total - math.fsum(values[:k]) for k in range(len(values) + 1)]


def _check_decomposition(decomposition: Sequence[CanonicalProjection]) -> None:
    if not decomposition:
        raise PreconditionError("empty decomposition")
    space = decomposition[0].space
    acc = zero(space)
    for j, p in enumerate(decomposition):
        for q in decomposition[:j]:
            if not is_orthogonal(p, q):
                raise PreconditionError("decomposition members must be mutually orthogonal")
        acc = add_orthogonal(acc, p)
    if acc != identity(space):
        raise PreconditionError("decomposition does not sum to the identity")


def lemma3_truncation_check(
    m: ProjectionMeasure,
    mu: VectorMeasure,
    decomposition: Sequence[CanonicalProjection],
    seed: int | None = None,
    label: str = "truncation",
) -> VerificationReport:
    """Prefix deficits m(1) - sum m(p_j) against ||mu(1) - sum mu(p_j)||^2."""
    _check_decomposition(decomposition)
    space = m.space
    scale = _scale(m)
    deficits = truncation_deficits(m, decomposition)
    one = evaluate(mu, identity(space))
    partial = HVector.zeros(space)
    worst = abs(one.norm2() - deficits[0])
    for k, p in enumerate(decomposition, start=1):
        partial = partial + evaluate(mu, p)
        worst = max(worst, abs((one - partial).norm2() - deficits[k]))
    rise = max((b - a for a, b in zip(deficits, deficits[1:])), default=0.0)
    info = {"parts": len(decomposition)}
    report = VerificationReport()
    report.record(f"{label}_identity", worst / scale, NORM_TOL, seed, info)
    report.record(f"{label}_monotone", max(rise, 0.0), 1e-12 * scale, seed, info)
    report.record(f"{label}_final", abs(deficits[-1]), NORM_TOL * abs(m.total()), seed, info)
    return report


def theorem5_suite(
    m: ProjectionMeasure,
    mu: VectorMeasure,
    registry: DirectionRegistry,
    trials: int,
    seed: int,
    norm_tol: float = NORM_TOL,
    decompositions: int | None = None,
) -> VerificationReport:
    """Norm, orthogonality and additivity laws on random registered projections."""
    rng = np.random.default_rng(seed)
    space = m.space
    scale = _scale(m)
    worst_norm = worst_ortho = worst_add = worst_comp = 0.0
    for _ in range(trials):
        p = random_projection(space, rng, registry)
        mp = evaluate(mu, p)
        worst_norm = max(worst_norm, abs(mp.norm2() - m(p)) / scale)
        q = random_orthogonal_partner(p, rng, registry)
        mq = evaluate(mu, q)
        worst_ortho = max(worst_ortho, abs(mp.inner(mq)))
        diff = evaluate(mu, add_orthogonal(p, q)) - mp - mq
        worst_add = max(worst_add, math.sqrt(diff.norm2()))
        worst_comp = max(worst_comp, diff.max_abs())

    if decompositions is None:
        decompositions = max(1, trials // 10) if trials else 0
    one = evaluate(mu, identity(space))
    worst_dec_ortho = worst_dec_sum = 0.0
    truncations = VerificationReport()
    for _ in range(decompositions):
        parts = random_decomposition(registry, rng)
        vecs = [evaluate(mu, p) for p in parts]
        for j, a in enumerate(vecs):
            for b in vecs[:j]:
                worst_dec_ortho = max(worst_dec_ortho, abs(a.inner(b)))
        total = HVector.zeros(space)
        for a in vecs:
            total = total + a
        worst_dec_sum = max(worst_dec_sum, (total - one).max_abs())
        truncations.extend(lemma3_truncation_check(m, mu, parts, seed))

    info = {"trials": trials, "directions": len(registry), "atoms": space.ids}
    report = VerificationReport()
    report.record("norm_law", worst_norm, norm_tol, seed, info)
    report.record("orthogonality_law", worst_ortho, ORTHO_TOL, seed, info)
    report.record("additivity_law", worst_add, ADD_TOL, seed, info)
    report.record("additivity_componentwise", worst_comp, ADD_TOL, seed, info)
    info = {"decompositions": decompositions, **info}
    report.record("decomposition_orthogonal", worst_dec_ortho, ORTHO_TOL, seed, info)
    report.record("decomposition_sum", worst_dec_sum, ADD_TOL, seed, info)
    for name in ("truncation_identity", "truncation_monotone", "truncation_final"):
        recs = [r for r in truncations.records if r.check == name]
        if recs:
            worst = max(recs, key=lambda r: r.max_violation - r.tolerance)
            report.record(name, worst.max_violation, worst.tolerance, seed, info)
    return report


def non_gleason_residual(m: ProjectionMeasure, count: int = 64, seed: int = 0) -> float:
    """Relative residual of the best linear-functional fit over ``count`` random directions."""
    return linear_fit_residual(m, random_bloch_set(count, seed))


def corrupt(mu: VectorMeasure, index: int, atom: int = 0, delta: float = 1e-3) -> VectorMeasure:
    """Copy of mu with one stored number perturbed (fault injection).

    ``index`` 0 perturbs h0 at ``atom``; otherwise the h1 entry of that
    direction's quadruple.
    """
    sols = {k: np.array(v) for k, v in mu.solutions.items()}
    base = mu.base
    if index == 0:
        h = np.array(base.h.values)
        h[atom] += delta
        base = DensityPair(ScalarField(mu.space, h), base.k)
    else:
        sols[index][atom, 0] += delta
    for v in sols.values():
        v.setflags(write=False)
    return VectorMeasure(mu.space, base, mu.sign, mu.directions, sols)


def canonical_decomposition(registry: DirectionRegistry) -> list[CanonicalProjection]:
    """Fixed four-part decomposition of 1 used by the deterministic checks.

    Off the first atom: e11 and e22 blocks. On the first atom: the rank-one pair
    of direction 1 if there is one, else e11 and e22 again.
    """
    space = registry.space
    rest = ~space.singleton(0)
    first = space.singleton(0)
    empty = space.empty()
    parts = [diagonal(rest, empty), diagonal(empty, rest)]
    if len(registry):
        d = registry[1]
        parts += [subalgebra_projection(d, first, empty), subalgebra_projection(d, empty, first)]
    else:
        parts += [diagonal(first, empty), diagonal(empty, first)]
    return [p for p in parts if not p.is_zero()]
