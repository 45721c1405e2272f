"""JSON file formats: measure spaces, measures, registries, projections, artifacts.

Every loader raises ``InputError`` on malformed input so the CLI can map it to
exit code 2. Numbers are written with Python's shortest round-trip repr.
"""
from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import CanonicalProjection, bloch_vector, make_projection
from .base_space import AtomicMeasureSpace, BaseProjection, ScalarField, UnimodularField
from .constructor import Direction, DirectionRegistry, VectorMeasure
from .errors import InputError, OrthoMeasureError
from .measure import (
    MINUS_Z,
    PLUS_Z,
    DensityPair,
    ProjectionMeasure,
    StateMeasure,
    TabulatedMeasure,
    abs_nz,
    custom_table,
    quadratic,
)

PHASE_TOL = 1e-9
BUNDLED = ("space", "state", "frame_abs_nz", "table", "registry")


def bundled_path(name: str) -> Path:
    """Path of a bundled example file, e.g. ``bundled_path("state")``."""
    return Path(str(resources.files("orthomeasure") / "data" / f"{name}.json"))


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from exc


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{what}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"{what}: number must be finite")
    return value


def _obj(value: Any, what: str) -> dict:
    if not isinstance(value, dict):
        raise InputError(f"{what}: expected a JSON object")
    return value


def _list(value: Any, what: str) -> list:
    if not isinstance(value, list):
        raise InputError(f"{what}: expected a JSON array")
    return value


def _phase(value: Any, what: str) -> complex:
    value = _obj(value, what)
    z = complex(_number(value.get("re"), f"{what}.re"), _number(value.get("im", 0.0), f"{what}.im"))
    if abs(abs(z) - 1.0) > PHASE_TOL:
        raise InputError(f"{what}: |v| = {abs(z)!r} is not 1")
    # keep bits when already unimodular to the field tolerance
    return z if abs(abs(z) - 1.0) <= 1e-12 else z / abs(z)


def _atom(space: AtomicMeasureSpace, atom: Any, what: str) -> int:
    if not isinstance(atom, str) or atom not in space.ids:
        raise InputError(f"{what}: unknown atom {atom!r}")
    return space.index(atom)


def _wrap(fn):
    """Re-raise domain/structural errors from constructors as input errors."""

    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InputError:
            raise
        except (OrthoMeasureError, KeyError, TypeError) as exc:
            raise InputError(str(exc)) from exc

    inner.__name__ = fn.__name__
    inner.__doc__ = fn.__doc__
    return inner


# measure space


@_wrap
def parse_space(data: Any) -> AtomicMeasureSpace:
    atoms = _list(_obj(data, "space").get("atoms"), "space.atoms")
    pairs = []
    for j, a in enumerate(atoms):
        a = _obj(a, f"atoms[{j}]")
        if not isinstance(a.get("id"), str):
            raise InputError(f"atoms[{j}].id must be a string")
        pairs.append((a["id"], _number(a.get("weight"), f"atoms[{j}].weight")))
    if not pairs:
        raise InputError("space needs at least one atom")
    return AtomicMeasureSpace(pairs)


def space_to_json(space: AtomicMeasureSpace) -> dict:
    return {"atoms": [{"id": a, "weight": float(w)} for a, w in zip(space.ids, space.weights)]}


# projections


@_wrap
def parse_projection(data: Any, space: AtomicMeasureSpace) -> CanonicalProjection:
    data = _obj(data, "projection")
    diag = {}
    for key in ("pi1", "pi2"):
        members = _list(data.get(key, []), key)
        for a in members:
            _atom(space, a, key)
        diag[key] = space.projection(members)
    pi1, pi2 = diag["pi1"], diag["pi2"]
    x = np.zeros(space.n)
    v = np.ones(space.n, dtype=complex)
    supp = np.zeros(space.n, dtype=bool)
    for j, e in enumerate(_list(data.get("off", []), "off")):
        e = _obj(e, f"off[{j}]")
        i = _atom(space, e.get("atom"), f"off[{j}].atom")
        if supp[i]:
            raise InputError(f"off[{j}]: atom {e['atom']!r} listed twice")
        xi = _number(e.get("x"), f"off[{j}].x")
        if not 0.0 < xi < 1.0:
            raise InputError(f"off[{j}].x must lie in (0, 1)")
        supp[i] = True
        x[i] = xi
        v[i] = _phase(e.get("v"), f"off[{j}].v")
    return make_projection(pi1, pi2, BaseProjection(space, supp), ScalarField(space, x), UnimodularField(space, v))


def _phase_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def projection_to_json(p: CanonicalProjection) -> dict:
    ids = p.space.ids
    return {
        "pi1": list(p.pi1.members),
        "pi2": list(p.pi2.members),
        "off": [{"atom": ids[i], "x": p.x[i], "v": _phase_json(p.v[i])} for i in p.supp],
    }


# measures


def _per_atom(space: AtomicMeasureSpace, data: Any, what: str) -> list:
    data = _obj(data, what)
    unknown = set(data) - set(space.ids)
    if unknown:
        raise InputError(f"{what}: unknown atoms {sorted(unknown)}")
    missing = [a for a in space.ids if a not in data]
    if missing:
        raise InputError(f"{what}: missing atoms {missing}")
    return [data[a] for a in space.ids]


def _block(value: Any, what: str) -> np.ndarray:
    rows = _list(value, what)
    if len(rows) != 2:
        raise InputError(f"{what}: expected 2x2 entries [re, im]")
    out = np.zeros((2, 2), dtype=complex)
    for r, row in enumerate(rows):
        row = _list(row, what)
        if len(row) != 2:
            raise InputError(f"{what}: expected 2x2 entries [re, im]")
        for c, entry in enumerate(row):
            entry = _list(entry, what)
            if len(entry) != 2:
                raise InputError(f"{what}: entries are [re, im] pairs")
            out[r, c] = complex(_number(entry[0], what), _number(entry[1], what))
    return out


def _table_bloch(space: AtomicMeasureSpace, literal: Any, what: str) -> tuple[int, np.ndarray]:
    """Atom and Bloch vector of a single-atom rank-one projection literal."""
    p = parse_projection(literal, space)
    parts = [(i, "e11") for i in p.pi1] + [(i, "e22") for i in p.pi2] + [(i, "off") for i in p.supp]
    if len(parts) != 1:
        raise InputError(f"{what}: table entries must be rank-one projections on a single atom")
    i, kind = parts[0]
    if kind == "e11":
        return i, PLUS_Z
    if kind == "e22":
        return i, MINUS_Z
    return i, bloch_vector(p.x[i], p.v[i])


@_wrap
def parse_measure(data: Any, space: AtomicMeasureSpace) -> ProjectionMeasure:
    data = _obj(data, "measure")
    kind = data.get("type")
    if kind == "state":
        blocks: list[np.ndarray | None] = [None] * space.n
        for j, b in enumerate(_list(data.get("blocks"), "blocks")):
            b = _obj(b, f"blocks[{j}]")
            i = _atom(space, b.get("atom"), f"blocks[{j}].atom")
            if blocks[i] is not None:
                raise InputError(f"blocks[{j}]: atom {b['atom']!r} given twice")
            blocks[i] = _block(b.get("d"), f"blocks[{j}].d")
        missing = [space.ids[i] for i, b in enumerate(blocks) if b is None]
        if missing:
            raise InputError(f"state measure: no block for atoms {missing}")
        return StateMeasure(space, np.array(blocks))
    if kind == "frame":
        constants = [_number(c, "constants") for c in _per_atom(space, data.get("constants"), "constants")]
        family = data.get("family")
        params = _obj(data.get("params", {}), "params")
        if family == "abs_nz":
            return abs_nz(space, constants)
        if family == "quadratic":
            a = params.get("a")
            if isinstance(a, dict):
                vecs = _per_atom(space, a, "params.a")
            else:
                vecs = [a] * space.n
            vecs = [[_number(t, "params.a") for t in _list(vec, "params.a")] for vec in vecs]
            return quadratic(space, constants, vecs)
        if family == "custom_table":
            tables = []
            for a, tab in zip(space.ids, _per_atom(space, params.get("table"), "params.table")):
                rows = []
                for j, row in enumerate(_list(tab, f"params.table.{a}")):
                    row = _obj(row, f"params.table.{a}[{j}]")
                    n = [_number(t, "n") for t in _list(row.get("n"), "n")]
                    if len(n) != 3:
                        raise InputError(f"params.table.{a}[{j}].n must have 3 components")
                    rows.append((n, _number(row.get("value"), "value")))
                keys = [np.array(n) for n, _ in rows]
                for n in keys:
                    if not any(np.max(np.abs(k + n)) <= 1e-9 for k in keys):
                        raise InputError(f"params.table.{a}: not closed under n -> -n")
                tables.append(rows)
            return custom_table(space, constants, tables)
        raise InputError(f"unknown frame family {family!r}")
    if kind == "table":
        entries: list[list] = [[] for _ in range(space.n)]
        for j, e in enumerate(_list(data.get("entries"), "entries")):
            e = _obj(e, f"entries[{j}]")
            i, n = _table_bloch(space, e.get("projection"), f"entries[{j}]")
            entries[i].append((n, _number(e.get("value"), f"entries[{j}].value")))
        return TabulatedMeasure(space, entries)
    raise InputError(f"unknown measure type {kind!r}")


# registries


@_wrap
def parse_registry(data: Any, space: AtomicMeasureSpace) -> DirectionRegistry:
    dirs = []
    for j, d in enumerate(_list(_obj(data, "registry").get("directions"), "directions")):
        d = _obj(d, f"directions[{j}]")
        index = d.get("index")
        if isinstance(index, bool) or not isinstance(index, int) or index < 1:
            raise InputError(f"directions[{j}].index must be an integer >= 1")
        xs = [_number(t, f"directions[{j}].x") for t in _per_atom(space, d.get("x"), f"directions[{j}].x")]
        vs = [_phase(t, f"directions[{j}].v") for t in _per_atom(space, d.get("v"), f"directions[{j}].v")]
        dirs.append(Direction(ScalarField(space, xs), UnimodularField(space, vs), index))
    return DirectionRegistry(space, dirs)


def direction_to_json(d: Direction) -> dict:
    ids = d.space.ids
    return {
        "index": d.index,
        "x": {a: d.x[i] for i, a in enumerate(ids)},
        "v": {a: _phase_json(d.v[i]) for i, a in enumerate(ids)},
    }


def registry_to_json(registry: DirectionRegistry) -> dict:
    return {"directions": [direction_to_json(d) for d in registry]}


# artifacts


def artifact_to_json(mu: VectorMeasure, measure_spec: dict | None = None) -> dict:
    ids = mu.space.ids
    out: dict[str, Any] = {"space": space_to_json(mu.space), "sign": mu.sign}
    if measure_spec is not None:
        out["measure"] = measure_spec
    out["base"] = {
        "h0": {a: mu.base.h[i] for i, a in enumerate(ids)},
        "k0": {a: mu.base.k[i] for i, a in enumerate(ids)},
    }
    dirs = []
    for d in mu.directions:
        entry = direction_to_json(d)
        entry["quadruples"] = {a: [float(t) for t in mu.solutions[d.index][i]] for i, a in enumerate(ids)}
        dirs.append(entry)
    out["directions"] = dirs
    return out


@_wrap
def parse_artifact(data: Any) -> tuple[VectorMeasure, ProjectionMeasure | None]:
    data = _obj(data, "artifact")
    space = parse_space(data.get("space"))
    sign = data.get("sign")
    if sign not in (1, -1):
        raise InputError("artifact.sign must be 1 or -1")
    base = _obj(data.get("base"), "base")
    h0 = [_number(t, "base.h0") for t in _per_atom(space, base.get("h0"), "base.h0")]
    k0 = [_number(t, "base.k0") for t in _per_atom(space, base.get("k0"), "base.k0")]
    registry = parse_registry({"directions": [
        {key: d.get(key) for key in ("index", "x", "v")} for d in _list(data.get("directions"), "directions")
    ]}, space)
    sols = {}
    for d, raw in zip(registry, data["directions"]):
        rows = _per_atom(space, _obj(raw, "direction").get("quadruples"), f"directions[{d.index}].quadruples")
        table = np.array([[_number(t, "quadruple") for t in _list(r, "quadruple")] for r in rows])
        if table.shape != (space.n, 4):
            raise InputError(f"direction {d.index}: quadruples must have 4 entries per atom")
        table.setflags(write=False)
        sols[d.index] = table
    mu = VectorMeasure(space, DensityPair(ScalarField(space, h0), ScalarField(space, k0)), sign, registry.directions, sols)
    measure = parse_measure(data["measure"], space) if "measure" in data else None
    return mu, measure
