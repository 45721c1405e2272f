"""Regenerate the bundled example files in src/orthomeasure/data/.

Four atoms, an eight-direction registry with engineered coincidences, and
three measures: a state, the |n_z| frame function and a table derived from
the state at the registry's directions.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from orthomeasure import io
from orthomeasure.algebra import diagonal, off_diagonal
from orthomeasure.measure import StateMeasure

DATA = Path(__file__).resolve().parents[1] / "src" / "orthomeasure" / "data"
IDS = ["a", "b", "c", "d"]
WEIGHTS = [1.0, 0.5, 2.0, 1.5]


def phase(turns: float) -> complex:
    t = 2.0 * math.pi * turns
    return complex(math.cos(t), math.sin(t))


def registry_json() -> dict:
    rng = np.random.default_rng(20240607)
    xs = np.round(rng.uniform(0.1, 0.9, size=(8, 4)), 4)
    turns = np.round(rng.uniform(0.0, 1.0, size=(8, 4)), 4)
    vs = [[phase(t) for t in row] for row in turns]
    # direction 3 equals direction 1 at atom b
    xs[2, 1], vs[2][1] = xs[0, 1], vs[0][1]
    # direction 5 is the complement of direction 2 at atom c
    xs[4, 2], vs[4][2] = 1.0 - xs[1, 2], -vs[1][2]
    # direction 6 repeats direction 1 at atom d and swaps direction 4 at atom a
    xs[5, 3], vs[5][3] = xs[0, 3], vs[0][3]
    xs[5, 0], vs[5][0] = 1.0 - xs[3, 0], -vs[3][0]
    # direction 7 sits on the equator of the Bloch sphere at atom a
    xs[6, 0] = 0.5
    return {
        "directions": [
            {
                "index": j + 1,
                "x": {a: float(xs[j, i]) for i, a in enumerate(IDS)},
                "v": {a: {"re": vs[j][i].real, "im": vs[j][i].imag} for i, a in enumerate(IDS)},
            }
            for j in range(8)
        ]
    }


STATE = {
    "type": "state",
    "blocks": [
        {"atom": "a", "d": [[[0.7, 0.0], [0.2, -0.1]], [[0.2, 0.1], [0.3, 0.0]]]},
        {"atom": "b", "d": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]},
        {"atom": "c", "d": [[[0.25, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.25, 0.0]]]},
        {"atom": "d", "d": [[[0.4, 0.0], [0.0, 0.3]], [[0.0, -0.3], [0.6, 0.0]]]},
    ],
}

FRAME = {
    "type": "frame",
    "family": "abs_nz",
    "params": {},
    "constants": {"a": 2.0, "b": 1.0, "c": 0.5, "d": 3.0},
}


def table_json(space, registry) -> dict:
    m = io.parse_measure(STATE, space)
    assert isinstance(m, StateMeasure)
    entries = []
    empty = space.empty()
    for i, a in enumerate(IDS):
        chi = space.singleton(i)
        for p in (diagonal(chi, empty), diagonal(empty, chi)):
            entries.append({"projection": io.projection_to_json(p), "value": m(p)})
        for d in registry:
            for x, v in ((d.x, d.v), d.complement_pair()):
                p = off_diagonal(x, v, chi)
                entries.append({"projection": io.projection_to_json(p), "value": m(p)})
    return {"type": "table", "entries": entries}


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    space_obj = {"atoms": [{"id": a, "weight": w} for a, w in zip(IDS, WEIGHTS)]}
    space = io.parse_space(space_obj)
    reg_obj = registry_json()
    registry = io.parse_registry(reg_obj, space)
    files = {
        "space": space_obj,
        "registry": reg_obj,
        "state": STATE,
        "frame_abs_nz": FRAME,
        "table": table_json(space, registry),
    }
    for name, obj in files.items():
        (DATA / f"{name}.json").write_text(io.dumps(obj), encoding="utf-8")


if __name__ == "__main__":
    main()
