"""Command-line front end: validate | build | eval | verify.

Exit codes: 0 success, 1 semantic failure, 2 input or parse failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .algebra import CanonicalProjection, diagonal, off_diagonal
from .constructor import Direction, build_vector_measure, evaluate, subalgebra_projection
from .errors import InputError, OrthoMeasureError
from .measure import MINUS_Z, PLUS_Z, ProjectionMeasure, validate
from .verify import (
    NORM_TOL,
    VerificationReport,
    canonical_decomposition,
    corrupt,
    lemma3_truncation_check,
    splitting_oracle_suite,
    matrix_oracle_suite,
    non_gleason_residual,
    random_phase,
    structural_checks,
    theorem5_suite,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
VALIDATE_DIRECTIONS = 32
SPLITTING_SPOT_CHECKS = 16
MIN_TOLERANCE = 1e-15


def _sign(text: str) -> int:
    if text in ("+1", "1"):
        return 1
    if text == "-1":
        return -1
    raise argparse.ArgumentTypeError("sign must be +1 or -1")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_inputs(space_file, measure_file, registry_file=None):
    space = io.parse_space(io.read_json(space_file))
    measure_spec = io.read_json(measure_file)
    m = io.parse_measure(measure_spec, space)
    registry = io.parse_registry(io.read_json(registry_file), space) if registry_file else None
    return space, measure_spec, m, registry


def validation_samples(m: ProjectionMeasure, seed: int) -> list[CanonicalProjection]:
    """Diagonal singletons plus subalgebra projections of seeded random directions.

    Measures defined only at finitely many Bloch vectors are sampled at those
    vectors instead of at random directions.
    """
    space = m.space
    empty = space.empty()
    samples = []
    for i in range(space.n):
        chi = space.singleton(i)
        samples += [diagonal(chi, empty), diagonal(empty, chi), diagonal(chi, chi)]
    table = m.sample_bloch()
    if table is not None:
        for i, keys in enumerate(table):
            chi = space.singleton(i)
            for n in keys:
                if np.allclose(n, PLUS_Z) or np.allclose(n, MINUS_Z):
                    continue
                x = 0.5 * (1.0 + float(n[2]))
                s = math.sqrt(x * (1.0 - x))
                v = complex(float(n[0]), -float(n[1])) / (2.0 * s)
                v /= abs(v)
                samples.append(off_diagonal(space.constant(x), space.unimodular(np.full(space.n, v)), chi))
        return samples
    rng = np.random.default_rng(seed)
    for j in range(VALIDATE_DIRECTIONS):
        x = space.scalar(rng.uniform(0.05, 0.95, size=space.n))
        v = space.unimodular([random_phase(rng) for _ in range(space.n)])
        d = Direction(x, v, j + 1)
        pi1 = space.projection(a for a in space.ids if rng.random() < 0.5)
        pi2 = space.projection(a for a in space.ids if rng.random() < 0.5)
        samples.append(subalgebra_projection(d, pi1, pi2))
    return samples


def cmd_validate(args) -> int:
    _, _, m, _ = _load_inputs(args.space, args.measure)
    report = validate(m, validation_samples(m, args.seed))
    payload = {
        "valid": report.ok,
        "checked": report.checked,
        "violations": [
            {"check": v.check, "atom": v.atom, "magnitude": v.magnitude, "detail": v.detail}
            for v in report.violations
        ],
    }
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    for v in report.violations:
        print(f"violation: {v.check} at atom {v.atom}: {v.magnitude:.3e} {v.detail}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_build(args) -> int:
    _, spec, m, registry = _load_inputs(args.space, args.measure, args.registry)
    mu = build_vector_measure(m, registry, args.sign)
    _emit(io.dumps(io.artifact_to_json(mu, spec)), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    mu, m = io.parse_artifact(io.read_json(args.artifact))
    p = io.parse_projection(io.read_json(args.projection), mu.space)
    vec = evaluate(mu, p)
    ids = mu.space.ids
    norm2 = vec.norm2()
    payload = {
        "first": {a: vec.first[i] for i, a in enumerate(ids)},
        "second": {a: vec.second[i] for i, a in enumerate(ids)},
        "norm2": norm2,
        "m": None,
    }
    status = EXIT_OK
    if m is not None:
        mp = m(p)
        payload["m"] = mp
        if abs(norm2 - mp) > args.tolerance_norm * max(1.0, abs(m.total())):
            print(f"norm law violated: |mu(p)|^2 = {norm2!r}, m(p) = {mp!r}", file=sys.stderr)
            status = EXIT_FAIL
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    return status


def cmd_verify(args) -> int:
    space, _, m, registry = _load_inputs(args.space, args.measure, args.registry)
    mu = build_vector_measure(m, registry, args.sign)
    if args.corrupt:
        mu = corrupt(mu, 1 if len(registry) else 0)
    report = VerificationReport()
    report.extend(matrix_oracle_suite(space, args.seed, args.trials))
    report.extend(structural_checks(m, mu, registry))
    report.extend(lemma3_truncation_check(m, mu, canonical_decomposition(registry), label="truncation_fixed"))
    report.extend(splitting_oracle_suite(SPLITTING_SPOT_CHECKS if args.trials else 0, args.seed))
    report.extend(theorem5_suite(m, mu, registry, args.trials, args.seed, norm_tol=args.tolerance_norm))
    _emit(report.to_jsonl(), args.out)
    if m.sample_bloch() is None:
        print(f"linear-fit relative residual (64 directions): {non_gleason_residual(m):.6f}", file=sys.stderr)
    for r in report.failures():
        print(f"FAILED {r.check}: {r.max_violation:.3e} > {r.tolerance:.1e}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sign", type=_sign, default=1, help="solution branch of the splitting system (+1 or -1)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--tolerance-norm", type=float, default=NORM_TOL, help="tighten the norm-law tolerance")
    common.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="orthomeasure", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check that a measure file is a measure")
    p.add_argument("space")
    p.add_argument("measure")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", parents=[common], help="construct the vector measure and write an artifact")
    p.add_argument("space")
    p.add_argument("measure")
    p.add_argument("registry")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", parents=[common], help="evaluate a built vector measure on a projection")
    p.add_argument("artifact")
    p.add_argument("projection")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", parents=[common], help="run the oracle and law suites")
    p.add_argument("space")
    p.add_argument("measure")
    p.add_argument("registry")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if not MIN_TOLERANCE <= args.tolerance_norm <= NORM_TOL:
        print(f"--tolerance-norm must lie in [{MIN_TOLERANCE:g}, {NORM_TOL:g}]", file=sys.stderr)
        return EXIT_INPUT
    if not 0 <= args.seed < 2**64:
        print("--seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INPUT
    if args.trials < 0:
        print("--trials must be >= 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OrthoMeasureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
