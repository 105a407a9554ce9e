"""Command-line driver: reports to stdout as compact JSON, diagnostics to stderr.

Exit codes: 0 success or match, 1 mismatch or counterexample, 2 usage or
input error, 3 inconclusive (path-failure budget exceeded).
All randomness derives from ``--seed`` (default 0) through per-purpose sub-seeds.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import census as cen
from .invariants import compute_invariants, determinacy_gate
from .jets import ClassifyTolerances, ConfigError
from .polycore import PolyError, PolyMap, PolyParseError, dumps, parse, random_map, subseed
from .tracker import SolverError, SquareSystem, TrackSettings, solve

DEFAULT_SEED = 0
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    subcommand: str
    degrees: tuple[int, ...] | None = None
    seed: int = DEFAULT_SEED
    input: str | None = None
    output: str | None = None
    classes: tuple[str, ...] = ("A3", "A2A1", "A1cube")
    settings: TrackSettings = TrackSettings()
    tolerances: ClassifyTolerances = ClassifyTolerances()
    override_gate: bool = False
    verbosity: int = 0


def _degrees(text: list[str] | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        out = tuple(int(v) for v in text)
    except ValueError:
        raise UsageError(f"--degrees: expected integers, got {' '.join(text)}") from None
    if len(out) != 3 or min(out) < 1:
        raise UsageError(f"--degrees: need three positive integers, got {' '.join(text)}")
    return out


def _classes(text: str) -> tuple[str, ...]:
    out = tuple(c.strip() for c in text.split(",") if c.strip())
    bad = [c for c in out if c not in cen.CLASSES]
    if bad or not out:
        raise UsageError(f"--classes: unknown class {','.join(bad) or text!r}; choose from {','.join(cen.CLASSES)}")
    return out


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"--t: cannot parse {text!r} as a complex number") from None


def _read_map(path: str) -> PolyMap:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"--map: {exc}") from None
    F = parse(text)
    if F.nvars != 3 or len(F) != 3:
        raise UsageError("--map: need three components in three variables")
    return F


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="singcensus", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0, help="diagnostics on stderr")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--parallelism", type=int, default=1)
    common.add_argument("--path-tol", type=float, default=TrackSettings.path_tol)
    common.add_argument("--singular-cond", type=float, default=TrackSettings.singular_cond)
    common.add_argument("--rank-tol", type=float, default=ClassifyTolerances.rank)
    common.add_argument("--kernel-tol", type=float, default=ClassifyTolerances.kernel)
    common.add_argument("--timing", action="store_true", help="include runtime in the report")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    for name in ("invariants", "gate"):
        p = sub.add_parser(name)
        p.add_argument("degrees", nargs=3)
    p = sub.add_parser("random-map", parents=[common])
    p.add_argument("--degrees", nargs=3, required=True)
    p.add_argument("--homogeneous", action="store_true")
    p = sub.add_parser("census", parents=[common])
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--degrees", nargs=3)
    g.add_argument("--map")
    p.add_argument("--classes", default="A3,A2A1,A1cube")
    p.add_argument("--chart", type=int, default=1, choices=(1, 2, 3))
    p.add_argument("--override-gate", action="store_true")
    p = sub.add_parser("check-germ", parents=[common])
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--map")
    g.add_argument("--degrees", nargs=3, help="use a random homogeneous map of these degrees")
    p.add_argument("--patches", type=int, default=2)
    p = sub.add_parser("solve", parents=[common])
    p.add_argument("--system", required=True)
    p = sub.add_parser("deform", parents=[common])
    p.add_argument("--map", required=True)
    p.add_argument("--t", nargs="+", required=True)
    return ap


def _settings(a) -> tuple[TrackSettings, ClassifyTolerances]:
    try:
        st = TrackSettings(parallelism=a.parallelism, path_tol=a.path_tol, singular_cond=a.singular_cond)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return st, ClassifyTolerances(rank=a.rank_tol, kernel=a.kernel_tol)


def _emit(obj: dict, output: str | None) -> None:
    text = dumps(obj)
    if output:
        Path(output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def run(a) -> int:
    cmd = a.subcommand
    if cmd == "invariants":
        _emit(compute_invariants(_degrees(a.degrees)).to_json_obj(), None)
        return EXIT_OK
    if cmd == "gate":
        d = _degrees(a.degrees)
        ok, reason = determinacy_gate(d)
        _emit({"degrees": list(d), "admissible": ok, "reason": reason}, None)
        return EXIT_OK if ok else EXIT_FAIL

    st, tol = _settings(a)
    output = a.output
    if cmd == "random-map":
        F = random_map(_degrees(a.degrees), homogeneous=a.homogeneous, seed=a.seed)
        _emit(F.to_json_obj(), output)
        return EXIT_OK
    if cmd == "census":
        F = _read_map(a.map) if a.map else None
        try:
            rep = cen.run_census(
                F, degrees=_degrees(a.degrees), seed=a.seed, classes=_classes(a.classes),
                settings=st, override_gate=a.override_gate, chart=a.chart, tol=tol,
            )
        except cen.CensusError as exc:
            print(f"census: {exc}", file=sys.stderr)
            return EXIT_FAIL
        _emit(rep.to_json_obj(include_timing=a.timing), output)
        return rep.exit_code
    if cmd == "check-germ":
        if a.map:
            F0 = _read_map(a.map)
        else:
            F0 = random_map(_degrees(a.degrees), homogeneous=True, seed=subseed(a.seed, "germ-map"))
        if not F0.is_homogeneous():
            raise UsageError("--map: check-germ needs a homogeneous map")
        rep = cen.check_germ(F0, st, seed=a.seed, patches=a.patches, tol=tol)
        _emit(rep.to_json_obj(), output)
        return rep.exit_code
    if cmd == "solve":
        try:
            system = SquareSystem.parse(Path(a.system).read_text())
        except OSError as exc:
            raise UsageError(f"--system: {exc}") from None
        sol = solve(system, st.with_(seed=a.seed))
        _emit({"report": "solve", **sol.to_json_obj()}, output)
        return EXIT_INCONCLUSIVE if sol.failure_rate > cen.FAILURE_BUDGET else EXIT_OK
    if cmd == "deform":
        F = _read_map(a.map)
        rows = cen.deformation_experiment(F, [_complex(t) for t in a.t], seed=a.seed, settings=st)
        _emit({"report": "deform", "degrees": list(F.degrees), "rows": [r.to_json_obj() for r in rows]}, output)
        return EXIT_OK if all(r.match for r in rows) else EXIT_FAIL
    raise UsageError(f"unknown subcommand {cmd}")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(a.verbose, 2), stream=sys.stderr, format="%(levelname)s %(message)s"
    )
    try:
        return run(a)
    except (UsageError, PolyParseError, PolyError, ConfigError, SolverError, ValueError) as exc:
        print(f"singcensus {a.subcommand}: {exc}", file=sys.stderr)
        return EXIT_USAGE
