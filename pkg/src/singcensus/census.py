"""Numerical census of 0-stable singularities and the homogeneous germ checker.

``run_census`` solves the singularity systems of a generic affine map and
compares verified endpoint counts with the closed-form table.
``check_germ`` runs the genericity probes on a homogeneous map: every probe is
a square system whose verified solutions would be counterexamples.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Iterable, Sequence

import numpy as np

from .invariants import InvariantTable, compute_invariants, determinacy_gate
from .jets import (
    ClassifyTolerances,
    Kind,
    SingularitySystem,
    build_system,
    classify_point,
    jacobian_matrix,
)
from .polycore import CompiledPolys, PolyMap, deform, random_map, subseed
from .tracker import SolutionSet, TrackSettings, relative_residuals, solve

log = logging.getLogger(__name__)

CLASSES = ("A3", "A2A1", "A1cube", "A2", "A1sq")
CLASS_KIND = {
    "A3": Kind.SWALLOWTAIL,
    "A2A1": Kind.CUSP_FOLD_PAIR,
    "A1cube": Kind.TRIPLE_FOLD,
    "A2": Kind.CUSP,
    "A1sq": Kind.DOUBLE_FOLD_CURVE,
}
SYMMETRY = {"A3": 1, "A2A1": 1, "A1cube": 6, "A2": 1, "A1sq": 1}
DISCARD_KEYS = ("at_infinity", "failed", "singular", "diagonal", "duplicate", "failed_verification")

FAILURE_BUDGET = 0.05
DISTINCT_REL = 1e-6
WITNESS_RESIDUAL = 1e-8


class CensusError(RuntimeError):
    pass


def distinct(a: np.ndarray, b: np.ndarray, rel: float = DISTINCT_REL) -> bool:
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return bool(np.linalg.norm(a - b) > rel * scale)


def split_blocks(point: np.ndarray, nblocks: int) -> list[np.ndarray]:
    return [np.asarray(point[3 * b : 3 * b + 3]) for b in range(nblocks)]


def pairwise_distinct(blocks: Sequence[np.ndarray]) -> bool:
    return all(distinct(blocks[i], blocks[j]) for i in range(len(blocks)) for j in range(i + 1, len(blocks)))


# -- census -----------------------------------------------------------------------------


@dataclass
class ClassBlock:
    name: str
    kind: str
    total_paths: int
    raw_endpoints: int
    filtered_count: int
    symmetry_factor: int
    final_count: int
    formula_count: int
    match: bool
    discarded: dict[str, int]
    path_stats: dict[str, int]
    inconclusive: bool = False
    notes: list[str] = field(default_factory=list)
    conventions: dict | None = None

    def to_json_obj(self) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind,
            "total_paths": self.total_paths,
            "raw_endpoints": self.raw_endpoints,
            "filtered_count": self.filtered_count,
            "symmetry_factor": self.symmetry_factor,
            "final_count": self.final_count,
            "formula_count": self.formula_count,
            "match": self.match,
            "inconclusive": self.inconclusive,
            "discarded": dict(self.discarded),
            "path_stats": dict(self.path_stats),
            "notes": list(self.notes),
        }
        if self.conventions is not None:
            out["conventions"] = dict(self.conventions)
        return out


@dataclass
class CensusReport:
    degrees: tuple[int, int, int]
    seed: int
    admissible: bool
    supported_by_theorem: bool
    blocks: dict[str, ClassBlock]
    total_paths: int
    runtime_seconds: float = 0.0
    invariants: InvariantTable | None = None

    @property
    def all_match(self) -> bool:
        return all(b.match for b in self.blocks.values())

    @property
    def inconclusive(self) -> bool:
        return any(b.inconclusive for b in self.blocks.values())

    @property
    def exit_code(self) -> int:
        if self.inconclusive:
            return 3
        return 0 if self.all_match else 1

    def to_json_obj(self, include_timing: bool = False) -> dict:
        out = {
            "report": "census",
            "degrees": list(self.degrees),
            "seed": self.seed,
            "admissible": self.admissible,
            "supported_by_theorem": self.supported_by_theorem,
            "classes": {k: b.to_json_obj() for k, b in self.blocks.items()},
            "total_paths": self.total_paths,
            "all_match": self.all_match,
            "inconclusive": self.inconclusive,
        }
        if include_timing:
            out["runtime_seconds"] = round(self.runtime_seconds, 3)
        return out


def _verify(cls: str, F: PolyMap, fA: CompiledPolys, point: np.ndarray, tol: ClassifyTolerances) -> str:
    """'ok', 'diagonal' or 'failed_verification' for one regular endpoint."""
    nb = {"A3": 1, "A2": 1, "A2A1": 2, "A1sq": 2, "A1cube": 3}[cls]
    pts = split_blocks(point, nb)
    if nb > 1 and not pairwise_distinct(pts):
        return "diagonal"
    labels = [classify_point(F, p, tol).label for p in pts]
    want = {
        "A3": ["Swallowtail"],
        "A2": ["Cusp"],
        "A2A1": ["Cusp", "Fold"],
        "A1sq": ["Fold", "Fold"],
        "A1cube": ["Fold", "Fold", "Fold"],
    }[cls]
    if labels != want:
        return "failed_verification"
    if nb > 1:
        vals = fA.values(np.array(pts))
        scale = fA.abs_scale(np.array(pts)).max(axis=0) + 1e-300
        if np.any(np.abs(vals[1:] - vals[0]) / scale > WITNESS_RESIDUAL):
            return "failed_verification"
    return "ok"


def census_class(
    F: PolyMap,
    cls: str,
    formula: int,
    seed: int,
    settings: TrackSettings,
    chart: int = 1,
    tol: ClassifyTolerances = ClassifyTolerances(),
) -> tuple[ClassBlock, list[np.ndarray]]:
    """Solve one class's system and count verified endpoints; also returns them."""
    kind = CLASS_KIND[cls]
    ss = build_system(F, kind, chart=chart, seed=subseed(seed, f"system:{cls}"))
    factor = SYMMETRY[cls]
    discarded = dict.fromkeys(DISCARD_KEYS, 0)
    notes = []
    if ss.inconsistent or ss.system is None:
        notes.append("system inconsistent: no solutions" if ss.inconsistent else "system degenerate")
        stats = {"converged": 0, "diverged_to_infinity": 0, "singular_endpoint": 0, "failed": 0}
        block = ClassBlock(cls, kind.value, 0, 0, 0, factor, 0, formula, formula == 0, discarded, stats,
                           inconclusive=ss.degenerate, notes=notes)
        return block, []
    st = settings.with_(seed=subseed(seed, f"tracker:{cls}"))
    sol = solve(ss.system, st)
    fA = CompiledPolys(F.components, with_jacobian=False)
    stats = sol.path_stats
    discarded["at_infinity"] = stats["diverged_to_infinity"]
    discarded["failed"] = stats["failed"]
    nb = ss.point_blocks
    for q in sol.singular_points:
        if nb > 1 and not pairwise_distinct(split_blocks(q, nb)):
            discarded["diagonal"] += 1
        else:
            discarded["singular"] += 1
    kept = []
    for s in sol.solutions:
        discarded["duplicate"] += s.cluster_size - 1
        verdict = _verify(cls, F, fA, s.point, tol)
        if verdict == "ok":
            kept.append(s.point)
        else:
            discarded[verdict] += 1
    if any(s.cluster_size > 1 for s in sol.solutions):
        notes.append("regular endpoint reached by more than one path")
    filtered = len(kept)
    raw = sol.total_paths
    assert raw == filtered + sum(discarded.values()), (raw, filtered, discarded)
    inconclusive = sol.failure_rate > FAILURE_BUDGET
    conventions = None
    if cls == "A1sq":
        halved_ok = filtered % 2 == 0
        conventions = {
            "raw": filtered,
            "halved": filtered // 2 if halved_ok else None,
            "raw_matches": filtered == formula,
            "halved_matches": halved_ok and filtered // 2 == formula,
        }
        if conventions["raw_matches"] and not conventions["halved_matches"]:
            conventions["determination"] = "raw"
        elif conventions["halved_matches"] and not conventions["raw_matches"]:
            conventions["determination"] = "halved"
            factor = 2
        elif conventions["raw_matches"]:
            conventions["determination"] = "ambiguous"
        else:
            conventions["determination"] = "none"
    if filtered % factor:
        notes.append(f"filtered count {filtered} not divisible by symmetry factor {factor}")
        final, match = filtered // factor, False
    else:
        final = filtered // factor
        match = final == formula
    block = ClassBlock(cls, kind.value, sol.total_paths, raw, filtered, factor, final, formula,
                       match and not inconclusive, discarded, dict(stats), inconclusive, notes, conventions)
    return block, kept


def run_census(
    F: PolyMap | None = None,
    degrees: Iterable[int] | None = None,
    seed: int = 0,
    classes: Sequence[str] = ("A3", "A2A1", "A1cube"),
    settings: TrackSettings = TrackSettings(),
    override_gate: bool = False,
    chart: int = 1,
    tol: ClassifyTolerances = ClassifyTolerances(),
) -> CensusReport:
    t0 = time.perf_counter()
    if F is None:
        if degrees is None:
            raise ValueError("give either a map or degrees")
        F = random_map(tuple(degrees), homogeneous=False, seed=subseed(seed, "census-map"))
    degs = tuple(F.degrees)
    if len(degs) != 3 or F.nvars != 3:
        raise ValueError("census needs a map C^3 -> C^3")
    bad = [c for c in classes if c not in CLASSES]
    if bad:
        raise ValueError(f"unknown classes {bad}; choose from {CLASSES}")
    admissible, reason = determinacy_gate(degs)
    if not admissible and not override_gate:
        raise CensusError(f"degrees {degs} are not admissible ({reason}); pass override_gate to run anyway")
    table = compute_invariants(degs)
    formula = table.counts()
    blocks = {}
    for cls in CLASSES:
        if cls in classes:
            blocks[cls], _ = census_class(F, cls, formula[cls], seed, settings, chart, tol)
            log.info("census %s %s: %d (formula %d)", degs, cls, blocks[cls].final_count, formula[cls])
    return CensusReport(
        degrees=degs,
        seed=seed,
        admissible=admissible,
        supported_by_theorem=admissible,
        blocks=blocks,
        total_paths=sum(b.total_paths for b in blocks.values()),
        runtime_seconds=time.perf_counter() - t0,
        invariants=table,
    )


# -- germ checker ---------------------------------------------------------------------------

GERM_CONDITIONS = ("1", "2", "4", "5-swallowtail", "5-corank2", "6", "7")
CHEAP = ("1", "2", "5-swallowtail", "5-corank2")


@dataclass
class ConditionResult:
    condition: str
    status: str  # pass | fail | skipped
    witnesses: list[list[complex]] = field(default_factory=list)
    probes: list[dict] = field(default_factory=list)
    inconclusive: bool = False
    reason: str | None = None

    def to_json_obj(self) -> dict:
        return {
            "status": self.status,
            "inconclusive": self.inconclusive,
            "reason": self.reason,
            "witnesses": [[[float(z.real), float(z.imag)] for z in w] for w in self.witnesses],
            "probes": self.probes,
        }


@dataclass
class GermReport:
    degrees: tuple[int, int, int]
    conditions: dict[str, ConditionResult]
    verdict: str
    gate_reason: str | None = None

    @property
    def exit_code(self) -> int:
        return {"finitely-determined-evidence": 0, "counterexample-found": 1, "inconclusive": 3}[self.verdict]

    def to_json_obj(self) -> dict:
        return {
            "report": "germ",
            "degrees": list(self.degrees),
            "verdict": self.verdict,
            "gate_reason": self.gate_reason,
            "conditions": {k: v.to_json_obj() for k, v in self.conditions.items()},
        }


def _endpoints(sol: SolutionSet) -> list[np.ndarray]:
    return [s.point for s in sol.solutions] + list(sol.singular_points)


def _base_residual(ss: SingularitySystem, point: np.ndarray) -> float:
    eqs = [g for g in ss.base_equations if not g.is_zero()]
    return float(relative_residuals(CompiledPolys(eqs, with_jacobian=False), point[None, :])[0])


def _germ_probe(
    F0: PolyMap,
    kind: Kind,
    seed: int,
    settings: TrackSettings,
    is_witness: Callable[[SingularitySystem, np.ndarray], bool],
    **kw,
) -> tuple[list[np.ndarray], dict]:
    ss = build_system(F0, kind, seed=seed, germ=True, **kw)
    info = {"kind": kind.value, **{k: (list(v) if isinstance(v, tuple) else v) for k, v in kw.items()}}
    if ss.inconsistent:
        info.update(total_paths=0, failure_rate=0.0, endpoints=0)
        return [], info
    if ss.system is None:
        raise CensusError(f"degenerate {kind.value} probe")
    sol = solve(ss.system, settings.with_(seed=subseed(seed, "tracker")))
    cands = _endpoints(sol)
    wit = [p for p in cands if _base_residual(ss, p) < WITNESS_RESIDUAL and is_witness(ss, p)]
    info.update(
        total_paths=sol.total_paths,
        failure_rate=round(sol.failure_rate, 6),
        endpoints=len(cands),
        regular=len(sol.solutions),
        singular=len(sol.singular_points),
    )
    return wit, info


def _nonzero(p: np.ndarray) -> bool:
    return bool(np.linalg.norm(p) > 1e-8)


def check_germ(
    F0: PolyMap,
    settings: TrackSettings = TrackSettings(),
    seed: int = 0,
    patches: int = 2,
    conditions: Sequence[str] = GERM_CONDITIONS,
    stop_early: bool = True,
    tol: ClassifyTolerances = ClassifyTolerances(),
) -> GermReport:
    """Probe the genericity conditions for a homogeneous map germ.

    Each condition is probed on ``patches`` independent random affine patches;
    it passes only if no run yields a verified witness. With ``stop_early``,
    the expensive multi-point probes (4), (6), (7) are skipped once a cheap
    probe has produced a counterexample.
    """
    degs = tuple(F0.degrees)
    if not F0.is_homogeneous():
        raise ValueError("check_germ needs a homogeneous map")
    ok, reason = determinacy_gate(degs)
    if not ok:
        res = {c: ConditionResult(c, "skipped", reason="gate") for c in conditions}
        return GermReport(degs, res, "counterexample-found", gate_reason=reason)

    def rank_le(A: np.ndarray, r: int) -> bool:
        s = np.linalg.svd(A, compute_uv=False)
        return bool(s[0] == 0 or s[r] / s[0] < tol.rank)

    fjac = [[c for c in row] for row in jacobian_matrix(F0)]
    dF = CompiledPolys(F0.components)

    def jac_at(p):
        return dF.values_and_jacobian(np.asarray(p)[None, :])[1][0]

    def w_any(ss, p):
        return True

    def w_corank2(ss, p):
        return rank_le(jac_at(p), 1)

    def w_swallowtail(ss, p):
        return classify_point(F0, p, tol).is_swallowtail_or_worse()

    def w_cuspfold(ss, p):
        a, b = split_blocks(p, 2)
        return distinct(a, b) and _nonzero(b) and classify_point(F0, a, tol).is_cusp_or_worse()

    def w_triple(ss, p):
        blocks = split_blocks(p, 3)
        return pairwise_distinct(blocks) and all(_nonzero(b) for b in blocks)

    def w_tangency(ss, p):
        a, b = split_blocks(p, 2)
        if not (distinct(a, b) and _nonzero(b)):
            return False
        return rank_le(np.concatenate([jac_at(a), jac_at(b)], axis=1), 2)

    probes: dict[str, list[tuple[Kind, Callable, dict]]] = {
        "1": [(Kind.ZERO_FIBER, w_any, {})],
        "2": [(Kind.PAIR_VANISH_PROBE, w_any, {"components": c}) for c in ((1, 2), (1, 3), (2, 3))],
        "4": [(Kind.TRIPLE_FOLD, w_triple, {})],
        "5-swallowtail": [(Kind.SWALLOWTAIL, w_swallowtail, {"chart": i}) for i in (1, 2, 3)],
        "5-corank2": [(Kind.CORANK_TWO_PROBE, w_corank2, {})],
        "6": [(Kind.CUSP_FOLD_PAIR, w_cuspfold, {"chart": 1})],
        "7": [(Kind.TANGENCY_PROBE, w_tangency, {})],
    }
    order = [c for c in GERM_CONDITIONS if c in conditions and c in CHEAP] + [
        c for c in GERM_CONDITIONS if c in conditions and c not in CHEAP
    ]
    results: dict[str, ConditionResult] = {}
    failed_any = False
    for cond in order:
        if failed_any and stop_early and cond not in CHEAP:
            results[cond] = ConditionResult(cond, "skipped", reason="counterexample already found")
            continue
        res = ConditionResult(cond, "pass")
        for kind, witness, kw in probes[cond]:
            for patch in range(patches):
                sd = subseed(seed, f"germ:{cond}:{kind.value}:{kw}:{patch}")
                wit, info = _germ_probe(F0, kind, sd, settings, witness, **kw)
                info["patch"] = patch
                info["witnesses"] = len(wit)
                res.probes.append(info)
                if info.get("failure_rate", 0) > FAILURE_BUDGET:
                    res.inconclusive = True
                if wit:
                    res.status = "fail"
                    res.witnesses.extend(wit[:4])
        if cond == "2":
            _finite_ray_clause(F0, degs, seed, settings, res)
        if res.status == "fail":
            failed_any = True
        results[cond] = res
    for cond in conditions:
        results.setdefault(cond, ConditionResult(cond, "skipped"))
    results = {c: results[c] for c in GERM_CONDITIONS if c in results}
    if any(r.status == "fail" for r in results.values()):
        verdict = "counterexample-found"
    elif any(r.inconclusive for r in results.values()):
        verdict = "inconclusive"
    else:
        verdict = "finitely-determined-evidence"
    return GermReport(degs, results, verdict)


def _finite_ray_clause(F0: PolyMap, degs, seed: int, settings: TrackSettings, res: ConditionResult) -> None:
    # when the other two degrees share the factor 2, C(F) meets V(f_k) in finitely many rays
    for k in (1, 2, 3):
        others = [degs[j] for j in range(3) if j != k - 1]
        if gcd(*others) != 2:
            continue
        for patch in range(2):
            ss = build_system(F0, Kind.PAIR_VANISH_PROBE, seed=subseed(seed, f"germ:2b:{k}:{patch}"),
                              germ=True, components=(k,))
            info = {"kind": "PairVanishProbe", "components": [k], "patch": patch, "clause": "finite-rays",
                    "witnesses": 0}
            if ss.inconsistent:
                info.update(total_paths=0, rays=0)
                res.probes.append(info)
                continue
            sol = solve(ss.system, settings.with_(seed=subseed(seed, f"germ:2b:tracker:{k}:{patch}")))
            info.update(total_paths=sol.total_paths, rays=len(sol.solutions), singular=len(sol.singular_points))
            res.probes.append(info)
            if sol.failure_rate > FAILURE_BUDGET:
                res.inconclusive = True
            if sol.singular_points:
                # a positive-dimensional piece of C(F) inside V(f_k)
                res.status = "fail"
                info["witnesses"] = len(sol.singular_points)
                res.witnesses.extend(sol.singular_points[:4])


# -- deformation ---------------------------------------------------------------------------


@dataclass
class DeformationRow:
    t: complex
    count: int
    max_norm: float
    match: bool

    def to_json_obj(self) -> dict:
        return {"t": [self.t.real, self.t.imag], "count": self.count, "max_norm": self.max_norm, "match": self.match}


def deformation_experiment(
    F: PolyMap,
    t_values: Sequence[complex],
    seed: int = 0,
    settings: TrackSettings = TrackSettings(),
) -> list[DeformationRow]:
    """Swallowtail count and spread for ``deform(F, t)`` over several t."""
    formula = compute_invariants(F.degrees).countA3
    rows = []
    for t in t_values:
        Ft = deform(F, complex(t))
        block, pts = census_class(Ft, "A3", formula, seed, settings)
        mx = max((float(np.linalg.norm(p)) for p in pts), default=0.0)
        rows.append(DeformationRow(complex(t), block.final_count, mx, block.match))
    return rows
