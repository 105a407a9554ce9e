"""Regenerate docs/schemas/*.schema.json (version 1)."""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "docs" / "schemas"
D = "https://json-schema.org/draft/2020-12/schema"

nonneg = {"type": "integer", "minimum": 0}
cplx = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
degrees3 = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 3, "maxItems": 3}
path_stats = {
    "type": "object",
    "required": ["converged", "diverged_to_infinity", "singular_endpoint", "failed"],
    "properties": {k: nonneg for k in ("converged", "diverged_to_infinity", "singular_endpoint", "failed")},
    "additionalProperties": False,
}

poly = {
    "type": "object",
    "required": ["terms"],
    "properties": {
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["e", "c"],
                "properties": {"e": {"type": "array", "items": nonneg}, "c": cplx},
                "additionalProperties": False,
            },
        }
    },
    "additionalProperties": False,
}

polymap = {
    "$schema": D,
    "title": "PolyMap / SquareSystem v1",
    "type": "object",
    "required": ["nvars", "components"],
    "properties": {
        "nvars": {"type": "integer", "minimum": 1},
        "degrees": {"type": "array", "items": nonneg},
        "components": {"type": "array", "minItems": 1, "items": poly},
    },
    "additionalProperties": False,
}

ints = {"type": "integer"}
invariants = {
    "$schema": D,
    "title": "InvariantTable v1",
    "type": "object",
    "required": ["d1", "d2", "d3", "s1", "s2", "s3", "P", "c1", "c2", "c3", "countA2", "countA1sq",
                 "countA3", "countA2A1", "countA1cube", "A1cube_bracket", "admissible", "blocking_reason"],
    "properties": {
        **{k: ints for k in ("d1", "d2", "d3", "s1", "s2", "s3", "P", "c1", "c2", "c3",
                             "countA2", "countA1sq", "countA3", "countA2A1", "A1cube_bracket")},
        "countA1cube": {"type": ["integer", "null"]},
        "admissible": {"type": "boolean"},
        "blocking_reason": {"type": ["string", "null"]},
    },
    "additionalProperties": False,
}

gate = {
    "$schema": D,
    "title": "Gate report v1",
    "type": "object",
    "required": ["degrees", "admissible", "reason"],
    "properties": {"degrees": degrees3, "admissible": {"type": "boolean"}, "reason": {"type": "string"}},
    "additionalProperties": False,
}

discard_keys = ("at_infinity", "failed", "singular", "diagonal", "duplicate", "failed_verification")
class_block = {
    "type": "object",
    "required": ["name", "kind", "total_paths", "raw_endpoints", "filtered_count", "symmetry_factor",
                 "final_count", "formula_count", "match", "inconclusive", "discarded", "path_stats", "notes"],
    "properties": {
        "name": {"enum": ["A3", "A2A1", "A1cube", "A2", "A1sq"]},
        "kind": {"type": "string"},
        "total_paths": nonneg,
        "raw_endpoints": nonneg,
        "filtered_count": nonneg,
        "symmetry_factor": {"type": "integer", "minimum": 1},
        "final_count": nonneg,
        "formula_count": ints,
        "match": {"type": "boolean"},
        "inconclusive": {"type": "boolean"},
        "discarded": {
            "type": "object",
            "required": list(discard_keys),
            "properties": {k: nonneg for k in discard_keys},
            "additionalProperties": False,
        },
        "path_stats": path_stats,
        "notes": {"type": "array", "items": {"type": "string"}},
        "conventions": {
            "type": "object",
            "required": ["raw", "halved", "raw_matches", "halved_matches", "determination"],
            "properties": {
                "raw": nonneg,
                "halved": {"type": ["integer", "null"]},
                "raw_matches": {"type": "boolean"},
                "halved_matches": {"type": "boolean"},
                "determination": {"enum": ["raw", "halved", "ambiguous", "none"]},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}
census = {
    "$schema": D,
    "title": "CensusReport v1",
    "type": "object",
    "required": ["report", "degrees", "seed", "admissible", "supported_by_theorem", "classes",
                 "total_paths", "all_match", "inconclusive"],
    "properties": {
        "report": {"const": "census"},
        "degrees": degrees3,
        "seed": nonneg,
        "admissible": {"type": "boolean"},
        "supported_by_theorem": {"type": "boolean"},
        "classes": {"type": "object", "additionalProperties": class_block},
        "total_paths": nonneg,
        "all_match": {"type": "boolean"},
        "inconclusive": {"type": "boolean"},
        "runtime_seconds": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

condition = {
    "type": "object",
    "required": ["status", "inconclusive", "reason", "witnesses", "probes"],
    "properties": {
        "status": {"enum": ["pass", "fail", "skipped"]},
        "inconclusive": {"type": "boolean"},
        "reason": {"type": ["string", "null"]},
        "witnesses": {"type": "array", "items": {"type": "array", "items": cplx}},
        "probes": {"type": "array", "items": {"type": "object", "required": ["kind", "total_paths"]}},
    },
    "additionalProperties": False,
}
germ = {
    "$schema": D,
    "title": "GermReport v1",
    "type": "object",
    "required": ["report", "degrees", "verdict", "gate_reason", "conditions"],
    "properties": {
        "report": {"const": "germ"},
        "degrees": degrees3,
        "verdict": {"enum": ["finitely-determined-evidence", "counterexample-found", "inconclusive"]},
        "gate_reason": {"type": ["string", "null"]},
        "conditions": {
            "type": "object",
            "propertyNames": {"enum": ["1", "2", "4", "5-swallowtail", "5-corank2", "6", "7"]},
            "additionalProperties": condition,
        },
    },
    "additionalProperties": False,
}

solution = {
    "type": "object",
    "required": ["point", "residual", "condition", "cluster_size"],
    "properties": {
        "point": {"type": "array", "items": cplx},
        "residual": {"type": "number"},
        "condition": {"type": "number"},
        "cluster_size": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
solve = {
    "$schema": D,
    "title": "Solve report v1",
    "type": "object",
    "required": ["report", "total_paths", "path_stats", "solutions", "singular_endpoints"],
    "properties": {
        "report": {"const": "solve"},
        "total_paths": nonneg,
        "path_stats": path_stats,
        "solutions": {"type": "array", "items": solution},
        "singular_endpoints": nonneg,
    },
    "additionalProperties": False,
}

deform = {
    "$schema": D,
    "title": "Deformation report v1",
    "type": "object",
    "required": ["report", "degrees", "rows"],
    "properties": {
        "report": {"const": "deform"},
        "degrees": degrees3,
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t", "count", "max_norm", "match"],
                "properties": {"t": cplx, "count": nonneg, "max_norm": {"type": "number"},
                               "match": {"type": "boolean"}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for name, schema in [("polymap", polymap), ("invariants", invariants), ("gate", gate), ("census", census),
                         ("germ", germ), ("solve", solve), ("deform", deform)]:
        (OUT / f"{name}.schema.json").write_text(json.dumps(schema, indent=2) + "\n")
        print("wrote", name)
