"""JSON schemas of the files the command-line tool writes.

``validate(kind, obj)`` raises :class:`jsonschema.ValidationError` on mismatch.
"""

from __future__ import annotations

import jsonschema

_COUNT = {"type": "integer", "minimum": 0}
_RATE = {"type": ["number", "null"], "minimum": 0, "maximum": 1}
_NUM_OR_NULL = {"type": ["number", "null"]}
_NAME_PAIR = {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}
_INDEX_OR_NAME_PAIR = {
    "type": "array",
    "items": {"type": ["string", "integer"]},
    "minItems": 2,
    "maxItems": 2,
}

GRAPH = {
    "type": "object",
    "additionalProperties": False,
    "required": ["nodes", "edges"],
    "properties": {
        "nodes": {"type": "array", "items": {"type": "string"}, "uniqueItems": True},
        "edges": {"type": "array", "items": _NAME_PAIR},
    },
}

PRIORS = {
    "type": "array",
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": ["tail_name", "head_name"],
        "properties": {"tail_name": {"type": "string"}, "head_name": {"type": "string"}},
    },
}

EVAL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["missing", "extra", "reversed", "shd", "qc3", "retained_rate", "detected_rate"],
    "properties": {
        "missing": _COUNT,
        "extra": _COUNT,
        "reversed": _COUNT,
        "shd": _COUNT,
        "qc3": _COUNT,
        "retained_rate": _RATE,
        "detected_rate": _RATE,
    },
}

_EDGE_LIST = {"type": "array", "items": _INDEX_OR_NAME_PAIR}

REPAIR_LOG = {
    "type": "object",
    "additionalProperties": False,
    "required": ["rounds", "forbidden_pairs", "records"],
    "properties": {
        "rounds": _COUNT,
        "forbidden_pairs": _EDGE_LIST,
        "records": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["iteration", "suspected", "reversed", "removed", "forced_removed", "priors", "graph_edges"],
                "properties": {
                    "iteration": _COUNT,
                    **{k: _EDGE_LIST for k in ("suspected", "reversed", "removed", "forced_removed", "priors", "graph_edges")},
                },
            },
        },
    },
}

LEARN = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "seed", "n_rows", "priors", "score", "graph", "eval"],
    "properties": {
        "command": {"const": "learn"},
        "seed": {"type": "integer"},
        "n_rows": _COUNT,
        "priors": PRIORS,
        "score": {"type": "number"},
        "graph": GRAPH,
        "eval": {"oneOf": [EVAL, {"type": "null"}]},
    },
}

DETECT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "seed", "n_rows", "detector", "initial_priors", "final_priors", "rounds", "graph", "eval"],
    "properties": {
        "command": {"const": "detect"},
        "seed": {"type": "integer"},
        "n_rows": _COUNT,
        "detector": {
            "type": "object",
            "required": ["iteration_limit", "suspicion_threshold"],
            "properties": {"iteration_limit": {"type": "integer", "minimum": 1}, "suspicion_threshold": _COUNT},
        },
        "initial_priors": PRIORS,
        "final_priors": PRIORS,
        "rounds": _COUNT,
        "graph": GRAPH,
        "eval": {"oneOf": [EVAL, {"type": "null"}]},
    },
}

_AGGREGATE_ROW = {
    "type": "object",
    "additionalProperties": False,
    "required": ["metric", "prior_type", "n_correct", "n_wrong", "method", "mean", "std", "count"],
    "properties": {
        "metric": {"enum": list(EVAL["required"])},
        "prior_type": {"type": "string"},
        "n_correct": _COUNT,
        "n_wrong": _COUNT,
        "method": {"enum": ["hc", "quasi-hc"]},
        "mean": _NUM_OR_NULL,
        "std": _NUM_OR_NULL,
        "count": _COUNT,
    },
}

_RUN = {
    "type": "object",
    "required": ["repetition", "prior_index", "n_correct", "n_wrong", "wrong_type", "method", "skipped"],
    "properties": {
        "repetition": _COUNT,
        "prior_index": _COUNT,
        "method": {"enum": ["hc", "quasi-hc", None]},
        "skipped": {"type": "boolean"},
        "priors": {"type": "array", "items": _NAME_PAIR},
        **EVAL["properties"],
    },
}

EXPERIMENT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "config", "network", "runs", "aggregates"],
    "properties": {
        "command": {"const": "experiment"},
        "config": {"type": "object"},
        "network": {"type": "string"},
        "runs": {"type": "array", "items": _RUN},
        "aggregates": {"type": "array", "items": _AGGREGATE_ROW},
    },
}

QUALITY_BOUND = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "config", "network", "runs", "rows"],
    "properties": {
        "command": {"const": "quality-bound"},
        "config": {"type": "object"},
        "network": {"type": "string"},
        "runs": {"type": "array", "items": {"type": "object", "required": ["repetition", "method", "required_correct"]}},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": [
                    "method", "n_wrong", "wrong_type", "mean_required_correct", "std_required_correct",
                    "prior_quality", "feasible", "infeasible", "status",
                ],
                "properties": {
                    "method": {"enum": ["hc", "quasi-hc"]},
                    "n_wrong": _COUNT,
                    "wrong_type": {"type": ["string", "null"]},
                    "mean_required_correct": _NUM_OR_NULL,
                    "std_required_correct": _NUM_OR_NULL,
                    "prior_quality": _RATE,
                    "feasible": _COUNT,
                    "infeasible": _COUNT,
                    "status": {"enum": ["ok", "infeasible"]},
                },
            },
        },
    },
}

VERIFY_BOUND = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "trials", "seed", "rows"],
    "properties": {
        "command": {"const": "verify-bound"},
        "trials": {"type": "integer", "minimum": 1000},
        "seed": {"type": "integer"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["n", "m", "analytic_bound", "estimate", "standard_error", "violation"],
                "properties": {
                    "n": {"type": "integer", "minimum": 2},
                    "m": _COUNT,
                    "analytic_bound": _RATE,
                    "estimate": _RATE,
                    "standard_error": {"type": "number", "minimum": 0},
                    "violation": {"type": "boolean"},
                },
            },
        },
    },
}

SCHEMAS = {
    "graph": GRAPH,
    "priors": PRIORS,
    "repair_log": REPAIR_LOG,
    "learn": LEARN,
    "detect": DETECT,
    "experiment": EXPERIMENT,
    "quality-bound": QUALITY_BOUND,
    "verify-bound": VERIFY_BOUND,
}


def validate(kind: str, obj) -> None:
    jsonschema.validate(obj, SCHEMAS[kind], cls=jsonschema.Draft202012Validator)
