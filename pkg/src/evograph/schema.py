"""Published JSON schema for machine-readable reports.

Every CLI subcommand emits JSON that validates against REPORT_SCHEMA;
REQUIRED_KEYS lists which top-level sections each subcommand guarantees.
CSV output mirrors the same data with the fixed column order CSV_COLUMNS
(missing sections leave their columns empty).
"""

from __future__ import annotations

_NUMBER = {"type": ["number", "null"]}

REPORT_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "evograph report",
    "type": "object",
    "properties": {
        "params": {"type": "object"},
        "T": {"type": "number"},
        "delta": {"type": "integer"},
        "gamma": {"type": "number"},
        "valid_regime": {"type": "boolean"},
        "growth_bias": _NUMBER,
        "train_bounds": {
            "type": "object",
            "properties": {"lower": _NUMBER, "upper": _NUMBER},
        },
        "dp_check": {
            "type": ["object", "null"],
            "properties": {
                "value": {"type": "number"},
                "abs_diff": {"type": "number"},
                "agrees": {"type": "boolean"},
            },
            "required": ["value", "abs_diff", "agrees"],
        },
        "epsilons": {
            "type": "object",
            "properties": {
                "e0": {"type": "number"},
                "e1": {"type": "number"},
                "e2": {"type": "number"},
                "e3": {"type": "number"},
                "e4_minus": {"type": "number"},
                "e4_plus": {"type": "number"},
                "e5": {"type": "number"},
                "log10_e5": {"type": "number"},
            },
            "required": ["e0", "e1", "e2", "e3", "e4_minus", "e4_plus", "e5"],
        },
        "bounds": {
            "type": "object",
            "properties": {
                "lower": {"type": "number"},
                "upper": {"type": "number"},
                "lower_asym": {"type": "number"},
                "upper_asym": {"type": "number"},
            },
            "required": ["lower", "upper", "lower_asym", "upper_asym"],
        },
        "claimed_historical": {
            "type": "object",
            "properties": {
                "value": {"type": "number"},
                "invalidated_for_h_ge_3": {"type": "boolean"},
            },
        },
        "estimate": {
            "type": "object",
            "properties": {
                "p": {"type": "number"},
                "ci_lo": {"type": "number"},
                "ci_hi": {"type": "number"},
                "trials": {"type": "integer"},
                "successes": {"type": "integer"},
                "capped": {"type": "integer"},
                "steps_total": {"type": "integer"},
                "engine": {"type": "string"},
                "seed": {"type": "integer"},
                "generator": {"type": "string"},
            },
            "required": ["p", "ci_lo", "ci_hi", "trials"],
        },
        "exact": {
            "type": "object",
            "properties": {
                "per_node": {"type": "array", "items": {"type": "number"}},
                "average": {"type": "number"},
                "residual": {"type": "number"},
            },
            "required": ["per_node", "average", "residual"],
        },
        "grid_index": {"type": "integer"},
        "n": {"type": "integer"},
        "roles": {"type": "array"},
        "edges": {"type": "array"},
    },
    "required": [],
    "additionalProperties": True,
}

REQUIRED_KEYS = {
    "trainlen": ["params", "T", "train_bounds"],
    "bounds": ["params", "delta", "T", "gamma", "epsilons", "bounds", "valid_regime"],
    "exact": ["params", "exact"],
    "simulate": ["params", "estimate"],
    "one-to-two": ["params", "estimate"],
    "graph": ["n", "roles", "edges"],
}

CSV_COLUMNS = [
    "grid_index",
    "params.r",
    "params.B",
    "params.L",
    "params.H",
    "params.n",
    "params.rule",
    "params.placement",
    "params.trials",
    "params.seed",
    "delta",
    "T",
    "train_bounds.lower",
    "train_bounds.upper",
    "dp_check.value",
    "dp_check.abs_diff",
    "dp_check.agrees",
    "gamma",
    "valid_regime",
    "epsilons.e0",
    "epsilons.e1",
    "epsilons.e2",
    "epsilons.e3",
    "epsilons.e4_minus",
    "epsilons.e4_plus",
    "epsilons.e5",
    "epsilons.log10_e5",
    "bounds.lower",
    "bounds.upper",
    "bounds.lower_asym",
    "bounds.upper_asym",
    "growth_bias",
    "claimed_historical.value",
    "estimate.p",
    "estimate.ci_lo",
    "estimate.ci_hi",
    "estimate.trials",
    "estimate.successes",
    "estimate.capped",
    "estimate.steps_total",
    "estimate.engine",
    "estimate.seed",
    "exact.average",
    "exact.residual",
]


def flatten(report: dict, prefix: str = "") -> dict:
    """Dot-flatten one report for CSV emission."""
    flat: dict = {}
    for key, value in report.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{path}."))
        else:
            flat[path] = value
    return flat


def csv_row(report: dict) -> list:
    flat = flatten(report)
    return [flat.get(col, "") for col in CSV_COLUMNS]
