"""Bayes factor reports: structure, JSON schema, and stable serialization.

Reports serialize to JSON with sorted keys and floats rendered at 17
significant digits, so two runs with the same seed produce byte-identical
files and regressions show up as clean diffs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import jsonschema

from .bayes_factor import SdIngredients
from .density import DensityEstimate
from .exceptions import InvalidParameterError

__all__ = [
    "BayesFactorReport",
    "REPORT_SCHEMA",
    "render_report_json",
    "validate_report_dict",
    "write_report",
]

SCHEMA_VERSION = "1"


@dataclass
class BayesFactorReport:
    """Everything a run produced: the Bayes factor, its ingredients, and
    the settings needed to reproduce it."""

    analysis: str
    bf_cu: float
    bf_std_error: float
    posterior_prob_constrained: float
    posterior_prob_unconstrained: float
    prior_odds: float
    ingredients: SdIngredients
    seed: int | None
    settings: dict
    extras: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self):
        ing = self.ingredients
        return {
            "schema_version": SCHEMA_VERSION,
            "analysis": self.analysis,
            "bayes_factor": {
                "value": self.bf_cu,
                "std_error": self.bf_std_error,
                "log_value": math.log(self.bf_cu),
            },
            "posterior_probabilities": {
                "constrained": self.posterior_prob_constrained,
                "unconstrained": self.posterior_prob_unconstrained,
                "prior_odds": self.prior_odds,
            },
            "ingredients": {
                "posterior_density_at_equality": _estimate_dict(ing.posterior_density_at_equality),
                "prior_density_at_equality": _estimate_dict(ing.prior_density_at_equality),
                "completed_prior_order_probability": _estimate_dict(ing.completed_prior_prob),
                "prior_ratio_expectation": _estimate_dict(ing.prior_ratio_expectation),
            },
            "seed": self.seed,
            "settings": self.settings,
            "extras": self.extras,
            "notes": list(self.notes),
        }


def _estimate_dict(estimate):
    out = {
        "value": float(estimate.value),
        "std_error": float(estimate.std_error),
        "n_samples": int(estimate.n_samples),
    }
    if isinstance(estimate, DensityEstimate):
        out["bandwidth"] = None if estimate.bandwidth is None else float(estimate.bandwidth)
    n_bad = getattr(estimate, "n_nonfinite", None)
    if n_bad is not None:
        out["n_nonfinite"] = int(n_bad)
    return out


_ESTIMATE_SCHEMA = {
    "type": "object",
    "required": ["value", "std_error", "n_samples"],
    "properties": {
        "value": {"type": "number"},
        "std_error": {"type": "number", "minimum": 0},
        "n_samples": {"type": "integer", "minimum": 0},
        "bandwidth": {"type": ["number", "null"]},
        "n_nonfinite": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "schema_version",
        "analysis",
        "bayes_factor",
        "posterior_probabilities",
        "ingredients",
        "seed",
        "settings",
        "extras",
        "notes",
    ],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "analysis": {"enum": ["mvt", "multinomial"]},
        "bayes_factor": {
            "type": "object",
            "required": ["value", "std_error", "log_value"],
            "properties": {
                "value": {"type": "number", "exclusiveMinimum": 0},
                "std_error": {"type": "number", "minimum": 0},
                "log_value": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "posterior_probabilities": {
            "type": "object",
            "required": ["constrained", "unconstrained", "prior_odds"],
            "properties": {
                "constrained": {"type": "number", "minimum": 0, "maximum": 1},
                "unconstrained": {"type": "number", "minimum": 0, "maximum": 1},
                "prior_odds": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "ingredients": {
            "type": "object",
            "required": [
                "posterior_density_at_equality",
                "prior_density_at_equality",
                "completed_prior_order_probability",
                "prior_ratio_expectation",
            ],
            "properties": {
                "posterior_density_at_equality": _ESTIMATE_SCHEMA,
                "prior_density_at_equality": _ESTIMATE_SCHEMA,
                "completed_prior_order_probability": _ESTIMATE_SCHEMA,
                "prior_ratio_expectation": _ESTIMATE_SCHEMA,
            },
            "additionalProperties": False,
        },
        "seed": {"type": ["integer", "null"]},
        "settings": {"type": "object"},
        "extras": {"type": "object"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
    "additionalProperties": False,
}


def validate_report_dict(document):
    """Raise ``jsonschema.ValidationError`` if the document is malformed."""
    jsonschema.validate(document, REPORT_SCHEMA)


def _render(value, indent):
    pad = " " * indent
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidParameterError(f"report contains non-finite number: {value!r}")
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [_render(v, indent + 2) for v in value]
        inner = ",\n".join(f"{pad}  {item}" for item in items)
        return f"[\n{inner}\n{pad}]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = []
        for key in sorted(value):
            if not isinstance(key, str):
                raise InvalidParameterError(f"report keys must be strings, got {key!r}")
            items.append(f"{pad}  {json.dumps(key)}: {_render(value[key], indent + 2)}")
        inner = ",\n".join(items)
        return f"{{\n{inner}\n{pad}}}"
    raise InvalidParameterError(f"unsupported report value type: {type(value).__name__}")


def render_report_json(document):
    """Serialize a report dict: sorted keys, 17-significant-digit floats."""
    if isinstance(document, BayesFactorReport):
        document = document.to_dict()
    validate_report_dict(document)
    return _render(document, 0) + "\n"


def write_report(report, path):
    """Validate and write a report as JSON; returns the document dict."""
    document = report.to_dict() if isinstance(report, BayesFactorReport) else report
    text = render_report_json(document)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return document
