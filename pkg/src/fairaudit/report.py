"""Audit orchestration and report rendering.

run_audit loads a dataset, evaluates the selected criteria (switching to
soft neighborhood evaluation when a feature-conditioned criterion meets
numeric features), and assembles a Report.  JSON is the canonical machine
format: keys are emitted in construction order and floats with 17
significant digits, so identical inputs yield byte-identical output (the
timing block is the one run-dependent section, kept under its own key).
"""

from __future__ import annotations

import json.encoder
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .criteria import (
    DEFAULT_THRESHOLDS,
    CriterionResult,
    evaluate,
    evaluate_ftu,
    get_criterion,
    list_criteria,
    situation_testing_evaluate,
)
from .dataset import Dataset, load_dataset, load_schema_config
from .distance import DistanceSpec
from .errors import EmptySelection, InvalidParams
from .neighborhood import (
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    DEFAULT_MIN_NEIGHBORHOOD,
    NeighborhoodSpec,
    SoftResult,
    build_index,
    soft_evaluate,
)
from .tables import DEFAULT_MIN_COUNT

CRITERION_IDS = ("sp", "eo", "suff", "isp", "ieo", "isuff")
SELECTABLE = CRITERION_IDS + ("ftu", "situation_testing")


@dataclass
class AuditConfig:
    """Everything one audit run needs; echoed verbatim into the report."""

    data: str
    schema: str
    criteria: list[str] = field(default_factory=lambda: list(CRITERION_IDS))
    situation_columns: list[str] | None = None
    measure: str = "mi"
    threshold: float | None = None
    epsilon: float = DEFAULT_EPSILON
    delta: float = DEFAULT_DELTA
    min_count: int = DEFAULT_MIN_COUNT
    min_neighborhood: int = DEFAULT_MIN_NEIGHBORHOOD
    alpha: float = 0.0
    soft_measure: str = "mi"
    neighborhood_mode: str = "knn"
    k: int = 50
    radius: float | None = None
    weights: dict[str, float] | None = None
    output: str | None = None
    format: str = "json"

    def neighborhood_spec(self) -> NeighborhoodSpec:
        if self.neighborhood_mode == "knn":
            return NeighborhoodSpec("knn", k=self.k)
        return NeighborhoodSpec("ball", radius=self.radius)

    def to_dict(self) -> dict:
        return {
            "data": self.data,
            "schema": self.schema,
            "criteria": list(self.criteria),
            "situation_columns": self.situation_columns,
            "measure": self.measure,
            "threshold": self.threshold,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "min_count": self.min_count,
            "min_neighborhood": self.min_neighborhood,
            "alpha": self.alpha,
            "soft_measure": self.soft_measure,
            "neighborhood": {
                "mode": self.neighborhood_mode,
                "k": self.k if self.neighborhood_mode == "knn" else None,
                "radius": self.radius if self.neighborhood_mode == "ball" else None,
            },
            "output": self.output,
            "format": self.format,
        }


@dataclass
class Report:
    config: dict
    results: list[dict]
    warnings: list[str]
    timing: dict
    all_passed: bool

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "tool": {"name": "fairaudit", "version": __version__},
            "config": self.config,
            "results": self.results,
            "warnings": self.warnings,
            "all_passed": self.all_passed,
            "timing": self.timing,
        }


# -- canonical JSON -------------------------------------------------------------

_escape = json.encoder.encode_basestring_ascii


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in report; encode it as a flag instead")
    s = format(x, ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _write_json(obj, out: list, indent: int, level: int) -> None:
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(obj, np.bool_):
        obj = bool(obj)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            out.append(pad_in)
            out.append(_escape(str(key)))
            out.append(": ")
            _write_json(value, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        out.append("[\n")
        for i, value in enumerate(seq):
            out.append(pad_in)
            _write_json(value, out, indent, level + 1)
            out.append(",\n" if i < len(seq) - 1 else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def canonical_json(obj, indent: int = 2) -> str:
    out: list[str] = []
    _write_json(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


# -- result serialization ----------------------------------------------------------

def _round_key(key) -> list:
    return [int(v) for v in key]


def _exact_result_dict(result: CriterionResult) -> dict:
    mv = result.measure
    details = {}
    for name in ("normalized", "dof", "p_value", "max_ber"):
        if name in mv.aux:
            details[name] = mv.aux[name]
    entry = {
        "id": result.criterion.id,
        "name": result.criterion.name,
        "condition": result.criterion.condition(),
        "unit": result.criterion.unit,
        "awareness": result.criterion.awareness,
        "mode": "exact",
        "measure": result.measure_kind,
        "value": mv.value,
        "threshold": result.threshold,
        "passed": result.passed,
        "details": details,
        "dropped_mass": result.dropped_mass,
    }
    if result.per_stratum is not None:
        rows = []
        for key, smv, weight in result.per_stratum:
            row = {"key": _round_key(key), "value": smv.value, "weight": weight}
            if "rate_gap" in smv.aux:
                row["rate_gap"] = smv.aux["rate_gap"]
            if smv.aux.get("degenerate"):
                row["degenerate"] = True
            rows.append(row)
        entry["per_stratum"] = rows
    return entry


def _soft_result_dict(result: SoftResult, threshold_note: str | None = None) -> dict:
    nspec = result.neighborhood
    entry = {
        "id": result.criterion.id,
        "name": result.criterion.name,
        "condition": result.criterion.condition(),
        "unit": result.criterion.unit,
        "awareness": result.criterion.awareness,
        "mode": "soft",
        "soft_measure": result.measure_kind,
        "epsilon": result.epsilon,
        "delta": result.delta,
        "satisfied_fraction": result.satisfied_fraction,
        "indeterminate_fraction": result.indeterminate_fraction,
        "flagged_count": int(result.violated.sum()),
        "flagged_indices": [int(i) for i in result.flagged_indices],
        "passed": result.passed,
        "neighborhood": {
            "mode": nspec.mode,
            "k": nspec.k,
            "radius": nspec.radius,
            "include_self": nspec.include_self,
        },
        "min_neighborhood": result.min_neighborhood,
    }
    return entry


# -- orchestration ------------------------------------------------------------------

def _parse_selection(tokens) -> list[str]:
    seen = []
    for tok in tokens:
        tok = tok.strip()
        if tok == "st":
            tok = "situation_testing"
        if tok not in SELECTABLE:
            raise InvalidParams(
                f"unknown criterion {tok!r}; choose from {', '.join(SELECTABLE)}"
            )
        if tok not in seen:
            seen.append(tok)
    if not seen:
        raise EmptySelection("no criteria selected")
    return seen


def run_audit(config: AuditConfig, dataset: Dataset | None = None) -> Report:
    """Evaluate the configured criteria and assemble the report.

    Feature-conditioned criteria are evaluated exactly on all-categorical
    features and switch to soft neighborhood evaluation (with a warning
    naming the switch) when numeric features are present.
    """
    selection = _parse_selection(config.criteria)
    if dataset is None:
        schema, threshold, missing = load_schema_config(config.schema)
        dataset = load_dataset(config.data, schema, threshold=threshold, missing=missing)

    warnings: list[str] = []
    results: list[dict] = []
    timing: dict[str, float] = {}
    all_passed = True
    soft_needed = dataset.has_numeric_features()
    shared_index = None
    dist = DistanceSpec(config.weights)

    for cid in selection:
        started = time.monotonic()
        if cid == "situation_testing":
            if not config.situation_columns:
                raise EmptySelection("situation_testing selected without columns")
            result = situation_testing_evaluate(
                dataset, config.situation_columns, config.measure,
                config.threshold, config.min_count, config.alpha,
            )
            entry = _exact_result_dict(result)
        else:
            spec = get_criterion(cid)
            if "features" in spec.given and soft_needed:
                if shared_index is None:
                    shared_index = build_index(dataset, dist)
                base = get_criterion("isp") if cid == "ftu" else spec
                soft = soft_evaluate(
                    dataset, base, config.neighborhood_spec(), dist,
                    config.soft_measure, config.epsilon, config.delta,
                    config.min_neighborhood, index=shared_index,
                )
                if cid == "ftu":
                    soft.criterion = get_criterion("ftu")
                warnings.append(
                    f"criterion {cid}: numeric features present, switched from "
                    "exact stratification to soft neighborhood conditioning"
                )
                if soft.indeterminate_fraction > 0:
                    warnings.append(
                        f"criterion {cid}: {soft.indeterminate_fraction:.4f} of records "
                        "indeterminate (restricted neighborhood below min_neighborhood)"
                    )
                entry = _soft_result_dict(soft)
                results.append(entry)
                timing[cid] = time.monotonic() - started
                all_passed &= soft.passed
                continue
            if cid == "ftu":
                result = evaluate_ftu(
                    dataset, config.measure, config.threshold,
                    config.min_count, config.alpha,
                )
            else:
                result = evaluate(
                    dataset, spec, config.measure, config.threshold,
                    config.min_count, config.alpha,
                )
            entry = _exact_result_dict(result)
            if result.dropped_mass > 0:
                warnings.append(
                    f"criterion {cid}: dropped_mass {result.dropped_mass:.4f} "
                    f"(strata below min_count={config.min_count})"
                )
        results.append(entry)
        timing[cid] = time.monotonic() - started
        all_passed &= entry["passed"]

    return Report(
        config=config.to_dict(),
        results=results,
        warnings=warnings,
        timing=timing,
        all_passed=all_passed,
    )


# -- rendering -----------------------------------------------------------------------

def render(report: Report, format: str = "json") -> bytes:
    """Serialize a report; JSON is canonical, markdown is for reading."""
    if format == "json":
        return canonical_json(report.to_dict()).encode("utf-8")
    if format == "markdown":
        return _render_markdown(report).encode("utf-8")
    raise InvalidParams(f"unknown report format {format!r}")


def _render_markdown(report: Report) -> str:
    lines = ["# Fairness audit report", ""]
    lines.append(f"- tool: fairaudit {__version__}")
    lines.append(f"- data: `{report.config['data']}`")
    lines.append(f"- overall: {'PASS' if report.all_passed else 'FAIL'}")
    lines.append("")
    lines.append("| criterion | condition | unit | awareness | measure | value | verdict |")
    lines.append("|---|---|---|---|---|---|---|")
    for r in report.results:
        if r["mode"] == "exact":
            measure = r["measure"]
            value = repr(r["value"])
        else:
            measure = (
                f"soft {r['soft_measure']} "
                f"(ε={r['epsilon']!r}, δ={r['delta']!r})"
            )
            value = f"satisfied_fraction={r['satisfied_fraction']!r}"
        verdict = "pass" if r["passed"] else "fail"
        condition = r["condition"].replace("|", "\\|")  # keep the table cell intact
        lines.append(
            f"| {r['name']} | {condition} | {r['unit']} | {r['awareness']} "
            f"| {measure} | {value} | {verdict} |"
        )
    if report.warnings:
        lines.append("")
        lines.append("## Warnings")
        lines.append("")
        for w in report.warnings:
            lines.append(f"- {w}")
    lines.append("")
    return "\n".join(lines)


def parse_report(blob: bytes | str) -> dict:
    """Parse a rendered JSON report back into a dict (inverse of render)."""
    import json as _json

    if isinstance(blob, bytes):
        blob = blob.decode("utf-8")
    return _json.loads(blob)
