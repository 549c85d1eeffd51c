"""Metrics and human-readable rendering of intervention sets.

Solver output lives in standardized units; this module converts each
intervention back to original units, measures coverage/sparsity/cost and
produces one narrative sentence per intervention, largest change first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import RETENTION, FeatureSchema, Standardizer
from .diversity import SUPPORT_TOL, ExplanationSet, support
from .validation import as_float_vector

# Human phrasings for tenure-style counters; everything else gets the
# generic increase/decrease wording.
_YEARS_PHRASES = {
    "YearsSinceLastPromotion": "since their last promotion",
    "YearsInCurrentRole": "in their current role",
    "YearsWithCurrManager": "with their current manager",
}


def coverage(delta, instance_set, scorer) -> float:
    """Fraction of the instance set whose prediction flips under ``delta``."""
    X = instance_set.X
    if X.shape[0] == 0:
        raise ValueError("instance set is empty; nothing to measure")
    delta = as_float_vector(delta, "delta", X.shape[1])
    return float(np.mean(scorer.predict(X + delta) == RETENTION))


def _format_amount(x: float) -> str:
    return f"{round(float(x), 2):g}"


def _clause(name, delta_orig, baseline_mean) -> str:
    direction = "an increase" if delta_orig > 0 else "a decrease"
    magnitude = _format_amount(abs(delta_orig))
    if name in _YEARS_PHRASES:
        more_less = "more" if delta_orig > 0 else "less"
        text = f"{name}: approx. {magnitude} years {more_less} {_YEARS_PHRASES[name]}"
    else:
        text = f"{name}: {direction} of approx. {magnitude}"
    if abs(baseline_mean) > 1e-9:
        pct = 100.0 * abs(delta_orig) / abs(baseline_mean)
        text += f" ({_format_amount(pct)}% of the group mean {_format_amount(baseline_mean)})"
    return text


def narrative(delta_std, delta_orig, schema: FeatureSchema, baseline_means,
              tol: float = SUPPORT_TOL) -> str:
    """One sentence listing exactly the used features, largest change first.

    Magnitudes are stated in original units with the relative size against
    the instance-group mean alongside, so both readings are available.
    """
    sup = support(delta_std, tol)
    if not sup:
        return "no change required (this intervention flips no prediction)"
    order = sorted(sup, key=lambda j: (-abs(delta_std[j]), j))
    clauses = [
        _clause(schema.feature_names[j], float(delta_orig[j]), float(baseline_means[j]))
        for j in order
    ]
    return " AND ".join(clauses)


@dataclass(frozen=True)
class DeltaRecord:
    """Report row for one intervention."""

    delta_std: np.ndarray
    delta_original_units: np.ndarray
    coverage: float
    sparsity: int
    l1_cost: float
    narrative: str

    def to_dict(self) -> dict:
        return {
            "delta_std": [float(v) for v in self.delta_std],
            "delta_original_units": [float(v) for v in self.delta_original_units],
            "coverage": float(self.coverage),
            "sparsity": int(self.sparsity),
            "l1_cost": float(self.l1_cost),
            "narrative": self.narrative,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DeltaRecord":
        return cls(
            delta_std=np.asarray(payload["delta_std"], dtype=float),
            delta_original_units=np.asarray(payload["delta_original_units"], dtype=float),
            coverage=float(payload["coverage"]),
            sparsity=int(payload["sparsity"]),
            l1_cost=float(payload["l1_cost"]),
            narrative=str(payload["narrative"]),
        )


@dataclass(frozen=True)
class ExplanationReport:
    """Per-intervention records plus run metadata, JSON-ready."""

    records: tuple
    termination: str
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "termination": self.termination,
            "interventions": [r.to_dict() for r in self.records],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExplanationReport":
        if payload.get("format_version") != 1:
            raise ValueError(
                f"unsupported report format_version: {payload.get('format_version')}"
            )
        return cls(
            records=tuple(DeltaRecord.from_dict(r) for r in payload["interventions"]),
            termination=str(payload["termination"]),
            metadata=dict(payload.get("metadata", {})),
        )


def render_report(
    explanations: ExplanationSet,
    scaler: Standardizer,
    schema: FeatureSchema,
    baseline_means,
    *,
    feature_costs=None,
    tol: float = SUPPORT_TOL,
    metadata: dict | None = None,
) -> ExplanationReport:
    """Convert solver output into an auditable report.

    ``baseline_means`` are per-feature means over the explained instance
    group in original units; they anchor the percentage phrasings. The
    recorded l1_cost is the weighted 1-norm of the standardized
    intervention so reports can be checked against solver objectives.
    """
    d = schema.n_features
    baseline_means = as_float_vector(baseline_means, "baseline_means", d)
    costs = (np.ones(d) if feature_costs is None
             else as_float_vector(feature_costs, "feature_costs", d))
    records = []
    for delta in explanations.deltas:
        delta_std = delta.delta
        delta_orig = scaler.destandardize_delta(delta_std)
        records.append(DeltaRecord(
            delta_std=delta_std.copy(),
            delta_original_units=delta_orig,
            coverage=delta.coverage,
            sparsity=len(support(delta_std, tol)),
            l1_cost=float(costs @ np.abs(delta_std)),
            narrative=narrative(delta_std, delta_orig, schema, baseline_means, tol),
        ))
    return ExplanationReport(
        records=tuple(records),
        termination=explanations.termination,
        metadata=dict(metadata or {}),
    )


def format_text(report: ExplanationReport) -> str:
    """Plain-text rendering of a report for terminal reading."""
    lines = ["Group intervention report", "=" * 25, ""]
    meta = {k: v for k, v in report.metadata.items()
            if isinstance(v, (str, int, float, bool)) or v is None}
    for key in sorted(meta):
        lines.append(f"{key}: {meta[key]}")
    if meta:
        lines.append("")
    if not report.records:
        lines.append("No interventions found.")
    for i, rec in enumerate(report.records, start=1):
        lines.append(f"Recommendation {i}:")
        lines.append(f"  {rec.narrative}")
        lines.append(
            f"  coverage={rec.coverage:.3f}  features_used={rec.sparsity}  "
            f"standardized_cost={rec.l1_cost:.4f}"
        )
        lines.append("")
    lines.append(f"termination: {report.termination}")
    lines.append("")
    return "\n".join(lines)
