"""Command-line pipeline: train a classifier, explain attrition, audit reports.

Three subcommands with file hand-off so experiments are resumable:

* ``train``    reads the CSV, writes model/scaler/manifest JSON
* ``explain``  reads model + scaler, writes report JSON and text
* ``evaluate`` recomputes every reported metric from scratch and compares

Flags mirror the config-file keys (kebab-case); a config file overrides
the defaults and flags override the config. Exit codes: 0 success,
2 nothing to explain, 3 audit failure, 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import data as data_mod
from .diversity import (
    SUPPORT_TOL,
    Blacklist,
    diverse_explanations,
    make_lp_solver,
    make_penalized_solver,
    support,
)
from .errors import AuditError, DataError, GroupCfError, NothingToExplainError
from .models import (
    ForestScorer,
    LinearScorer,
    accuracy,
    scorer_from_dict,
    scorer_to_dict,
    select_attrition_set,
    tune_forest,
    tune_logistic,
)
from .penalized import PenalizedConfig
from .report import ExplanationReport, coverage, format_text, render_report

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs; see module docstring for precedence."""

    data_path: str = ""
    department: str = data_mod.DEFAULT_DEPARTMENT
    department_column: str = data_mod.DEFAULT_DEPARTMENT_COLUMN
    features: tuple = data_mod.DEFAULT_FEATURES
    target_column: str = data_mod.DEFAULT_TARGET_COLUMN
    attrition_value: str = data_mod.DEFAULT_ATTRITION_VALUE
    classifier: str = "logistic"
    C: tuple = DEFAULT_C_GRID
    k: int = 3
    margin: float = 1e-4
    weights: tuple | None = None
    blacklist: tuple = ()
    seed: int = 7
    split_ratio: float = 0.8
    output_dir: str = "out"
    coverage_target: float = 0.8
    support_tol: float = SUPPORT_TOL
    l2_strength: float | None = None
    n_trees: int | None = None
    max_depth: int | None = None
    model_path: str = ""
    scaler_path: str = ""
    report_path: str = ""

    def __post_init__(self):
        if self.classifier not in ("logistic", "forest"):
            raise ValueError(f"classifier must be logistic or forest, got {self.classifier!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "blacklist", tuple(self.blacklist))
        c = self.C if isinstance(self.C, (list, tuple)) else (self.C,)
        object.__setattr__(self, "C", tuple(float(v) for v in c))
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def load_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    unknown = set(payload) - _CONFIG_KEYS
    if unknown:
        raise DataError(f"unknown config keys: {sorted(unknown)}")
    return payload


def build_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < command-line flags."""
    merged = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return RunConfig(**merged)


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_prepared(cfg: RunConfig, feature_names):
    raw = data_mod.load_csv(cfg.data_path, expected_columns=list(feature_names)
                            + [cfg.target_column]
                            + ([cfg.department_column] if cfg.department else []))
    X, y, row_ids = data_mod.prepare(
        raw,
        cfg.department,
        feature_names,
        cfg.target_column,
        department_column=cfg.department_column,
        attrition_value=cfg.attrition_value,
    )
    return raw, X, y, row_ids


def cmd_train(cfg: RunConfig) -> int:
    if not cfg.data_path:
        raise DataError("train needs --data")
    raw, X, y, row_ids = _load_prepared(cfg, cfg.features)
    split = data_mod.train_test_split(X, y, cfg.split_ratio, cfg.seed)
    scaler = data_mod.Standardizer().fit(split.X_train)
    schema = data_mod.build_schema(cfg.features, scaler)
    X_train = scaler.transform(split.X_train)
    X_test = scaler.transform(split.X_test)
    X_bal, y_bal = data_mod.undersample_majority(X_train, split.y_train, cfg.seed)

    if cfg.classifier == "logistic":
        if cfg.l2_strength is None:
            scorer, test_acc = tune_logistic(X_bal, y_bal, X_test, split.y_test)
        else:
            scorer = LinearScorer(l2_strength=cfg.l2_strength).fit(X_bal, y_bal)
            test_acc = accuracy(scorer, X_test, split.y_test)
        chosen = {"l2_strength": scorer.l2_strength}
    else:
        if cfg.n_trees is None and cfg.max_depth is None:
            scorer, test_acc = tune_forest(X_bal, y_bal, X_test, split.y_test, cfg.seed)
        else:
            scorer = ForestScorer(
                n_trees=cfg.n_trees or 25,
                max_depth=cfg.max_depth or 5,
                seed=cfg.seed,
            ).fit(X_bal, y_bal)
            test_acc = accuracy(scorer, X_test, split.y_test)
        chosen = {"n_trees": scorer.n_trees, "max_depth": scorer.max_depth}

    out = Path(cfg.output_dir)
    _write_json(out / "model.json", scorer_to_dict(scorer, cfg.features))
    _write_json(out / "scaler.json", schema.to_dict())
    manifest = {
        "format_version": 1,
        "data_path": str(cfg.data_path),
        "n_rows_file": raw.n_rows,
        "n_columns_file": len(raw.columns),
        "department": cfg.department,
        "features": list(cfg.features),
        "target_column": cfg.target_column,
        "classifier": cfg.classifier,
        "hyperparameters": chosen,
        "seed": cfg.seed,
        "split_ratio": cfg.split_ratio,
        "row_ids": row_ids.tolist(),
        "train_indices": split.train_indices.tolist(),
        "test_indices": split.test_indices.tolist(),
        "n_balanced_train_rows": int(len(y_bal)),
        "accuracy": {
            "train_balanced": accuracy(scorer, X_bal, y_bal),
            "test": test_acc,
        },
    }
    _write_json(out / "manifest.json", manifest)
    print(f"loaded {raw.n_rows} rows x {len(raw.columns)} columns from {cfg.data_path}")
    print(f"prepared {len(y)} rows ({cfg.department or 'all departments'}), "
          f"{len(cfg.features)} features")
    print(f"trained {cfg.classifier} ({chosen}); test accuracy {test_acc:.3f}")
    print(f"wrote {out / 'model.json'}, {out / 'scaler.json'}, {out / 'manifest.json'}")
    return 0


def _resolve_costs(cfg: RunConfig, feature_names):
    if cfg.weights is None:
        return None
    if len(cfg.weights) != len(feature_names):
        raise DataError(
            f"weights must list one value per feature "
            f"({len(feature_names)}), got {len(cfg.weights)}"
        )
    return np.asarray(cfg.weights, dtype=float)


def _seed_blacklist(cfg: RunConfig, schema) -> Blacklist:
    blacklist = Blacklist.from_feature_names(cfg.blacklist, schema.feature_names)
    # Non-actionable features (constant columns) can never be changed.
    frozen = {j for j, ok in enumerate(schema.actionable) if not ok}
    return blacklist.union(frozen)


def _delta_summary(run, tol, costs):
    return [
        {
            "coverage": d.coverage,
            "sparsity": len(support(d.delta, tol)),
            "l1_cost": float(costs @ np.abs(d.delta)),
        }
        for d in run.deltas
    ]


def cmd_explain(cfg: RunConfig) -> int:
    if not (cfg.data_path and cfg.model_path and cfg.scaler_path):
        raise DataError("explain needs --data, --model and --scaler")
    schema = data_mod.FeatureSchema.from_dict(_read_json(cfg.scaler_path))
    scaler = data_mod.Standardizer.from_schema(schema)
    model_payload = _read_json(cfg.model_path)
    scorer = scorer_from_dict(model_payload)
    model_features = model_payload.get("feature_names")
    if model_features and tuple(model_features) != schema.feature_names:
        raise DataError("model and scaler disagree on the feature list")

    _, X, y, row_ids = _load_prepared(cfg, schema.feature_names)
    X_std = scaler.transform(X)
    instance_set = select_attrition_set(scorer, X_std, row_ids=row_ids)

    costs = _resolve_costs(cfg, schema.feature_names)
    seed_blacklist = _seed_blacklist(cfg, schema)
    kind = model_payload["kind"]

    runs = []
    for c_value in cfg.C:
        if kind == "linear":
            solver = make_lp_solver(c_value, cfg.margin, costs)
        else:
            solver = make_penalized_solver(PenalizedConfig(
                C=c_value, margin=cfg.margin, feature_costs=costs,
            ))
        run = diverse_explanations(
            instance_set, scorer, cfg.k, solver,
            tol=cfg.support_tol, initial_blacklist=seed_blacklist,
        )
        runs.append((c_value, run))

    unit_costs = costs if costs is not None else np.ones(schema.n_features)
    grid_table = [
        {"C": c_value, "termination": run.termination,
         "deltas": _delta_summary(run, cfg.support_tol, unit_costs)}
        for c_value, run in runs
    ]

    def min_coverage(run):
        return min((d.coverage for d in run.deltas), default=-1.0)

    selected = None
    for c_value, run in runs:  # ascending grid: cheapest adequate C wins
        if run.deltas and min_coverage(run) >= cfg.coverage_target:
            selected = (c_value, run)
            break
    if selected is None:
        best = max(
            ((c_value, run) for c_value, run in runs),
            key=lambda item: (min_coverage(item[1]),
                              len(item[1].deltas), -item[0]),
        )
        selected = best
    selected_c, selected_run = selected

    baseline_means = scaler.inverse_transform(instance_set.X).mean(axis=0)
    metadata = {
        "data_path": str(cfg.data_path),
        "department": cfg.department,
        "features": list(schema.feature_names),
        "classifier": kind,
        "seed": cfg.seed,
        "k": cfg.k,
        "margin": cfg.margin,
        "support_tol": cfg.support_tol,
        "coverage_target": cfg.coverage_target,
        "C": selected_c,
        "C_grid": list(cfg.C),
        "C_grid_results": grid_table,
        "weights": list(cfg.weights) if cfg.weights else None,
        "blacklist": sorted(cfg.blacklist),
        "blacklist_indices": sorted(seed_blacklist.feature_indices),
        "n_instances": instance_set.n_instances,
        "instance_row_ids": instance_set.row_ids.tolist(),
        "baseline_means": [float(v) for v in baseline_means],
    }
    report = render_report(
        selected_run, scaler, schema, baseline_means,
        feature_costs=costs, tol=cfg.support_tol, metadata=metadata,
    )
    out = Path(cfg.output_dir)
    _write_json(out / "report.json", report.to_dict())
    text = format_text(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(f"{instance_set.n_instances} employees predicted attrition; "
          f"selected C={selected_c}")
    print(text)
    print(f"wrote {out / 'report.json'} and {out / 'report.txt'}")
    return 0


def _audit_delta(record, expected_mask, instance_set, scorer, scaler, costs, tol):
    """All audit findings for one reported intervention."""
    problems = []
    delta = record.delta_std
    masked = np.flatnonzero(~expected_mask)
    if np.any(np.abs(delta[masked]) > tol):
        problems.append("mask: black-listed feature has a nonzero change")
    cov = coverage(delta, instance_set, scorer)
    if abs(cov - record.coverage) > 1e-9:
        problems.append(f"coverage: recorded {record.coverage}, recomputed {cov}")
    sparsity = len(support(delta, tol))
    if sparsity != record.sparsity:
        problems.append(f"sparsity: recorded {record.sparsity}, recomputed {sparsity}")
    l1 = float(costs @ np.abs(delta))
    if abs(l1 - record.l1_cost) > 1e-7:
        problems.append(f"l1_cost: recorded {record.l1_cost}, recomputed {l1}")
    orig = scaler.destandardize_delta(delta)
    if np.max(np.abs(orig - record.delta_original_units)) > 1e-9:
        problems.append("delta_original_units: disagrees with the scaler")
    return problems


def cmd_evaluate(cfg: RunConfig) -> int:
    if not (cfg.data_path and cfg.model_path and cfg.scaler_path and cfg.report_path):
        raise DataError("evaluate needs --data, --model, --scaler and --report")
    schema = data_mod.FeatureSchema.from_dict(_read_json(cfg.scaler_path))
    scaler = data_mod.Standardizer.from_schema(schema)
    scorer = scorer_from_dict(_read_json(cfg.model_path))
    report = ExplanationReport.from_dict(_read_json(cfg.report_path))
    meta = report.metadata

    audit_cfg = replace(
        cfg,
        department=meta.get("department", cfg.department),
        features=tuple(meta.get("features", schema.feature_names)),
    )
    _, X, _, row_ids = _load_prepared(audit_cfg, schema.feature_names)
    X_std = scaler.transform(X)
    instance_set = select_attrition_set(scorer, X_std, row_ids=row_ids)

    tol = float(meta.get("support_tol", cfg.support_tol))
    weights = meta.get("weights")
    costs = (np.asarray(weights, dtype=float) if weights
             else np.ones(schema.n_features))

    failures = 0
    recorded_ids = meta.get("instance_row_ids")
    if recorded_ids is not None and recorded_ids != instance_set.row_ids.tolist():
        print("FAIL instance set: recorded row ids disagree with recomputation")
        failures += 1

    expected_blacklist = set(meta.get("blacklist_indices", []))
    for i, record in enumerate(report.records, start=1):
        mask = np.ones(schema.n_features, dtype=bool)
        mask[sorted(expected_blacklist)] = False
        problems = _audit_delta(
            record, mask, instance_set, scorer, scaler, costs, tol
        )
        if problems:
            failures += 1
            for p in problems:
                print(f"FAIL intervention {i}: {p}")
        else:
            print(f"PASS intervention {i}")
        expected_blacklist |= support(record.delta_std, tol)

    if failures:
        print(f"audit failed for {failures} item(s)")
        return 3
    print("audit passed")
    return 0


def _add_common(parser):
    parser.add_argument("--data", dest="data_path", help="input CSV path")
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--department", help="department filter ('' disables)")
    parser.add_argument("--features", type=_comma_list, help="comma-separated feature columns")
    parser.add_argument("--target-column", dest="target_column")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output-dir", dest="output_dir")


def _comma_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _comma_floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupcf",
        description="Group-level counterfactual interventions for attrition classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a classifier and write model files")
    _add_common(p_train)
    p_train.add_argument("--classifier", choices=["logistic", "forest"])
    p_train.add_argument("--split-ratio", dest="split_ratio", type=float)
    p_train.add_argument("--l2-strength", dest="l2_strength", type=float)
    p_train.add_argument("--n-trees", dest="n_trees", type=int)
    p_train.add_argument("--max-depth", dest="max_depth", type=int)
    p_train.set_defaults(func=cmd_train)

    p_explain = sub.add_parser("explain", help="compute diverse group interventions")
    _add_common(p_explain)
    p_explain.add_argument("--model", dest="model_path")
    p_explain.add_argument("--scaler", dest="scaler_path")
    p_explain.add_argument("--k", type=int)
    p_explain.add_argument("--C", dest="C", type=_comma_floats,
                           help="slack penalty, scalar or comma-separated grid")
    p_explain.add_argument("--margin", type=float)
    p_explain.add_argument("--weights", type=_comma_floats,
                           help="1-norm feature costs, one per feature")
    p_explain.add_argument("--blacklist", type=_comma_list,
                           help="feature names never to change")
    p_explain.add_argument("--coverage-target", dest="coverage_target", type=float)
    p_explain.set_defaults(func=cmd_explain)

    p_eval = sub.add_parser("evaluate", help="audit a report against recomputation")
    _add_common(p_eval)
    p_eval.add_argument("--model", dest="model_path")
    p_eval.add_argument("--scaler", dest="scaler_path")
    p_eval.add_argument("--report", dest="report_path")
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return args.func(cfg)
    except NothingToExplainError as exc:
        print(f"nothing to explain: {exc}", file=sys.stderr)
        return 2
    except AuditError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return 3
    except (GroupCfError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
