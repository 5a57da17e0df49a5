"""Command-line entry point: train, evaluate, explain, study, synth.

Every command is driven by a JSON config (see README) with --seed/--out
overrides, writes only under the output directory, and is idempotent for a
fixed config: model files and non-timing reports are byte identical across
reruns.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .config import ConfigError, RunConfig, build_dataset, load_config
from .data import Dataset, SchemaError
from .explain import (
    BackgroundSpec,
    exact_shapley,
    global_lr_importance,
    kernel_shap,
    lime,
    rank,
    resolve_background,
)
from .metrics import full_report
from .models import load_model, save_model, train
from .models.base import batch_evaluate

_MODEL_SUFFIX = ".fxm"


def _model_path(config: RunConfig, kind: str) -> Path:
    return config.out / "models" / f"{kind}{_MODEL_SUFFIX}"


def _meta(config: RunConfig, **extra) -> dict:
    meta = {"seed": config.seed, "dataset": config.dataset_label(),
            "git_describe": bench.git_describe()}
    meta.update(extra)
    return meta


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _capture_config(config: RunConfig) -> None:
    if config.source_path is not None:
        config.out.mkdir(parents=True, exist_ok=True)
        (config.out / "config.json").write_bytes(config.source_path.read_bytes())


def _table1(config: RunConfig, models: dict, validation: Dataset) -> list[dict]:
    rows = []
    for kind, model in models.items():
        scores = batch_evaluate(model, validation)
        predictions = (scores >= model.threshold).astype(int)
        report = full_report(validation.labels, predictions, scores)
        row = {"model_kind": kind, **report.to_dict()}
        reference = bench.REFERENCE_AUC.get(kind) if config.compare_reference else None
        row["reference_auc"] = reference
        row["auc_within_band"] = (
            None if reference is None
            else bool(abs(report.auc - reference) <= bench.REFERENCE_AUC_BAND)
        )
        rows.append(row)
    return rows


def _print_table1(rows: list[dict]) -> None:
    print(f"{'model':<20}{'precision':>10}{'recall':>10}{'f1':>10}{'auc':>10}")
    for row in rows:
        line = (f"{row['model_kind']:<20}{row['precision']:>10.3f}{row['recall']:>10.3f}"
                f"{row['f1']:>10.3f}{row['auc']:>10.3f}")
        if row["reference_auc"] is not None:
            flag = "" if row["auc_within_band"] else "  [outside +/-0.05 band]"
            line += f"   (reference auc {row['reference_auc']:.3f}){flag}"
        print(line)


def _load_models(config: RunConfig) -> dict:
    missing = [spec.kind for spec in config.models if not _model_path(config, spec.kind).exists()]
    if missing:
        raise FileNotFoundError(
            f"missing model files for {missing}; run `fraudxplain train` first"
        )
    return {spec.kind: load_model(_model_path(config, spec.kind)) for spec in config.models}


def _background_spec(config: RunConfig, override: str | None) -> BackgroundSpec:
    if override is None:
        return BackgroundSpec(config.background["strategy"],
                              size=config.background.get("size"), seed=config.seed)
    strategy, _, size = override.partition(":")
    return BackgroundSpec(strategy, size=int(size) if size else None, seed=config.seed)


def _find_instance(config: RunConfig, train_ds: Dataset, validation: Dataset,
                   instance_arg: str):
    if instance_arg == "auto":
        idx = bench.pick_fraud_instance(validation, config.seed)
        return validation.matrix[idx], int(validation.row_ids[idx])
    row_id = int(instance_arg)
    for part in (validation, train_ds):
        hit = np.flatnonzero(part.row_ids == row_id)
        if len(hit):
            return part.matrix[int(hit[0])], row_id
    raise ValueError(f"unknown instance_id {row_id}")


def cmd_train(config: RunConfig) -> int:
    train_ds, validation, truth = build_dataset(config)
    _capture_config(config)
    models = {}
    for spec in config.models:
        models[spec.kind] = train(spec, train_ds)
        save_model(models[spec.kind], _model_path(config, spec.kind))
        print(f"trained {spec.kind} ({train_ds.n_rows} rows)")
    rows = _table1(config, models, validation)
    bench.write_report(config.out, _meta(config), table1=rows, filename="train_report.json")
    if truth is not None:
        _write_json(config.out / "synthetic_truth.json", {
            "weights": truth.weights, "intercept": truth.intercept,
            "informative": truth.informative,
            "detectability_floor": truth.detectability_floor,
        })
    _print_table1(rows)
    return 0


def cmd_evaluate(config: RunConfig) -> int:
    train_ds, validation, _ = build_dataset(config)
    models = _load_models(config)
    rows = _table1(config, models, validation)
    bench.write_report(config.out, _meta(config), table1=rows, filename="eval_report.json")
    _print_table1(rows)
    return 0


def cmd_explain(config: RunConfig, model_kind: str, instance_arg: str, method: str,
                background_arg: str | None) -> int:
    train_ds, validation, _ = build_dataset(config)
    path = _model_path(config, model_kind)
    if not path.exists():
        raise FileNotFoundError(f"no trained model at {path}; run `fraudxplain train` first")
    model = load_model(path)
    instance, instance_id = _find_instance(config, train_ds, validation, instance_arg)

    if method == "lime":
        attr = lime(model, instance, train_ds,
                    n_perturbations=config.explain["n_perturbations"],
                    kernel_width=config.explain["kernel_width"],
                    top_k=config.explain["top_k"], seed=config.seed)
    else:
        background = resolve_background(_background_spec(config, background_arg), train_ds)
        if method == "kernel_shap":
            attr = kernel_shap(model, instance, background,
                               n_coalitions=config.explain["n_coalitions"],
                               seed=config.seed, feature_names=train_ds.feature_names)
        elif method == "exact_shapley":
            attr = exact_shapley(model, instance, background,
                                 feature_names=train_ds.feature_names)
        else:
            raise ValueError(f"unknown method {method!r}")

    out_path = config.out / "attributions" / f"{model_kind}_{method}_{instance_id}.json"
    _write_json(out_path, attr.to_json_dict())
    ranked = rank(attr, config.explain["top_k"])
    print(f"{model_kind} / {method} on instance {instance_id} "
          f"(predicted {attr.predicted_value:.6f}, base {attr.base_value:.6f})")
    print(f"{'rank':<6}{'feature':<20}{'phi':>12}")
    for name, phi, r in ranked.entries:
        print(f"{r:<6}{name:<20}{phi:>+12.6f}")
    print(f"written to {out_path}")
    return 0


def cmd_study(config: RunConfig, which: str) -> int:
    train_ds, validation, _ = build_dataset(config)
    models = _load_models(config)
    idx = bench.pick_fraud_instance(validation, config.seed)
    instance = validation.matrix[idx]
    instance_id = int(validation.row_ids[idx])
    top_k = config.explain["top_k"]
    n_coalitions = config.explain["n_coalitions"]

    agreement_reports: list = []
    sensitivity: list = []
    timing: list = []

    if which in ("agreement", "all"):
        if "LogisticRegression" not in models:
            raise ValueError("the agreement study needs a trained LogisticRegression model")
        reference = global_lr_importance(models["LogisticRegression"], train_ds, top_k)
        background = resolve_background(_background_spec(config, None), train_ds)
        explainers = ["kernel_shap"] + (["lime"] if config.studies["lime_enabled"] else [])
        agreement_reports = bench.run_agreement_study(
            models, explainers, instance, background, reference, train_ds,
            n_coalitions=n_coalitions, n_perturbations=config.explain["n_perturbations"],
            top_k=top_k, seed=config.seed)

    if which in ("sensitivity", "all"):
        sensitivity = bench.run_sensitivity_study(
            models, instance, train_ds,
            background_size=config.studies["sensitivity_background_size"],
            n_coalitions=n_coalitions, top_k=top_k, seed=config.seed)

    if which in ("timing", "all"):
        timing = bench.run_timing_study(
            models, instance, train_ds, sizes=tuple(config.studies["sizes"]),
            n_repeats=config.studies["n_repeats"], n_coalitions=n_coalitions,
            n_perturbations=config.explain["n_perturbations"], seed=config.seed,
            instance_id=instance_id, lime_enabled=config.studies["lime_enabled"])

    path = bench.write_report(
        config.out, _meta(config, instance_id=instance_id, which=which),
        agreement_reports=agreement_reports, sensitivity=sensitivity, timing=timing,
        filename="study_report.json")
    print(f"study report written to {path}")
    return 0


def cmd_synth(config: RunConfig) -> int:
    if "synthetic" not in config.dataset:
        raise ValueError("`synth` needs a config with a dataset.synthetic block")
    from .data import generate_synthetic

    dataset, truth = generate_synthetic(seed=config.seed, **config.dataset["synthetic"])
    config.out.mkdir(parents=True, exist_ok=True)
    schema = dataset.schema

    csv_path = config.out / "synthetic.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(schema.feature_names + ["label"]) + "\n")
        for i in range(dataset.n_rows):
            cells = []
            for j, (name, kind) in enumerate(schema.columns):
                if kind == "numeric":
                    cells.append(repr(float(dataset.matrix[i, j])))
                else:
                    text = schema.decode_category(name, int(dataset.matrix[i, j]))
                    cells.append("" if text is None else text)
            cells.append(str(int(dataset.labels[i])))
            fh.write(",".join(cells) + "\n")

    lines = [f"{name} = {kind}" for name, kind in schema.columns] + ["label = label"]
    (config.out / "schema.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _write_json(config.out / "synthetic_truth.json", {
        "weights": truth.weights, "intercept": truth.intercept,
        "informative": truth.informative,
        "detectability_floor": truth.detectability_floor,
    })
    print(f"wrote {csv_path} ({dataset.n_rows} rows, "
          f"{dataset.labels.mean():.4f} fraud rate)")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraudxplain",
                                     description="fraud models, attributions, and reliability studies")
    parser.add_argument("--config", required=True, help="path to the run config JSON")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("train", help="train configured models, persist them, report metrics")
    sub.add_parser("evaluate", help="re-evaluate persisted models on the validation split")
    sub.add_parser("synth", help="write the synthetic dataset as CSV + schema + truth")

    explain_p = sub.add_parser("explain", help="explain one instance with one model")
    explain_p.add_argument("--model", required=True)
    explain_p.add_argument("--method", required=True,
                           choices=["kernel_shap", "lime", "exact_shapley"])
    explain_p.add_argument("--instance", default="auto",
                           help="row id, or 'auto' for the seed-selected fraud instance")
    explain_p.add_argument("--background", default=None,
                           help="strategy[:size], e.g. subsample:600 or fraud_only")

    study_p = sub.add_parser("study", help="run the reliability studies")
    study_p.add_argument("--which", default="all",
                         choices=["agreement", "sensitivity", "timing", "all"])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, seed=args.seed, out=args.out)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "evaluate":
            return cmd_evaluate(config)
        if args.command == "explain":
            return cmd_explain(config, args.model, args.instance, args.method,
                               args.background)
        if args.command == "study":
            return cmd_study(config, args.which)
        if args.command == "synth":
            return cmd_synth(config)
        raise ValueError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError, RuntimeError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
