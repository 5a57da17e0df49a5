"""Run configuration: one JSON file per run, validated up front.

Every run is driven by a config file plus optional flag overrides (flags
win). The seed is mandatory; there is no wall-clock fallback, a run must be
reproducible from its captured config alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .data import generate_synthetic, parse_schema_config, prepare_csv_dataset, split
from .models import MODEL_KINDS, ModelSpec


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid config:\n  " + "\n  ".join(problems))


@dataclass
class RunConfig:
    seed: int
    out: Path
    dataset: dict
    holdout_fraction: float
    models: list[ModelSpec]
    explain: dict
    background: dict
    studies: dict
    compare_reference: bool
    source_path: Path | None = None

    def dataset_label(self) -> str:
        if "synthetic" in self.dataset:
            s = self.dataset["synthetic"]
            return (f"synthetic(n_rows={s['n_rows']}, n_numeric={s['n_numeric']}, "
                    f"n_categorical={s['n_categorical']}, fraud_rate={s['fraud_rate']})")
        return f"csv({self.dataset['csv']['path']})"


_EXPLAIN_DEFAULTS = {"n_coalitions": None, "n_perturbations": 5000,
                     "kernel_width": None, "top_k": 10}
_BACKGROUND_DEFAULTS = {"strategy": "subsample", "size": 600}
_STUDY_DEFAULTS = {"sizes": [600, 1000, 4000], "n_repeats": 3,
                   "sensitivity_background_size": None, "lime_enabled": True}
_SYNTH_DEFAULTS = {"n_rows": 5000, "n_numeric": 16, "n_categorical": 4,
                   "fraud_rate": 0.035, "n_informative": 5, "latent_rank": 0}


def load_config(path: str | Path, seed=None, out=None) -> RunConfig:
    """Read, validate, and resolve a config file; collects every problem at once."""
    path = Path(path)
    problems: list[str] = []
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])

    effective_seed = seed if seed is not None else raw.get("seed")
    if effective_seed is None:
        problems.append("seed is mandatory (config key 'seed' or --seed flag)")
    elif not isinstance(effective_seed, int):
        problems.append(f"seed must be an integer, got {effective_seed!r}")

    effective_out = out if out is not None else raw.get("out")
    if effective_out is None:
        problems.append("output directory is mandatory (config key 'out' or --out flag)")

    dataset = raw.get("dataset")
    if not isinstance(dataset, dict) or len(set(dataset) & {"synthetic", "csv"}) != 1:
        problems.append("dataset must be an object with exactly one of 'synthetic' or 'csv'")
        dataset = {}
    elif "synthetic" in dataset:
        synth = {**_SYNTH_DEFAULTS, **dataset["synthetic"]}
        unknown = set(dataset["synthetic"]) - set(_SYNTH_DEFAULTS)
        if unknown:
            problems.append(f"unknown synthetic keys: {sorted(unknown)}")
        dataset = {"synthetic": synth}
    else:
        csv_spec = dataset["csv"]
        for key in ("path", "schema"):
            if key not in csv_spec:
                problems.append(f"dataset.csv.{key} is required")
            elif not Path(csv_spec[key]).exists():
                problems.append(f"dataset.csv.{key} does not exist: {csv_spec[key]}")
        dataset = {"csv": csv_spec}

    holdout = raw.get("holdout_fraction", 0.2)
    if not isinstance(holdout, (int, float)) or not 0 < holdout < 1:
        problems.append(f"holdout_fraction must be in (0, 1), got {holdout!r}")

    model_entries = raw.get("models", list(MODEL_KINDS))
    specs = []
    for entry in model_entries:
        if isinstance(entry, str):
            entry = {"kind": entry}
        kind = entry.get("kind")
        if kind not in MODEL_KINDS:
            problems.append(f"unknown model kind {kind!r}; expected one of {list(MODEL_KINDS)}")
            continue
        specs.append(ModelSpec(kind=kind,
                               hyperparameters=entry.get("hyperparameters", {}),
                               seed=entry.get("seed", effective_seed if isinstance(effective_seed, int) else 0)))
        try:
            specs[-1].resolved_hyperparameters()
        except ValueError as exc:
            problems.append(str(exc))
    if len({s.kind for s in specs}) != len(specs):
        problems.append("duplicate model kinds in 'models'")

    explain = {**_EXPLAIN_DEFAULTS, **raw.get("explain", {})}
    unknown = set(raw.get("explain", {})) - set(_EXPLAIN_DEFAULTS)
    if unknown:
        problems.append(f"unknown explain keys: {sorted(unknown)}")

    background = {**_BACKGROUND_DEFAULTS, **raw.get("background", {})}
    if background.get("strategy") not in ("all", "subsample", "normal_only", "fraud_only"):
        problems.append(f"unknown background strategy {background.get('strategy')!r}")

    studies = {**_STUDY_DEFAULTS, **raw.get("studies", {})}
    unknown = set(raw.get("studies", {})) - set(_STUDY_DEFAULTS)
    if unknown:
        problems.append(f"unknown studies keys: {sorted(unknown)}")

    known_top = {"seed", "out", "dataset", "holdout_fraction", "models", "explain",
                 "background", "studies", "compare_reference"}
    unknown = set(raw) - known_top
    if unknown:
        problems.append(f"unknown top-level keys: {sorted(unknown)}")

    if problems:
        raise ConfigError(problems)

    return RunConfig(
        seed=effective_seed,
        out=Path(effective_out),
        dataset=dataset,
        holdout_fraction=float(holdout),
        models=specs,
        explain=explain,
        background=background,
        studies=studies,
        compare_reference=bool(raw.get("compare_reference", "csv" in dataset)),
        source_path=path,
    )


def build_dataset(config: RunConfig):
    """Materialize (train, validation, synthetic_truth_or_None) from the config."""
    if "synthetic" in config.dataset:
        full, truth = generate_synthetic(seed=config.seed, **config.dataset["synthetic"])
        train, val = split(full, config.holdout_fraction, seed=config.seed)
        return train, val, truth
    csv_spec = config.dataset["csv"]
    declarations = parse_schema_config(csv_spec["schema"])
    train, val = prepare_csv_dataset(csv_spec["path"], declarations,
                                     config.holdout_fraction, seed=config.seed)
    return train, val, None
