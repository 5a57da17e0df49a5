"""Dataset ingestion: CSV loading, schema fitting, encoding, splits, synthetic data.

The encoding convention used everywhere downstream:

* numeric columns are z-scored with statistics fitted on training rows,
  missing values land on the training mean (0 after scaling),
* categorical columns become dense integer codes ordered by descending
  training frequency, with code 0 reserved for missing/unseen.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

COLUMN_KINDS = ("numeric", "categorical", "label", "ignore")
FEATURE_KINDS = ("numeric", "categorical")


class SchemaError(ValueError):
    """Declarations, headers, or rows do not line up."""


@dataclass
class RawRecord:
    """One data row: feature cells in schema order plus an optional binary label.

    A cell is a float (numeric column), a string (categorical column), or
    None for missing. Unparseable numeric text is treated as missing.
    """

    values: list[tuple[str, float | str | None]]
    label: int | None = None


@dataclass
class Schema:
    """Column layout and the training statistics needed to encode rows.

    category_maps holds text -> code (code 0 is reserved for missing/unseen);
    code_frequencies holds, per column, the training frequency of each code
    (index = code, index 0 = missing rate). numeric_stats holds (mean, std)
    per numeric column; constant columns are stored with std = 1.
    """

    columns: list[tuple[str, str]]
    category_maps: dict[str, dict[str, int]]
    code_frequencies: dict[str, np.ndarray]
    numeric_stats: dict[str, tuple[float, float]]

    @property
    def feature_names(self) -> list[str]:
        return [name for name, _ in self.columns]

    @property
    def n_features(self) -> int:
        return len(self.columns)

    def kind_of(self, name: str) -> str:
        for col, kind in self.columns:
            if col == name:
                return kind
        raise KeyError(name)

    def column_kinds(self) -> np.ndarray:
        """Boolean mask over columns, True where categorical."""
        return np.array([kind == "categorical" for _, kind in self.columns])

    def n_codes(self, column: str) -> int:
        return len(self.code_frequencies[column])

    def encode_category(self, column: str, cell: str | None) -> int:
        if cell is None:
            return 0
        return self.category_maps[column].get(cell, 0)

    def decode_category(self, column: str, code: int) -> str | None:
        if code == 0:
            return None
        for text, c in self.category_maps[column].items():
            if c == code:
                return text
        raise KeyError(f"column {column!r} has no code {code}")


@dataclass
class Dataset:
    """Encoded feature matrix with optional labels. Treat as read-only."""

    matrix: np.ndarray
    labels: np.ndarray | None
    schema: Schema
    row_ids: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def feature_names(self) -> list[str]:
        return self.schema.feature_names

    def take(self, indices: np.ndarray) -> "Dataset":
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(self.matrix[indices], labels, self.schema, self.row_ids[indices])


@dataclass
class SyntheticTruth:
    """Generative ground truth returned next to a synthetic Dataset."""

    weights: dict[str, float]
    intercept: float
    informative: list[str]
    detectability_floor: float
    fraud_rate: float


def parse_schema_config(path: str | Path) -> dict[str, str]:
    """Parse a schema config file into an ordered {column: kind} mapping.

    Format: one `column = kind` per line, kind in {numeric, categorical,
    label, ignore}; `#` starts a comment; blank lines are skipped.
    """
    declarations: dict[str, str] = {}
    errors = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, kind = line.partition("=")
        name, kind = name.strip(), kind.strip()
        if not sep or not name or kind not in COLUMN_KINDS:
            errors.append(f"line {lineno}: expected 'column = {{numeric|categorical|label|ignore}}', got {raw!r}")
            continue
        if name in declarations:
            errors.append(f"line {lineno}: column {name!r} declared twice")
            continue
        declarations[name] = kind
    if errors:
        raise SchemaError("bad schema config:\n  " + "\n  ".join(errors))
    if sum(1 for k in declarations.values() if k == "label") > 1:
        raise SchemaError("more than one column declared as label")
    return declarations


def _parse_cell(text: str, kind: str) -> float | str | None:
    if text == "":
        return None
    if kind == "numeric":
        try:
            return float(text)
        except ValueError:
            return None
    return text


def _parse_label(text: str, row_number: int) -> int | None:
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise SchemaError(f"row {row_number}: label {text!r} is not 0 or 1") from None
    if value not in (0.0, 1.0):
        raise SchemaError(f"row {row_number}: label {text!r} is not 0 or 1")
    return int(value)


def load_csv(path: str | Path, declarations: dict[str, str]) -> list[RawRecord]:
    """Load a CSV into RawRecords under the given column declarations.

    The header must contain every declared column and nothing undeclared
    (declare extra columns as `ignore`). Raises SchemaError with the
    differing column names otherwise, and with the row number for rows of
    wrong arity.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    feature_cols = [(n, k) for n, k in declarations.items() if k in FEATURE_KINDS]
    label_col = next((n for n, k in declarations.items() if k == "label"), None)

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        missing = [n for n in declarations if n not in header]
        undeclared = [h for h in header if h not in declarations]
        if missing or undeclared:
            raise SchemaError(
                f"{path}: header mismatch; declared but absent: {missing or 'none'}; "
                f"present but undeclared: {undeclared or 'none'}"
            )
        positions = {name: header.index(name) for name in declarations}

        records = []
        for row_number, row in enumerate(reader, 1):
            if len(row) != len(header):
                raise SchemaError(f"row {row_number}: expected {len(header)} cells, got {len(row)}")
            values = [(name, _parse_cell(row[positions[name]], kind)) for name, kind in feature_cols]
            label = _parse_label(row[positions[label_col]], row_number) if label_col else None
            records.append(RawRecord(values=values, label=label))
    return records


def fit_schema(records: list[RawRecord], declarations: dict[str, str]) -> Schema:
    """Fit encoding statistics on training records.

    Categories are coded 1..K in descending frequency (ties broken by text)
    with code 0 reserved. A numeric column whose cells are more than 50%
    missing/non-numeric raises SchemaError (likely misdeclared).
    """
    if not records:
        raise SchemaError("need at least one record to fit a schema")
    columns = [(n, k) for n, k in declarations.items() if k in FEATURE_KINDS]
    present = {name for name, _ in records[0].values}
    absent = [n for n, _ in columns if n not in present]
    if absent:
        raise SchemaError(f"declared columns missing from records: {absent}")

    n = len(records)
    cells: dict[str, list] = {name: [] for name, _ in columns}
    for rec in records:
        for name, cell in rec.values:
            if name in cells:
                cells[name].append(cell)

    category_maps: dict[str, dict[str, int]] = {}
    code_frequencies: dict[str, np.ndarray] = {}
    numeric_stats: dict[str, tuple[float, float]] = {}
    for name, kind in columns:
        col = cells[name]
        if kind == "numeric":
            values = np.array([c for c in col if c is not None], dtype=float)
            if len(values) < 0.5 * n:
                raise SchemaError(
                    f"column {name!r} declared numeric but {n - len(values)}/{n} cells "
                    "are missing or non-numeric; was it misdeclared?"
                )
            mean = float(values.mean())
            std = float(values.std())
            numeric_stats[name] = (mean, std if std > 0 else 1.0)
        else:
            counts: dict[str, int] = {}
            n_missing = 0
            for c in col:
                if c is None:
                    n_missing += 1
                else:
                    counts[c] = counts.get(c, 0) + 1
            ordered = sorted(counts, key=lambda t: (-counts[t], t))
            category_maps[name] = {text: code for code, text in enumerate(ordered, start=1)}
            freqs = np.array([n_missing] + [counts[t] for t in ordered], dtype=float) / n
            code_frequencies[name] = freqs
    return Schema(columns, category_maps, code_frequencies, numeric_stats)


def encode(records: list[RawRecord], schema: Schema, row_ids: np.ndarray | None = None) -> Dataset:
    """Encode records into a Dataset under a fitted schema.

    Labels are attached only when every record carries one.
    """
    n, d = len(records), schema.n_features
    matrix = np.zeros((n, d), dtype=float)
    for i, rec in enumerate(records):
        by_name = dict(rec.values)
        for j, (name, kind) in enumerate(schema.columns):
            cell = by_name[name]
            if kind == "numeric":
                if cell is None:
                    matrix[i, j] = 0.0
                else:
                    mean, std = schema.numeric_stats[name]
                    matrix[i, j] = (cell - mean) / std
            else:
                matrix[i, j] = schema.encode_category(name, cell)
    labels = None
    if all(rec.label is not None for rec in records) and records:
        labels = np.array([rec.label for rec in records], dtype=np.int64)
    if row_ids is None:
        row_ids = np.arange(n, dtype=np.int64)
    return Dataset(matrix, labels, schema, np.asarray(row_ids))


def stratified_split_indices(
    labels: np.ndarray, holdout_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic stratified partition; returns (train_idx, holdout_idx).

    The total holdout size is round(n * fraction), allocated to classes by
    largest remainder so class proportions stay within half a percentage
    point of the whole.
    """
    if not 0 < holdout_fraction < 1:
        raise ValueError(f"holdout_fraction must be in (0, 1), got {holdout_fraction}")
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min() < 2:
        small = classes[counts.argmin()]
        raise ValueError(f"class {small} has fewer than 2 members, cannot stratify")

    n = len(labels)
    total_holdout = int(round(n * holdout_fraction))
    total_holdout = min(max(total_holdout, len(classes)), n - len(classes))
    quotas = counts * holdout_fraction
    base = np.floor(quotas).astype(int)
    base = np.clip(base, 1, counts - 1)
    remainder = total_holdout - base.sum()
    if remainder > 0:
        order = np.argsort(-(quotas - np.floor(quotas)), kind="stable")
        for k in order:
            if remainder == 0:
                break
            if base[k] < counts[k] - 1:
                base[k] += 1
                remainder -= 1

    rng = np.random.default_rng(seed)
    holdout_parts = []
    for cls, take in zip(classes, base):
        idx = np.flatnonzero(labels == cls)
        perm = rng.permutation(len(idx))
        holdout_parts.append(idx[perm[:take]])
    holdout = np.sort(np.concatenate(holdout_parts))
    mask = np.ones(n, dtype=bool)
    mask[holdout] = False
    return np.flatnonzero(mask), holdout


def split(dataset: Dataset, holdout_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified train/validation split of an encoded Dataset."""
    if dataset.labels is None:
        raise ValueError("split requires a labeled dataset")
    train_idx, val_idx = stratified_split_indices(dataset.labels, holdout_fraction, seed)
    return dataset.take(train_idx), dataset.take(val_idx)


def prepare_csv_dataset(
    path: str | Path, declarations: dict[str, str], holdout_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Load a labeled CSV and produce (train, validation) Datasets.

    The schema is fitted on the training partition only, so no validation
    statistic leaks into the encoding.
    """
    records = load_csv(path, declarations)
    if any(rec.label is None for rec in records):
        raise SchemaError("training CSV must carry a 0/1 label in every row")
    labels = np.array([rec.label for rec in records], dtype=np.int64)
    train_idx, val_idx = stratified_split_indices(labels, holdout_fraction, seed)
    schema = fit_schema([records[i] for i in train_idx], declarations)
    train = encode([records[i] for i in train_idx], schema, row_ids=train_idx)
    val = encode([records[i] for i in val_idx], schema, row_ids=val_idx)
    return train, val


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _calibrate_intercept(partial_logit: np.ndarray, target_rate: float) -> float:
    lo, hi = -30.0, 30.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _sigmoid(partial_logit + mid).mean() < target_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# Weight profile of the informative features; signs alternate so that fraud
# is not simply "every feature large". The floor below which sign recovery
# is not promised is documented in SyntheticTruth.
_WEIGHT_BASE = 2.5
_WEIGHT_DECAY = 0.8
_DETECTABILITY_FLOOR = 0.75
_MISSING_CODE_RATE = 0.02
_IDIOSYNCRATIC_SHARE = 0.3  # per-feature variance not explained by latent factors


def generate_synthetic(
    n_rows: int,
    n_numeric: int,
    n_categorical: int,
    fraud_rate: float,
    seed: int,
    n_informative: int = 5,
    latent_rank: int = 0,
) -> tuple[Dataset, SyntheticTruth]:
    """Generate a labeled synthetic Dataset with known generative weights.

    Labels follow a sparse linear logit over the first `n_informative`
    numeric features; the intercept is calibrated so the label mean tracks
    `fraud_rate`. Categorical columns are label-independent nuisance
    features drawn from a skewed frequency profile.

    With latent_rank > 0 the numeric block shares that many latent factors
    (unit marginal variance preserved), which gives reconstruction-based
    detectors a structure to learn; the default is independent features.
    Returns the Dataset and the generative truth (weights, intercept,
    detectability floor).
    """
    if not 0 < fraud_rate < 0.5:
        raise ValueError(f"fraud_rate must be in (0, 0.5), got {fraud_rate}")
    if n_rows * fraud_rate < 5:
        raise ValueError(
            f"n_rows={n_rows} at fraud_rate={fraud_rate} yields fewer than 5 expected fraud rows"
        )
    if n_informative > n_numeric:
        raise ValueError(f"n_informative={n_informative} exceeds n_numeric={n_numeric}")
    if n_informative < 1:
        raise ValueError("need at least one informative feature")

    rng = np.random.default_rng(seed)
    numeric_names = [f"num_{j:02d}" for j in range(n_numeric)]
    categorical_names = [f"cat_{j:02d}" for j in range(n_categorical)]

    if latent_rank > 0:
        factors = rng.standard_normal((n_rows, latent_rank))
        loadings = rng.standard_normal((n_numeric, latent_rank))
        loadings /= np.linalg.norm(loadings, axis=1, keepdims=True)
        x_num = (np.sqrt(1.0 - _IDIOSYNCRATIC_SHARE) * factors @ loadings.T
                 + np.sqrt(_IDIOSYNCRATIC_SHARE) * rng.standard_normal((n_rows, n_numeric)))
        # informative features stay idiosyncratic so the label mechanism is
        # independent of the latent structure
        x_num[:, :n_informative] = rng.standard_normal((n_rows, n_informative))
    else:
        x_num = rng.standard_normal((n_rows, n_numeric))

    columns = [(name, "numeric") for name in numeric_names]
    columns += [(name, "categorical") for name in categorical_names]
    category_maps: dict[str, dict[str, int]] = {}
    code_frequencies: dict[str, np.ndarray] = {}
    cat_cols = []
    for j, name in enumerate(categorical_names):
        n_cats = 4 + (j % 3)
        raw = _WEIGHT_DECAY ** np.arange(n_cats)
        probs = np.concatenate(([_MISSING_CODE_RATE], (1 - _MISSING_CODE_RATE) * raw / raw.sum()))
        codes = rng.choice(n_cats + 1, size=n_rows, p=probs)
        cat_cols.append(codes.astype(float))
        category_maps[name] = {f"v{c}": c for c in range(1, n_cats + 1)}
        code_frequencies[name] = probs
    matrix = np.column_stack([x_num] + cat_cols) if cat_cols else x_num

    signs = np.where(np.arange(n_informative) % 2 == 0, 1.0, -1.0)
    weights = _WEIGHT_BASE * _WEIGHT_DECAY ** np.arange(n_informative) * signs
    partial = x_num[:, :n_informative] @ weights
    intercept = _calibrate_intercept(partial, fraud_rate)
    labels = (rng.random(n_rows) < _sigmoid(partial + intercept)).astype(np.int64)

    schema = Schema(
        columns=columns,
        category_maps=category_maps,
        code_frequencies=code_frequencies,
        numeric_stats={name: (0.0, 1.0) for name in numeric_names},
    )
    dataset = Dataset(matrix, labels, schema, np.arange(n_rows, dtype=np.int64))
    truth = SyntheticTruth(
        weights={numeric_names[j]: float(weights[j]) for j in range(n_informative)},
        intercept=float(intercept),
        informative=numeric_names[:n_informative],
        detectability_floor=_DETECTABILITY_FLOOR,
        fraud_rate=fraud_rate,
    )
    return dataset, truth
