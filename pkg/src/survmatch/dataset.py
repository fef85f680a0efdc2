"""Survival dataset ingestion and preprocessing.

Pipeline: ``load_csv`` parses a header+rows CSV into a raw dataset with
missing entries marked, ``impute`` fills gaps with training-split medians/
modes, ``encode`` one-hot-expands categoricals and z-scores continuous
columns with training-split statistics, and ``stratified_split`` partitions
rows while preserving the event proportion. All statistics always come from
the training split and are reused for validation/test.

Missing values are empty CSV cells or the literal ``NA``.
"""

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError, SchemaError

KINDS = ("continuous", "categorical")
_MISSING = ("", "NA")


@dataclass(frozen=True)
class FeatureSchema:
    """Column layout of a survival CSV: covariates plus time/event columns."""

    columns: list
    time_column: str
    event_column: str

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate covariate column names")
        for name, kind in self.columns:
            if kind not in KINDS:
                raise SchemaError(f"column {name!r} has unknown kind {kind!r}")
        if self.time_column == self.event_column:
            raise SchemaError("time and event columns must be distinct")
        for special in (self.time_column, self.event_column):
            if special in names:
                raise SchemaError(f"{special!r} cannot be both covariate and outcome")

    @property
    def names(self):
        return [name for name, _ in self.columns]

    def kind_of(self, name):
        for col, kind in self.columns:
            if col == name:
                return kind
        raise SchemaError(f"unknown column {name!r}")


@dataclass
class SurvDataset:
    """Covariates with observed times and censoring indicators.

    Before ``encode`` the covariate matrix has object dtype with ``None``
    marking missing entries; afterwards it is a finite float64 matrix and
    ``feature_names`` lists the expanded columns.
    """

    X: np.ndarray
    t: np.ndarray
    y: np.ndarray
    schema: FeatureSchema
    encoded: bool = False
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.n == 0:
            raise DataError("no observations")
        if self.t.shape != (self.n,) or self.y.shape != (self.n,):
            raise DataError("time/event vectors must match the covariate rows")
        if np.any(self.t < 0) or not np.all(np.isfinite(self.t)):
            raise DataError("times must be finite and nonnegative")
        if not np.isin(self.y, (0.0, 1.0)).all():
            raise DataError("event indicators must be 0 or 1")
        if self.encoded:
            self.X = np.asarray(self.X, dtype=np.float64)
            if not np.all(np.isfinite(self.X)):
                raise DataError("encoded covariates must be finite")
            if not self.feature_names:
                self.feature_names = [name for name, _ in self.schema.columns]

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def width(self):
        return self.X.shape[1]

    def take(self, idx):
        """Row subset (copies)."""
        return SurvDataset(
            X=self.X[idx].copy(),
            t=self.t[idx].copy(),
            y=self.y[idx].copy(),
            schema=self.schema,
            encoded=self.encoded,
            feature_names=list(self.feature_names),
        )


@dataclass(frozen=True)
class SplitSpec:
    """Train/valid/test fractions plus the shuffle seed."""

    fractions: tuple = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if len(self.fractions) != 3 or any(f <= 0 for f in self.fractions):
            raise DataError("need three positive split fractions")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1, got {sum(self.fractions)}")


def load_csv(path, schema):
    """Parse a survival CSV against ``schema``.

    The header must contain every schema column plus the time and event
    columns (extra columns are ignored). Times must be nonnegative numbers
    and events 0/1; violations raise with the offending line number.
    Missing covariate cells (empty or ``NA``) are kept as ``None``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        wanted = schema.names + [schema.time_column, schema.event_column]
        missing = [c for c in wanted if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        pos = {c: header.index(c) for c in wanted}

        rows, times, events = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(cell.strip() == "" for cell in row):
                continue
            if len(row) < len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            raw_t = row[pos[schema.time_column]].strip()
            try:
                t_val = float(raw_t)
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparseable time {raw_t!r}") from None
            if not np.isfinite(t_val) or t_val < 0:
                raise DataError(f"{path}:{lineno}: time must be nonnegative, got {raw_t!r}")
            raw_y = row[pos[schema.event_column]].strip()
            if raw_y not in ("0", "1"):
                raise DataError(f"{path}:{lineno}: event indicator must be 0 or 1, got {raw_y!r}")
            cells = []
            for name, kind in schema.columns:
                cell = row[pos[name]].strip()
                if cell in _MISSING:
                    cells.append(None)
                elif kind == "continuous":
                    try:
                        cells.append(float(cell))
                    except ValueError:
                        raise DataError(
                            f"{path}:{lineno}: column {name!r} expects a number, got {cell!r}"
                        ) from None
                else:
                    cells.append(cell)
            rows.append(cells)
            times.append(t_val)
            events.append(float(raw_y))

    if not rows:
        raise DataError(f"{path}: no observations")
    X = np.empty((len(rows), len(schema.columns)), dtype=object)
    X[:] = rows
    return SurvDataset(X=X, t=np.array(times), y=np.array(events), schema=schema)


def missing_mask(ds):
    """Boolean mask of missing covariate entries in a raw dataset."""
    return np.vectorize(lambda v: v is None, otypes=[bool])(ds.X)


def compute_impute_stats(ds):
    """Median per continuous and mode per categorical column, training side.

    Mode ties break toward the lexicographically smallest level so the
    statistic is deterministic.
    """
    stats = {}
    for j, (name, kind) in enumerate(ds.schema.columns):
        observed = [v for v in ds.X[:, j] if v is not None]
        if not observed:
            raise DataError(f"column {name!r} has no observed values to impute from")
        if kind == "continuous":
            stats[name] = float(np.median(np.array(observed, dtype=np.float64)))
        else:
            levels, counts = np.unique(np.array(observed, dtype=object), return_counts=True)
            stats[name] = sorted(levels[counts == counts.max()])[0]
    return stats


def impute(ds, stats=None):
    """Fill missing entries; ``stats=None`` computes them from ``ds`` itself
    (the training case), otherwise reuses the provided training statistics."""
    if ds.encoded:
        raise DataError("impute operates on raw (pre-encoding) datasets")
    if stats is None:
        stats = compute_impute_stats(ds)
    X = ds.X.copy()
    for j, (name, _) in enumerate(ds.schema.columns):
        if name not in stats:
            raise DataError(f"no imputation statistic for column {name!r}")
        col = X[:, j]
        col[[v is None for v in col]] = stats[name]
    return replace(ds, X=X)


def compute_encode_stats(ds):
    """Levels per categorical plus mean/population-std per continuous column."""
    stats = {}
    for j, (name, kind) in enumerate(ds.schema.columns):
        col = ds.X[:, j]
        if any(v is None for v in col):
            raise DataError(f"column {name!r} still has missing values; impute first")
        if kind == "continuous":
            vals = col.astype(np.float64)
            stats[name] = ("continuous", float(vals.mean()), float(vals.std()))
        else:
            stats[name] = ("categorical", sorted(set(col.astype(str))))
    return stats


def encode(ds, stats=None):
    """One-hot categoricals and z-score continuous columns.

    A categorical with k training levels expands to k binary columns; a
    level unseen in training maps to the all-zeros block. Zero-variance
    continuous columns pass through as zeros with a warning.
    """
    if ds.encoded:
        raise DataError("dataset already encoded")
    if stats is None:
        stats = compute_encode_stats(ds)
    blocks, names = [], []
    for j, (name, kind) in enumerate(ds.schema.columns):
        entry = stats.get(name)
        if entry is None or entry[0] != kind:
            raise DataError(f"encoding statistics missing or inconsistent for {name!r}")
        col = ds.X[:, j]
        if kind == "continuous":
            _, mean, std = entry
            vals = col.astype(np.float64)
            if std == 0.0:
                warnings.warn(f"column {name!r} has zero variance; passing through as zeros")
                blocks.append(np.zeros((ds.n, 1)))
            else:
                blocks.append(((vals - mean) / std)[:, None])
            names.append(name)
        else:
            _, levels = entry
            level_pos = {lv: i for i, lv in enumerate(levels)}
            block = np.zeros((ds.n, len(levels)))
            for r, v in enumerate(col.astype(str)):
                if v in level_pos:
                    block[r, level_pos[v]] = 1.0
            blocks.append(block)
            names.extend(f"{name}={lv}" for lv in levels)
    return SurvDataset(
        X=np.hstack(blocks),
        t=ds.t.copy(),
        y=ds.y.copy(),
        schema=ds.schema,
        encoded=True,
        feature_names=names,
    )


def _stratum_bounds(size, fractions):
    cum = np.round(np.cumsum(fractions) * size).astype(int)
    return (0, cum[0]), (cum[0], cum[1]), (cum[1], size)


def stratified_split(ds, spec):
    """Partition rows into train/valid/test, stratified by event status.

    Event and censored subjects are shuffled and sliced independently, so
    each split's event proportion tracks the global one. Deterministic for
    a given seed; raises if any split would be empty.
    """
    rng = np.random.default_rng(spec.seed)
    parts = [[], [], []]
    for label in (1.0, 0.0):
        idx = np.flatnonzero(ds.y == label)
        if idx.size == 0:
            continue
        idx = rng.permutation(idx)
        for part, (a, b) in zip(parts, _stratum_bounds(idx.size, spec.fractions)):
            part.append(idx[a:b])
    splits = []
    for part in parts:
        rows = np.sort(np.concatenate(part)) if part else np.array([], dtype=int)
        if rows.size == 0:
            raise DataError(
                f"split fractions {spec.fractions} leave an empty split for n={ds.n}"
            )
        splits.append(ds.take(rows))
    return tuple(splits)


def prepare_splits(ds, spec):
    """Split raw data, then impute and encode with training-split statistics."""
    train, valid, test = stratified_split(ds, spec)
    imp = compute_impute_stats(train)
    train, valid, test = (impute(s, imp) for s in (train, valid, test))
    enc = compute_encode_stats(train)
    return tuple(encode(s, enc) for s in (train, valid, test))
