import os
import math
import logging
from typing import IO, NamedTuple

import numpy as np
import pandas as pd
from pandas.api.types import is_bool_dtype, is_numeric_dtype

MISSING_REJECT = "reject"
MISSING_IMPUTE_MEAN = "impute-column-mean"
MISSING_POLICIES = [MISSING_REJECT, MISSING_IMPUTE_MEAN]

DEFAULT_LABEL_COLUMN = "label"


class Dataset:
    """
    An immutable columnar feature matrix (N rows x M named float64 columns) with an optional binary label vector.
    The values are stored column-major so that single column access is contiguous.
    """
    names:list[str]
    values:np.ndarray
    labels:np.ndarray|None

    def __init__(self, names:list[str], values:np.ndarray, labels:np.ndarray|None = None) -> None:
        names = [str(n) for n in names]
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1 and len(names) == 0 and values.size == 0:
            values = values.reshape(0 if labels is None else len(labels), 0)
        if len(names) == 0 and values.ndim == 2 and values.shape[1] == 0 and labels is not None:
            values = values.reshape(len(labels), 0)
        if values.ndim != 2:
            raise ValueError(f"Dataset values must be a 2-D matrix, got {values.ndim} dimension(s)")
        if values.shape[1] != len(names):
            raise ValueError(f"Dataset has {len(names)} column name(s) but {values.shape[1]} column(s) of values")

        seen = set()
        for name in names:
            if name == "":
                raise ValueError("Column names must be non-empty")
            if name in seen:
                raise ValueError(f"Duplicate column name '{name}'")
            seen.add(name)

        if labels is not None:
            labels = np.asarray(labels)
            if labels.ndim != 1 or len(labels) != values.shape[0]:
                raise ValueError(f"Expected {values.shape[0]} label(s), got {labels.size}")
            if not np.all((labels == 0) | (labels == 1)):
                raise ValueError("Labels must only contain 0 and 1")
            labels = labels.astype(np.int8)
            labels.flags.writeable = False

        ## Own a read-only column-major copy so callers can't mutate the dataset afterwards
        values = np.array(values, dtype=np.float64, order="F")
        values.flags.writeable = False

        self.names = names
        self.values = values
        self.labels = labels
        self._index = {name: i for i, name in enumerate(names)}

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def has_column(self, name:str) -> bool:
        return name in self._index

    def index_of(self, name:str) -> int:
        if name not in self._index:
            raise KeyError(f"Unknown column '{name}'")
        return self._index[name]

    def column(self, name:str) -> np.ndarray:
        return self.values[:, self.index_of(name)]

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("The dataset has no label column")
        return self.labels

    def require_both_classes(self, purpose:str = "training") -> np.ndarray:
        """
        Return the labels, failing if they do not contain at least one row of each class
        """
        labels = self.require_labels()
        positives = int(labels.sum())
        if self.n_rows == 0:
            raise ValueError(f"The dataset used for {purpose} is empty")
        if positives == 0 or positives == self.n_rows:
            raise ValueError(f"The labels used for {purpose} contain a single class (need both 0 and 1)")
        return labels

    def take(self, rows:np.ndarray) -> 'Dataset':
        rows = np.asarray(rows, dtype=np.int64)
        labels = self.labels[rows] if self.labels is not None else None
        return Dataset(self.names, self.values[rows, :], labels)

    def select(self, names:list[str]) -> 'Dataset':
        """
        Project (and reorder) the dataset onto the named columns
        """
        idx = [self.index_of(name) for name in names]
        return Dataset(list(names), self.values[:, idx], self.labels)

    def with_columns(self, names:list[str], values:np.ndarray) -> 'Dataset':
        """
        Return a new dataset with the given columns appended
        """
        if len(names) == 0:
            return self
        values = np.asarray(values, dtype=np.float64).reshape(self.n_rows, len(names))
        return Dataset(self.names + list(names), np.hstack([self.values, values]), self.labels)

    def to_frame(self, label_column:str|None = DEFAULT_LABEL_COLUMN) -> pd.DataFrame:
        frame = pd.DataFrame({name: self.values[:, i] for i, name in enumerate(self.names)}, columns=self.names)
        if self.labels is not None and label_column is not None:
            if label_column in self._index:
                raise ValueError(f"Label column name '{label_column}' clashes with a feature column")
            frame[label_column] = self.labels.astype(np.int64)
        return frame

    def __repr__(self) -> str:
        return f"Dataset(n_rows={self.n_rows}, n_features={self.n_features}, labelled={self.labels is not None})"


class SplitSpec:
    train_fraction:float = 0.8
    valid_fraction:float = 0.0
    test_fraction:float = 0.2
    seed:int = 0

    def __init__(self, train_fraction:float = 0.8, valid_fraction:float = 0.0, test_fraction:float = 0.2, seed:int = 0) -> None:
        self.train_fraction = float(train_fraction)
        self.valid_fraction = float(valid_fraction)
        self.test_fraction = float(test_fraction)
        self.seed = int(seed)
        self.validate()

    def validate(self) -> None:
        fractions = (self.train_fraction, self.valid_fraction, self.test_fraction)
        for fraction in fractions:
            if not 0.0 <= fraction <= 1.0:
                raise ValueError(f"Split fractions must be in [0,1], got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"Split fractions must sum to 1, got {fractions}")
        if self.seed < 0:
            raise ValueError(f"Split seed must be unsigned, got {self.seed}")


class ColumnStats(NamedTuple):
    mean:float
    stdev:float
    min:float
    max:float
    distinct_count:int


def _parse_cell(raw:any) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        return math.nan


def _column_to_floats(column:pd.Series) -> np.ndarray:
    if is_numeric_dtype(column) and not is_bool_dtype(column):
        return column.to_numpy(dtype=np.float64, na_value=np.nan)
    ## Mixed / text column: parse cell by cell so that the bad cells can be located
    return np.array([_parse_cell(v) for v in column.tolist()], dtype=np.float64)


def _read_header(source:str|IO) -> list[str]:
    header = pd.read_csv(source, nrows=1, header=None, encoding="utf-8", dtype=str, keep_default_na=False)
    if hasattr(source, "seek"):
        source.seek(0)
    return [str(v) for v in header.iloc[0].tolist()] if len(header) > 0 else []


def load_csv(path:str|IO, label_column:str|None, missing_policy:str = MISSING_REJECT) -> Dataset:
    """
    Load a UTF-8, comma delimited CSV file with a header row into a Dataset.

    The label column (if given) is removed from the features and must only contain 0/1.
    Missing or non-numeric feature cells are either rejected (with the row and column named)
    or replaced by the mean of the observed values in their column.
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValueError(f"Unknown missing value policy '{missing_policy}' (expected one of {MISSING_POLICIES})")
    if isinstance(path, str) and not os.path.isfile(path):
        raise FileNotFoundError(f"CSV file '{path}' does not exist")

    try:
        header = _read_header(path)
        frame = pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
    except pd.errors.EmptyDataError:
        raise ValueError(f"CSV file '{path}' is empty (a header row is required)")
    except pd.errors.ParserError as e:
        raise ValueError(f"Failed to parse CSV file '{path}': {e}")

    ## pandas silently renames duplicate headers, so check the raw header row
    duplicates = sorted({name for name in header if header.count(name) > 1})
    if len(duplicates) > 0:
        raise ValueError(f"Duplicate column name(s) in header: {duplicates}")

    return from_frame(frame, label_column, missing_policy)


def from_frame(frame:pd.DataFrame, label_column:str|None, missing_policy:str = MISSING_REJECT, row_offset:int = 0) -> Dataset:
    """
    Convert a parsed CSV frame into a Dataset (see load_csv). `row_offset` is added to the
    row numbers in error messages when the frame is one chunk of a larger file.
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValueError(f"Unknown missing value policy '{missing_policy}' (expected one of {MISSING_POLICIES})")
    if label_column is not None and label_column not in frame.columns:
        raise KeyError(f"Unknown label column '{label_column}'")

    labels = None
    if label_column is not None:
        raw_labels = _column_to_floats(frame[label_column])
        bad = ~np.isin(raw_labels, [0.0, 1.0])
        if bad.any():
            row = int(np.argmax(bad))
            raise ValueError(f"Label {frame[label_column].iloc[row]!r} at row {row_offset + row + 1}, column '{label_column}' is not 0 or 1")
        labels = raw_labels.astype(np.int8)

    names = [str(c) for c in frame.columns if c != label_column]
    columns = []
    for name in names:
        values = _column_to_floats(frame[name])
        bad = ~np.isfinite(values)
        if bad.any():
            if missing_policy == MISSING_REJECT:
                row = int(np.argmax(bad))
                raise ValueError(f"Missing or non-numeric value {frame[name].iloc[row]!r} at row {row_offset + row + 1}, column '{name}'")
            observed = values[~bad]
            if observed.size == 0:
                raise ValueError(f"Column '{name}' has no observed values to impute from")
            mean = float(observed.mean())
            logging.debug(f"Imputing {int(bad.sum())} missing value(s) in column '{name}' with {mean}")
            values = np.where(bad, mean, values)
        columns.append(values)

    n_rows = len(frame)
    matrix = np.column_stack(columns) if len(columns) > 0 else np.empty((n_rows, 0))
    return Dataset(names, matrix, labels)


def write_csv(d:Dataset, path:str|IO, label_column:str|None = DEFAULT_LABEL_COLUMN) -> None:
    """
    Write the dataset as CSV; floats are written with their shortest round-trip representation
    """
    d.to_frame(label_column).to_csv(path, index=False, lineterminator="\n")


def split(d:Dataset, spec:SplitSpec, require_non_empty:bool = False) -> tuple[Dataset, Dataset, Dataset]:
    """
    Shuffle the rows with the seed and cut them into (train, valid, test).
    Valid and test sizes are floor(N * fraction), the remainder goes to train.
    """
    spec.validate()
    n = d.n_rows
    if n < 3:
        raise ValueError(f"Need at least 3 rows to split, got {n}")

    ## The epsilon keeps exact products (eg. 10 * 0.2) from flooring one short
    n_valid = int(math.floor(n * spec.valid_fraction + 1e-9))
    n_test = int(math.floor(n * spec.test_fraction + 1e-9))
    n_train = n - n_valid - n_test

    if require_non_empty:
        for part, size in (("train", n_train), ("valid", n_valid), ("test", n_test)):
            if size == 0:
                raise ValueError(f"The {part} split would be empty for {n} rows with fractions ({spec.train_fraction}, {spec.valid_fraction}, {spec.test_fraction})")

    order = np.random.default_rng(spec.seed).permutation(n)
    train_rows = order[:n_train]
    valid_rows = order[n_train:n_train + n_valid]
    test_rows = order[n_train + n_valid:]
    return d.take(train_rows), d.take(valid_rows), d.take(test_rows)


def column_stats(d:Dataset, name:str) -> ColumnStats:
    values = d.column(name)
    if values.size == 0:
        raise ValueError(f"Column '{name}' is empty")
    return ColumnStats(
        mean=float(values.mean()),
        stdev=float(values.std(ddof=0)),
        min=float(values.min()),
        max=float(values.max()),
        distinct_count=int(np.unique(values).size),
    )
