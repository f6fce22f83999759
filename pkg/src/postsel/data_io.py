"""Loading delimited numeric datasets into an immutable :class:`Dataset`."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised when an input file cannot be turned into a valid dataset."""


@dataclass(frozen=True)
class Dataset:
    """Named design matrix and response.

    ``X`` holds the predictors only; the intercept is added by the
    modelling code, never stored here. Arrays are made read-only so a
    dataset can be shared between threads.
    """

    predictor_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    response_name: str = "y"

    def __post_init__(self):
        X = np.array(self.X, dtype=float, copy=True)
        y = np.array(self.y, dtype=float, copy=True)
        names = tuple(str(n) for n in self.predictor_names)
        if X.ndim != 2:
            raise DataError(f"X must be 2-D, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(f"y must be 1-D with {X.shape[0]} entries, got shape {y.shape}")
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} names for {X.shape[1]} columns")
        if any(not n for n in names):
            raise DataError("predictor names must be nonempty")
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise DataError(f"duplicate predictor names: {dup}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains missing or non-finite values")
        n, p = X.shape
        if n <= p + 1:
            raise DataError(f"need n > p + 1 for a residual variance estimate (n={n}, p={p})")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "predictor_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def df_err(self) -> int:
        return self.n - self.p - 1

    def index(self, name: str) -> int:
        return self.predictor_names.index(name)

    def take_rows(self, rows) -> "Dataset":
        """Return a new dataset made of the given rows (used for resampling)."""
        rows = np.asarray(rows)
        return Dataset(self.predictor_names, self.X[rows], self.y[rows], self.response_name)

    @classmethod
    def from_arrays(cls, X, y, names=None, response_name="y") -> "Dataset":
        X = np.asarray(X, dtype=float)
        if names is None:
            names = [f"x{j}" for j in range(X.shape[1])]
        return cls(tuple(names), X, np.asarray(y, dtype=float), response_name)


def normalize_name(name: str) -> str:
    return name.strip().lower().replace(" ", "_")


def load_csv(path, response: str, delimiter: str = ";", normalize_names: bool = True) -> Dataset:
    """Read a header-plus-numeric-rows file and split off the response.

    Parameters
    ----------
    path : str or Path
        UTF-8 delimited text file with a header row.
    response : str
        Name of the response column, matched after normalization when
        ``normalize_names`` is set.
    delimiter : str
        Single-character field separator (semicolon for the UCI wine files).
    normalize_names : bool
        Lower-case names and replace spaces with underscores.

    Raises
    ------
    DataError
        Missing file or response column, duplicate names, non-numeric
        or non-finite cells (the message names row and column).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    if len(delimiter) != 1:
        raise DataError(f"delimiter must be a single character, got {delimiter!r}")

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        names = [normalize_name(h) if normalize_names else h.strip() for h in header]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise DataError(f"duplicate column names: {dup}")
        key = normalize_name(response) if normalize_names else response
        if key not in names:
            raise DataError(f"response column {response!r} not found; columns are {names}")

        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(names):
                raise DataError(f"row {lineno}: expected {len(names)} fields, got {len(record)}")
            values = []
            for col, cell in zip(names, record):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"row {lineno}, column {col!r}: non-numeric value {cell!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"row {lineno}, column {col!r}: non-finite value {cell!r}")
                values.append(v)
            rows.append(values)

    if not rows:
        raise DataError(f"{path} has a header but no data rows")
    data = np.array(rows, dtype=float)
    r = names.index(key)
    keep = [i for i in range(len(names)) if i != r]
    return Dataset(tuple(names[i] for i in keep), data[:, keep], data[:, r], key)


def write_csv(dataset: Dataset, path, delimiter: str = ";") -> None:
    """Write predictors followed by the response; floats use round-trip repr."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow([*dataset.predictor_names, dataset.response_name])
        for xi, yi in zip(dataset.X, dataset.y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
