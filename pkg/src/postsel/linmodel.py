"""Least-squares core: intercept handling, residualization and t-statistics.

All projections use a Householder QR factorization (LAPACK ``geqrf`` via
:func:`numpy.linalg.qr`) of the design ``[1, X_A]``. The intercept is
always part of the design, so predictors are centered before they enter
it: the column span is unchanged and near-constant columns (a density
measured around 0.997, say) no longer cancel against the intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_io import Dataset

RANK_TOL = 1e-8


class RankDeficientError(ValueError):
    """A design matrix is (numerically) rank deficient."""


class CollinearPredictorError(ValueError):
    """A candidate predictor lies in the span of the active design."""


@dataclass(frozen=True)
class ActiveSet:
    """Predictors already selected, in selection order (intercept implied)."""

    indices: tuple[int, ...] = ()
    includes_intercept: bool = True

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate indices in active set {idx}")
        if any(i < 0 for i in idx):
            raise ValueError(f"negative index in active set {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def step(self) -> int:
        """Stage k at which this set is the conditioning set (|A| = k - 1)."""
        return len(self.indices) + 1

    def add(self, j: int) -> "ActiveSet":
        return ActiveSet(self.indices + (int(j),), self.includes_intercept)

    def remaining(self, p: int) -> list[int]:
        chosen = set(self.indices)
        return [j for j in range(p) if j not in chosen]


@dataclass(frozen=True)
class SigmaEstimate:
    sigma_hat: float
    df_err: int


@dataclass(frozen=True)
class AdjustedPredictor:
    values: np.ndarray
    norm: float
    source_index: int


def centered(X: np.ndarray) -> np.ndarray:
    return X - X.mean(axis=0)


def design_matrix(X: np.ndarray, indices=()) -> np.ndarray:
    """``[1, X_indices]`` with the predictor columns centered."""
    n = X.shape[0]
    idx = list(indices)
    return np.column_stack([np.ones(n), centered(X[:, idx])]) if idx else np.ones((n, 1))


def orthonormal_basis(D: np.ndarray, labels=None) -> np.ndarray:
    """Q factor of ``D`` after checking its rank.

    A column is flagged when its R diagonal falls below ``RANK_TOL`` times
    the largest column norm of ``D``.
    """
    Q, R = np.linalg.qr(D)
    scale = np.max(np.linalg.norm(D, axis=0)) if D.size else 0.0
    diag = np.abs(np.diag(R))
    bad = np.flatnonzero(diag <= RANK_TOL * scale)
    if bad.size:
        col = int(bad[0])
        name = labels[col] if labels is not None else f"column {col}"
        raise RankDeficientError(f"design is rank deficient at {name}")
    return Q


def _labels(dataset: Dataset, indices) -> list[str]:
    return ["intercept"] + [dataset.predictor_names[i] for i in indices]


def active_basis(dataset: Dataset, active: ActiveSet) -> np.ndarray:
    for i in active.indices:
        if i >= dataset.p:
            raise ValueError(f"active index {i} out of range for p={dataset.p}")
    D = design_matrix(dataset.X, active.indices)
    return orthonormal_basis(D, _labels(dataset, active.indices))


def full_basis(dataset: Dataset) -> np.ndarray:
    idx = range(dataset.p)
    return orthonormal_basis(design_matrix(dataset.X, idx), _labels(dataset, idx))


def residualize_columns(dataset: Dataset, active: ActiveSet, columns, Q=None) -> np.ndarray:
    """Residuals of several predictor columns on ``[1, X_A]`` (n x len(columns))."""
    if Q is None:
        Q = active_basis(dataset, active)
    Xc = centered(dataset.X[:, list(columns)])
    return Xc - Q @ (Q.T @ Xc)


def residualize(dataset: Dataset, active: ActiveSet, j: int) -> AdjustedPredictor:
    """Predictor ``j`` adjusted for the intercept and the active predictors.

    A zero (or numerically zero) norm is returned as is; :func:`t_statistic`
    rejects it.
    """
    if j in active.indices:
        raise ValueError(f"predictor {j} is already active")
    if not 0 <= j < dataset.p:
        raise ValueError(f"predictor index {j} out of range")
    values = residualize_columns(dataset, active, [j])[:, 0]
    norm = float(np.linalg.norm(values))
    if norm <= RANK_TOL * float(np.linalg.norm(centered(dataset.X[:, [j]]))):
        norm = 0.0
    return AdjustedPredictor(values, norm, j)


def rss(dataset: Dataset, indices=()) -> float:
    """Residual sum of squares of the intercept-plus-``indices`` model."""
    Q = orthonormal_basis(design_matrix(dataset.X, indices), _labels(dataset, indices))
    r = dataset.y - Q @ (Q.T @ dataset.y)
    return float(r @ r)


def sigma_full(dataset: Dataset) -> SigmaEstimate:
    """Noise scale from the full-model RSS, on n - p - 1 degrees of freedom."""
    df = dataset.n - dataset.p - 1
    if df <= 0:
        raise RankDeficientError(f"no residual degrees of freedom (n={dataset.n}, p={dataset.p})")
    r = rss(dataset, range(dataset.p))
    sigma = float(np.sqrt(r / df))
    if not sigma > 1e-12 * max(1.0, float(np.linalg.norm(dataset.y))):
        raise RankDeficientError("response lies in the column span of the full design; sigma_hat = 0")
    return SigmaEstimate(sigma, df)


def t_statistic(adj: AdjustedPredictor, y, sigma: SigmaEstimate) -> float:
    """Signed t-statistic <x_{j.A}, y> / (||x_{j.A}|| sigma_hat)."""
    if not adj.norm > 0:
        raise CollinearPredictorError(
            f"predictor {adj.source_index} is collinear with the active set"
        )
    if not sigma.sigma_hat > 0:
        raise ValueError("sigma_hat must be positive")
    return float(adj.values @ np.asarray(y, dtype=float)) / (adj.norm * sigma.sigma_hat)
