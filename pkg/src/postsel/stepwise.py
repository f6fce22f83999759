"""Forward stepwise selection with selection-valid p-values.

At stage ``k`` the active set ``A`` holds ``k - 1`` predictors; every
remaining predictor ``j`` is adjusted for the intercept and ``A`` and
scored by

    t_j = <x_{j.A}, y> / (||x_{j.A}|| * sigma_hat),

with one full-model ``sigma_hat`` shared by all steps. The largest
``|t_j|`` enters, and six p-values are attached to it:

naive       two-sided t tail, ignoring selection
exact       Monte Carlo null of max_j |t_j| under pure noise
bonferroni  naive times the number of remaining predictors, capped at 1
scheffe     t_max^2 / m against F(m, df_err)
ftest       F-test of the submodel A inside the full model
lemma2      t_max (t_max - t_second) against F(2, df_err)
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import _validation
from ._parallel import ordered_map
from .data_io import Dataset
from .dists import RngStream, f_survival, t_survival_two_sided
from .linmodel import (
    RANK_TOL,
    ActiveSet,
    CollinearPredictorError,
    SigmaEstimate,
    active_basis,
    centered,
    full_basis,
    sigma_full,
)

METHODS = ("naive", "exact", "bonferroni", "scheffe", "ftest", "lemma2")
BLOCK_SIZE = 4096
MAX_REDRAWS = 10
TIE_TOL = 1e-12  # relative; |t| values this close to the maximum count as tied


@dataclass
class StepRecord:
    step: int
    selected: int
    name: str
    t_selected: float
    m_remaining: int
    t_second: float | None = None
    p_naive: float | None = None
    p_exact: float | None = None
    exact_se: float | None = None
    p_bonferroni: float | None = None
    p_scheffe: float | None = None
    p_ftest: float | None = None
    p_lemma2: float | None = None


@dataclass
class StepwiseTable:
    records: list[StepRecord]
    sigma: SigmaEstimate
    mc_replicates: int
    seed: int
    methods: tuple[str, ...] = METHODS

    @property
    def selected(self) -> list[int]:
        return [r.selected for r in self.records]

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.records]

    def column(self, method: str) -> list[float | None]:
        return [getattr(r, f"p_{method}") for r in self.records]

    @property
    def t_values(self) -> list[float]:
        return [r.t_selected for r in self.records]


@dataclass
class _StepState:
    """Adjusted candidates at one stage, shared by all p-value methods."""

    remaining: list[int]
    unit: np.ndarray  # n x m, unit-norm adjusted predictors
    t: np.ndarray  # signed t for each remaining predictor
    usable: np.ndarray  # nonzero adjusted norm


def _step_state(dataset: Dataset, active: ActiveSet, sigma: SigmaEstimate) -> _StepState:
    remaining = active.remaining(dataset.p)
    if not remaining:
        raise ValueError("no remaining predictors")
    Q = active_basis(dataset, active)
    Xr = centered(dataset.X[:, remaining])
    R = Xr - Q @ (Q.T @ Xr)
    norms = np.linalg.norm(R, axis=0)
    usable = norms > RANK_TOL * np.linalg.norm(Xr, axis=0)
    if not usable.any():
        raise CollinearPredictorError("all remaining predictors are collinear with the active set")
    unit = np.zeros_like(R)
    unit[:, usable] = R[:, usable] / norms[usable]
    t = unit.T @ dataset.y / sigma.sigma_hat
    t[~usable] = 0.0
    return _StepState(remaining, unit[:, usable], t, usable)


def _argmax_lowest(abs_t: np.ndarray) -> int:
    """Position of the largest entry; near-ties resolve to the lowest position."""
    top = np.max(abs_t)
    return int(np.flatnonzero(abs_t >= top - TIE_TOL * top)[0])


def select_next(dataset: Dataset, active: ActiveSet, sigma: SigmaEstimate):
    """Index of the remaining predictor with the largest ``|t|``.

    Returns ``(j_star, t_values)`` where ``t_values`` maps every remaining
    predictor to its signed t-statistic (0 for predictors collinear with
    the active set). Ties go to the lowest index.
    """
    st = _step_state(dataset, active, sigma)
    abs_t = np.where(st.usable, np.abs(st.t), -np.inf)
    j_star = st.remaining[_argmax_lowest(abs_t)]
    return j_star, dict(zip(st.remaining, st.t.tolist()))


def pvalue_naive(t_max: float, sigma: SigmaEstimate) -> float:
    return t_survival_two_sided(abs(t_max), sigma.df_err)


def pvalue_bonferroni(p_naive: float, m_remaining: int) -> float:
    if m_remaining < 1:
        raise ValueError("m_remaining must be >= 1")
    return min(1.0, m_remaining * p_naive)


def pvalue_scheffe(t_max: float, m_remaining: int, sigma: SigmaEstimate) -> float:
    if m_remaining < 1:
        raise ValueError("m_remaining must be >= 1")
    return f_survival(t_max * t_max / m_remaining, m_remaining, sigma.df_err)


def pvalue_ftest_remaining(dataset: Dataset, active: ActiveSet, sigma: SigmaEstimate) -> float:
    """F-test of the intercept-plus-A model against the full model."""
    m = dataset.p - len(active.indices)
    if m < 1:
        raise ValueError("no remaining predictors to test")
    # RSS_A - RSS_full as the squared projection of the submodel residual
    # onto the full column space, which avoids differencing two large sums
    QA = active_basis(dataset, active)
    r = dataset.y - QA @ (QA.T @ dataset.y)
    drop = float(np.sum((full_basis(dataset).T @ r) ** 2))
    F = drop / m / sigma.sigma_hat**2
    return f_survival(F, m, sigma.df_err)


def pvalue_lemma2(t_max: float, t_second: float, sigma: SigmaEstimate) -> float:
    """Gap-weighted maximum ``t_max (t_max - t_second)`` against F(2, df_err).

    Both arguments are magnitudes with ``t_max >= t_second``.
    """
    t_max, t_second = abs(t_max), abs(t_second)
    if t_second > t_max:
        raise ValueError("t_second must not exceed t_max")
    return f_survival(t_max * (t_max - t_second), 2, sigma.df_err)


def _tmax_block(U, Qf, unit, df, size, gen, noise):
    """Null draws of max_j |t_j| for one block of replicates.

    ``projected`` draws the noise only through its coordinates in the
    full-model column space plus an independent chi-square residual sum of
    squares; it has the same law as ``full``, which draws n-vectors.
    """
    q = U.shape[0]
    if noise == "projected":
        W = gen.standard_normal((size, q))
        res = gen.chisquare(df, size)
        for _ in range(MAX_REDRAWS):
            bad = res <= 0
            if not bad.any():
                break
            res[bad] = gen.chisquare(df, int(bad.sum()))
        inner = W @ U
    elif noise == "full":
        E = gen.standard_normal((size, Qf.shape[0]))
        proj = E @ Qf
        res = np.einsum("ij,ij->i", E, E) - np.einsum("ij,ij->i", proj, proj)
        for _ in range(MAX_REDRAWS):
            bad = res <= 1e-12 * Qf.shape[0]
            if not bad.any():
                break
            E[bad] = gen.standard_normal((int(bad.sum()), Qf.shape[0]))
            proj[bad] = E[bad] @ Qf
            res[bad] = (E[bad] ** 2).sum(1) - (proj[bad] ** 2).sum(1)
        inner = E @ unit
    else:
        raise ValueError(f"unknown noise mode {noise!r}")
    if np.any(res <= 0):
        raise ArithmeticError("degenerate sigma_hat after repeated redraws")
    return np.max(np.abs(inner), axis=1) / np.sqrt(res / df)


def _exact_from_state(st, Qf, df, t_max_obs, replicates, rng, noise, n_threads):
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    U = Qf.T @ st.unit
    blocks = [(b, min(BLOCK_SIZE, replicates - b * BLOCK_SIZE))
              for b in range(-(-replicates // BLOCK_SIZE))]

    def run(block):
        b, size = block
        tm = _tmax_block(U, Qf, st.unit, df, size, rng.child(b).generator(), noise)
        return int(np.count_nonzero(tm >= t_max_obs))

    exceed = sum(ordered_map(run, blocks, n_threads))
    p = (1 + exceed) / (replicates + 1)
    return p, float(np.sqrt(p * (1 - p) / replicates))


def pvalue_exact(dataset: Dataset, active: ActiveSet, sigma: SigmaEstimate, t_max_obs: float,
                 replicates: int, rng: RngStream, noise: str = "projected", n_threads=None):
    """Monte Carlo p-value of the observed max-|t| at this stage.

    Each replicate draws pure noise, refits the full-model ``sigma_hat`` on
    it and takes the maximum adjusted ``|t|`` over the remaining
    predictors. Returns ``(p, mc_se)`` with the add-one estimate
    ``p = (1 + #exceed) / (replicates + 1)``. Replicates are split into
    fixed-size blocks, block ``b`` drawing from ``rng.child(b)``.
    """
    st = _step_state(dataset, active, sigma)
    Qf = full_basis(dataset)
    return _exact_from_state(st, Qf, sigma.df_err, abs(t_max_obs), replicates, rng, noise, n_threads)


def run_stepwise(dataset: Dataset, methods=METHODS, replicates: int = 99_999, seed: int = 1,
                 noise: str = "projected", n_threads=None, max_steps=None) -> StepwiseTable:
    """Run forward selection to the end and compute the requested p-values."""
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    methods = tuple(m for m in METHODS if m in set(methods))
    sigma = sigma_full(dataset)
    Qf = full_basis(dataset) if "exact" in methods else None
    active = ActiveSet()
    records = []
    n_steps = dataset.p if max_steps is None else min(dataset.p, int(max_steps))
    for k in range(1, n_steps + 1):
        st = _step_state(dataset, active, sigma)
        abs_t = np.where(st.usable, np.abs(st.t), -np.inf)
        i_star = _argmax_lowest(abs_t)
        j_star = st.remaining[i_star]
        t_max = float(abs_t[i_star])
        m = len(st.remaining)
        rest = np.delete(abs_t, i_star)
        t_second = float(rest.max()) if m >= 2 and np.isfinite(rest.max()) else None
        rec = StepRecord(k, j_star, dataset.predictor_names[j_star], t_max, m, t_second)
        if "naive" in methods or "bonferroni" in methods:
            naive = pvalue_naive(t_max, sigma)
            if "naive" in methods:
                rec.p_naive = naive
            if "bonferroni" in methods:
                rec.p_bonferroni = pvalue_bonferroni(naive, m)
        if "exact" in methods:
            rec.p_exact, rec.exact_se = _exact_from_state(
                st, Qf, sigma.df_err, t_max, replicates, RngStream(seed, (k,)), noise, n_threads)
        if "scheffe" in methods:
            rec.p_scheffe = pvalue_scheffe(t_max, m, sigma)
        if "ftest" in methods:
            rec.p_ftest = pvalue_ftest_remaining(dataset, active, sigma)
        if "lemma2" in methods and t_second is not None:
            rec.p_lemma2 = pvalue_lemma2(t_max, t_second, sigma)
        records.append(rec)
        active = active.add(j_star)
    return StepwiseTable(records, sigma, replicates if "exact" in methods else 0, seed, methods)


def record_fields() -> list[str]:
    return [f.name for f in fields(StepRecord)]


class ForwardStepwiseInference(TransformerMixin, BaseEstimator):
    """Forward stepwise selection with selection-valid p-values.

    Parameters
    ----------
    methods : sequence of str
        Subset of ``("naive", "exact", "bonferroni", "scheffe", "ftest", "lemma2")``.
    replicates : int
        Null replicates for the exact max-|t| method.
    seed : int
        Seed for the exact method's random streams.
    stop_method : str or None
        If set, the retained model is the longest prefix of steps whose
        p-values under this method are all below ``alpha``; otherwise all
        steps are retained.
    alpha : float
        Threshold used with ``stop_method``.
    n_threads : int or None
        Worker threads for the Monte Carlo blocks; results do not depend on it.

    Attributes
    ----------
    table_ : StepwiseTable
    selected_ : ndarray of int
        Column indices in selection order.
    n_selected_ : int
        Size of the retained model.
    coef_, intercept_ : OLS fit on the retained predictors.
    """

    def __init__(self, methods=METHODS, replicates=99_999, seed=1, stop_method=None,
                 alpha=0.05, n_threads=None):
        self.methods = methods
        self.replicates = replicates
        self.seed = seed
        self.stop_method = stop_method
        self.alpha = alpha
        self.n_threads = n_threads

    def fit(self, X, y, feature_names=None):
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods: {sorted(bad)}")
        if self.stop_method is not None and self.stop_method not in self.methods:
            raise ValueError("stop_method must be one of the requested methods")
        ds = _validation.as_dataset(X, y, feature_names)
        self.feature_names_ = list(ds.predictor_names)
        self.n_features_in_ = ds.p
        self.table_ = run_stepwise(ds, self.methods, self.replicates, self.seed,
                                   n_threads=self.n_threads)
        self.selected_ = np.array(self.table_.selected, dtype=int)
        if self.stop_method is None:
            self.n_selected_ = ds.p
        else:
            from .bootstrap import estimated_model_size

            pv = [1.0 if v is None else v for v in self.table_.column(self.stop_method)]
            self.n_selected_ = estimated_model_size(pv, self.alpha)
        keep = self.selected_[: self.n_selected_]
        D = np.column_stack([np.ones(ds.n), ds.X[:, keep]])
        beta = np.linalg.lstsq(D, ds.y, rcond=None)[0]
        self.intercept_ = float(beta[0])
        self.coef_ = np.zeros(ds.p)
        self.coef_[keep] = beta[1:]
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        X = _validation.check_predict_input(X, self.n_features_in_)
        return X[:, self.selected_[: self.n_selected_]]

    def predict(self, X):
        check_is_fitted(self, "table_")
        X = _validation.check_predict_input(X, self.n_features_in_)
        return self.intercept_ + X @ self.coef_
