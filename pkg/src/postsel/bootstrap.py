"""Pairs bootstrap of lasso p-value sequences and the model-size rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import ordered_map
from .data_io import Dataset
from .dists import RngStream
from .lasso_test import lasso_pvalue_sequence
from .linmodel import RankDeficientError, sigma_full

MAX_RETRIES = 10


@dataclass
class BootstrapSummary:
    steps: int
    cumulative_counts: np.ndarray
    median_pvalues: np.ndarray
    B: int
    threshold: float
    seed: int
    reference: str = "f2_dferr"
    retries: int = 0
    pvalues: np.ndarray | None = None  # B x steps, missing steps filled with 1.0


def estimated_model_size(pvalues, threshold: float = 0.05) -> int:
    """Largest k such that the first k p-values are all below ``threshold``."""
    pvalues = list(pvalues)
    if not pvalues:
        raise ValueError("empty p-value sequence")
    k = 0
    for pv in pvalues:
        if pv is None or not pv < threshold:
            break
        k += 1
    return k


def resample_pvalues(dataset: Dataset, rng: RngStream, steps: int, reference: str):
    """Lasso p-values for one pairs-bootstrap resample.

    Returns ``(pvalues, retries)``. Steps beyond the end of the sequence,
    and the final knot (no successor), count as p = 1.
    """
    gen = rng.generator()
    n = dataset.n
    for attempt in range(MAX_RETRIES + 1):
        rows = gen.integers(0, n, size=n)
        sample = dataset.take_rows(rows)
        try:
            sigma = sigma_full(sample)
            seq = lasso_pvalue_sequence(sample, sigma, reference)
        except (RankDeficientError, ValueError):
            continue
        out = np.ones(steps)
        for i, s in enumerate(seq[:steps]):
            if s.p_value is not None:
                out[i] = s.p_value
        return out, attempt
    raise RankDeficientError(f"resample {rng.key} rank deficient after {MAX_RETRIES} redraws")


def summarize(P: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    below = np.cumprod(P < threshold, axis=1)
    return below.sum(axis=0).astype(int), np.median(P, axis=0)


def run_bootstrap(dataset: Dataset, B: int = 1000, threshold: float = 0.05,
                  reference: str = "f2_dferr", seed: int = 1, steps: int = 8,
                  n_threads=None) -> BootstrapSummary:
    """Pairs-bootstrap the lasso p-value sequence ``B`` times.

    Resample ``b`` draws its rows from stream ``(seed, b)``, so the summary
    is the same for any thread count.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    results = ordered_map(
        lambda b: resample_pvalues(dataset, RngStream(seed, (b,)), steps, reference),
        range(B), n_threads)
    P = np.vstack([r[0] for r in results])
    retries = sum(r[1] for r in results)
    counts, medians = summarize(P, threshold)
    return BootstrapSummary(steps, counts, medians, B, threshold, seed, reference, retries, P)
