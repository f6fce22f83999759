"""Simulation checks of the null laws behind the spacing and stepwise tests.

Every simulation returns a :class:`NullSimReport` with the Kolmogorov-Smirnov
distance between the simulated statistic and its reference law.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .dists import ExpLaw, RngStream, chisq1_survival, f2_survival_closed, max_chisq1_survival

BLOCK = 1000


@dataclass
class NullSimReport:
    mode: str
    n: int | None
    p: int
    rho: float
    step: int
    replicates: int
    ks_distance: float
    empirical_mean: float
    reference: str
    dominates_chisq1: bool | None = None
    sample: np.ndarray | None = field(default=None, repr=False)


def ks_distance(sample, cdf) -> float:
    """sup_x |F_n(x) - F(x)| for a continuous reference ``cdf``."""
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - F), np.max(F - (i - 1) / m)))


def _blocks(R):
    return [(b, min(BLOCK, R - b * BLOCK)) for b in range(-(-R // BLOCK))]


def orthonormal_design(n: int, p: int, gen: np.random.Generator) -> np.ndarray:
    """Columns orthonormal to each other and to the constant vector."""
    if n < p + 1:
        raise ValueError(f"orthonormal design needs n >= p + 1 (n={n}, p={p})")
    G = gen.standard_normal((n, p))
    G -= G.mean(axis=0)
    Q, _ = np.linalg.qr(G)
    return Q


def equicorrelated_design(n: int, p: int, rho: float, gen: np.random.Generator) -> np.ndarray:
    g = gen.standard_normal((n, 1))
    X = np.sqrt(rho) * g + np.sqrt(1 - rho) * gen.standard_normal((n, p))
    X -= X.mean(axis=0)
    return X / np.linalg.norm(X, axis=0)


def spacing_statistic(abs_z: np.ndarray, j: int) -> np.ndarray:
    """|z|_(j) (|z|_(j) - |z|_(j+1)) row-wise, with |z| sorted decreasingly."""
    top = -np.partition(-abs_z, j, axis=1)[:, : j + 1]
    top = -np.sort(-top, axis=1)
    return top[:, j - 1] * (top[:, j - 1] - top[:, j])


def simulate_spacing_null(n, p: int, j: int, R: int, rho: float = 0.0, rng: RngStream | None = None,
                          n_threads=None, keep_sample=False) -> NullSimReport:
    """Null law of the j-th spacing statistic, known sigma = 1.

    With ``rho == 0`` and ``n`` None (or ``n < p``) the z-statistics are
    drawn i.i.d. N(0, 1), which is their exact law under an orthonormal
    design; with ``rho == 0`` and ``n >= p`` an explicit orthonormalized
    Gaussian design is used; with ``rho > 0`` the design is equicorrelated
    and ``n`` is required. One design is drawn per report; the noise is
    redrawn per replicate.
    """
    if not 1 <= j <= p - 1:
        raise ValueError(f"need 1 <= j <= p - 1 (j={j}, p={p})")
    if R < 100:
        raise ValueError("R must be >= 100")
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    rng = rng or RngStream(0)
    if rho == 0 and (n is None or n < p):
        X = None
    else:
        if n is None:
            raise ValueError("n is required for correlated designs")
        dgen = rng.child(0).generator()
        X = orthonormal_design(n, p, dgen) if rho == 0 else equicorrelated_design(n, p, rho, dgen)

    def run(block):
        b, size = block
        gen = rng.child(1).child(b).generator()
        if X is None:
            z = gen.standard_normal((size, p))
        else:
            z = gen.standard_normal((size, X.shape[0])) @ X
        return spacing_statistic(np.abs(z), j)

    s = np.concatenate(ordered_map(run, _blocks(R), n_threads))
    law = ExpLaw(1.0 / j)
    return NullSimReport("spacing", n, p, rho, j, R, ks_distance(s, law.cdf), float(s.mean()),
                         f"Exp(mean 1/{j})", sample=s if keep_sample else None)


def simulate_lemma2_null(n: int, p: int, R: int, rng: RngStream | None = None, n_threads=None,
                         keep_sample=False) -> NullSimReport:
    """Step-1 gap statistic t_max (t_max - t_second) with estimated sigma.

    Orthonormal design with intercept, pure-noise response, full-model
    sigma_hat on n - p - 1 degrees of freedom; reference F(2, n - p - 1).
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if n <= p + 1:
        raise ValueError(f"need n > p + 1 (n={n}, p={p})")
    if R < 100:
        raise ValueError("R must be >= 100")
    rng = rng or RngStream(0)
    df = n - p - 1
    X = orthonormal_design(n, p, rng.child(0).generator())

    def run(block):
        b, size = block
        E = rng.child(1).child(b).generator().standard_normal((size, n))
        E -= E.mean(axis=1, keepdims=True)
        Z = E @ X
        rss = np.einsum("ij,ij->i", E, E) - np.einsum("ij,ij->i", Z, Z)
        t = np.abs(Z) / np.sqrt(rss / df)[:, None]
        return spacing_statistic(t, 1)

    s = np.concatenate(ordered_map(run, _blocks(R), n_threads))
    return NullSimReport("lemma2", n, p, 0.0, 1, R,
                         ks_distance(s, lambda x: 1.0 - f2_survival_closed(x, df)),
                         float(s.mean()), f"F(2,{df})", sample=s if keep_sample else None)


def simulate_selection_null(p: int, R: int, rng: RngStream | None = None, n_threads=None,
                            keep_sample=False) -> NullSimReport:
    """Max of ``p`` independent squared standard normals against its closed form.

    Also records whether the simulated law exceeds chi-square(1) at every
    point of a quantile grid (stochastic dominance).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if R < 1:
        raise ValueError("R must be >= 1")
    rng = rng or RngStream(0)

    def run(block):
        b, size = block
        z = rng.child(b).generator().standard_normal((size, p))
        return np.max(z * z, axis=1)

    s = np.concatenate(ordered_map(run, _blocks(R), n_threads))
    ks = ks_distance(s, lambda x: 1.0 - max_chisq1_survival(x, p))
    grid = np.quantile(s, np.linspace(0.05, 0.95, 19))
    emp_exceed = np.array([np.mean(s > g) for g in grid])
    dominates = bool(np.all(emp_exceed >= chisq1_survival(grid) - 1e-12))
    return NullSimReport("selection", None, p, 0.0, 1, R, ks, float(s.mean()),
                         f"max of {p} chi2(1)", dominates, sample=s if keep_sample else None)
