"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary) and then asserts the criterion at its
stated tolerance.
"""

import json
import time

import numpy as np
import pytest

from postsel.cli import main
from postsel.data_io import Dataset, load_csv
from postsel.dists import RngStream, f_survival
from postsel.lasso_test import lars_lasso, standardize
from postsel.linmodel import ActiveSet, residualize, rss, sigma_full, t_statistic
from postsel.nullsim import ks_distance, simulate_lemma2_null, simulate_spacing_null
from postsel.stepwise import METHODS, run_stepwise, select_next

from conftest import orthonormal_columns

ORDER = ["alcohol", "volatile_acidity", "sulphates", "total_sulfur_dioxide", "chlorides", "ph",
         "free_sulfur_dioxide", "citric_acid", "residual_sugar", "fixed_acidity", "density"]
T_STATS = [23.7216, 14.9676, 6.8479, 4.4237, 4.3749, 3.7544, 2.3878, 1.0633, 0.7818, 0.5071, 0.8266]
REF_STEPWISE = {
    "naive": [0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0002, 0.0171, 0.2878, 0.4344, 0.6122, 0.4086],
    "exact": [0.0000, 0.0000, 0.0000, 0.0001, 0.0001, 0.0011, 0.0726, 0.6540, 0.7528, 0.7829, 0.4066],
    "bonferroni": [0.0000, 0.0000, 0.0000, 0.0001, 0.0001, 0.0011, 0.0853, 1.0000, 1.0000, 1.0000,
                   0.4086],
    "scheffe": [0.0000, 0.0000, 0.0000, 0.0125, 0.0080, 0.0291, 0.3369, 0.8893, 0.8938, 0.8794,
                0.4086],
    "ftest": [0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0010, 0.1370, 0.6124, 0.6705, 0.6250, 0.4086],
    "lemma2": [0.0000, 0.0000, 0.0000, 0.4136, 0.0011, 0.0062, 0.0915, 0.6309, 0.8429, 0.8190, None],
}
REF_BOOT_COUNTS = [1000, 1000, 1000, 991, 936, 818, 576, 350]
REF_BOOT_MEDIANS = [0.000, 0.000, 0.000, 0.008, 0.057, 0.048, 0.169, 0.370]


def test_c1_wine_t_statistics(report, wine_path):
    t0 = time.perf_counter()
    ds = load_csv(wine_path, "quality")
    table = run_stepwise(ds, methods=[m for m in METHODS if m != "exact"])
    elapsed = time.perf_counter() - t0
    err = max(abs(a - b) for a, b in zip(table.t_values, T_STATS))
    ok = table.names == ORDER and err <= 1e-3 and elapsed < 1.0
    report("C1 wine stepwise order and t-statistics", ok,
           f"max |dt| = {err:.2e} (tol 1e-3), runtime {elapsed:.3f} s (< 1 s)")
    assert table.names == ORDER
    assert err <= 1e-3
    assert elapsed < 1.0


def test_c2_wine_deterministic_columns(report, wine):
    table = run_stepwise(wine, methods=[m for m in METHODS if m != "exact"])
    worst = {}
    for m in ("naive", "bonferroni", "scheffe", "ftest", "lemma2"):
        got, want = table.column(m), REF_STEPWISE[m]
        assert (got[-1] is None) == (want[-1] is None)
        worst[m] = max(abs(g - w) for g, w in zip(got, want) if w is not None)
    ok = max(worst.values()) <= 1.5e-3
    report("C2 wine stepwise deterministic p-value columns", ok,
           ", ".join(f"{m} {v:.1e}" for m, v in worst.items()) + " (tol 1.5e-3)")
    assert ok


def test_c3_wine_exact_column(report, wine):
    t0 = time.perf_counter()
    table = run_stepwise(wine, methods=METHODS, replicates=99_999, seed=1)
    elapsed = time.perf_counter() - t0
    bad = []
    for r, want in zip(table.records, REF_STEPWISE["exact"]):
        tol = max(0.005, 4 * r.exact_se)
        if abs(r.p_exact - want) > tol:
            bad.append((r.step, r.p_exact, want, tol))
    ok = not bad and elapsed <= 60
    ex = table.column("exact")
    report("C3 wine stepwise exact column", ok,
           f"step 7 {ex[6]:.4f} (0.0726), step 8 {ex[7]:.4f} (0.6540), step 11 {ex[10]:.4f} "
           f"(0.4066); outside tol: {bad or 'none'}; six-method table {elapsed:.2f} s (<= 60 s)")
    assert not bad
    assert elapsed <= 60


def test_c4_f2_arithmetic(report):
    a = f_survival(3.134, 2, 58)
    b = f_survival(15.67, 2, 58)
    ok = abs(a - 0.0510) <= 5e-4 and abs(b - 3.6e-6) <= 5e-7
    report("C4 F(2,58) arithmetic", ok, f"F(3.134) tail {a:.5f}, F(15.67) tail {b:.3e}")
    assert abs(a - 0.0510) <= 5e-4
    assert abs(b - 3.6e-6) <= 5e-7


def test_c5_wine_bootstrap(report, wine):
    from postsel.bootstrap import run_bootstrap

    s = run_bootstrap(wine, B=1000, threshold=0.05, seed=1, steps=8)
    counts, med = s.cumulative_counts, s.median_pvalues
    count_dev = [k + 1 for k in range(8) if abs(counts[k] - REF_BOOT_COUNTS[k]) > 35]
    med_dev = [k + 1 for k in range(8) if abs(med[k] - REF_BOOT_MEDIANS[k]) > 0.03]
    in_band = not count_dev and not med_dev
    nonincreasing = bool(np.all(np.diff(counts) <= 0))
    trend = bool(np.all(np.diff(med[2:]) >= 0))
    ok = in_band or (nonincreasing and trend)
    detail = (f"counts {counts.tolist()}, medians {np.round(med, 3).tolist()}; "
              + ("within reference bands" if in_band else
                 f"soft-golden deviation reported: counts outside +-35 at steps {count_dev}, "
                 f"medians outside +-0.03 at steps {med_dev}")
              + f"; counts nonincreasing={nonincreasing}, medians nondecreasing over 3-8={trend}")
    report("C5 wine lasso bootstrap", ok, detail)
    assert nonincreasing and trend


def test_c6_null_law_suite(report):
    rng = RngStream(0)
    reps = [simulate_spacing_null(None, 500, j, 5000, 0.0, rng.child(j)) for j in (1, 2, 3, 4)]
    means_ok = [abs(r.empirical_mean - 1 / j) <= 0.05 * (1 / j) * 3 for j, r in enumerate(reps, 1)]
    lem = simulate_lemma2_null(200, 50, 5000, rng.child(9))
    ok = reps[0].ks_distance < 0.03 and all(means_ok) and lem.ks_distance < 0.05
    report("C6 null-law suite", ok,
           f"spacing j=1 KS {reps[0].ks_distance:.4f} (< 0.03); means "
           + ", ".join(f"j={j}: {r.empirical_mean:.3f}" for j, r in enumerate(reps, 1))
           + f"; gap-statistic KS to F(2,149) {lem.ks_distance:.4f} (< 0.05)")
    assert reps[0].ks_distance < 0.03
    assert all(means_ok)
    assert lem.ks_distance < 0.05


def _kkt(X, y, b, lam):
    c = X.T @ (y - X @ b)
    nz = b != 0
    off = np.max(np.abs(c[~nz])) - lam if (~nz).any() else 0.0
    on = np.max(np.abs(c[nz] - lam * np.sign(b[nz]))) if nz.any() else 0.0
    return max(off, on, 0.0)


def test_c7_oracle_equivalence(report):
    gen = np.random.default_rng(20240607)
    t_err = kkt_err = f_err = 0.0
    for _ in range(50):
        n = int(gen.integers(8, 31))
        p = int(gen.integers(1, min(6, n - 3) + 1))
        X = gen.standard_normal((n, p)) * gen.uniform(0.1, 10, p)
        y = X @ gen.standard_normal(p) + gen.standard_normal(n)
        ds = Dataset.from_arrays(X, y)
        s = sigma_full(ds)
        k = int(gen.integers(0, p))
        order = gen.permutation(p)
        A, j = tuple(int(i) for i in order[:k]), int(order[k])
        D = np.column_stack([np.ones(n)] + [X[:, a] for a in A] + [X[:, j]])
        G = D.T @ D
        beta = np.linalg.solve(G, D.T @ y)
        want = beta[-1] / (s.sigma_hat * np.sqrt(np.linalg.inv(G)[-1, -1]))
        got = t_statistic(residualize(ds, ActiveSet(A), j), y, s)
        t_err = max(t_err, abs(got - want) / abs(want))

        Xs, ys, _ = standardize(X, y)
        path = lars_lasso(Xs, ys)
        for lam in np.linspace(0.02, 0.98, 5) * path.knots[0]:
            kkt_err = max(kkt_err, _kkt(Xs, ys, path.coef_at(lam), lam))

        Q = orthonormal_columns(n, p, int(gen.integers(1 << 31)))
        yq = Q @ gen.standard_normal(p) + gen.standard_normal(n)
        dq = Dataset.from_arrays(Q, yq)
        sq = sigma_full(dq)
        _, tv = select_next(dq, ActiveSet(A), sq)
        m = p - len(A)
        F = (rss(dq, A) - rss(dq, range(p))) / m / sq.sigma_hat**2
        F_t = sum(v * v for v in tv.values()) / m
        f_err = max(f_err, abs(F - F_t) / max(abs(F_t), 1e-300))
    ok = t_err <= 1e-8 and kkt_err <= 1e-6 and f_err <= 1e-8
    report("C7 oracle equivalence (50 instances)", ok,
           f"t vs OLS rel {t_err:.1e} (1e-8), KKT {kkt_err:.1e} (1e-6), "
           f"F vs sum t^2/m rel {f_err:.1e} (1e-8)")
    assert ok


def test_c8_exact_pvalue_uniformity(report):
    n, p, sims, reps = 50, 8, 2000, 999
    X = RngStream(8).generator().standard_normal((n, p))
    pv = np.empty(sims)
    for i in range(sims):
        y = RngStream(8, (1, i)).generator().standard_normal(n)
        t = run_stepwise(Dataset.from_arrays(X, y), methods=["exact"], replicates=reps,
                         seed=10_000 + i, max_steps=1)
        pv[i] = t.records[0].p_exact
    ks = ks_distance(pv, lambda x: np.clip(x, 0, 1))
    bound = 1.36 / np.sqrt(sims) + 0.01
    report("C8 exact p-value uniformity under the global null", ks < bound,
           f"KS {ks:.4f} (< {bound:.4f}), step 1, {sims} sims x {reps} replicates")
    assert ks < bound


def _json(capsys, argv):
    assert main(argv) == 0
    return capsys.readouterr().out


def test_c9_determinism_across_threads(report, capsys, wine_path):
    data = ["--data", str(wine_path), "--response", "quality"]
    commands = {
        "stepwise": ["stepwise", *data, "--reps", "20000", "--seed", "3"],
        "lasso": ["lasso", *data],
        "bootstrap": ["bootstrap", *data, "--B", "100", "--seed", "3"],
        "nullsim spacing": ["nullsim", "--mode", "spacing", "--p", "100", "--j", "2",
                            "--reps", "5000", "--seed", "3"],
        "nullsim lemma2": ["nullsim", "--mode", "lemma2", "--n", "60", "--p", "10",
                           "--reps", "3000", "--seed", "3"],
        "nullsim selection": ["nullsim", "--mode", "selection", "--p", "10", "--reps", "5000",
                              "--seed", "3"],
    }
    mismatched = []
    for name, argv in commands.items():
        outs = [_json(capsys, argv + ["--format", fmt, "--threads", th])
                for fmt in ("json", "csv") for th in ("1", "4")]
        json.loads(outs[0])
        if outs[0] != outs[1] or outs[2] != outs[3]:
            mismatched.append(name)
    report("C9 determinism across thread counts", not mismatched,
           f"{len(commands)} commands x json/csv, threads 1 vs 4; mismatches: {mismatched or 'none'}")
    assert not mismatched
