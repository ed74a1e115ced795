"""Acceptance criteria, each at its stated tolerance and runtime budget.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines as
they happen; they are also repeated in the terminal summary.
"""

import math
import time
from itertools import combinations

import numpy as np

from tpcr.baselines import ols_fit
from tpcr.datagen import SyntheticConfig, assemble, gen_eval_set, star_basis
from tpcr.errors import NoFeasibleSubsetError
from tpcr.experiments import BENCH_COLUMNS, read_csv, write_bench
from tpcr.linalg import numeric_rank, orthonormalize
from tpcr.oracles import max_subspace_cardinality, recoverability, submatrix_residual
from tpcr.recovery import (
    RecoveryOptions,
    identification_rate,
    recover_efficient,
    recover_exact,
    recover_noise_free,
    span_distance,
)
from tpcr.regression import expected_quadratic_loss, predict, rmse, tolerance_bound, tpcr_fit
from tpcr.trimmed import is_monotone, linear_trimmed_problem, smallest_rows, solve_trimmed, solve_trimmed_multistart


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0

    @property
    def ok(self):
        return self.elapsed < self.seconds


def test_criterion_1_identification_rate(report):
    total = failures = 0
    with Budget(120) as b:
        for seed in range(10):
            for n1 in range(5, 40, 5):
                n = 100 - n1
                ds = assemble(SyntheticConfig(n=n, n1=n1, m=100, k=5, feature_noise_std=0.0, seed=seed))
                for k in range(5, 11):
                    for keep in range(65, n + 1, 5):
                        res = recover_efficient(ds.X, keep, k, RecoveryOptions(restarts=8, seed=seed))
                        total += 1
                        failures += identification_rate(res, ds.adversarial) != 1.0
    passed = failures == 0 and b.ok
    report(1, passed, f"{total - failures}/{total} cells at rate 1.0, {b.elapsed:.1f}s")
    assert passed


def planted_instance(n, m, k, ms, n1, seed):
    """Pristine rows: ``ms`` generic rows of a (k-1)-dim subspace S of V and
    ``n - ms`` generic rows of V. Adversarial rows: generic rows of
    W = S + w with w outside V, placed ahead of the pristine rows, which
    are ordered S rows first."""
    rng = np.random.default_rng([seed, n, m, k, ms, n1])
    V = orthonormalize(rng.standard_normal((k, m)))
    S = V[: k - 1]
    w = rng.standard_normal(m)
    w -= V.T @ (V @ w)
    W = np.vstack([S, w / np.linalg.norm(w)])
    s_rows = rng.standard_normal((ms, k - 1)) @ S if k > 1 else np.zeros((ms, m))
    X_star = np.vstack([s_rows, rng.standard_normal((n - ms, k)) @ V])
    X_adv = rng.standard_normal((n1, k)) @ W
    return X_star, np.vstack([X_adv, X_star]), V


def test_criterion_2_noise_free_threshold(report):
    total = agree = 0
    with Budget(60) as b:
        for m in (2, 3, 4):
            for k in range(1, min(3, m - 1) + 1):
                for n in range(k, 9):
                    for ms in range(k - 1, n):
                        for n1 in range(n):
                            X_star, X, V = planted_instance(n, m, k, ms, n1, seed=0)
                            if numeric_rank(X_star) != k:
                                continue
                            total += 1
                            try:
                                res = recover_noise_free(X, n, k)
                                recovered = span_distance(res.basis, V) < 1e-6
                            except NoFeasibleSubsetError:
                                recovered = False
                            threshold = n1 + max_subspace_cardinality(X_star, k) < n
                            positive = submatrix_residual(X_star, X_star, k, n1) > 0
                            agree += recovered == threshold == positive
    passed = total > 0 and agree == total and b.ok
    report(2, passed, f"{agree}/{total} instances consistent, {b.elapsed:.1f}s")
    assert passed


def test_criterion_3_noisy_exact_recovery(report):
    qualified = exact = 0
    seed = 0
    with Budget(120) as b:
        while qualified < 50 and seed < 1000:
            cfg = SyntheticConfig(n=10, n1=3, m=6, k=2, noise_model="orthogonal", seed=seed)
            seed += 1
            ds = assemble(cfg)
            # bases within ten noise levels of span(X_star) count as spanning it
            span_eps = 10 * np.linalg.norm(ds.X0 - ds.X_star) / np.linalg.norm(ds.X_star)
            verdict = recoverability(ds.X0, ds.X_star, cfg.k, cfg.n1, mode="perturb", span_eps=span_eps)
            if not verdict.solvable:
                continue
            qualified += 1
            res = recover_exact(ds.X, cfg.n, cfg.k)
            exact += span_distance(res.basis, star_basis(ds)) < 1e-6
    passed = qualified == 50 and exact == qualified and b.ok
    report(3, passed, f"{exact}/{qualified} SR>NR instances recovered within 1e-6, {b.elapsed:.1f}s")
    assert passed


def test_criterion_4_trimmed_convergence(report):
    violations = 0
    with Budget(60) as b:
        for seed in range(200):
            rng = np.random.default_rng(seed)
            rows = int(rng.integers(5, 60))
            p = int(rng.integers(1, 6))
            keep = int(rng.integers(p, rows + 1))
            A = rng.standard_normal((rows, p))
            y = A @ rng.standard_normal(p) + rng.standard_normal(rows) * rng.choice([0.0, 0.1, 10.0], rows)
            prob = linear_trimmed_problem(A, y, keep)
            res = solve_trimmed(prob, seed=seed)
            fixed = np.array_equal(smallest_rows(prob.row_loss(res.theta), keep), res.tau)
            plateau = len(res.loss_trace) > 1 and abs(res.loss_trace[-2] - res.loss_trace[-1]) < 1e-10 * max(
                1.0, abs(res.loss_trace[-2])
            )
            if not (is_monotone(res.loss_trace) and res.converged and (fixed or plateau)):
                violations += 1
    passed = violations == 0 and b.ok
    report(4, passed, f"{violations} violations in 200 problems, {b.elapsed:.1f}s")
    assert passed


def enumerate_trimmed(A, y, keep):
    best, best_idx = math.inf, None
    for idx in combinations(range(len(y)), keep):
        idx = list(idx)
        beta = np.linalg.lstsq(A[idx], y[idx], rcond=None)[0]
        loss = float(np.sum((y[idx] - A[idx] @ beta) ** 2))
        if loss < best:
            best, best_idx = loss, idx
    return best, best_idx


def test_criterion_5_trimmed_oracle_equivalence(report):
    matches = 0
    global_hits = identical = 0
    with Budget(120) as b:
        for seed in range(100):
            rng = np.random.default_rng(seed)
            rows = int(rng.integers(5, 11))
            p = int(rng.integers(1, 4))
            keep = int(rng.integers(max(p, rows // 2), rows + 1))
            A = rng.standard_normal((rows, p))
            y = A @ rng.standard_normal(p) + 0.1 * rng.standard_normal(rows)
            y[rng.random(rows) < 0.3] += rng.normal(0, 10)
            res = solve_trimmed_multistart(linear_trimmed_problem(A, y, keep), restarts=16, seed=seed)
            best, _ = enumerate_trimmed(A, y, keep)
            matches += abs(res.loss - best) <= 1e-9 * max(1.0, best)

        for seed in range(100):
            cfg = SyntheticConfig(n=7, n1=3, m=5, k=2, label_noise_std=0.1, seed=seed)
            ds = assemble(cfg)
            fit = tpcr_fit(ds.X, ds.y, cfg.n, cfg.k, basis_mode="exact")
            U = ds.X @ fit.basis.T
            best, best_idx = enumerate_trimmed(U, ds.y, cfg.n)
            if list(fit.kept) == best_idx:
                global_hits += 1
                identical += abs(fit.train_loss - best) <= 1e-12 * max(1.0, best)
    passed = matches >= 95 and identical == global_hits and b.ok
    report(
        5,
        passed,
        f"multistart {matches}/100 optimal; tpcr objective identical on {identical}/{global_hits} "
        f"global-optimum instances, {b.elapsed:.1f}s",
    )
    assert passed


def test_criterion_6_noiseless_exactness(report):
    worst = 0.0
    with Budget(60) as b:
        for seed in range(30):
            n1 = [10, 20, 30][seed % 3]
            cfg = SyntheticConfig(n=60, n1=n1, m=50, k=5, feature_noise_std=0.0, label_noise_std=0.0, seed=seed)
            assert cfg.gamma <= 0.5
            ds = assemble(cfg)
            X_eval, y_eval = gen_eval_set(cfg, ds.beta_star, ds.B, 200)
            fit = tpcr_fit(ds.X, ds.y, cfg.n, cfg.k, RecoveryOptions(seed=seed))
            worst = max(worst, rmse(predict(fit.beta_hat, X_eval), y_eval))
    passed = worst <= 1e-6 and b.ok
    report(6, passed, f"max test RMSE {worst:.2e} over 30 seeds, {b.elapsed:.1f}s")
    assert passed


def test_criterion_7_tolerance_bound(report):
    c = math.e**2
    within = total = 0
    with Budget(180) as b:
        for sigma in (0.1, 0.5):
            for gamma in (0.1, 0.3):
                n = 200
                n1 = round(gamma * n)
                for trial in range(25):
                    seed = int(np.random.SeedSequence([trial, int(sigma * 10), int(gamma * 10)]).generate_state(1)[0])
                    cfg = SyntheticConfig(n=n, n1=n1, m=100, k=5, label_noise_std=sigma, seed=seed)
                    ds = assemble(cfg)
                    X_eval, _ = gen_eval_set(cfg, ds.beta_star, ds.B, 500)
                    fit = tpcr_fit(ds.X, ds.y, n, cfg.k, RecoveryOptions(seed=seed))
                    loss = expected_quadratic_loss(fit.beta_hat, ds.beta_star, X_eval)
                    within += loss <= tolerance_bound(sigma, cfg.gamma, c).delta
                    total += 1
    passed = within >= 0.9 * total and b.ok
    report(7, passed, f"{within}/{total} trials within the bound at c=e^2, {b.elapsed:.1f}s")
    assert passed


def test_criterion_8_baseline_ordering(report):
    t, lo, la = [], [], []
    with Budget(120) as b:
        for seed in range(30):
            cfg = SyntheticConfig(n=80, n1=20, m=100, k=5, feature_noise_std=0.1, label_noise_std=0.1, seed=seed)
            ds = assemble(cfg)
            X_eval, y_eval = gen_eval_set(cfg, ds.beta_star, ds.B, 200)
            fit = tpcr_fit(ds.X, ds.y, cfg.n, cfg.k, RecoveryOptions(seed=seed))
            t.append(rmse(predict(fit.beta_hat, X_eval), y_eval))
            lo.append(rmse(predict(ols_fit(ds.X[ds.pristine], ds.y[ds.pristine]), X_eval), y_eval))
            la.append(rmse(predict(ols_fit(ds.X, ds.y), X_eval), y_eval))
    mt, mo, ma = np.median(t), np.median(lo), np.median(la)
    passed = mt <= 1.1 * mo and mt < ma and b.ok
    report(8, passed, f"median RMSE tpcr {mt:.4f}, LR(O) {mo:.4f}, LR(O+A) {ma:.4f}, {b.elapsed:.1f}s")
    assert passed


def test_criterion_9_bench(tmp_path, report):
    out = tmp_path / "bench.csv"
    with Budget(60) as b:
        write_bench(out, [2000], rank=20, n1=50)
    rows = read_csv(out)
    header = out.read_text().splitlines()[0].split(",")
    well_formed = (
        header == list(BENCH_COLUMNS)
        and len(rows) == 1
        and rows[0]["rows"] == 2000
        and rows[0]["wall_time_ms"] > 0
        and math.isfinite(rows[0]["residual"])
    )
    passed = well_formed and b.ok
    report(9, passed, f"2000 rows in {b.elapsed:.1f}s, CSV well-formed: {well_formed}")
    assert passed
