"""Experiment grid and runtime benchmark, both emitting CSV.

Grid cells vary the intrinsic rank ``k`` and the adversarial count ``n1``
while keeping the total row count of the base configuration fixed. Every
(cell, trial) draws its own dataset and evaluation set and scores four
methods on fresh pristine rows.
"""

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import RidgeConfig, ols_fit, ridge_fit
from .datagen import SyntheticConfig, assemble, gen_eval_set
from .recovery import RecoveryOptions, identification_rate, recover_efficient
from .regression import predict, rmse, tpcr_fit

METHODS = ("tpcr", "ols_all", "ols_pristine", "ridge")
DETAIL_COLUMNS = ("k", "n1", "trial", "method", "seed", "rmse", "ident_rate", "wall_time_ms")
AGGREGATE_COLUMNS = ("k", "n1", "method", "trials", "rmse", "ident_rate")
BENCH_COLUMNS = ("rows", "rank", "n1", "wall_time_ms", "residual")
EVAL_ROWS = 200


@dataclass(frozen=True)
class GridSpec:
    k_values: tuple
    n1_values: tuple
    trials: int = 30
    base: SyntheticConfig = field(default_factory=SyntheticConfig)
    restarts: int = 8
    ridge_lambda: float = RidgeConfig().lam

    def __post_init__(self):
        if not self.k_values or not self.n1_values:
            raise ValueError("k_values and n1_values must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        total = self.base.n + self.base.n1
        if max(self.n1_values) >= total:
            raise ValueError(f"n1 must stay below the total row count {total}")

    def cells(self):
        return [(k, n1) for k in sorted(self.k_values) for n1 in sorted(self.n1_values)]

    def config_for(self, k, n1, trial) -> SyntheticConfig:
        seed = int(np.random.SeedSequence([self.base.seed, k, n1, trial]).generate_state(1)[0])
        total = self.base.n + self.base.n1
        return replace(self.base, k=k, n1=n1, n=total - n1, seed=seed)


@dataclass(frozen=True)
class TrialReport:
    k: int
    n1: int
    trial: int
    method: str
    seed: int
    rmse: float
    ident_rate: float = None
    wall_time_ms: float = 0.0

    def row(self) -> dict:
        d = {c: getattr(self, c) for c in DETAIL_COLUMNS}
        return d


def trimmed_mean(values) -> float:
    """Mean after dropping one largest and one smallest value; plain mean
    when there are fewer than three values."""
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        return float("nan")
    if len(v) >= 3:
        v = v[1:-1]
    return float(np.mean(v))


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, (time.perf_counter() - t0) * 1e3


def run_trial(spec: GridSpec, k: int, n1: int, trial: int) -> list:
    cfg = spec.config_for(k, n1, trial)
    ds = assemble(cfg)
    X_eval, y_eval = gen_eval_set(cfg, ds.beta_star, ds.B, EVAL_ROWS)
    opts = RecoveryOptions(restarts=spec.restarts, seed=cfg.seed)
    fit, ms = _timed(lambda: tpcr_fit(ds.X, ds.y, cfg.n, k, opts))
    reports = [
        TrialReport(
            k, n1, trial, "tpcr", cfg.seed,
            rmse(predict(fit.beta_hat, X_eval), y_eval),
            identification_rate(fit.recovery, ds.adversarial), ms,
        )
    ]
    baselines = {
        "ols_all": lambda: ols_fit(ds.X, ds.y),
        "ols_pristine": lambda: ols_fit(ds.X[ds.pristine], ds.y[ds.pristine]),
        "ridge": lambda: ridge_fit(ds.X, ds.y, RidgeConfig(spec.ridge_lambda)),
    }
    for method, solve in baselines.items():
        beta, ms = _timed(solve)
        reports.append(TrialReport(k, n1, trial, method, cfg.seed, rmse(predict(beta, X_eval), y_eval), None, ms))
    return reports


def _run_cell(args):
    spec, k, n1 = args
    return [r for t in range(spec.trials) for r in run_trial(spec, k, n1, t)]


def run_grid(spec: GridSpec, jobs: int = 1) -> list:
    """All trial reports, sorted by (k, n1, trial, method) whatever ``jobs`` is."""
    tasks = [(spec, k, n1) for k, n1 in spec.cells()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_cell, tasks))
    else:
        chunks = [_run_cell(t) for t in tasks]
    order = {m: i for i, m in enumerate(METHODS)}
    reports = [r for chunk in chunks for r in chunk]
    return sorted(reports, key=lambda r: (r.k, r.n1, r.trial, order[r.method]))


def aggregate(reports) -> list:
    groups = {}
    for r in reports:
        groups.setdefault((r.k, r.n1, r.method), []).append(r)
    order = {m: i for i, m in enumerate(METHODS)}
    rows = []
    for (k, n1, method), rs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], order[kv[0][2]])):
        idents = [r.ident_rate for r in rs if r.ident_rate is not None]
        rows.append(
            {
                "k": k,
                "n1": n1,
                "method": method,
                "trials": len(rs),
                "rmse": trimmed_mean([r.rmse for r in rs]),
                "ident_rate": trimmed_mean(idents) if idents else None,
            }
        )
    return rows


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def _parse(v: str):
    if v == "":
        return None
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def read_csv(path) -> list:
    """Rows of a CSV written by this module, with numbers parsed back
    (integers as ``int``, others as ``float``, empty cells as ``None``)."""
    with open(path, newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_grid(spec: GridSpec, out, jobs: int = 1):
    """Write ``out`` (detail rows) and ``<stem>_aggregate.csv`` next to it."""
    out = Path(out)
    reports = run_grid(spec, jobs)
    out.write_text(format_csv([r.row() for r in reports], DETAIL_COLUMNS))
    agg_path = out.with_name(out.stem + "_aggregate.csv")
    agg_path.write_text(format_csv(aggregate(reports), AGGREGATE_COLUMNS))
    return out, agg_path


def run_bench(sizes, rank: int, n1: int, m: int = 400, seed: int = 42, restarts: int = 8,
              feature_noise_std: float = 0.1) -> list:
    """Wall time of ``recover_efficient`` per total row count."""
    sizes = list(sizes)
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    rows = []
    for total in sizes:
        if total <= n1:
            raise ValueError(f"size {total} must exceed n1={n1}")
        cfg = SyntheticConfig(n=total - n1, n1=n1, m=m, k=rank, feature_noise_std=feature_noise_std, seed=seed)
        ds = assemble(cfg)
        res, ms = _timed(lambda: recover_efficient(ds.X, cfg.n, rank, RecoveryOptions(restarts=restarts, seed=seed)))
        rows.append({"rows": total, "rank": rank, "n1": n1, "wall_time_ms": ms, "residual": res.residual})
    return rows


def write_bench(out, sizes, rank, n1, **kw) -> list:
    rows = run_bench(sizes, rank, n1, **kw)
    Path(out).write_text(format_csv(rows, BENCH_COLUMNS))
    return rows
