"""``tpcr`` command-line interface.

Exit codes: 0 success, 1 other invalid input, 2 missing or malformed file,
3 dimension mismatch, 4 enumeration cap exceeded.
"""

import argparse
import json
import sys
from pathlib import Path

from . import datagen
from .baselines import RidgeConfig, ols_fit, ridge_fit
from .errors import DimensionMismatchError, EnumerationCapError, MalformedMatrixError, TpcrError
from .experiments import GridSpec, write_bench, write_grid
from .io import read_matrix, read_vector, write_matrix
from .linalg import Tolerances
from .oracles import SR_MODES, recoverability
from .recovery import RecoveryOptions, identification_rate, recover_efficient, recover_exact, recover_noise_free
from .regression import BASIS_MODES, predict, tpcr_fit

EXIT_FILE = 2
EXIT_DIMENSION = 3
EXIT_CAP = 4


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _tol(args):
    return Tolerances(rank_eps=args.tol_rank_eps)


def _load_xy(args):
    X = read_matrix(args.x)
    y = read_vector(args.y)
    if len(y) != X.shape[0]:
        raise DimensionMismatchError(f"{args.y} has {len(y)} rows but {args.x} has {X.shape[0]}")
    return X, y


def cmd_gen(args):
    cfg = datagen.SyntheticConfig(
        n=args.n,
        n1=args.n1,
        m=args.m,
        k=args.k,
        feature_noise_std=args.feature_noise_std,
        label_noise_std=args.label_noise_std,
        attack=datagen.AttackSpec(args.attack, args.magnitude),
        seed=args.seed,
        noise_model=args.noise_model,
    )
    datagen.save_dataset(datagen.assemble(cfg), args.out)
    _emit({"out": str(args.out), "rows": cfg.n + cfg.n1, "cols": cfg.m, "gamma": cfg.gamma})


def cmd_recover(args):
    X = read_matrix(args.x)
    tol = _tol(args)
    if args.method == "efficient":
        res = recover_efficient(X, args.keep, args.rank, RecoveryOptions(restarts=args.restarts, seed=args.seed, tol=tol))
    elif args.method == "exact":
        res = recover_exact(X, args.keep, args.rank, tol)
    else:
        res = recover_noise_free(X, args.keep, args.rank, tol)
    out = {"kept": res.kept.tolist(), "residual": res.residual, "converged": res.converged}
    if args.basis_out:
        write_matrix(args.basis_out, res.basis)
        out["basis"] = str(args.basis_out)
    if args.truth:
        truth = json.loads(Path(args.truth).read_text())
        out["ident_rate"] = identification_rate(res, truth["adversarial"])
    _emit(out)


def cmd_fit(args):
    X, y = _load_xy(args)
    opts = RecoveryOptions(restarts=args.restarts, seed=args.seed, tol=_tol(args))
    res = tpcr_fit(X, y, args.keep, args.rank, opts, basis_mode=args.basis_mode)
    if args.predictions:
        X_eval = read_matrix(args.eval) if args.eval else X
        write_matrix(args.predictions, predict(res.beta_hat, X_eval))
    _emit({"beta_hat": res.beta_hat.tolist(), "kept": res.kept.tolist(), "train_loss": res.train_loss})


def cmd_baseline(args):
    X, y = _load_xy(args)
    if args.method == "ols":
        beta = ols_fit(X, y)
    else:
        beta = ridge_fit(X, y, RidgeConfig(args.lam))
    if args.predictions:
        X_eval = read_matrix(args.eval) if args.eval else X
        write_matrix(args.predictions, predict(beta, X_eval))
    _emit({"beta_hat": beta.tolist(), "method": args.method})


def cmd_oracle(args):
    X0 = read_matrix(args.x0)
    X_star = read_matrix(args.x_star)
    verdict = recoverability(X0, X_star, args.rank, args.n1, _tol(args), mode=args.mode, cap=args.cap)
    _emit(verdict.as_dict())


def cmd_grid(args):
    base = datagen.SyntheticConfig(
        n=args.rows - max(args.n1_values),
        n1=max(args.n1_values),
        m=args.m,
        k=max(args.k_values),
        feature_noise_std=args.feature_noise_std,
        label_noise_std=args.label_noise_std,
        seed=args.seed,
    )
    spec = GridSpec(tuple(args.k_values), tuple(args.n1_values), args.trials, base, args.restarts, args.lam)
    detail, agg = write_grid(spec, args.out, jobs=args.jobs)
    _emit({"detail": str(detail), "aggregate": str(agg)})


def cmd_bench(args):
    rows = write_bench(args.out, args.sizes, args.rank, args.n1, m=args.m, seed=args.seed, restarts=args.restarts)
    _emit({"out": str(args.out), "rows": len(rows)})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tpcr", description="Poisoning-robust trimmed principal component regression.")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--jobs", type=int, default=1, help="parallel grid cells")
    p.add_argument("--tol-rank-eps", type=float, default=Tolerances().rank_eps)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic poisoned dataset")
    g.add_argument("--n", type=int, default=80)
    g.add_argument("--n1", type=int, default=20)
    g.add_argument("--m", type=int, default=100)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--feature-noise-std", type=float, default=0.1)
    g.add_argument("--label-noise-std", type=float, default=0.0)
    g.add_argument("--attack", choices=datagen.ATTACKS, default="negated_model")
    g.add_argument("--magnitude", type=float, default=1.0)
    g.add_argument("--noise-model", choices=datagen.NOISE_MODELS, default="gaussian")
    g.add_argument("--out", type=Path, required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("recover", help="recover the pristine row space")
    r.add_argument("--x", type=Path, required=True)
    r.add_argument("--keep", type=int, required=True)
    r.add_argument("--rank", type=int, required=True)
    r.add_argument("--restarts", type=int, default=8)
    r.add_argument("--method", choices=("efficient", "exact", "noise-free"), default="efficient")
    r.add_argument("--basis-out", type=Path)
    r.add_argument("--truth", type=Path, help="truth.json; adds ident_rate to the output")
    r.set_defaults(func=cmd_recover)

    def regression_flags(sp):
        sp.add_argument("--x", type=Path, required=True)
        sp.add_argument("--y", type=Path, required=True)
        sp.add_argument("--keep", type=int)
        sp.add_argument("--rank", type=int)
        sp.add_argument("--restarts", type=int, default=8)
        sp.add_argument("--predictions", type=Path, help="write predictions CSV")
        sp.add_argument("--eval", type=Path, help="rows to predict (default: training X)")

    f = sub.add_parser("fit", help="fit trimmed PCR")
    regression_flags(f)
    f.add_argument("--basis-mode", choices=BASIS_MODES, default="efficient")
    f.set_defaults(func=cmd_fit)

    b = sub.add_parser("baseline", help="fit an OLS or ridge baseline")
    regression_flags(b)
    b.add_argument("--basis-mode", choices=BASIS_MODES, default="efficient", help="accepted, unused")
    b.add_argument("--method", choices=("ols", "ridge"), default="ols")
    b.add_argument("--lambda", dest="lam", type=float, default=RidgeConfig().lam)
    b.set_defaults(func=cmd_baseline)

    o = sub.add_parser("oracle", help="brute-force recoverability verdict")
    o.add_argument("--x0", type=Path, required=True)
    o.add_argument("--x-star", type=Path, required=True)
    o.add_argument("--rank", type=int, required=True)
    o.add_argument("--n1", type=int, required=True)
    o.add_argument("--sr-mode", dest="mode", choices=SR_MODES, default="skip")
    o.add_argument("--cap", type=int, default=16)
    o.set_defaults(func=cmd_oracle)

    gr = sub.add_parser("grid", help="experiment grid over (k, n1)")
    gr.add_argument("--k-values", type=_ints, default=[5])
    gr.add_argument("--n1-values", type=_ints, default=[5, 10, 15, 20, 25, 30, 35])
    gr.add_argument("--trials", type=int, default=30)
    gr.add_argument("--rows", type=int, default=100, help="n + n1, fixed across cells")
    gr.add_argument("--m", type=int, default=100)
    gr.add_argument("--feature-noise-std", type=float, default=0.1)
    gr.add_argument("--label-noise-std", type=float, default=0.0)
    gr.add_argument("--restarts", type=int, default=8)
    gr.add_argument("--lambda", dest="lam", type=float, default=RidgeConfig().lam)
    gr.add_argument("--out", type=Path, required=True)
    gr.set_defaults(func=cmd_grid)

    be = sub.add_parser("bench", help="time recover_efficient across sizes")
    be.add_argument("--sizes", type=_ints, default=[1000, 2000])
    be.add_argument("--rank", type=int, default=20)
    be.add_argument("--n1", type=int, default=50)
    be.add_argument("--m", type=int, default=400)
    be.add_argument("--restarts", type=int, default=8)
    be.add_argument("--out", type=Path, required=True)
    be.set_defaults(func=cmd_bench)
    return p


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ValueError("missing required flag(s): " + ", ".join("--" + n for n in missing))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            _require(args, "keep", "rank")
        args.func(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"tpcr: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_FILE
    except MalformedMatrixError as exc:
        print(f"tpcr: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (KeyError, json.JSONDecodeError) as exc:
        print(f"tpcr: malformed truth file: {exc}", file=sys.stderr)
        return EXIT_FILE
    except DimensionMismatchError as exc:
        print(f"tpcr: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except EnumerationCapError as exc:
        print(f"tpcr: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (TpcrError, ValueError) as exc:
        print(f"tpcr: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
