"""Seeded synthetic poisoned-regression datasets.

Pristine features are an exact rank-``k`` product of Gaussian factors; the
adversary appends rows from a second rank-``k`` subspace that shares
``k // 2`` directions with the pristine one, and labels them according to an
:class:`AttackSpec`. All randomness derives from ``SyntheticConfig.seed``
through independent streams (pristine, adversarial, noise, evaluation).
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .io import format_matrix, read_matrix, read_vector
from .linalg import DEFAULT_TOL, numeric_rank, orthonormalize, singular_values, top_right_singular_vectors

ATTACKS = ("negated_model", "shifted_model", "random_model")
NOISE_MODELS = ("gaussian", "orthogonal")
MAX_RESAMPLE = 100
CLAMP_SIGMAS = 4.0


@dataclass(frozen=True)
class AttackSpec:
    kind: Literal["negated_model", "shifted_model", "random_model"] = "negated_model"
    magnitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ATTACKS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if not np.isfinite(self.magnitude):
            raise ValueError("attack magnitude must be finite")


@dataclass(frozen=True)
class SyntheticConfig:
    n: int = 80
    n1: int = 20
    m: int = 100
    k: int = 5
    feature_noise_std: float = 0.1
    label_noise_std: float = 0.0
    attack: AttackSpec = field(default_factory=AttackSpec)
    seed: int = 42
    noise_model: str = "gaussian"

    def __post_init__(self):
        if self.n < 1 or self.n1 < 0 or self.m < 1 or self.k < 1:
            raise ValueError("n, m, k must be positive and n1 non-negative")
        if self.k > min(self.n, self.m):
            raise ValueError(f"k={self.k} exceeds min(n, m)={min(self.n, self.m)}")
        if self.feature_noise_std < 0 or self.label_noise_std < 0:
            raise ValueError("noise levels must be non-negative")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"noise_model must be one of {NOISE_MODELS}")

    @property
    def gamma(self) -> float:
        return self.n1 / self.n

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticConfig":
        d = dict(d)
        d["attack"] = AttackSpec(**d.get("attack", {}))
        return cls(**d)


@dataclass
class PristineData:
    X_star: np.ndarray
    U: np.ndarray
    B: np.ndarray
    beta_star: np.ndarray
    y_star: np.ndarray


@dataclass
class PoisonedDataset:
    X: np.ndarray
    y: np.ndarray
    X_star: np.ndarray  # pristine rows in generation order
    beta_star: np.ndarray
    pristine: np.ndarray  # row indices of X holding pristine rows
    adversarial: np.ndarray
    config: SyntheticConfig
    epsilon: float  # max |noise entry|
    B: np.ndarray  # generating basis of X_star (k x m, not orthonormal)
    perm: np.ndarray  # X[i] = stacked[perm[i]], stacked = [X0; X_adv]

    @property
    def gamma(self) -> float:
        return len(self.adversarial) / len(self.pristine)

    @property
    def X0(self) -> np.ndarray:
        return self.X[self.pristine_in_order]

    @property
    def pristine_in_order(self) -> np.ndarray:
        """Row indices of ``X`` holding pristine rows 0..n-1 in generation order."""
        inv = np.argsort(self.perm)
        return inv[: self.config.n]


def _streams(seed):
    return np.random.SeedSequence(seed).spawn(4)


def _full_rank_normal(rng, shape, rank):
    for _ in range(MAX_RESAMPLE):
        M = rng.standard_normal(shape)
        if numeric_rank(M) == rank:
            return M
    raise RuntimeError(f"could not draw a rank-{rank} {shape} Gaussian matrix")


def gen_pristine(cfg: SyntheticConfig) -> PristineData:
    rng = np.random.default_rng(_streams(cfg.seed)[0])
    U = _full_rank_normal(rng, (cfg.n, cfg.k), cfg.k)
    B = _full_rank_normal(rng, (cfg.k, cfg.m), cfg.k)
    X_star = U @ B
    beta_star = rng.standard_normal(cfg.m)
    return PristineData(X_star=X_star, U=U, B=B, beta_star=beta_star, y_star=X_star @ beta_star)


def gen_adversarial(cfg: SyntheticConfig, pristine: PristineData):
    """Adversarial block ``(X_adv, y_adv)``.

    The adversarial basis copies ``k // 2`` rows of ``X_star`` and draws the
    remaining rows at random, resampling until it has rank ``k`` and a row
    space different from that of ``X_star``.
    """
    rng = np.random.default_rng(_streams(cfg.seed)[1])
    k, m = cfg.k, cfg.m
    if cfg.n1 == 0:
        return np.zeros((0, m)), np.zeros(0)
    star_basis = orthonormalize(pristine.B)
    shared = k // 2
    for _ in range(MAX_RESAMPLE):
        rows = rng.choice(cfg.n, size=shared, replace=False)
        B_adv = np.vstack([pristine.X_star[rows], rng.standard_normal((k - shared, m))])
        if numeric_rank(B_adv) != k:
            continue
        adv_basis = orthonormalize(B_adv)
        if np.linalg.norm(adv_basis.T @ adv_basis - star_basis.T @ star_basis) > 1e-6:
            break
    else:
        raise RuntimeError("could not draw a distinct adversarial basis")
    U_adv = rng.standard_normal((cfg.n1, k))
    X_adv = U_adv @ B_adv
    a = cfg.attack
    if a.kind == "negated_model":
        y_adv = -a.magnitude * (X_adv @ pristine.beta_star)
    elif a.kind == "shifted_model":
        d = rng.standard_normal(m)
        d /= np.linalg.norm(d)
        y_adv = X_adv @ (pristine.beta_star + a.magnitude * np.sqrt(m) * d)
    else:
        y_adv = X_adv @ (a.magnitude * rng.standard_normal(m))
    return X_adv, y_adv


def feature_noise(cfg: SyntheticConfig, X_star, rng):
    """Noise matrix ``N`` and its sup-norm bound ``epsilon``.

    ``gaussian``: i.i.d. entries clamped to ``4 * std``.
    ``orthogonal``: Gaussian noise projected off both the column and row
    spaces of ``X_star`` and scaled so ``X_star`` stays the best rank-``k``
    approximation of ``X_star + N``.
    """
    s = cfg.feature_noise_std
    if s == 0:
        return np.zeros_like(X_star), 0.0
    G = rng.standard_normal(X_star.shape) * s
    if cfg.noise_model == "gaussian":
        eps = CLAMP_SIGMAS * s
        return np.clip(G, -eps, eps), eps
    k = cfg.k
    Uc, sv, Vt = np.linalg.svd(X_star, full_matrices=True)
    Pc = Uc[:, k:] @ Uc[:, k:].T
    Pr = Vt[k:].T @ Vt[k:]
    N = Pc @ G @ Pr
    top = singular_values(N)[0] if N.size else 0.0
    limit = 0.5 * sv[k - 1]
    if top > limit:
        N *= limit / top
    return N, float(np.max(np.abs(N), initial=0.0))


def assemble(cfg: SyntheticConfig) -> PoisonedDataset:
    pristine = gen_pristine(cfg)
    X_adv, y_adv = gen_adversarial(cfg, pristine)
    rng = np.random.default_rng(_streams(cfg.seed)[2])
    N, eps = feature_noise(cfg, pristine.X_star, rng)
    X0 = pristine.X_star + N
    y0 = pristine.y_star + cfg.label_noise_std * rng.standard_normal(cfg.n)
    stacked_X = np.vstack([X0, X_adv])
    stacked_y = np.concatenate([y0, y_adv])
    perm = rng.permutation(cfg.n + cfg.n1)
    X = stacked_X[perm]
    y = stacked_y[perm]
    pristine_idx = np.sort(np.flatnonzero(perm < cfg.n))
    adversarial_idx = np.sort(np.flatnonzero(perm >= cfg.n))
    return PoisonedDataset(
        X=X,
        y=y,
        X_star=pristine.X_star,
        beta_star=pristine.beta_star,
        pristine=pristine_idx,
        adversarial=adversarial_idx,
        config=cfg,
        epsilon=eps,
        B=pristine.B,
        perm=perm,
    )


def gen_eval_set(cfg: SyntheticConfig, beta_star, B, rows: int):
    """Fresh rows in the row space of ``B`` with noiseless labels."""
    rng = np.random.default_rng(_streams(cfg.seed)[3])
    U = rng.standard_normal((rows, np.shape(B)[0]))
    X_eval = U @ B
    return X_eval, X_eval @ beta_star


def save_dataset(ds: PoisonedDataset, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "X.csv").write_text(format_matrix(ds.X))
    (out / "y.csv").write_text(format_matrix(ds.y))
    truth = {
        "beta_star": [float(v) for v in ds.beta_star],
        "pristine": [int(i) for i in ds.pristine],
        "adversarial": [int(i) for i in ds.adversarial],
        "epsilon": ds.epsilon,
        "config": ds.config.to_dict(),
    }
    (out / "truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")


def load_dataset(in_dir):
    """Read ``(X, y, truth)`` from a directory written by :func:`save_dataset`."""
    d = Path(in_dir)
    truth = json.loads((d / "truth.json").read_text())
    return read_matrix(d / "X.csv"), read_vector(d / "y.csv"), truth


def star_basis(ds: PoisonedDataset) -> np.ndarray:
    """Orthonormal basis of the pristine row space."""
    return top_right_singular_vectors(ds.X_star, numeric_rank(ds.X_star, DEFAULT_TOL))
