"""Cross-validation: fold construction, method dispatch, aggregation and alpha sweeps."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import baselines
from .data import DRUG, TARGET, DatasetBundle, InteractionMatrix
from .errors import ConfigError, InputError
from .metrics import auc, aupr
from .scoring import (
    DEFAULT_GAMMAS,
    ScoreMatrix,
    combine_zadt,
    compute_side_scores,
    project_side,
    za_from_solutions,
)
from .solver import LrrSolution, SolverConfig, solve_lrr

log = logging.getLogger(__name__)

PAIR = "pair"
NEW_DRUG = "new-drug"
NEW_TARGET = "new-target"
MODES = (PAIR, NEW_DRUG, NEW_TARGET)

LMP_METHODS = ("ZA", "ZD", "ZT", "ZADT")
METHODS = LMP_METHODS + ("CN", "Jaccard", "Katz", "CJC", "CRA")
COMPATIBLE_MODES = {
    "ZA": (PAIR,),
    "ZD": (PAIR, NEW_DRUG),
    "ZT": (PAIR, NEW_TARGET),
    "ZADT": (PAIR,),
    "CN": (PAIR,),
    "Jaccard": (PAIR,),
    "Katz": (PAIR,),
    "CJC": (PAIR,),
    "CRA": (PAIR,),
}

INTERACTION_GRID = tuple(np.round(np.arange(0.1, 0.25 + 1e-9, 0.025), 3))
CHARACTERISTIC_GRID = tuple(np.round(np.arange(0.1, 2.0 + 1e-9, 0.1), 3))


@dataclass(frozen=True)
class FoldPlan:
    mode: str = PAIR
    k: int = 10
    repetitions: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.k < 2:
            raise ConfigError(f"k must be at least 2, got {self.k}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be at least 1, got {self.repetitions}")


@dataclass(frozen=True)
class MethodSpec:
    """A scoring method and its parameters.

    ``alpha_d`` / ``alpha_t`` weight the LRR solves on the interaction matrix
    (ZA and the ZA part of ZADT); ``alpha_sd`` / ``alpha_st`` the solves on the
    drug and target similarity matrices. A ``tune`` grid replaces fixed alphas
    (or the Katz decay) with nested selection by AUPR on the training part of
    each fold.
    """

    method: str
    alpha_d: float = 0.15
    alpha_t: float = 0.15
    alpha_sd: float = 1.0
    alpha_st: float = 1.0
    gammas: tuple = DEFAULT_GAMMAS
    beta: Optional[float] = None
    tune: Optional[tuple] = None
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        for name in ("alpha_d", "alpha_t", "alpha_sd", "alpha_st"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.tune is not None:
            if len(self.tune) == 0:
                raise ConfigError("tuning grid is empty")
            if any(not g > 0 for g in self.tune):
                raise ConfigError("tuning grid values must be positive")
            object.__setattr__(self, "tune", tuple(float(g) for g in self.tune))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))

    def with_alpha(self, alpha: float) -> "MethodSpec":
        """The same method with every alpha set to ``alpha`` and tuning off."""
        return replace(self, alpha_d=alpha, alpha_t=alpha, alpha_sd=alpha, alpha_st=alpha, tune=None)

    def params(self) -> dict:
        d = {
            "method": self.method,
            "alpha_d": self.alpha_d,
            "alpha_t": self.alpha_t,
            "alpha_sd": self.alpha_sd,
            "alpha_st": self.alpha_st,
            "gammas": list(self.gammas),
            "beta": self.beta,
            "tune": list(self.tune) if self.tune is not None else None,
            "solver": {
                "mu0": self.solver.mu0,
                "mu_max": self.solver.mu_max,
                "rho": self.solver.rho,
                "epsilon": self.solver.epsilon,
                "max_iter": self.solver.max_iter,
            },
        }
        return d


def check_compatible(bundle: DatasetBundle, spec: MethodSpec, mode: str):
    if mode not in COMPATIBLE_MODES[spec.method]:
        raise ConfigError(
            f"method {spec.method} does not support mode {mode!r} "
            f"(supported: {', '.join(COMPATIBLE_MODES[spec.method])})"
        )
    if spec.method in ("ZD", "ZADT") and bundle.drug_sim is None:
        raise ConfigError(f"method {spec.method} needs a drug similarity matrix; dataset {bundle.name!r} has none")
    if spec.method in ("ZT", "ZADT") and bundle.target_sim is None:
        raise ConfigError(f"method {spec.method} needs a target similarity matrix; dataset {bundle.name!r} has none")


# ---------------------------------------------------------------------------
# folds


@dataclass(frozen=True, eq=False)
class Fold:
    repetition: int
    index: int
    train: InteractionMatrix
    test_positives: np.ndarray  # (p, 2) drug/target indices
    rows: np.ndarray  # candidate drug indices
    cols: np.ndarray  # candidate target indices
    labels: np.ndarray  # 1 for held-out positives


def _partition(n_units: int, k: int, rng: np.random.Generator) -> list:
    if k > n_units:
        raise InputError(f"cannot split {n_units} unit(s) into {k} folds")
    return np.array_split(rng.permutation(n_units), k)


def make_folds(bundle: DatasetBundle, plan: FoldPlan, repetition: Optional[int] = None) -> list:
    """Folds for every repetition (or just ``repetition``), ordered by (repetition, fold).

    Repetition ``r`` draws its partition from seed ``plan.seed + r``.
    """
    inter = bundle.interactions
    A = inter.a
    m, n = A.shape
    reps = range(plan.repetitions) if repetition is None else [repetition]
    folds = []
    for r in reps:
        rng = np.random.default_rng(plan.seed + r)
        if plan.mode == PAIR:
            positives = np.argwhere(A == 1)
            neg_r, neg_c = np.nonzero(A == 0)
            for f, part in enumerate(_partition(len(positives), plan.k, rng)):
                held = positives[np.sort(part)]
                train = A.copy()
                train[held[:, 0], held[:, 1]] = 0.0
                rows = np.concatenate([held[:, 0], neg_r])
                cols = np.concatenate([held[:, 1], neg_c])
                labels = np.concatenate([np.ones(len(held)), np.zeros(len(neg_r))])
                folds.append(Fold(r, f, inter.with_matrix(train), held, rows, cols, labels))
        elif plan.mode == NEW_DRUG:
            for f, part in enumerate(_partition(m, plan.k, rng)):
                held = np.sort(part)
                train = A.copy()
                train[held, :] = 0.0
                rows = np.repeat(held, n)
                cols = np.tile(np.arange(n), len(held))
                labels = A[rows, cols].copy()
                folds.append(Fold(r, f, inter.with_matrix(train), _positions(held, None, A), rows, cols, labels))
        else:
            for f, part in enumerate(_partition(n, plan.k, rng)):
                held = np.sort(part)
                train = A.copy()
                train[:, held] = 0.0
                rows = np.repeat(np.arange(m), len(held))
                cols = np.tile(held, m)
                labels = A[rows, cols].copy()
                folds.append(Fold(r, f, inter.with_matrix(train), _positions(None, held, A), rows, cols, labels))
    return folds


def _positions(rows, cols, A) -> np.ndarray:
    mask = np.zeros(A.shape, dtype=bool)
    if rows is not None:
        mask[rows, :] = True
    else:
        mask[:, cols] = True
    return np.argwhere(mask & (A == 1))


# ---------------------------------------------------------------------------
# scoring dispatch


class _SolveCache:
    """Memoizes similarity-matrix solves, which do not depend on the fold."""

    def __init__(self):
        self._store = {}

    def similarity(self, s: np.ndarray, side: str, alpha: float, config: SolverConfig) -> LrrSolution:
        key = (side, float(alpha), config)
        if key not in self._store:
            self._store[key] = solve_lrr(s, config.with_alpha(alpha))
        return self._store[key]


def score(bundle: DatasetBundle, spec: MethodSpec, train: np.ndarray, cache: Optional[_SolveCache] = None) -> ScoreMatrix:
    """Fit ``spec`` on the training adjacency and return drugs x targets scores."""
    cache = cache or _SolveCache()
    cfg = spec.solver
    if spec.method == "ZA":
        sol_d = solve_lrr(train.T, cfg.with_alpha(spec.alpha_d))
        sol_t = solve_lrr(train, cfg.with_alpha(spec.alpha_t))
        return za_from_solutions(train, sol_d.x_star, sol_t.x_star, (sol_d, sol_t))
    if spec.method == "ZD":
        sol = cache.similarity(bundle.drug_sim.s, DRUG, spec.alpha_sd, cfg)
        return compute_side_scores(train, bundle.drug_sim, spec.alpha_sd, cfg, solution=sol)
    if spec.method == "ZT":
        sol = cache.similarity(bundle.target_sim.s, TARGET, spec.alpha_st, cfg)
        return compute_side_scores(train, bundle.target_sim, spec.alpha_st, cfg, solution=sol)
    if spec.method == "ZADT":
        za = score(bundle, replace(spec, method="ZA"), train, cache)
        zd = score(bundle, replace(spec, method="ZD"), train, cache)
        zt = score(bundle, replace(spec, method="ZT"), train, cache)
        return combine_zadt(za, zd, zt, spec.gammas)
    if spec.method == "Katz":
        beta = spec.beta if spec.beta is not None else KATZ_DEFAULT_BETA
        return baselines.katz_scores(train, beta)
    return baselines.local_index_scores(train, spec.method)


KATZ_DEFAULT_BETA = 0.01


def _fold_metrics(z: np.ndarray, fold: Fold):
    s = z[fold.rows, fold.cols]
    return auc(s, fold.labels), aupr(s, fold.labels)


def _inner_fold(train: InteractionMatrix, mode: str, k: int, seed: int) -> Fold:
    """One validation split carved out of a training matrix."""
    sub = DatasetBundle(train, name="inner")
    if mode == PAIR:
        k = min(k, int(train.a.sum()))
    elif mode == NEW_DRUG:
        k = min(k, int((train.a.sum(axis=1) > 0).sum()))
    else:
        k = min(k, int((train.a.sum(axis=0) > 0).sum()))
    plan = FoldPlan(mode, max(k, 2), 1, seed)
    for fold in make_folds(sub, plan):
        if 0 < fold.labels.sum() < fold.labels.size:
            return fold
    raise InputError("training part too small for nested parameter selection")


def _select(candidates: dict, fold: Fold) -> tuple:
    """Key with the best AUPR on ``fold``; ties keep the first key."""
    best_key, best = None, -np.inf
    for key, z in candidates.items():
        val = aupr(z[fold.rows, fold.cols], fold.labels)
        if val > best:
            best_key, best = key, val
    return best_key


def tune_spec(bundle: DatasetBundle, spec: MethodSpec, fold: Fold, cache: _SolveCache, mode: str, seed: int) -> MethodSpec:
    """Resolve a tuning grid to concrete parameters using only ``fold.train``."""
    if spec.tune is None and not (spec.method == "Katz" and spec.beta is None):
        return spec
    inner = _inner_fold(fold.train, mode, 10, seed)
    A = inner.train.a
    grid = spec.tune
    cfg = spec.solver
    if spec.method == "Katz":
        limit = baselines.katz_limit(A)
        betas = [b for b in (grid or baselines.KATZ_BETAS) if b < limit]
        if not betas:
            raise ConfigError("no Katz decay in the grid satisfies the convergence condition")
        best = _select({b: baselines.katz_scores(A, b).z for b in betas}, inner)
        return replace(spec, beta=best, tune=None)
    if spec.method in ("CN", "Jaccard", "CJC", "CRA"):
        return replace(spec, tune=None)

    chosen = {}
    if spec.method in ("ZA", "ZADT"):
        za_grid = grid if spec.method == "ZA" else INTERACTION_GRID
        xd = {g: solve_lrr(A.T, cfg.with_alpha(g)).x_star for g in za_grid}
        xt = {g: solve_lrr(A, cfg.with_alpha(g)).x_star for g in za_grid}
        cands = {(gd, gt): 0.5 * (xd[gd].T @ A + A @ xt[gt]) for gd in za_grid for gt in za_grid}
        chosen["alpha_d"], chosen["alpha_t"] = _select(cands, inner)
    if spec.method in ("ZD", "ZADT"):
        cands = {g: project_side(A, cache.similarity(bundle.drug_sim.s, DRUG, g, cfg).x_star, DRUG) for g in grid}
        chosen["alpha_sd"] = _select(cands, inner)
    if spec.method in ("ZT", "ZADT"):
        cands = {g: project_side(A, cache.similarity(bundle.target_sim.s, TARGET, g, cfg).x_star, TARGET) for g in grid}
        chosen["alpha_st"] = _select(cands, inner)
    return replace(spec, tune=None, **chosen)


# ---------------------------------------------------------------------------
# cross-validation


@dataclass(frozen=True)
class FoldResult:
    repetition: int
    fold: int
    auc: float
    aupr: float
    params: dict = field(default_factory=dict)
    solver: tuple = ()


@dataclass
class EvalResult:
    per_fold: list
    mean_auc: float
    mean_aupr: float
    std_auc: float
    std_aupr: float

    @classmethod
    def from_folds(cls, per_fold: Sequence[FoldResult]) -> "EvalResult":
        per_fold = sorted(per_fold, key=lambda r: (r.repetition, r.fold))
        aucs = np.array([r.auc for r in per_fold])
        auprs = np.array([r.aupr for r in per_fold])
        return cls(
            list(per_fold),
            float(np.mean(aucs)),
            float(np.mean(auprs)),
            float(np.std(aucs)),
            float(np.std(auprs)),
        )

    def repetition_means(self) -> list:
        reps = sorted({r.repetition for r in self.per_fold})
        out = []
        for rep in reps:
            rs = [r for r in self.per_fold if r.repetition == rep]
            out.append(
                {
                    "repetition": rep,
                    "mean_auc": float(np.mean([r.auc for r in rs])),
                    "mean_aupr": float(np.mean([r.aupr for r in rs])),
                }
            )
        return out

    def solver_summary(self) -> dict:
        diags = [d for r in self.per_fold for d in r.solver]
        if not diags:
            return {"solves": 0}
        return {
            "solves": len(diags),
            "not_converged": sum(not d["converged"] for d in diags),
            "max_iterations": max(d["iterations"] for d in diags),
            "mean_iterations": float(np.mean([d["iterations"] for d in diags])),
            "max_residual_feasibility": max(d["residual_feasibility"] for d in diags),
            "max_residual_consistency": max(d["residual_consistency"] for d in diags),
        }


def evaluate_fold(bundle: DatasetBundle, spec: MethodSpec, fold: Fold, mode: str, seed: int,
                  cache: Optional[_SolveCache] = None) -> FoldResult:
    cache = cache or _SolveCache()
    inner_seed = seed * 1000 + fold.repetition * 100 + fold.index + 1
    resolved = tune_spec(bundle, spec, fold, cache, mode, inner_seed)
    z = score(bundle, resolved, fold.train.a, cache)
    a, p = _fold_metrics(z.z, fold)
    params = {}
    if spec.tune is not None or (spec.method == "Katz" and spec.beta is None):
        keys = {"ZA": ("alpha_d", "alpha_t"), "ZD": ("alpha_sd",), "ZT": ("alpha_st",),
                "ZADT": ("alpha_d", "alpha_t", "alpha_sd", "alpha_st"), "Katz": ("beta",)}
        params = {k: getattr(resolved, k) for k in keys.get(spec.method, ())}
    diags = tuple(d for d in z.diagnostics if not d["converged"])
    for d in diags:
        log.warning("fold (%d, %d): LRR solve did not converge: %s", fold.repetition, fold.index, d)
    return FoldResult(fold.repetition, fold.index, a, p, params, z.diagnostics)


def run_folds(bundle: DatasetBundle, spec: MethodSpec, folds: Sequence[Fold], plan: FoldPlan,
              threads: int = 1, cache: Optional[_SolveCache] = None) -> EvalResult:
    check_compatible(bundle, spec, plan.mode)
    cache = cache or _SolveCache()
    if spec.method in ("ZD", "ZADT") and spec.tune is None:
        cache.similarity(bundle.drug_sim.s, DRUG, spec.alpha_sd, spec.solver)
    if spec.method in ("ZT", "ZADT") and spec.tune is None:
        cache.similarity(bundle.target_sim.s, TARGET, spec.alpha_st, spec.solver)

    def work(fold):
        return evaluate_fold(bundle, spec, fold, plan.mode, plan.seed, cache)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, folds))
    else:
        results = [work(f) for f in folds]
    return EvalResult.from_folds(results)


def run_cv(bundle: DatasetBundle, spec: MethodSpec, plan: FoldPlan = FoldPlan(), threads: int = 1) -> EvalResult:
    """Repeated k-fold cross-validation of ``spec`` on ``bundle``."""
    check_compatible(bundle, spec, plan.mode)
    return run_folds(bundle, spec, make_folds(bundle, plan), plan, threads)


def default_grid(spec: MethodSpec) -> tuple:
    return INTERACTION_GRID if spec.method == "ZA" else CHARACTERISTIC_GRID


def sweep_alpha(bundle: DatasetBundle, spec: MethodSpec, plan: FoldPlan, grid: Optional[Sequence[float]] = None,
                threads: int = 1) -> list:
    """Evaluate ``spec`` at every alpha in ``grid`` on one shared set of folds.

    Returns a list of ``(alpha, EvalResult)``.
    """
    grid = default_grid(spec) if grid is None else tuple(grid)
    if len(grid) == 0:
        raise ConfigError("alpha grid is empty")
    if any(not g > 0 for g in grid):
        raise ConfigError("alpha grid values must be positive")
    check_compatible(bundle, spec, plan.mode)
    folds = make_folds(bundle, plan)
    cache = _SolveCache()
    return [(float(g), run_folds(bundle, spec.with_alpha(g), folds, plan, threads, cache)) for g in grid]


def select_parameters(bundle: DatasetBundle, spec: MethodSpec, plan: FoldPlan) -> MethodSpec:
    """Resolve ``spec.tune`` once, on the training part of the first fold.

    The chosen parameters are then held fixed for a full :func:`run_cv`,
    which costs one tuning round instead of one per fold.
    """
    check_compatible(bundle, spec, plan.mode)
    fold = make_folds(bundle, plan, repetition=0)[0]
    return tune_spec(bundle, spec, fold, _SolveCache(), plan.mode, plan.seed)
