"""Score matrices by projecting the adjacency onto learned low-rank similarities.

Every :class:`ScoreMatrix` is oriented drugs x targets, whatever the
projection it came from.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import DRUG, TARGET, InteractionMatrix, SimilarityMatrix
from .errors import ConfigError, InputError
from .solver import LrrSolution, SolverConfig, solve_lrr

PROVENANCES = ("ZA", "ZD", "ZT", "ZADT", "CN", "Jaccard", "Katz", "CJC", "CRA")
DEFAULT_GAMMAS = (0.5, 0.25, 0.25)


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    z: np.ndarray
    provenance: str
    masked: bool = False
    diagnostics: tuple = ()

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ConfigError(f"unknown provenance {self.provenance!r}")
        z = np.asarray(self.z, dtype=np.float64)
        if z.ndim != 2:
            raise InputError(f"score matrix must be 2-D, got shape {z.shape}")
        object.__setattr__(self, "z", z)

    @property
    def shape(self):
        return self.z.shape


def _adjacency(a) -> np.ndarray:
    return a.a if isinstance(a, InteractionMatrix) else np.asarray(a, dtype=np.float64)


def compute_za(
    a,
    alpha_d: float,
    alpha_t: float,
    config: SolverConfig = SolverConfig(),
    solutions: Optional[dict] = None,
) -> ScoreMatrix:
    """Interaction-only scores: mean of the drug-side and target-side projections.

    The drug-side similarity comes from the LRR of ``A^T`` (m x m), the
    target-side one from the LRR of ``A`` (n x n). If ``solutions`` is a dict,
    the two solver results are stored under ``"drug"`` and ``"target"``.
    """
    A = _adjacency(a)
    sol_d = solve_lrr(A.T, config.with_alpha(alpha_d))
    sol_t = solve_lrr(A, config.with_alpha(alpha_t))
    if solutions is not None:
        solutions["drug"] = sol_d
        solutions["target"] = sol_t
    return za_from_solutions(A, sol_d.x_star, sol_t.x_star, (sol_d, sol_t))


def za_from_solutions(A, x_drug, x_target, sols: Sequence[LrrSolution] = ()) -> ScoreMatrix:
    A = np.asarray(A, dtype=np.float64)
    # (A^T X_D)^T = X_D^T A
    z = 0.5 * (x_drug.T @ A + A @ x_target)
    return ScoreMatrix(z, "ZA", diagnostics=tuple(s.diagnostics() for s in sols))


def project_side(A, x_sim, side: str) -> np.ndarray:
    """Project ``A`` onto a learned similarity, returned drugs x targets."""
    A = np.asarray(A, dtype=np.float64)
    if side == DRUG:
        return x_sim.T @ A
    if side == TARGET:
        return A @ x_sim
    raise ConfigError(f"side must be {DRUG!r} or {TARGET!r}, got {side!r}")


def compute_side_scores(
    a,
    sim: SimilarityMatrix,
    alpha: float,
    config: SolverConfig = SolverConfig(),
    solution: Optional[LrrSolution] = None,
) -> ScoreMatrix:
    """Scores from a drug or target similarity (``ZD`` or ``ZT``).

    ``solution`` may carry a precomputed LRR of ``sim.s``; the similarity
    solve does not depend on the adjacency, so callers can reuse it across
    folds.
    """
    A = _adjacency(a)
    if isinstance(a, InteractionMatrix):
        expected = a.drug_ids if sim.side == DRUG else a.target_ids
        if tuple(sim.ids) != tuple(expected):
            raise InputError(f"{sim.side} similarity ids are not aligned with the interaction matrix")
    size = A.shape[0] if sim.side == DRUG else A.shape[1]
    if sim.s.shape[0] != size:
        raise InputError(f"{sim.side} similarity has side {sim.s.shape[0]}, adjacency needs {size}")
    if solution is None:
        solution = solve_lrr(sim.s, config.with_alpha(alpha))
    z = project_side(A, solution.x_star, sim.side)
    return ScoreMatrix(z, "ZD" if sim.side == DRUG else "ZT", diagnostics=(solution.diagnostics(),))


def combine_zadt(za: ScoreMatrix, zd: ScoreMatrix, zt: ScoreMatrix, gammas=DEFAULT_GAMMAS) -> ScoreMatrix:
    if not (za.shape == zd.shape == zt.shape):
        raise InputError(f"score shapes differ: {za.shape}, {zd.shape}, {zt.shape}")
    if len(gammas) != 3:
        raise ConfigError("gammas must have three entries")
    g1, g2, g3 = (float(g) for g in gammas)
    return ScoreMatrix(
        g1 * za.z + g2 * zd.z + g3 * zt.z,
        "ZADT",
        diagnostics=za.diagnostics + zd.diagnostics + zt.diagnostics,
    )


def mask_and_rank(z: ScoreMatrix, train: InteractionMatrix, top_k: Optional[int] = None) -> list:
    """Rank unobserved pairs by score.

    Training positives are left out of the ranking (not zeroed), so negative
    scores keep their order. Ties go to the lower (drug, target) index.
    ``top_k=None`` returns every candidate.
    """
    if z.shape != train.shape:
        raise InputError(f"score shape {z.shape} does not match training matrix {train.shape}")
    if top_k is not None and top_k < 0:
        raise ConfigError("top_k must be nonnegative")
    flat_ok = np.flatnonzero(train.a.ravel() == 0)
    scores = z.z.ravel()[flat_ok]
    # stable sort on -score keeps flat (row-major) index order among ties
    order = np.argsort(-scores, kind="stable")
    if top_k is not None:
        order = order[:top_k]
    n = train.shape[1]
    out = []
    for k in order:
        f = int(flat_ok[k])
        out.append((train.drug_ids[f // n], train.target_ids[f % n], float(scores[k])))
    return out
