"""Similarity-index baselines for bipartite link prediction.

For a candidate pair (drug u, target v) the local community is built from
length-3 paths u - t - d - v:

* target side ``C_T = N(u) & N(N(v))``
* drug side ``C_D = N(v) & N(N(u))``

CN counts both sides; Jaccard divides by the two neighbourhood unions;
CJC multiplies CN by the number of community-internal edges (LCL) before
dividing; CRA sums, over community members, the fraction of their links
that stay inside the community. Division by zero scores 0.

The per-pair LCL/CRA loop runs in a compiled kernel when it is available;
set ``LMPROJ_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os

import numpy as np
from scipy import linalg

from . import _local_py
from .data import InteractionMatrix
from .errors import ConfigError, NumericalError
from .scoring import ScoreMatrix

LOCAL_METHODS = ("CN", "Jaccard", "CJC", "CRA")
KATZ_BETAS = (0.001, 0.005, 0.01, 0.05)

try:
    if os.environ.get("LMPROJ_PURE_PYTHON"):
        raise ImportError("pure-python backend requested")
    from ._local_ext import local_counts as _compiled_local_counts
except ImportError:
    _compiled_local_counts = None

BACKEND = "cython" if _compiled_local_counts is not None else "numpy"


def local_counts(a, pd, pt, inv_deg_d, inv_deg_t, backend=None):
    """Dispatch to the compiled kernel or the numpy fallback."""
    backend = backend or BACKEND
    if backend == "cython":
        if _compiled_local_counts is None:
            raise ConfigError("compiled kernel is not built")
        return _compiled_local_counts(a, pd, pt, inv_deg_d, inv_deg_t)
    if backend == "numpy":
        return _local_py.local_counts(a, pd, pt, inv_deg_d, inv_deg_t)
    raise ConfigError(f"unknown backend {backend!r}")


def _safe_div(num, den):
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den != 0)
    return out


def _inv(x):
    return _safe_div(np.ones_like(x, dtype=np.float64), x.astype(np.float64))


def local_components(a, backend=None) -> dict:
    """All per-pair quantities behind the local indices.

    Keys: ``cn_t`` / ``cn_d`` (community sizes per side), ``union_t`` /
    ``union_d`` (``|N(u) | N(N(v))|`` and ``|N(v) | N(N(u))|``), ``lcl`` and
    ``cra``.
    """
    A = a.a if isinstance(a, InteractionMatrix) else np.asarray(a, dtype=np.float64)
    Ab = (A != 0).astype(np.float64)
    pd = (Ab @ Ab.T) > 0  # drugs sharing a target
    pt = (Ab.T @ Ab) > 0  # targets sharing a drug
    cn_t = Ab @ pt
    cn_d = pd @ Ab
    deg_d = Ab.sum(axis=1)
    deg_t = Ab.sum(axis=0)
    union_t = deg_d[:, None] + pt.sum(axis=0)[None, :] - cn_t
    union_d = deg_t[None, :] + pd.sum(axis=1)[:, None] - cn_d
    lcl, cra = local_counts(
        Ab.astype(np.uint8), pd.astype(np.uint8), pt.astype(np.uint8), _inv(deg_d), _inv(deg_t), backend
    )
    return {"cn_t": cn_t, "cn_d": cn_d, "union_t": union_t, "union_d": union_d, "lcl": lcl, "cra": cra}


def _from_components(c: dict, method: str) -> np.ndarray:
    cn = c["cn_t"] + c["cn_d"]
    union = c["union_t"] + c["union_d"]
    if method == "CN":
        return cn
    if method == "Jaccard":
        return _safe_div(cn, union)
    if method == "CJC":
        return _safe_div(cn * c["lcl"], union)
    if method == "CRA":
        return c["cra"]
    raise ConfigError(f"unknown local index {method!r}")


def local_index_scores(a, method: str, backend=None) -> ScoreMatrix:
    if method not in LOCAL_METHODS:
        raise ConfigError(f"unknown local index {method!r}; expected one of {LOCAL_METHODS}")
    c = local_components(a, backend)
    return ScoreMatrix(_from_components(c, method), method)


def all_local_index_scores(a, backend=None) -> dict:
    """The four local indices from a single pass over the graph."""
    c = local_components(a, backend)
    return {m: ScoreMatrix(_from_components(c, m), m) for m in LOCAL_METHODS}


def katz_limit(a) -> float:
    """Supremum of admissible decay factors, ``1 / sigma_max(A)``."""
    A = a.a if isinstance(a, InteractionMatrix) else np.asarray(a, dtype=np.float64)
    smax = linalg.norm(A, 2) if A.size else 0.0
    return np.inf if smax == 0 else 1.0 / smax


def katz_scores(a, beta: float) -> ScoreMatrix:
    """Katz index over odd-length bipartite paths.

    ``Z = sum_k beta^(2k-1) (A A^T)^(k-1) A = beta (I - beta^2 A A^T)^-1 A``.
    """
    A = a.a if isinstance(a, InteractionMatrix) else np.asarray(a, dtype=np.float64)
    if not beta > 0:
        raise ConfigError(f"Katz beta must be positive, got {beta}")
    if beta >= katz_limit(A):
        raise ConfigError(
            f"Katz beta={beta} violates beta * sigma_max(A) < 1 (sigma_max={1 / katz_limit(A):.6g})"
        )
    m = A.shape[0]
    try:
        z = linalg.solve(np.eye(m) - beta * beta * (A @ A.T), beta * A, assume_a="pos")
    except linalg.LinAlgError as exc:
        raise NumericalError("Katz system is singular") from exc
    return ScoreMatrix(z, "Katz")
