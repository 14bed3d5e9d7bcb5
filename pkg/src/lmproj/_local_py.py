"""Numpy implementation of the local-community counting kernel.

Used when the compiled ``_local_ext`` module is unavailable. Both return
identical results (up to floating-point summation order for CRA).
"""
import numpy as np


def local_counts(a, pd, pt, inv_deg_d, inv_deg_t):
    """Per-pair LCL and CRA sums over the bipartite local community.

    Parameters
    ----------
    a : (m, n) uint8 adjacency
    pd : (m, m) uint8, ``pd[u, d] = 1`` iff drugs u and d share a target
    pt : (n, n) uint8, ``pt[t, v] = 1`` iff targets t and v share a drug
    inv_deg_d, inv_deg_t : float64 reciprocal degrees (0 for isolated nodes)

    Returns
    -------
    lcl, cra : (m, n) float64
        ``lcl[u, v]`` counts edges (d, t) with d in the drug-side community
        ``N(v) & N(N(u))`` and t in the target-side community
        ``N(u) & N(N(v))``; ``cra`` weights each such edge by
        ``1/deg(d) + 1/deg(t)``.
    """
    a = np.asarray(a, dtype=np.float64)
    pd = np.asarray(pd, dtype=np.float64)
    pt = np.asarray(pt, dtype=np.float64)
    m, n = a.shape
    w = a * (inv_deg_d[:, None] + inv_deg_t[None, :])
    lcl = np.zeros((m, n))
    cra = np.zeros((m, n))
    for u in range(m):
        cols = np.flatnonzero(a[u])
        rows = np.flatnonzero(pd[u])
        if cols.size == 0 or rows.size == 0:
            continue
        # reach[t, v] = 1 iff t is in the target-side community of (u, v)
        reach = pt[cols]
        arow = a[rows]
        lcl[u] = np.einsum("dv,dv->v", arow, a[np.ix_(rows, cols)] @ reach)
        cra[u] = np.einsum("dv,dv->v", arow, w[np.ix_(rows, cols)] @ reach)
    return lcl, cra
