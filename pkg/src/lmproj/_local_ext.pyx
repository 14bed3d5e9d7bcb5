# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled local-community counting kernel; see ``_local_py`` for the contract."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def local_counts(a, pd, pt, inv_deg_d, inv_deg_t):
    cdef const unsigned char[:, ::1] A = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const unsigned char[:, ::1] PD = np.ascontiguousarray(pd, dtype=np.uint8)
    cdef const unsigned char[:, ::1] PT = np.ascontiguousarray(pt, dtype=np.uint8)
    cdef const double[::1] idd = np.ascontiguousarray(inv_deg_d, dtype=np.float64)
    cdef const double[::1] idt = np.ascontiguousarray(inv_deg_t, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]

    # CSR neighbour lists: targets of each drug, drugs of each target
    cdef cnp.intp_t[::1] rptr = np.zeros(m + 1, dtype=np.intp)
    cdef cnp.intp_t[::1] cptr = np.zeros(n + 1, dtype=np.intp)
    arr = np.asarray(A)
    nz_r, nz_c = np.nonzero(arr)
    cdef cnp.intp_t[::1] rind = np.ascontiguousarray(nz_c, dtype=np.intp)
    order = np.lexsort((nz_r, nz_c))
    cdef cnp.intp_t[::1] cind = np.ascontiguousarray(nz_r[order], dtype=np.intp)
    np.cumsum(arr.sum(axis=1), out=np.asarray(rptr)[1:])
    np.cumsum(arr.sum(axis=0), out=np.asarray(cptr)[1:])

    lcl_arr = np.zeros((m, n), dtype=np.float64)
    cra_arr = np.zeros((m, n), dtype=np.float64)
    cdef double[:, ::1] lcl = lcl_arr
    cdef double[:, ::1] cra = cra_arr
    cdef cnp.intp_t[::1] ct = np.empty(max(n, 1), dtype=np.intp)
    cdef cnp.intp_t[::1] cd = np.empty(max(m, 1), dtype=np.intp)

    cdef Py_ssize_t u, v, k, p, q, nt, nd, d, t
    cdef double c_l, c_r
    with nogil:
        for u in range(m):
            if rptr[u + 1] == rptr[u]:
                continue
            for v in range(n):
                nt = 0
                for k in range(rptr[u], rptr[u + 1]):
                    t = rind[k]
                    if PT[t, v]:
                        ct[nt] = t
                        nt += 1
                if nt == 0:
                    continue
                nd = 0
                for k in range(cptr[v], cptr[v + 1]):
                    d = cind[k]
                    if PD[u, d]:
                        cd[nd] = d
                        nd += 1
                c_l = 0.0
                c_r = 0.0
                for p in range(nd):
                    d = cd[p]
                    for q in range(nt):
                        t = ct[q]
                        if A[d, t]:
                            c_l += 1.0
                            c_r += idd[d] + idt[t]
                lcl[u, v] = c_l
                cra[u, v] = c_r
    return lcl_arr, cra_arr
