import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lmproj import ConfigError
from lmproj import baselines
from lmproj.baselines import all_local_index_scores, katz_scores, local_components, local_index_scores

BACKENDS = ["numpy"] + (["cython"] if baselines.BACKEND == "cython" else [])


def brute_force_indices(a):
    """Set-based evaluation of every index, pair by pair."""
    m, n = a.shape
    nd = {u: {v for v in range(n) if a[u, v]} for u in range(m)}  # targets of drug u
    nt = {v: {u for u in range(m) if a[u, v]} for v in range(n)}  # drugs of target v
    out = {k: np.zeros((m, n)) for k in ("CN", "Jaccard", "CJC", "CRA")}
    for u, v in itertools.product(range(m), range(n)):
        nn_v = set().union(*(nd[d] for d in nt[v])) if nt[v] else set()
        nn_u = set().union(*(nt[t] for t in nd[u])) if nd[u] else set()
        c_t = nd[u] & nn_v
        c_d = nt[v] & nn_u
        cn = len(c_t) + len(c_d)
        union = len(nd[u] | nn_v) + len(nt[v] | nn_u)
        lcl = sum(1 for d in c_d for t in c_t if a[d, t])
        cra = sum(sum(1 for d in c_d if a[d, t]) / len(nt[t]) for t in c_t) + \
            sum(sum(1 for t in c_t if a[d, t]) / len(nd[d]) for d in c_d)
        out["CN"][u, v] = cn
        out["Jaccard"][u, v] = cn / union if union else 0.0
        out["CJC"][u, v] = cn * lcl / union if union else 0.0
        out["CRA"][u, v] = cra
    return out


def test_worked_example():
    a = np.array([[1.0, 1.0], [1.0, 0.0]])
    assert local_index_scores(a, "CN").z[1, 1] == 2.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_against_brute_force(backend):
    a = (np.random.default_rng(0).random((9, 7)) < 0.3).astype(float)
    ref = brute_force_indices(a)
    for method in ("CN", "Jaccard", "CJC", "CRA"):
        np.testing.assert_allclose(local_index_scores(a, method, backend).z, ref[method], atol=1e-12, err_msg=method)


@pytest.mark.parametrize("backend", BACKENDS)
def test_empty_adjacency(backend):
    a = np.zeros((4, 3))
    for s in all_local_index_scores(a, backend).values():
        assert not s.z.any()
    assert not katz_scores(a, 0.1).z.any()


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=st.integers(0, 1)))
def test_backends_agree_and_nonnegative(a):
    a = a.astype(float)
    outs = [local_components(a, b) for b in BACKENDS]
    for c in outs[1:]:
        for k in c:
            np.testing.assert_allclose(c[k], outs[0][k], atol=1e-12)
    for s in all_local_index_scores(a).values():
        assert (s.z >= 0).all()
    c = outs[0]
    cn = c["cn_t"] + c["cn_d"]
    union = c["union_t"] + c["union_d"]
    jac = local_index_scores(a, "Jaccard").z
    np.testing.assert_allclose(jac * union, cn, atol=1e-12)


def test_locality():
    # two components: edges far from (0, 0) do not change its scores
    a = np.zeros((6, 6))
    a[0, 1] = a[1, 1] = a[1, 0] = 1
    before = all_local_index_scores(a)
    a2 = a.copy()
    a2[4, 5] = a2[5, 4] = 1
    after = all_local_index_scores(a2)
    for k in before:
        assert before[k].z[0, 0] == after[k].z[0, 0]


def truncated_katz(a, beta, kmax):
    out = np.zeros_like(a)
    p = a.copy()
    for k in range(1, kmax + 1):
        out += beta ** (2 * k - 1) * p
        p = a @ a.T @ p
    return out


def path_count_katz(a, beta, max_len):
    """Count odd-length walks drug -> target by explicit enumeration."""
    m, n = a.shape
    out = np.zeros((m, n))
    for u in range(m):
        frontier = {(u,): 1}
        for length in range(1, max_len + 1):
            nxt = {}
            for path, c in frontier.items():
                last = path[-1]
                if length % 2 == 1:
                    for t in range(n):
                        if a[last, t]:
                            nxt[path + (t,)] = c
                else:
                    for d in range(m):
                        if a[d, last]:
                            nxt[path + (d,)] = c
            frontier = nxt
            if length % 2 == 1:
                for path in frontier:
                    out[u, path[-1]] += beta ** length
    return out


def test_katz_three_hop():
    # d0 - t1 - d1 - t0 is the only route from d0 to t0
    a = np.array([[0.0, 1.0], [1.0, 1.0]])
    beta = 0.1
    z = katz_scores(a, beta).z
    walks = path_count_katz(a, beta, 3)
    assert walks[0, 0] == pytest.approx(0.001, abs=1e-15)
    assert truncated_katz(a, beta, 2)[0, 0] == pytest.approx(0.001, abs=1e-15)
    assert z[0, 0] == pytest.approx(0.001, rel=0.05)


def test_katz_closed_form_vs_series():
    a = (np.random.default_rng(1).random((6, 5)) < 0.4).astype(float)
    beta = 0.5 * baselines.katz_limit(a)
    z = katz_scores(a, beta).z
    smax = np.linalg.norm(a, 2)
    series = truncated_katz(a, beta, 6)
    tail = beta ** 13 * smax ** 12 * np.abs(a).max() / (1 - (beta * smax) ** 2) * a.size
    assert np.abs(z - series).max() <= tail
    np.testing.assert_allclose(truncated_katz(a, beta, 4), path_count_katz(a, beta, 7), atol=1e-12)


def test_katz_spectral_guard():
    a = np.ones((2, 2))  # sigma_max = 2
    with pytest.raises(ConfigError):
        katz_scores(a, 0.5)
    with pytest.raises(ConfigError):
        katz_scores(a, 0.0)
    katz_scores(a, 0.49)


def test_unknown_method():
    with pytest.raises(ConfigError):
        local_index_scores(np.ones((2, 2)), "AA")
