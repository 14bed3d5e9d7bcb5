"""Time the local-community kernel: compiled extension vs numpy fallback.

Random bipartite graphs are drawn at the sizes and densities of the
benchmark drug-target datasets. Run with ``python benchmarks/bench_local_index.py``.
"""
import argparse
import time

import numpy as np

from lmproj import baselines

SIZES = {
    "nuclear receptor": (54, 26, 90),
    "GPCR": (223, 95, 635),
    "ion channel": (210, 204, 1476),
    "enzyme": (445, 664, 2926),
    "MATADOR": (801, 2901, 15843),
}


def random_graph(m, n, edges, rng):
    a = np.zeros(m * n)
    a[rng.choice(m * n, size=edges, replace=False)] = 1.0
    return a.reshape(m, n)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    backends = ["numpy"] + (["cython"] if baselines.BACKEND == "cython" else [])
    print(f"{'dataset':<18}{'shape':>12}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, (m, n, e) in SIZES.items():
        a = random_graph(m, n, e, rng)
        ref = baselines.local_components(a, "numpy")
        times = {}
        for b in backends:
            out = baselines.local_components(a, b)
            assert all(np.allclose(out[k], ref[k], rtol=0, atol=1e-9) for k in ref), b
            times[b] = best_of(lambda: baselines.local_components(a, b), args.repeat)
        speed = times["numpy"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<18}{f'{m}x{n}':>12}" + "".join(f"{times[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
