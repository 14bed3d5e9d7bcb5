import os
from pathlib import Path

import numpy as np
import pytest

from lmproj.data import DatasetBundle, InteractionMatrix, SimilarityMatrix

DATA_DIR = Path(os.environ.get("LMPROJ_DATA", Path(__file__).resolve().parents[1] / "data"))

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def block_bundle(m=40, n=25, groups=3, p_in=0.3, p_out=0.02, seed=0, name="synthetic"):
    """Planted-cluster bipartite data with noisy block similarities."""
    rng = np.random.default_rng(seed)
    gd = rng.integers(0, groups, m)
    gt = rng.integers(0, groups, n)
    a = (rng.random((m, n)) < np.where(gd[:, None] == gt[None, :], p_in, p_out)).astype(float)

    def sim(g):
        k = len(g)
        s = np.where(g[:, None] == g[None, :], 0.8, 0.2) + 0.05 * rng.random((k, k))
        s = (s + s.T) / 2
        np.fill_diagonal(s, 1.0)
        return s

    drugs = tuple(f"D{i:05d}" for i in range(m))
    targets = tuple(f"hsa:{100 + j}" for j in range(n))
    return DatasetBundle(
        InteractionMatrix(a, drugs, targets),
        SimilarityMatrix(sim(gd), drugs, "drug"),
        SimilarityMatrix(sim(gt), targets, "target"),
        name,
    )


@pytest.fixture
def small_bundle():
    return block_bundle()


def write_grid(path, rows, cols, values, fmt=str, corner=True):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(("\t" if corner else "") + "\t".join(cols) + "\n")
        for r, row in zip(rows, values):
            fh.write(r + "\t" + "\t".join(fmt(v) for v in row) + "\n")


def _num(v):
    return repr(float(v))


def write_yamanishi(directory, prefix, bundle):
    """Write ``bundle`` as <prefix>_admat_dgc / _simmat_dc / _simmat_dg files."""
    a = bundle.interactions
    write_grid(Path(directory) / f"{prefix}_admat_dgc.txt", a.target_ids, a.drug_ids, a.a.T.astype(int))
    if bundle.drug_sim is not None:
        write_grid(Path(directory) / f"{prefix}_simmat_dc.txt", a.drug_ids, a.drug_ids, bundle.drug_sim.s, _num)
    if bundle.target_sim is not None:
        write_grid(Path(directory) / f"{prefix}_simmat_dg.txt", a.target_ids, a.target_ids, bundle.target_sim.s, _num)
