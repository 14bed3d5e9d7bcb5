"""Interaction and similarity data: containers, parsers and the canonical format.

Supported inputs
----------------
* MATADOR dumps: tab-separated, 13 columns, header with ``Chemical ID`` and
  ``Protein ID`` columns (a leading ``#`` on the header is tolerated).
* Yamanishi-style labeled grids: first line holds the column labels (with an
  empty corner cell), each following line a row label and its values. The
  adjacency grids ship as targets x drugs and are transposed on load.
* The canonical interchange directory written by :func:`write_bundle`.
"""
from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import InputError

log = logging.getLogger(__name__)

DRUG = "drug"
TARGET = "target"

# KEGG gene identifiers ("hsa:1234") and UniProt-style accessions mark targets.
_TARGET_ID = re.compile(r"^(?:[a-z]{3,4}:\S+|[OPQ][0-9][A-Z0-9]{3}[0-9]|[A-NR-Z][0-9][A-Z][A-Z0-9]{2}[0-9])$")
# KEGG drug / compound identifiers mark drugs.
_DRUG_ID = re.compile(r"^(?:dr:)?[DC]\d{5}$")


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Binary drugs x targets adjacency with identifier maps."""

    a: np.ndarray
    drug_ids: tuple
    target_ids: tuple

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.ndim != 2:
            raise InputError(f"adjacency must be 2-D, got shape {a.shape}")
        if a.shape != (len(self.drug_ids), len(self.target_ids)):
            raise InputError(
                f"adjacency shape {a.shape} does not match "
                f"{len(self.drug_ids)} drug ids x {len(self.target_ids)} target ids"
            )
        if not np.all((a == 0) | (a == 1)):
            i, j = np.argwhere((a != 0) & (a != 1))[0]
            raise InputError(f"non-binary adjacency entry {a[i, j]!r} at ({self.drug_ids[i]}, {self.target_ids[j]})")
        _check_unique(self.drug_ids, "drug")
        _check_unique(self.target_ids, "target")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "drug_ids", tuple(self.drug_ids))
        object.__setattr__(self, "target_ids", tuple(self.target_ids))

    @property
    def shape(self):
        return self.a.shape

    @property
    def n_interactions(self) -> int:
        return int(self.a.sum())

    @property
    def density(self) -> float:
        return self.n_interactions / self.a.size

    def with_matrix(self, a) -> "InteractionMatrix":
        return InteractionMatrix(a, self.drug_ids, self.target_ids)

    def __eq__(self, other):
        if not isinstance(other, InteractionMatrix):
            return NotImplemented
        return (
            self.drug_ids == other.drug_ids
            and self.target_ids == other.target_ids
            and np.array_equal(self.a, other.a)
        )


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Square similarity over drugs or targets."""

    s: np.ndarray
    ids: tuple
    side: str

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] != len(self.ids):
            raise InputError(f"similarity matrix shape {s.shape} does not match {len(self.ids)} ids")
        if self.side not in (DRUG, TARGET):
            raise InputError(f"side must be {DRUG!r} or {TARGET!r}, got {self.side!r}")
        if not np.all(np.isfinite(s)):
            i, j = np.argwhere(~np.isfinite(s))[0]
            raise InputError(f"non-finite similarity at ({self.ids[i]}, {self.ids[j]})")
        _check_unique(self.ids, self.side)
        s.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __eq__(self, other):
        if not isinstance(other, SimilarityMatrix):
            return NotImplemented
        return self.side == other.side and self.ids == other.ids and np.array_equal(self.s, other.s)


@dataclass(eq=False)
class DatasetBundle:
    interactions: InteractionMatrix
    drug_sim: Optional[SimilarityMatrix] = None
    target_sim: Optional[SimilarityMatrix] = None
    name: str = "dataset"

    def __post_init__(self):
        if self.drug_sim is not None and self.drug_sim.ids != self.interactions.drug_ids:
            raise InputError("drug similarity ids are not aligned with interaction drug ids")
        if self.target_sim is not None and self.target_sim.ids != self.interactions.target_ids:
            raise InputError("target similarity ids are not aligned with interaction target ids")

    def __eq__(self, other):
        if not isinstance(other, DatasetBundle):
            return NotImplemented
        return (
            self.name == other.name
            and self.interactions == other.interactions
            and self.drug_sim == other.drug_sim
            and self.target_sim == other.target_sim
        )

    def stats(self) -> dict:
        m, n = self.interactions.shape
        return {
            "name": self.name,
            "drugs": m,
            "targets": n,
            "interactions": self.interactions.n_interactions,
            "sparsity": self.interactions.density,
            "drug_similarity": self.drug_sim is not None,
            "target_similarity": self.target_sim is not None,
        }


def _check_unique(ids: Sequence, what: str):
    seen = set()
    for x in ids:
        if x in seen:
            raise InputError(f"duplicate {what} identifier {x!r}")
        seen.add(x)


def build_adjacency(edges: Iterable[tuple], drugs: Sequence[str], targets: Sequence[str]) -> InteractionMatrix:
    """Adjacency with ``A[i, j] = 1`` iff (drugs[i], targets[j]) is an edge."""
    drug_index = {d: i for i, d in enumerate(drugs)}
    target_index = {t: j for j, t in enumerate(targets)}
    if len(drug_index) != len(drugs):
        _check_unique(drugs, "drug")
    if len(target_index) != len(targets):
        _check_unique(targets, "target")
    a = np.zeros((len(drugs), len(targets)))
    for d, t in edges:
        if d not in drug_index:
            raise InputError(f"edge references unknown drug {d!r}")
        if t not in target_index:
            raise InputError(f"edge references unknown target {t!r}")
        a[drug_index[d], target_index[t]] = 1.0
    return InteractionMatrix(a, tuple(drugs), tuple(targets))


def _norm_header(h: str) -> str:
    return re.sub(r"[\s_]+", " ", h.strip().lstrip("#").strip().lower())


def parse_matador(stream: TextIO, name: str = "matador") -> DatasetBundle:
    """Read a MATADOR dump, keeping only the chemical and protein id columns."""
    reader = csv.reader(stream, delimiter="\t", quoting=csv.QUOTE_NONE)
    header = None
    for header in reader:
        if any(cell.strip() for cell in header):
            break
    if not header:
        raise InputError("MATADOR input is empty")
    cols = [_norm_header(h) for h in header]
    missing = [c for c in ("chemical id", "protein id") if c not in cols]
    if missing:
        raise InputError("MATADOR header is missing required column(s): " + ", ".join(
            {"chemical id": "Chemical ID", "protein id": "Protein ID"}[c] for c in missing))
    ci, pi = cols.index("chemical id"), cols.index("protein id")
    need = max(ci, pi) + 1
    edges = set()
    for row in reader:
        if not any(cell.strip() for cell in row):
            continue
        line = reader.line_num
        if len(row) < need:
            raise InputError(f"line {line}: expected at least {need} columns, got {len(row)}")
        d, t = row[ci].strip(), row[pi].strip()
        if not d or not t:
            raise InputError(f"line {line}: empty chemical or protein id")
        edges.add((d, t))
    drugs = sorted({d for d, _ in edges})
    targets = sorted({t for _, t in edges})
    return DatasetBundle(build_adjacency(edges, drugs, targets), name=name)


def _read_grid(stream: TextIO):
    lines = [ln.rstrip("\r\n") for ln in stream]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise InputError("labeled matrix input is empty")
    head = [c.strip() for c in lines[0].split("\t")]
    while head and head[-1] == "" and len(head) > 1:
        head.pop()
    width = len(lines[1].rstrip("\t").split("\t")) if len(lines) > 1 else len(head)
    # a header without the empty corner cell is one field short
    col_labels = head if len(head) == width - 1 else head[1:]
    row_labels, rows = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = ln.split("\t")
        if len(cells) == len(col_labels) + 2 and cells[-1] == "":
            cells = cells[:-1]
        if len(cells) != len(col_labels) + 1:
            raise InputError(
                f"line {lineno}: ragged row, expected {len(col_labels) + 1} fields, got {len(cells)}"
            )
        label = cells[0].strip()
        vals = []
        for j, c in enumerate(cells[1:]):
            try:
                vals.append(float(c))
            except ValueError:
                raise InputError(f"line {lineno}: non-numeric value {c!r} at ({label}, {col_labels[j]})") from None
        row_labels.append(label)
        rows.append(vals)
    if not rows:
        raise InputError("labeled matrix has no data rows")
    for labels, what in ((row_labels, "row"), (col_labels, "column")):
        seen = set()
        for x in labels:
            if x in seen:
                raise InputError(f"duplicate {what} label {x!r}")
            seen.add(x)
    return row_labels, col_labels, np.array(rows, dtype=np.float64)


def _looks_like_targets(labels: Sequence[str]) -> bool:
    hits = sum(bool(_TARGET_ID.match(x)) for x in labels)
    return hits > len(labels) / 2


def _looks_like_drugs(labels: Sequence[str]) -> bool:
    hits = sum(bool(_DRUG_ID.match(x)) for x in labels)
    return hits > len(labels) / 2


def parse_labeled_matrix(stream: TextIO, kind: str, orientation: str = "auto", side: Optional[str] = None):
    """Parse a labeled tab-separated grid.

    Parameters
    ----------
    kind : {"adjacency", "similarity"}
    orientation : {"auto", "drugs-rows", "targets-rows"}
        Adjacency only. ``auto`` treats rows as targets when most row labels
        look like gene identifiers (``hsa:...``) or the column labels look like
        KEGG drug ids, and transposes in that case.
    side : {"drug", "target"}, optional
        Similarity only; guessed from the labels when omitted.
    """
    rows, cols, values = _read_grid(stream)
    if kind == "adjacency":
        bad = (values != 0) & (values != 1)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise InputError(f"non-binary adjacency entry {values[i, j]!r} at row {rows[i]!r}, column {cols[j]!r}")
        if orientation == "auto":
            transpose = _looks_like_targets(rows) or (_looks_like_drugs(cols) and not _looks_like_drugs(rows))
        elif orientation in ("drugs-rows", "targets-rows"):
            transpose = orientation == "targets-rows"
        else:
            raise InputError(f"unknown orientation {orientation!r}")
        if transpose:
            return InteractionMatrix(values.T.copy(), tuple(cols), tuple(rows))
        return InteractionMatrix(values, tuple(rows), tuple(cols))
    if kind == "similarity":
        if rows != cols:
            raise InputError("similarity grid must have identical row and column labels in the same order")
        bad = ~np.isfinite(values)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise InputError(f"non-finite similarity at row {rows[i]!r}, column {cols[j]!r}")
        if side is None:
            side = TARGET if _looks_like_targets(rows) else DRUG
        return SimilarityMatrix(values, tuple(rows), side)
    raise InputError(f"unknown matrix kind {kind!r}")


def align_similarity(sim: SimilarityMatrix, ids: Sequence[str]) -> tuple[SimilarityMatrix, list]:
    """Restrict and reorder ``sim`` to ``ids``.

    Returns the aligned matrix and the list of ``ids`` that the similarity does
    not cover (the caller must drop those entities).
    """
    pos = {x: k for k, x in enumerate(sim.ids)}
    missing = [x for x in ids if x not in pos]
    keep = [x for x in ids if x in pos]
    idx = np.array([pos[x] for x in keep], dtype=int)
    extra = len(sim.ids) - len(keep)
    if missing or extra:
        log.warning(
            "%s similarity: %d id(s) absent from the similarity matrix, %d similarity id(s) unused",
            sim.side, len(missing), extra,
        )
    return SimilarityMatrix(sim.s[np.ix_(idx, idx)], tuple(keep), sim.side), missing


def assemble_bundle(
    interactions: InteractionMatrix,
    drug_sim: Optional[SimilarityMatrix] = None,
    target_sim: Optional[SimilarityMatrix] = None,
    name: str = "dataset",
) -> DatasetBundle:
    """Build a bundle, intersecting ids when similarity and interaction ids differ."""
    a = interactions
    drug_keep = list(a.drug_ids)
    target_keep = list(a.target_ids)
    if drug_sim is not None:
        drug_sim, missing = align_similarity(drug_sim, drug_keep)
        drug_keep = [x for x in drug_keep if x not in set(missing)]
    if target_sim is not None:
        target_sim, missing = align_similarity(target_sim, target_keep)
        target_keep = [x for x in target_keep if x not in set(missing)]
    if len(drug_keep) != len(a.drug_ids) or len(target_keep) != len(a.target_ids):
        log.warning(
            "dropping %d drug(s) and %d target(s) not covered by similarity data",
            len(a.drug_ids) - len(drug_keep), len(a.target_ids) - len(target_keep),
        )
        di = {x: i for i, x in enumerate(a.drug_ids)}
        ti = {x: j for j, x in enumerate(a.target_ids)}
        sub = a.a[np.ix_([di[x] for x in drug_keep], [ti[x] for x in target_keep])]
        a = InteractionMatrix(sub, tuple(drug_keep), tuple(target_keep))
    return DatasetBundle(a, drug_sim, target_sim, name)


# ---------------------------------------------------------------------------
# canonical interchange format

INTERACTIONS_FILE = "interactions.tsv"
DRUG_SIM_FILE = "drug_similarity.tsv"
TARGET_SIM_FILE = "target_similarity.tsv"


def canonicalize(bundle: DatasetBundle) -> DatasetBundle:
    """Reorder drugs and targets lexicographically (matrices permuted to match)."""
    a = bundle.interactions
    dord = sorted(range(len(a.drug_ids)), key=lambda i: a.drug_ids[i])
    tord = sorted(range(len(a.target_ids)), key=lambda j: a.target_ids[j])
    inter = InteractionMatrix(
        a.a[np.ix_(dord, tord)], tuple(a.drug_ids[i] for i in dord), tuple(a.target_ids[j] for j in tord)
    )
    ds = ts = None
    if bundle.drug_sim is not None:
        ds = SimilarityMatrix(bundle.drug_sim.s[np.ix_(dord, dord)], inter.drug_ids, DRUG)
    if bundle.target_sim is not None:
        ts = SimilarityMatrix(bundle.target_sim.s[np.ix_(tord, tord)], inter.target_ids, TARGET)
    return DatasetBundle(inter, ds, ts, bundle.name)


def _check_field(x: str, what: str):
    if not x or any(ch in x for ch in "\t\n\r"):
        raise InputError(f"{what} {x!r} cannot be written to a tab-separated file")


def format_interactions(bundle: DatasetBundle) -> str:
    """Edge list text for an already-canonical bundle.

    Two header lines (``#name`` and ``#counts``), then one ``drug<TAB>target``
    row per interaction in (drug, target) order. Entities without any
    interaction appear once as ``drug<TAB>`` or ``<TAB>target``.
    """
    a = bundle.interactions
    if "\n" in bundle.name or "\t" in bundle.name:
        raise InputError("dataset name cannot contain tabs or newlines")
    out = io.StringIO()
    m, n = a.shape
    out.write(f"#name\t{bundle.name}\n")
    out.write(f"#counts\t{m}\t{n}\t{a.n_interactions}\n")
    for i, d in enumerate(a.drug_ids):
        _check_field(d, "drug id")
        js = np.flatnonzero(a.a[i])
        if js.size == 0:
            out.write(f"{d}\t\n")
        for j in js:
            out.write(f"{d}\t{a.target_ids[j]}\n")
    for j, t in enumerate(a.target_ids):
        _check_field(t, "target id")
        if not a.a[:, j].any():
            out.write(f"\t{t}\n")
    return out.getvalue()


def format_similarity(sim: SimilarityMatrix) -> str:
    out = io.StringIO()
    out.write("\t" + "\t".join(sim.ids) + "\n")
    for x, row in zip(sim.ids, sim.s):
        out.write(x + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue()


def parse_interactions(stream: TextIO) -> tuple[str, InteractionMatrix]:
    lines = stream.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2 or not lines[0].startswith("#name\t") or not lines[1].startswith("#counts\t"):
        raise InputError("interaction file must start with '#name' and '#counts' header lines")
    name = lines[0][len("#name\t"):]
    try:
        m, n, nnz = (int(x) for x in lines[1].split("\t")[1:])
    except ValueError:
        raise InputError("line 2: malformed '#counts' header") from None
    drugs, targets, edges = set(), set(), set()
    for lineno, ln in enumerate(lines[2:], start=3):
        cells = ln.split("\t")
        if len(cells) != 2 or (not cells[0] and not cells[1]):
            raise InputError(f"line {lineno}: expected 'drug<TAB>target'")
        d, t = cells
        if d:
            drugs.add(d)
        if t:
            targets.add(t)
        if d and t:
            edges.add((d, t))
    inter = build_adjacency(edges, sorted(drugs), sorted(targets))
    if inter.shape != (m, n) or inter.n_interactions != nnz:
        raise InputError(
            f"counts header says {m}x{n} with {nnz} interactions, body has "
            f"{inter.shape[0]}x{inter.shape[1]} with {inter.n_interactions}"
        )
    return name, inter


def write_bundle(bundle: DatasetBundle, directory) -> Path:
    """Write ``bundle`` in canonical form (ids sorted) to ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    b = canonicalize(bundle)
    (directory / INTERACTIONS_FILE).write_bytes(format_interactions(b).encode("utf-8"))
    for sim, fname in ((b.drug_sim, DRUG_SIM_FILE), (b.target_sim, TARGET_SIM_FILE)):
        path = directory / fname
        if sim is not None:
            path.write_bytes(format_similarity(sim).encode("utf-8"))
        elif path.exists():
            path.unlink()
    return directory


def read_bundle(directory) -> DatasetBundle:
    directory = Path(directory)
    path = directory / INTERACTIONS_FILE
    if not path.exists():
        raise InputError(f"{path} not found")
    with open(path, encoding="utf-8", newline="") as fh:
        name, inter = parse_interactions(fh)
    sims = {}
    for fname, side in ((DRUG_SIM_FILE, DRUG), (TARGET_SIM_FILE, TARGET)):
        p = directory / fname
        if p.exists():
            with open(p, encoding="utf-8", newline="") as fh:
                sims[side] = parse_labeled_matrix(fh, "similarity", side=side)
    return DatasetBundle(inter, sims.get(DRUG), sims.get(TARGET), name)


# ---------------------------------------------------------------------------
# convenience loaders

YAMANISHI = {
    "nr": "nuclear receptor",
    "gpcr": "GPCR",
    "ic": "ion channel",
    "e": "enzyme",
}


def load_yamanishi(directory, prefix: str, orientation: str = "auto") -> DatasetBundle:
    """Load ``<prefix>_admat_dgc.txt`` plus ``_simmat_dc`` / ``_simmat_dg`` if present."""
    directory = Path(directory)
    adj = directory / f"{prefix}_admat_dgc.txt"
    if not adj.exists():
        raise InputError(f"{adj} not found")
    with open(adj, encoding="utf-8") as fh:
        inter = parse_labeled_matrix(fh, "adjacency", orientation=orientation)
    ds = ts = None
    p = directory / f"{prefix}_simmat_dc.txt"
    if p.exists():
        with open(p, encoding="utf-8") as fh:
            ds = parse_labeled_matrix(fh, "similarity", side=DRUG)
    p = directory / f"{prefix}_simmat_dg.txt"
    if p.exists():
        with open(p, encoding="utf-8") as fh:
            ts = parse_labeled_matrix(fh, "similarity", side=TARGET)
    return assemble_bundle(inter, ds, ts, name=YAMANISHI.get(prefix, prefix))


def load_matador(path) -> DatasetBundle:
    with open(path, encoding="utf-8", errors="replace", newline="") as fh:
        return parse_matador(fh)


def load_any(path, orientation: str = "auto") -> DatasetBundle:
    """Load a canonical directory, a MATADOR file, or a Yamanishi adjacency file.

    For a Yamanishi ``<prefix>_admat_dgc.txt`` path the sibling similarity
    files are picked up automatically.
    """
    path = Path(path)
    if path.is_dir():
        if (path / INTERACTIONS_FILE).exists():
            return read_bundle(path)
        raise InputError(f"{path} is a directory without {INTERACTIONS_FILE}")
    if not path.exists():
        raise InputError(f"{path} not found")
    m = re.match(r"^(.+)_admat_dgc\.txt$", path.name)
    if m:
        return load_yamanishi(path.parent, m.group(1), orientation=orientation)
    with open(path, encoding="utf-8", errors="replace", newline="") as fh:
        first = fh.readline()
    if "chemical" in first.lower() and "protein" in first.lower():
        return load_matador(path)
    with open(path, encoding="utf-8") as fh:
        inter = parse_labeled_matrix(fh, "adjacency", orientation=orientation)
    return DatasetBundle(inter, name=path.stem)
