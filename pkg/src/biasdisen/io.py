"""Canonical dataset files and converters from the published raw releases.

Canonical layout of a dataset directory::

    nodes.csv    node_id,sens,label,f0,...,f{d-1}   (label empty when unknown)
    edges.csv    src,dst                            (undirected, each edge once)
    schema.json  {"sens_col": ..., "label_col": ..., "drop_cols": [...]}
"""

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError, ValidationError
from .graph import AttributedGraph, edges_to_adjacency, minmax_scale

logger = logging.getLogger(__name__)

DATA_ROOT_ENV = "BIASDISEN_DATA_ROOT"
NODE_ID_COL = "node_id"


@dataclass(frozen=True)
class DatasetSchema:
    sens_col: str = "sens"
    label_col: str = "label"
    drop_cols: tuple = field(default_factory=tuple)

    @classmethod
    def from_json(cls, path):
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read schema {path}: {exc}") from exc
        if not isinstance(raw, dict) or not isinstance(raw.get("sens_col"), str) or not isinstance(raw.get("label_col"), str):
            raise SchemaError(f"{path}: schema needs string fields sens_col and label_col")
        drop = raw.get("drop_cols", [])
        if not isinstance(drop, list) or not all(isinstance(c, str) for c in drop):
            raise SchemaError(f"{path}: drop_cols must be a list of strings")
        return cls(raw["sens_col"], raw["label_col"], tuple(drop))

    def to_json(self):
        return {"sens_col": self.sens_col, "label_col": self.label_col, "drop_cols": list(self.drop_cols)}


def data_root():
    return Path(os.environ.get(DATA_ROOT_ENV, "data"))


def dataset_paths(name, root=None):
    base = Path(root) if root is not None else data_root()
    d = base / name
    return d / "nodes.csv", d / "edges.csv", d / "schema.json"


def _read_rows(path):
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot open: {exc.strerror}", path) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected a header row", path, 1) from None
        rows = [(reader.line_num, row) for row in reader if row]
    return [h.strip() for h in header], rows


def load_dataset(nodes_path, edges_path, schema=None, name=""):
    """Read canonical CSVs into a validated, min-max scaled :class:`AttributedGraph`."""
    schema = schema or DatasetSchema()
    header, rows = _read_rows(nodes_path)
    for col in (NODE_ID_COL, schema.sens_col, schema.label_col):
        if col not in header:
            raise SchemaError(f"{nodes_path}: missing column {col!r}")
    skip = {NODE_ID_COL, schema.sens_col, schema.label_col, *schema.drop_cols}
    feat_cols = [i for i, h in enumerate(header) if h not in skip]
    id_i = header.index(NODE_ID_COL)
    s_i = header.index(schema.sens_col)
    y_i = header.index(schema.label_col)

    n = len(rows)
    ids = np.empty(n, dtype=np.int64)
    sens = np.empty(n, dtype=np.float64)
    labels = np.zeros(n, dtype=np.int64)
    mask = np.zeros(n, dtype=bool)
    x = np.empty((n, len(feat_cols)))
    for r, (line, row) in enumerate(rows):
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", nodes_path, line)
        try:
            ids[r] = int(row[id_i])
            sens[r] = float(row[s_i])
            lab = row[y_i].strip()
            if lab:
                labels[r] = int(float(lab))
                mask[r] = True
            x[r] = [float(row[i]) for i in feat_cols]
        except ValueError as exc:
            raise ParseError(str(exc), nodes_path, line) from None
    if not np.all((sens == 0) | (sens == 1)):
        bad = np.unique(sens[(sens != 0) & (sens != 1)])[:5]
        raise SchemaError(f"{nodes_path}: sensitive column {schema.sens_col!r} is not binary (saw {bad.tolist()})")
    if not np.all((labels[mask] == 0) | (labels[mask] == 1)):
        raise SchemaError(f"{nodes_path}: label column {schema.label_col!r} is not binary")
    order = np.argsort(ids, kind="stable")
    if not np.array_equal(ids[order], np.arange(n)):
        raise ValidationError(f"{nodes_path}: node ids must be contiguous 0..{n - 1}")
    x, sens, labels, mask = x[order], sens[order], labels[order], mask[order]

    e_header, e_rows = _read_rows(edges_path)
    if e_header[:2] != ["src", "dst"]:
        raise SchemaError(f"{edges_path}: header must start with src,dst")
    src = np.empty(len(e_rows), dtype=np.int64)
    dst = np.empty(len(e_rows), dtype=np.int64)
    for r, (line, row) in enumerate(e_rows):
        try:
            src[r], dst[r] = int(row[0]), int(row[1])
        except (ValueError, IndexError):
            raise ParseError("edge rows need two integer node ids", edges_path, line) from None
        if not (0 <= src[r] < n and 0 <= dst[r] < n):
            raise ParseError(f"node id out of range 0..{n - 1}", edges_path, line)
    adjacency = edges_to_adjacency(src, dst, n)
    if adjacency.nnz == 0:
        raise ValidationError(f"{edges_path}: graph has no edges")
    graph = AttributedGraph(
        adjacency=adjacency,
        x=minmax_scale(x),
        s=sens.astype(np.int8),
        y=labels,
        label_mask=mask,
        feature_names=tuple(header[i] for i in feat_cols),
        name=name,
    )
    logger.info(
        "loaded %s: n=%d, edge rows=%d, undirected edges=%d, directed entries=%d",
        name or nodes_path, graph.n, len(e_rows), graph.m, graph.nnz,
    )
    return graph


def load_named(name, root=None):
    nodes, edges, schema_path = dataset_paths(name, root)
    schema = DatasetSchema.from_json(schema_path) if schema_path.exists() else DatasetSchema()
    return load_dataset(nodes, edges, schema, name=name)


def _fmt(v):
    return repr(float(v))


def write_canonical(out_dir, x, s, y, label_mask, edges, feature_names=None):
    """Write canonical CSVs; rows sorted by node id and by (src, dst)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[1]
    with (out_dir / "nodes.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([NODE_ID_COL, "sens", "label"] + [f"f{j}" for j in range(d)])
        for i in range(x.shape[0]):
            w.writerow([i, int(s[i]), int(y[i]) if label_mask[i] else ""] + [_fmt(v) for v in x[i]])
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    keep = lo != hi
    pairs = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
    with (out_dir / "edges.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst"])
        w.writerows(pairs.tolist())
    (out_dir / "schema.json").write_text(json.dumps(DatasetSchema().to_json()) + "\n", encoding="utf-8")
    if feature_names is not None:
        (out_dir / "columns.json").write_text(json.dumps(list(feature_names)) + "\n", encoding="utf-8")
    return out_dir


def export_dataset(graph, out_dir):
    return write_canonical(out_dir, graph.x, graph.s, graph.y, graph.label_mask, graph.edges(), graph.feature_names)


# ---------------------------------------------------------------------------
# raw release converters


@dataclass(frozen=True)
class RawFormat:
    nodes_file: str
    edges_file: str
    sens_col: str
    label_col: str
    id_col: str = None
    drop_cols: tuple = ()
    clip_labels: bool = False


RAW_FORMATS = {
    "nba": RawFormat("nba.csv", "nba_relationship.txt", "country", "SALARY", id_col="user_id"),
    "recidivism": RawFormat("bail.csv", "bail_edges.txt", "WHITE", "RECID"),
    "credit": RawFormat("credit.csv", "credit_edges.txt", "Age", "NoDefaultNextMonth", drop_cols=("Single",)),
    "pokec_z": RawFormat("region_job.csv", "region_job_relationship.txt", "region", "I_am_working_in_field",
                         id_col="user_id", clip_labels=True),
    "pokec_n": RawFormat("region_job_2.csv", "region_job_2_relationship.txt", "region", "I_am_working_in_field",
                         id_col="user_id", clip_labels=True),
}


def _remap(raw_ids, edges):
    """Raw ids to row positions; ids not among ``raw_ids`` map to -1."""
    order = np.argsort(raw_ids, kind="stable")
    sorted_ids = raw_ids[order]
    pos = np.searchsorted(sorted_ids, edges)
    pos_c = np.minimum(pos, sorted_ids.size - 1)
    found = sorted_ids[pos_c] == edges
    return np.where(found, order[pos_c], -1)


def convert_raw(dataset, raw_dir, out_dir):
    """Convert a published raw release into canonical files.

    Negative labels mean "unlabeled"; for the Pokec releases labels above 1 are
    clipped to 1. Nodes whose sensitive value is not 0/1 are dropped together
    with their edges. Returns a dict of counts for logging.
    """
    if dataset not in RAW_FORMATS:
        raise ValidationError(f"unknown dataset {dataset!r}; choose from {sorted(RAW_FORMATS)}")
    fmt = RAW_FORMATS[dataset]
    raw_dir = Path(raw_dir)
    header, rows = _read_rows(raw_dir / fmt.nodes_file)
    for col in (fmt.sens_col, fmt.label_col) + ((fmt.id_col,) if fmt.id_col else ()):
        if col not in header:
            raise SchemaError(f"{raw_dir / fmt.nodes_file}: missing column {col!r}")
    skip = {fmt.sens_col, fmt.label_col, fmt.id_col, *fmt.drop_cols}
    feat = [i for i, h in enumerate(header) if h not in skip]
    table = np.empty((len(rows), len(header)))
    for r, (line, row) in enumerate(rows):
        try:
            table[r] = [float(v) if v.strip() else np.nan for v in row]
        except ValueError as exc:
            raise ParseError(str(exc), raw_dir / fmt.nodes_file, line) from None
    sens = table[:, header.index(fmt.sens_col)]
    labels = table[:, header.index(fmt.label_col)]
    raw_ids = table[:, header.index(fmt.id_col)].astype(np.int64) if fmt.id_col else np.arange(len(rows))
    keep = (sens == 0) | (sens == 1)
    x = table[keep][:, feat]
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{raw_dir / fmt.nodes_file}: missing or non-numeric attribute values")
    sens, labels, raw_ids = sens[keep], labels[keep], raw_ids[keep]
    if fmt.clip_labels:
        labels = np.where(labels > 1, 1, labels)
    label_mask = labels >= 0
    if not np.all(np.isin(labels[label_mask], (0, 1))):
        raise SchemaError(f"{raw_dir / fmt.nodes_file}: label column {fmt.label_col!r} is not binary")
    if np.unique(raw_ids).size != raw_ids.size:
        raise ValidationError(f"{raw_dir / fmt.nodes_file}: duplicate node ids")

    try:
        raw_edges = np.loadtxt(raw_dir / fmt.edges_file, dtype=np.float64, ndmin=2)[:, :2].astype(np.int64)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read edges: {exc}", raw_dir / fmt.edges_file) from exc
    mapped = _remap(raw_ids, raw_edges.reshape(-1, 2))
    mapped = mapped[(mapped >= 0).all(axis=1)]
    write_canonical(out_dir, x, sens.astype(int), labels.astype(int), label_mask, mapped,
                    [header[i] for i in feat])
    return {
        "dataset": dataset,
        "nodes": int(keep.sum()),
        "dropped_nodes": int((~keep).sum()),
        "raw_edge_rows": int(raw_edges.shape[0]),
        "kept_edge_rows": int(mapped.shape[0]),
    }
