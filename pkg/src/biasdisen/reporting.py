"""Run reports and their deterministic JSON / CSV encodings."""

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BiasDisenError, ValidationError

METRICS = ("acc", "auc", "f1", "sp", "eo")


@dataclass
class RunReport:
    """Per-seed test metrics for one configuration plus their aggregates.

    ``std`` is the population standard deviation over seeds. Wall-clock time is
    kept out of :meth:`to_dict` so that encoded reports are reproducible.
    """

    kind: str
    config: dict
    runs: list = field(default_factory=list)

    def values(self, metric):
        return np.array([getattr(r.metrics, metric) for r in self.runs], dtype=np.float64)

    def mean(self):
        return {m: float(np.mean(self.values(m))) for m in METRICS}

    def std(self):
        return {m: float(np.std(self.values(m))) for m in METRICS}

    def wall_clock(self):
        return {str(r.seed): r.wall_clock for r in self.runs}

    def to_dict(self):
        if not self.runs:
            raise ValidationError("report has no runs")
        return {
            "kind": self.kind,
            "config": self.config,
            "seeds": [r.seed for r in self.runs],
            "runs": [r.to_dict() for r in self.runs],
            "mean": self.mean(),
            "std": self.std(),
            "loss_curves": [loss_curve_name(self.kind, r.seed) for r in self.runs],
        }


def loss_curve_name(kind, seed):
    return f"loss_{kind}_seed{seed}.jsonl"


def dumps_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def report_rows(report):
    """Long-format rows ``(kind, seed, metric, value)`` incl. ``mean``/``std`` pseudo-seeds."""
    rows = []
    for r in report.runs:
        for m in METRICS:
            rows.append((report.kind, str(r.seed), m, getattr(r.metrics, m)))
    for label, agg in (("mean", report.mean()), ("std", report.std())):
        for m in METRICS:
            rows.append((report.kind, label, m, agg[m]))
    return rows


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def reports_csv(reports):
    rows = [row for rep in reports for row in report_rows(rep)]
    return _csv_text(("kind", "seed", "metric", "value"), rows)


def _write(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise BiasDisenError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def emit_report(reports, out_dir, stem="report", formats=("json", "csv"), loss_curves=True):
    """Write one JSON document (object, or object keyed by kind) and/or a CSV for ``reports``."""
    if isinstance(reports, RunReport):
        reports = [reports]
    reports = list(reports)
    if not reports:
        raise ValidationError("emit_report needs at least one report")
    out_dir = Path(out_dir)
    written = []
    if "json" in formats:
        doc = reports[0].to_dict() if len(reports) == 1 else {r.kind: r.to_dict() for r in reports}
        written.append(_write(out_dir / f"{stem}.json", dumps_json(doc)))
    if "csv" in formats:
        written.append(_write(out_dir / f"{stem}.csv", reports_csv(reports)))
    if loss_curves:
        for rep in reports:
            for r in rep.runs:
                lines = "".join(json.dumps(h, allow_nan=False) + "\n" for h in r.history)
                written.append(_write(out_dir / loss_curve_name(rep.kind, r.seed), lines))
    timing = {r.kind: r.wall_clock() for r in reports}
    _write(out_dir / f"{stem}.timing.json", dumps_json(timing))
    return written


def sweep_csv(rows, param_names):
    header = tuple(param_names) + ("seed", "metric", "value")
    return _csv_text(header, rows)
