"""CSV and summary-document emission for pipeline runs.

All numeric cells are written in round-trip decimal precision so reruns of
the same scenario produce byte-identical files.  The per-run summary is a
versioned JSON document; ``merge_summaries`` collects the summaries under
a directory tree into one table.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SUMMARY_VERSION = 1


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_contraction_csv(report, path) -> None:
    rows = zip(report.s, report.r, report.r_prime, report.lipschitz_ratio,
               report.uniqueness_margin, report.converged)
    write_rows(path, ["s", "r", "r_prime", "lipschitz_ratio",
                      "uniqueness_margin", "converged"], rows)


def write_defect_csv(theorem1, path) -> None:
    curve = theorem1.curve
    profile = theorem1.geodesic.defect_profile
    dists = theorem1.coplanarity.distances
    rows = ((curve.arclen[i], profile[i], dists[i]) for i in range(curve.n_nodes))
    write_rows(path, ["ell", "defect", "plane_distance"], rows)


def write_clairaut_csv(table, path) -> None:
    write_rows(path, ["ell", "R", "sin_theta", "product", "wedge"], table.rows())


def write_canal_csv(canal, path) -> None:
    t = canal.table
    rows = zip(t.ell, t.xi, t.radius, t.r, t.r_prime)
    write_rows(path, ["ell", "xi", "profile_radius", "r", "r_prime"], rows)


def write_oracle_csv(rows, path) -> None:
    header = ["t", "T_x", "T_y", "T_z", "Tp_x", "Tp_y", "Tp_z",
              "sin_alpha", "alpha_prime"]
    flat = ((t, *T, *Tp, sa, ap) for (t, T, Tp, sa, ap) in rows)
    write_rows(path, header, flat)


def _jsonable(value):
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_summary(summary: dict, path) -> None:
    doc = {"summary_version": SUMMARY_VERSION, **_jsonable(summary)}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_summary(path) -> dict:
    return json.loads(Path(path).read_text())


MERGE_COLUMNS = [
    "name", "hash", "status", "exit_code", "clearance", "max_ratio",
    "defect", "residual", "geodesic_verdict", "coplanarity_verdict",
    "consistent", "clairaut_drift", "tangency_angle",
]


def merge_summaries(root) -> list[dict]:
    """Collect every summary.json under root into flat rows."""
    rows = []
    for path in sorted(Path(root).rglob("summary.json")):
        doc = load_summary(path)
        t1 = doc.get("theorem1") or {}
        rows.append({
            "name": doc.get("scenario_name", path.parent.name),
            "hash": doc.get("scenario_hash", ""),
            "status": doc.get("status", ""),
            "exit_code": doc.get("exit_code", ""),
            "clearance": (doc.get("clearance") or {}).get("min_margin", ""),
            "max_ratio": (doc.get("contraction") or {}).get("max_ratio", ""),
            "defect": t1.get("defect", ""),
            "residual": t1.get("residual", ""),
            "geodesic_verdict": t1.get("geodesic_verdict", ""),
            "coplanarity_verdict": t1.get("coplanarity_verdict", ""),
            "consistent": t1.get("consistent", ""),
            "clairaut_drift": (doc.get("clairaut") or {}).get("max_dev_wedge", ""),
            "tangency_angle": (doc.get("canal") or {}).get("tangency_max_angle", ""),
        })
    return rows


def write_merged_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MERGE_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in MERGE_COLUMNS})
