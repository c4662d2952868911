"""JSON / CSV emission.  Key order is sorted and numbers use ``repr``, so output is locale-free."""
from __future__ import annotations

import csv
import json
import os

from ..experiments import ExperimentReport
from ..holonomy import DiscreteStateSpace, build_state_space
from ..mather import MatherResult


def write_json(obj, path):
    try:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(obj, fh, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=True)
            fh.write("\n")
    except OSError as err:
        raise OSError(err.errno, f"cannot write {path}: {err.strerror}") from None
    return path


def _write_rows(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as err:
        raise OSError(err.errno, f"cannot write {path}: {err.strerror}") from None
    return path


def _num(a):
    return repr(float(a))


def write_measure_csv(result: MatherResult, path, space: DiscreteStateSpace | None = None):
    """Rows ``x_index..., v_index..., weight`` for occupied cells, sorted by cell index."""
    space = space or build_state_space(result.grid)
    d = result.grid.dim
    header = [f"x_index{i}" for i in range(d)] + [f"v_index{i}" for i in range(d)] + ["weight"]
    rows = [
        [*space.x_index(c), *space.v_index(c), _num(result.measure.weights[c])]
        for c in result.measure.support()
    ]
    return _write_rows(path, header, rows)


def write_curve(path, label, points, values):
    """Two-column (or d+1 column) plot data: argument components, then value."""
    rows = []
    dim = 1
    for p, val in zip(points, values):
        comps = list(p) if hasattr(p, "__len__") else [p]
        dim = len(comps)
        rows.append([_num(x) for x in comps] + [_num(val)])
    header = [label] if dim == 1 else [f"{label}{i}" for i in range(dim)]
    return _write_rows(path, header + ["value"], rows)


def write_trials_csv(report: ExperimentReport, path):
    header = ["index", "seed", "label", "max_face_dimension", "graph_check_pass", "max_duality_gap", "error", "face_dimensions"]
    rows = [
        [
            t.index,
            "" if t.seed is None else t.seed,
            t.label,
            "" if t.max_face_dimension is None else t.max_face_dimension,
            "" if t.graph_check_pass is None else int(t.graph_check_pass),
            _num(t.max_duality_gap),
            t.error or "",
            ";".join(f"{k}:{v}" for k, v in t.face_dimensions.items()),
        ]
        for t in report.trials
    ]
    return _write_rows(path, header, rows)


def write_report(report, directory) -> list[str]:
    """Write a :class:`MatherResult` or :class:`ExperimentReport` into ``directory``."""
    os.makedirs(directory, exist_ok=True)
    if isinstance(report, MatherResult):
        return [
            write_json(report.to_dict(), os.path.join(directory, "result.json")),
            write_measure_csv(report, os.path.join(directory, "measure.csv")),
        ]
    if isinstance(report, ExperimentReport):
        return [
            write_json(report.to_dict(), os.path.join(directory, "result.json")),
            write_trials_csv(report, os.path.join(directory, "trials.csv")),
        ]
    raise TypeError(f"cannot write a report of type {type(report).__name__}")
