"""CSV ingestion and run-output serialization.

Input CSVs have one header row; rows are objects and the ID column (first
by default) names them.  With ``transpose=True`` rows are features and the
header carries the object IDs.  Labels written to disk are 1-based.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dataset import MultiSourceDataset
from .exceptions import DataError

SCHEMA_VERSION = "1.0"


def fmt(x) -> str:
    """17 significant digits: enough for an exact float round trip."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass
class SourceFile:
    path: str
    delimiter: str = ","
    id_column: int = 0
    standardize: bool = False
    transpose: bool = False
    name: str | None = None


def _read_rows(src: SourceFile):
    try:
        with open(src.path, newline="") as fh:
            rows = list(csv.reader(fh, delimiter=src.delimiter))
    except OSError as exc:
        raise DataError(f"cannot read {src.path}: {exc.strerror}") from exc
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise DataError(f"{src.path}: need a header row and at least one data row")
    width = len(rows[0])
    for i, r in enumerate(rows, start=1):
        if len(r) != width:
            raise DataError(f"{src.path}: line {i} has {len(r)} columns, expected {width}")
    return rows


def _parse(cell: str, path, line: int, col: int) -> float:
    try:
        val = float(cell)
    except ValueError:
        raise DataError(f"{path}: non-numeric cell {cell!r} at line {line}, column {col}") from None
    if not math.isfinite(val):
        raise DataError(f"{path}: non-finite cell {cell!r} at line {line}, column {col}")
    return val


def read_source(src: SourceFile):
    """Return ``(ids, feature_names, matrix)`` for one file, rows = objects."""
    rows = _read_rows(src)
    header = rows[0]
    if src.transpose:
        ids = header[1:]
        features = [r[0] for r in rows[1:]]
        values = np.array([[_parse(c, src.path, i, j) for j, c in enumerate(r[1:], start=2)]
                           for i, r in enumerate(rows[1:], start=2)]).T
    else:
        idc = src.id_column
        if not 0 <= idc < len(header):
            raise DataError(f"{src.path}: id column {idc} out of range")
        cols = [j for j in range(len(header)) if j != idc]
        features = [header[j] for j in cols]
        ids = [r[idc] for r in rows[1:]]
        values = np.array([[_parse(r[j], src.path, i, j + 1) for j in cols]
                           for i, r in enumerate(rows[1:], start=2)])
    if values.ndim != 2 or values.shape[1] == 0:
        raise DataError(f"{src.path}: no feature columns")
    seen = set()
    for i in ids:
        if i in seen:
            raise DataError(f"{src.path}: duplicate object ID {i!r}")
        seen.add(i)
    return list(ids), list(features), values


def ingest(sources: list[SourceFile]) -> MultiSourceDataset:
    """Read and align sources on the IDs they all share (first file's order)."""
    if not sources:
        raise DataError("no source files given")
    parsed = [read_source(s) for s in sources]
    common = set(parsed[0][0])
    for ids, _, _ in parsed[1:]:
        common &= set(ids)
    if not common:
        counts = ", ".join(f"{s.path}: {len(p[0])} IDs" for s, p in zip(sources, parsed))
        raise DataError(f"sources share no object IDs ({counts})")
    order = [i for i in parsed[0][0] if i in common]
    mats, names, feats = [], [], []
    for s, (ids, features, values) in zip(sources, parsed):
        pos = {i: n for n, i in enumerate(ids)}
        X = values[[pos[i] for i in order]]
        if s.standardize:
            sd = X.std(axis=0, ddof=1)
            if np.any(~(sd > 0)):
                raise DataError(f"{s.path}: cannot standardize constant feature column(s)")
            X = (X - X.mean(axis=0)) / sd
        mats.append(X)
        names.append(s.name or Path(s.path).stem)
        feats.append(features)
    return MultiSourceDataset(mats, order, names, feats)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in r])


def write_dataset(data: MultiSourceDataset, directory) -> list[SourceFile]:
    """One CSV per source (ID column first); returns matching SourceFiles."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, feats, X in zip(data.names, data.feature_names, data.sources):
        path = directory / f"{name}.csv"
        write_csv(path, ["id", *feats], ([i, *row] for i, row in zip(data.ids, X)))
        out.append(SourceFile(str(path), name=name))
    return out


def write_records(path, records: list[dict]) -> None:
    if not records:
        raise ValueError("no records to write")
    header = list(records[0])
    write_csv(path, header, ([r[h] for h in header] for r in records))


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass
class RunManifest:
    subcommand: str
    argv: list
    config: dict
    sources: list
    output_dir: str
    schema_version: str = SCHEMA_VERSION
    annotations: dict | None = None


def config_dict(config) -> dict:
    d = asdict(config)
    d["init_strategy"] = config.init_strategy.value
    return _plain(d)


def _labels_1based(a) -> list:
    return (np.asarray(a) + 1).tolist()


def write_outputs(draws, result, manifest: RunManifest, directory, ids, names,
                  emit_coincidence: bool = False) -> list[Path]:
    """Write summary, Dahl clusterings, traces (and optionally the coincidence
    matrix of C) plus the manifest.  Returns the written paths."""
    from .summary import coincidence_matrix

    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        M = result.L.shape[0]
        summary = {"schema_version": SCHEMA_VERSION, "K": draws.K, "N": len(ids),
                   "M": M, "sources": list(names), "saved_draws": draws.n_saved,
                   "pi_mean": result.pi_mean,
                   "cluster_sizes": {"L": [np.bincount(l, minlength=draws.K) for l in result.L]},
                   "diagnostics": dict(draws.diagnostics)}
        if result.C is not None:
            point, ci = result.mean_adjusted
            summary.update({
                "alpha_mean": result.alpha_mean, "alpha_ci": result.alpha_ci,
                "mean_adjusted_adherence": point, "mean_adjusted_adherence_ci": list(ci),
                "matching_matrices": result.matching})
            summary["cluster_sizes"]["C"] = np.bincount(result.C, minlength=draws.K)
        elif draws.alpha is not None:
            summary["alpha_mean"] = draws.alpha.mean(axis=0)
        path = directory / "summary.json"
        write_json(path, summary)
        written.append(path)

        header = ["id"] + (["C"] if result.C is not None else []) + [f"L_{n}" for n in names]
        cols = ([_labels_1based(result.C)] if result.C is not None else []) + \
            [_labels_1based(l) for l in result.L]
        path = directory / "clusters.csv"
        write_csv(path, header, ([i, *vals] for i, vals in zip(ids, zip(*cols))))
        written.append(path)

        if draws.trace_alpha is not None:
            A = draws.trace_alpha.shape[1]
            labels = names if A == len(names) else [f"pair{p + 1}" for p in range(A)]
            path = directory / "trace_alpha.csv"
            write_csv(path, ["iteration"] + [f"alpha_{n}" for n in labels],
                      ([t + 1, *row] for t, row in enumerate(draws.trace_alpha)))
            written.append(path)

        tp = draws.trace_pi
        if tp.ndim == 2:
            header = ["iteration"] + [f"pi_{k + 1}" for k in range(draws.K)]
        else:
            header = ["iteration"] + [f"pi_{n}_{k + 1}" for n in names[:tp.shape[1]]
                                      for k in range(draws.K)]
            tp = tp.reshape(tp.shape[0], -1)
        path = directory / "trace_pi.csv"
        write_csv(path, header, ([t + 1, *row] for t, row in enumerate(tp)))
        written.append(path)

        if emit_coincidence and draws.C is not None:
            P = coincidence_matrix(draws.C)
            path = directory / "coincidence_C.csv"
            write_csv(path, ["id", *ids], ([i, *row] for i, row in zip(ids, P)))
            written.append(path)

        path = directory / "manifest.json"
        write_json(path, asdict(manifest))
        written.append(path)
    except OSError as exc:
        raise DataError(f"cannot write outputs to {exc.filename or directory}: {exc.strerror}") from exc
    return written


def read_manifest(path) -> RunManifest:
    with open(path) as fh:
        return RunManifest(**json.load(fh))


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
