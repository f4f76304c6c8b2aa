"""CSV ingestion and emission for datasets, plus ground-truth sidecars.

The canonical on-disk form is long CSV — ``entity_id,time,dim_1[,dim_2,...]``
— one row per (entity, time step).  Floats are written with ``repr`` so a
dataset survives a write/read round trip bit-for-bit.  A wide layout
(``time,<entity>_dim_<k>,...``) is accepted behind a flag for data that
arrives column-per-entity.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Sequence

import numpy as np

from coordlead.simulate import Trial
from coordlead.timeseries import Dataset

__all__ = [
    "IngestError",
    "read_dataset_csv",
    "write_dataset_csv",
    "read_truth_json",
    "write_truth_json",
]

_TRUTH_FORMAT = 1


class IngestError(ValueError):
    """Malformed input data (bad header, ragged series, non-numeric cells)."""


def _parse_cell(raw: str, row_no: int, col: str) -> float:
    try:
        val = float(raw)
    except ValueError:
        raise IngestError(f"row {row_no}: non-numeric {col} value {raw!r}") from None
    if not math.isfinite(val):
        raise IngestError(f"row {row_no}: {col} is not finite ({raw})")
    return val


def _parse_time(raw: str, row_no: int) -> int:
    val = _parse_cell(raw, row_no, "time")
    if val != int(val):
        raise IngestError(f"row {row_no}: time must be an integer step, got {raw}")
    return int(val)


def _read_long(path: str) -> dict[str, dict[int, tuple[float, ...]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("empty file") from None
        if header[:2] != ["entity_id", "time"] or len(header) < 3:
            raise IngestError(
                "expected header entity_id,time,dim_1[,dim_2,...], got "
                + ",".join(header)
            )
        dims = header[2:]
        expected = [f"dim_{k}" for k in range(1, len(dims) + 1)]
        if dims != expected:
            raise IngestError(
                f"dimension columns must be {','.join(expected)}, got {','.join(dims)}"
            )
        series: dict[str, dict[int, tuple[float, ...]]] = {}
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 + len(dims):
                raise IngestError(
                    f"row {row_no}: expected {2 + len(dims)} cells, got {len(row)}"
                )
            eid = row[0]
            t = _parse_time(row[1], row_no)
            vals = tuple(
                _parse_cell(raw, row_no, col) for raw, col in zip(row[2:], dims)
            )
            per_entity = series.setdefault(eid, {})
            if t in per_entity:
                raise IngestError(f"row {row_no}: duplicate (entity,time) ({eid},{t})")
            per_entity[t] = vals
    if not series:
        raise IngestError("no data rows")
    return series


def _read_wide(path: str) -> dict[str, dict[int, tuple[float, ...]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("empty file") from None
        if not header or header[0] != "time" or len(header) < 2:
            raise IngestError(
                "expected wide header time,<entity>_dim_<k>,..., got "
                + ",".join(header)
            )
        columns: list[tuple[str, int]] = []
        for col in header[1:]:
            eid, sep, dim = col.rpartition("_dim_")
            if not sep or not eid or not dim.isdigit() or int(dim) < 1:
                raise IngestError(f"bad wide column name {col!r}")
            columns.append((eid, int(dim)))
        per_entity_dims: dict[str, int] = {}
        for eid, dim in columns:
            per_entity_dims[eid] = max(per_entity_dims.get(eid, 0), dim)
        m = max(per_entity_dims.values())
        for eid, top in per_entity_dims.items():
            have = sorted(d for e, d in columns if e == eid)
            if top != m or have != list(range(1, m + 1)):
                raise IngestError(f"entity {eid} does not cover dim_1..dim_{m}")
        series: dict[str, dict[int, tuple[float, ...]]] = {e: {} for e in per_entity_dims}
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestError(
                    f"row {row_no}: expected {len(header)} cells, got {len(row)}"
                )
            t = _parse_time(row[0], row_no)
            staging: dict[str, list[float]] = {e: [0.0] * m for e in per_entity_dims}
            for raw, (eid, dim), col in zip(row[1:], columns, header[1:]):
                staging[eid][dim - 1] = _parse_cell(raw, row_no, col)
            for eid, vals in staging.items():
                if t in series[eid]:
                    raise IngestError(
                        f"row {row_no}: duplicate (entity,time) ({eid},{t})"
                    )
                series[eid][t] = tuple(vals)
    if not any(series.values()):
        raise IngestError("no data rows")
    return series


def _fill_gaps(
    eid: str,
    rows: dict[int, tuple[float, ...]],
    times: Sequence[int],
    max_gap: int,
) -> None:
    missing = [t for t in times if t not in rows]
    if not missing:
        return
    runs: list[list[int]] = []
    for t in missing:
        if runs and t == runs[-1][-1] + 1:
            runs[-1].append(t)
        else:
            runs.append([t])
    for run in runs:
        before, after = run[0] - 1, run[-1] + 1
        if max_gap <= 0 or len(run) > max_gap or before not in rows or after not in rows:
            raise IngestError(
                f"entity {eid} is missing time step {run[0]}"
                + (f" (gap of {len(run)})" if len(run) > 1 else "")
            )
        lo = np.array(rows[before])
        hi = np.array(rows[after])
        span = after - before
        for t in run:
            frac = (t - before) / span
            rows[t] = tuple((lo + (hi - lo) * frac).tolist())


def read_dataset_csv(
    path: str, *, wide: bool = False, interpolate_max_gap: int = 0
) -> Dataset:
    """Load a dataset, validating rectangularity and finiteness.

    Missing (entity, time) rows are errors unless ``interpolate_max_gap`` is
    positive, in which case interior gaps of at most that many consecutive
    steps are filled by linear interpolation.
    """
    series = _read_wide(path) if wide else _read_long(path)
    all_times = sorted({t for rows in series.values() for t in rows})
    t0, t1 = all_times[0], all_times[-1]
    times = list(range(t0, t1 + 1))
    for eid in series:
        _fill_gaps(eid, series[eid], times, interpolate_max_gap)
    ids = sorted(series)
    m = len(next(iter(series[ids[0]].values())))
    values = np.empty((len(ids), m, len(times)))
    for i, eid in enumerate(ids):
        rows = series[eid]
        for k, t in enumerate(times):
            vals = rows[t]
            if len(vals) != m:
                raise IngestError(f"entity {eid} at time {t} has {len(vals)} dims, expected {m}")
            values[i, :, k] = vals
    return Dataset(tuple(ids), values)


def write_dataset_csv(dataset: Dataset, path: str) -> None:
    """Write the canonical long CSV; floats via repr for exact round trips."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dims = [f"dim_{k}" for k in range(1, dataset.n_dims + 1)]
        fh.write(",".join(["entity_id", "time"] + dims) + "\n")
        for i, eid in enumerate(dataset.entity_ids):
            for t in range(dataset.n_times):
                cells = [eid, str(t)] + [
                    repr(float(v)) for v in dataset.values[i, :, t]
                ]
                fh.write(",".join(cells) + "\n")


def write_truth_json(trial: Trial, path: str) -> None:
    """Ground-truth sidecar for a simulated trial."""
    doc = {
        "format_version": _TRUTH_FORMAT,
        "model": trial.config.model,
        "seed": trial.config.seed,
        "entity_ids": list(trial.dataset.entity_ids),
        "hierarchy": list(trial.hierarchy) if trial.hierarchy else None,
        "events": [
            {
                "pre_start": ev.pre_start,
                "coord_start": ev.coord_start,
                "post_start": ev.post_start,
                "end": ev.end,
                "leader": ev.leader,
            }
            for ev in trial.truth
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_truth_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != _TRUTH_FORMAT:
        raise IngestError(f"unsupported truth format {doc.get('format_version')!r}")
    return doc
