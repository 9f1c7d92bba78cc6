"""Deterministic CSV/JSON emission.

All numeric output is 17-significant-digit decimal so 64-bit values survive
a round-trip; JSON keys are sorted and no timestamps are written, making
identical configurations byte-reproducible.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .energy import hamiltonian_array

__all__ = [
    "fmt",
    "write_json",
    "write_orbit_csv",
    "orbit_to_json",
    "write_sweep_csv",
    "write_profile_csv",
]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(f"{float(obj):.17g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonify(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


ORBIT_COLUMNS = ("t", "v", "v1", "v2", "v3", "v4", "v5", "H")


def write_orbit_csv(path, params, spec, orbit):
    H = hamiltonian_array(params, spec, orbit.ys) if spec.m == 3 else None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ORBIT_COLUMNS if H is not None else ORBIT_COLUMNS[:-1])
        for i, (t, y) in enumerate(zip(orbit.ts, orbit.ys)):
            row = [fmt(t)] + [fmt(v) for v in y]
            if H is not None:
                row.append(fmt(H[i]))
            w.writerow(row)


def orbit_to_json(params, spec, orbit) -> dict:
    payload = {
        "status": orbit.status,
        "status_t": float(orbit.status_t),
        "t": [float(t) for t in orbit.ts],
        "y": [[float(v) for v in row] for row in orbit.ys],
        "events": [
            {"kind": e.kind, "t": float(e.t), "y": [float(v) for v in e.state.y]}
            for e in orbit.events
        ],
    }
    if spec.m == 3:
        payload["H"] = [float(h) for h in hamiltonian_array(params, spec, orbit.ys)]
    return payload


SWEEP_COLUMNS = ("a0", "a2", "a4", "period", "max", "H", "newton_residual")


def write_sweep_csv(path, rows):
    """rows: iterables matching SWEEP_COLUMNS (None entries skipped)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            if row is None:
                continue
            w.writerow([fmt(x) for x in row])


PROFILE_COLUMNS = ("r", "u", "du_dr", "neg_lap_u", "bilap_u", "residual")


def write_profile_csv(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(PROFILE_COLUMNS)
        for row in rows:
            w.writerow([fmt(x) for x in row])
