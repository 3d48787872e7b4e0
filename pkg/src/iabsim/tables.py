"""CSV and JSON artifacts written by the command-line tools.

Floats are printed with 17 significant digits so a re-parsed table holds the
exact same doubles. Precoder dumps store complex matrices as ``[re, im]`` pairs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from .beamforming import HybridPrecoder

PathLike = Union[str, Path]


def format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def write_csv(path: PathLike, rows: Iterable[dict], columns: Optional[Sequence[str]] = None) -> Path:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_cell(r.get(c)) for c in columns])
    return path


def _parse_cell(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path: PathLike) -> List[dict]:
    """Rows as dicts with ints and floats restored where the text parses."""
    with Path(path).open(newline="") as fh:
        return [{k: _parse_cell(v) for k, v in r.items()} for r in csv.DictReader(fh)]


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def write_json(path: PathLike, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def complex_to_pairs(M: np.ndarray) -> list:
    M = np.asarray(M)
    return np.stack([M.real, M.imag], axis=-1).tolist()


def pairs_to_complex(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def precoder_to_dict(hp: HybridPrecoder) -> dict:
    return {
        "F_RF": complex_to_pairs(hp.F_RF),
        "F_BB": complex_to_pairs(hp.F_BB),
        "residual": hp.residual,
        "iterations": hp.iterations_used,
        "converged": bool(hp.converged),
        "init": hp.init,
        "residual_trace": [float(x) for x in hp.residual_trace],
    }
