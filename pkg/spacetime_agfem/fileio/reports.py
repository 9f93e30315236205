"""CSV reports, convergence slopes, MatrixMarket dumps and the resolved config."""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.io import mmwrite

from ..models import REPORT_COLUMNS, ReportRow

logger = logging.getLogger(__name__)

SLOPE_QUANTITIES = ("dg_err", "l2_err", "h1_err", "cond_M", "cond_A")
CONDITIONING_COLUMNS = ("slab", "t0", "t1", "dofs", "cond_M", "cond_A")


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_report_csv(rows: Iterable[ReportRow], path: str | Path) -> Path:
    """Write report rows with the fixed column order."""
    path = _prepare(path)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.to_dict().items()})
    return path


def read_report_csv(path: str | Path) -> list[ReportRow]:
    with Path(path).open(newline="") as handle:
        return [ReportRow.from_dict(record) for record in csv.DictReader(handle)]


def loglog_slope(h: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(h); NaN with fewer than two finite points."""
    h = np.asarray(h, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = np.isfinite(values) & (values > 0.0) & (h > 0.0)
    if mask.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(h[mask]), np.log(values[mask]), 1)
    return float(slope)


def is_monotone_decreasing(values: Sequence[float]) -> bool:
    finite = [v for v in values if math.isfinite(v)]
    return all(b < a for a, b in zip(finite, finite[1:]))


def convergence_slopes(rows: Sequence[ReportRow]) -> list[dict]:
    """Slopes per (p, q) pair for every error and condition number column.

    Rows are sorted by decreasing h inside each pair. Non-monotone error
    decay is logged, not fatal.
    """
    groups: dict[tuple[int, int], list[ReportRow]] = {}
    for row in rows:
        groups.setdefault((row.p, row.q), []).append(row)
    result = []
    for (p, q), group in sorted(groups.items()):
        group = sorted(group, key=lambda r: -r.h)
        h = [r.h for r in group]
        entry = {"p": p, "q": q, "levels": len(group)}
        for name in SLOPE_QUANTITIES:
            series = [getattr(r, name) for r in group]
            entry[name] = loglog_slope(h, series)
            if name.endswith("_err") and not is_monotone_decreasing(series):
                logger.warning(f"Non-monotone decay of {name} for p={p}, q={q}: {series}")
        result.append(entry)
    return result


def write_slopes_csv(slopes: Sequence[dict], path: str | Path) -> Path:
    path = _prepare(path)
    fields = ("p", "q", "levels", *SLOPE_QUANTITIES)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for entry in slopes:
            writer.writerow({k: repr(entry[k]) if isinstance(entry[k], float) else entry[k] for k in fields})
    return path


def write_conditioning_csv(records: Iterable[dict], path: str | Path) -> Path:
    """Per-slab condition numbers."""
    path = _prepare(path)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CONDITIONING_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({k: repr(record[k]) if isinstance(record[k], float) else record[k] for k in CONDITIONING_COLUMNS})
    return path


def dump_system(matrix, rhs: np.ndarray, directory: str | Path, stem: str = "slab1") -> tuple[Path, Path]:
    """Write a matrix and vector in MatrixMarket coordinate format."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    matrix_path = directory / f"{stem}_matrix.mtx"
    rhs_path = directory / f"{stem}_rhs.mtx"
    mmwrite(str(matrix_path), matrix.tocoo())
    mmwrite(str(rhs_path), sparse.coo_matrix(np.asarray(rhs, dtype=float).reshape(-1, 1)))
    return matrix_path, rhs_path


def write_resolved_config(config: dict, directory: str | Path) -> Path:
    """Write ``resolved_config.json`` next to the outputs."""
    path = _prepare(Path(directory) / "resolved_config.json")
    path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    return path
