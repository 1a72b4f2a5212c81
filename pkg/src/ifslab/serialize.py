"""File formats: CSV clouds/matrices/vectors, attractor sidecars, sweep
reports, and PGM rasters.

All numeric output is written with 17 significant digits so files
round-trip exactly and diffs are byte-stable.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .geometry import PointCloud
from .ifs import AttractorApprox
from .sw_family import SweepReport


def fmt(x: float) -> str:
    """Round-trip decimal rendering (17 significant digits)."""
    return format(float(x), ".17g")


def _parse_rows(text: str, what: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ValueError(f"{what}: ragged row at line {lineno} "
                             f"({len(fields)} fields, expected {width})")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise ValueError(f"{what}: bad number at line {lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{what}: no data rows")
    data = np.array(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{what}: non-finite values")
    return data


def read_cloud(path) -> PointCloud:
    """CSV cloud: one point per line, comma-separated, no header."""
    return PointCloud(_parse_rows(Path(path).read_text(), f"cloud {path}"))


def write_cloud(path, c: PointCloud):
    lines = [",".join(fmt(v) for v in row) for row in c.points]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    """CSV matrix: one row per line."""
    return _parse_rows(Path(path).read_text(), f"matrix {path}")


def write_matrix(path, m: np.ndarray):
    lines = [",".join(fmt(v) for v in row) for row in np.atleast_2d(m)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_vector(path) -> np.ndarray:
    """CSV vector: a single comma-separated line (or a single column)."""
    data = _parse_rows(Path(path).read_text(), f"vector {path}")
    if 1 not in data.shape:
        raise ValueError(f"vector {path}: expected a single row or column, got {data.shape}")
    return data.reshape(-1)


def write_vector(path, v: np.ndarray):
    Path(path).write_text(",".join(fmt(x) for x in np.asarray(v).reshape(-1)) + "\n")


def write_attractor(csv_path, meta_path, approx: AttractorApprox):
    """Cloud CSV plus the sidecar certificate line."""
    write_cloud(csv_path, approx.cloud)
    Path(meta_path).write_text(
        f"# radius={fmt(approx.radius)} iterations={approx.iterations}\n"
    )


_META_RE = re.compile(r"#\s*radius=(?P<radius>\S+)\s+iterations=(?P<iterations>\d+)")


def read_attractor(csv_path, meta_path) -> AttractorApprox:
    c = read_cloud(csv_path)
    match = _META_RE.match(Path(meta_path).read_text().strip())
    if not match:
        raise ValueError(f"bad attractor sidecar {meta_path}")
    return AttractorApprox(cloud=c, radius=float(match["radius"]),
                           iterations=int(match["iterations"]))


_VERDICT_VALUE = {
    "disconnected": 0,
    "undecided": 128,
    "connected": 255,
    "error": 64,
}


def sweep_csv_lines(report: SweepReport) -> list[str]:
    """Sweep report rows: indices, parameters, w, verdict, value, distance."""
    nd = report.grid.ndim
    dim = report.grid.base.shape[0]
    idx_cols = ["i"] if nd == 1 else ["i", "j"]
    t_cols = ["t1"] if nd == 1 else ["t1", "t2"]
    header = idx_cols + t_cols + [f"w{k}" for k in range(dim)] + \
        ["verdict", "gap_or_mingap", "exceptional_distance", "error"]
    lines = [",".join(header)]
    for cell in report.cells:
        fields = [str(i) for i in cell.index]
        fields += [fmt(t) for t in cell.params]
        fields += [fmt(x) for x in cell.w]
        if cell.verdict is None:
            fields += ["ERROR", ""]
        else:
            v = cell.verdict
            value = v.gap if v.kind == "disconnected" else v.min_gap
            fields += [v.kind.upper(), "" if value is None else fmt(value)]
        fields.append("" if cell.exceptional_distance is None else fmt(cell.exceptional_distance))
        fields.append(cell.error.replace(",", ";") if cell.error else "")
        lines.append(",".join(fields))
    return lines


def write_sweep_csv(path, report: SweepReport):
    Path(path).write_text("\n".join(sweep_csv_lines(report)) + "\n")


def write_sweep_pgm(path, report: SweepReport):
    """Verdict-coded grayscale raster for 2D sweeps (plain PGM).

    Pixel (row j, column i) is grid cell (i, j); disconnected cells are
    black, undecided mid-gray, connected white, failed cells dark gray.
    """
    if report.grid.ndim != 2:
        raise ValueError("PGM rasters are only defined for 2D sweeps")
    ni, nj = report.grid.steps
    raster = np.full((nj, ni), _VERDICT_VALUE["error"], dtype=int)
    for cell in report.cells:
        i, j = cell.index
        kind = cell.verdict.kind if cell.verdict is not None else "error"
        raster[j, i] = _VERDICT_VALUE[kind]
    lines = [
        "P2",
        f"# verdict raster, exceptional union truncated at n_max={report.n_max}",
        f"{ni} {nj}",
        "255",
    ]
    lines += [" ".join(str(v) for v in row) for row in raster]
    Path(path).write_text("\n".join(lines) + "\n")


def sweep_meta_lines(report: SweepReport, distance_threshold: float = 0.1) -> list[str]:
    """Human-readable sweep summary, including the truncation flag."""
    grid = report.grid
    lines = [
        f"grid: {'x'.join(str(s) for s in grid.steps)} cells, {grid.ndim}D slice",
        f"target_r: {fmt(report.target_r)}",
        f"n_max: {report.n_max} (exceptional union truncated at this depth)",
    ]
    for k in range(grid.ndim):
        lo, hi = grid.ranges[k]
        axis = ",".join(fmt(a) for a in grid.axes[k])
        lines.append(f"axis{k + 1}: [{fmt(lo)}, {fmt(hi)}] steps={grid.steps[k]} dir=({axis})")
    lines.append(f"base: ({','.join(fmt(b) for b in grid.base)})")
    lines.append("verdict counts: " + ", ".join(
        f"{kind}={count}" for kind, count in sorted(report.verdict_counts().items())
    ))
    lines.append(f"cross-tab at exceptional distance > {fmt(distance_threshold)}:")
    tab = report.cross_tab(distance_threshold)
    for (kind, where), count in sorted(tab.items()):
        lines.append(f"  {kind:>12s} {where:>4s}: {count}")
    return lines


def write_sweep_meta(path, report: SweepReport, distance_threshold: float = 0.1):
    Path(path).write_text("\n".join(sweep_meta_lines(report, distance_threshold)) + "\n")
