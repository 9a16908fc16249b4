"""Plain-text file formats: footprints, BS lists, histograms, curves, fits.

All writes are atomic (temp file + rename) and all floats round-trip exactly
through repr.
"""
from __future__ import annotations

import csv
import io
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .blockage import LosHistogram, MultiBallParams
from .channel import MultiLobeParams
from .errors import DataError
from .geom import Point2D, Polygon
from .intensity import FitReport, IntensityCurve
from .sim import CoverageCurve


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text to path via a temp file in the same directory + rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require_file(path: str | Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing input file: {path}")
    return path


# ---------------------------------------------------------------------------
# Footprint files: one polygon per line as "x1 y1 x2 y2 ...", '#' comments
# ---------------------------------------------------------------------------


def write_footprints(polygons, path: str | Path, header: str | None = None) -> None:
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    for poly in polygons:
        lines.append(" ".join(f"{p.x!r} {p.y!r}" for p in poly.vertices))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_footprints(path: str | Path) -> list[Polygon]:
    path = _require_file(path)
    polygons = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) % 2 != 0 or len(parts) < 6:
            raise DataError(f"{path}:{lineno}: expected >= 3 'x y' vertex pairs")
        try:
            coords = [float(v) for v in parts]
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric coordinate") from exc
        points = [Point2D(coords[i], coords[i + 1]) for i in range(0, len(coords), 2)]
        try:
            polygons.append(Polygon(points))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    return polygons


# ---------------------------------------------------------------------------
# BS files: CSV with header id,x,y
# ---------------------------------------------------------------------------


def write_bs_csv(xy: np.ndarray, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["id", "x", "y"])
    for i, (x, y) in enumerate(np.asarray(xy, dtype=float)):
        writer.writerow([i, repr(float(x)), repr(float(y))])
    atomic_write_text(path, buf.getvalue())


def read_bs_csv(path: str | Path) -> np.ndarray:
    """BS positions ordered by row; ids must be unique, coordinates finite."""
    path = _require_file(path)
    xy = []
    ids = set()
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["id", "x", "y"]:
            raise DataError(f"{path}: expected CSV header 'id,x,y'")
        for row in reader:
            try:
                bs_id = int(row["id"])
                x, y = float(row["x"]), float(row["y"])
            except (TypeError, ValueError) as exc:
                raise DataError(f"{path}: malformed row {row}") from exc
            if bs_id in ids:
                raise DataError(f"{path}: duplicate BS id {bs_id}")
            if not (np.isfinite(x) and np.isfinite(y)):
                raise DataError(f"{path}: non-finite coordinates for BS {bs_id}")
            ids.add(bs_id)
            xy.append((x, y))
    if not xy:
        raise DataError(f"{path}: no base stations")
    return np.array(xy, dtype=float)


# ---------------------------------------------------------------------------
# Histogram CSV: r_m,p_los,n_samples
# ---------------------------------------------------------------------------


def write_los_histogram(hist: LosHistogram, path: str | Path) -> None:
    lines = ["r_m,p_los,n_samples"]
    for r, p, n in zip(hist.r_grid, hist.p_los, hist.n_samples):
        lines.append(f"{float(r)!r},{float(p)!r},{int(n)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_los_histogram(path: str | Path) -> LosHistogram:
    path = _require_file(path)
    rows = path.read_text().splitlines()
    if not rows or rows[0] != "r_m,p_los,n_samples":
        raise DataError(f"{path}: expected header 'r_m,p_los,n_samples'")
    r, p, n = [], [], []
    for lineno, line in enumerate(rows[1:], start=2):
        if not line.strip():
            continue
        try:
            rv, pv, nv = line.split(",")
            r.append(float(rv))
            p.append(float(pv))
            n.append(int(nv))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: malformed histogram row") from exc
    r = np.asarray(r)
    if len(r) == 0:
        raise DataError(f"{path}: empty histogram")
    delta = r[0]
    if np.any(np.abs(np.diff(r) - delta) > 1e-9 * delta):
        raise DataError(f"{path}: bin centers must be uniformly spaced from delta_r")
    return LosHistogram(delta_r=float(delta), p_los=np.asarray(p), n_samples=np.asarray(n))


# ---------------------------------------------------------------------------
# Intensity and coverage CSV
# ---------------------------------------------------------------------------


def write_intensity_csv(curve: IntensityCurve, path: str | Path) -> None:
    lines = ["x,lambda_los,lambda_nlos,lambda_total"]
    for x, lo, nl in zip(curve.x_grid, curve.lambda_los, curve.lambda_nlos):
        lines.append(f"{float(x)!r},{float(lo)!r},{float(nl)!r},{float(lo + nl)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_coverage_csv(curve: CoverageCurve, path: str | Path) -> None:
    lines = ["threshold_db,coverage,ci_halfwidth"]
    for t, c, w in zip(curve.thresholds_db, curve.coverage, curve.ci_halfwidth):
        lines.append(f"{float(t)!r},{float(c)!r},{float(w)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_coverage_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    path = _require_file(path)
    rows = path.read_text().splitlines()
    if not rows or rows[0] != "threshold_db,coverage,ci_halfwidth":
        raise DataError(f"{path}: expected header 'threshold_db,coverage,ci_halfwidth'")
    data = np.array([[float(v) for v in line.split(",")] for line in rows[1:] if line.strip()])
    return data[:, 0], data[:, 1], data[:, 2]


# ---------------------------------------------------------------------------
# Fitted-parameter files: plain "key = value" lines
# ---------------------------------------------------------------------------


def write_fit_params(report: FitReport, path: str | Path) -> None:
    params = report.params
    lines = [f"objective = {report.objective!r}", f"restarts = {report.restarts}"]
    if isinstance(params, MultiBallParams):
        for i, d in enumerate(params.radii, start=1):
            lines.append(f"d_{i} = {float(d)!r}")
        for i, q in enumerate(params.q_los, start=1):
            lines.append(f"q_los_{i} = {float(q)!r}")
    elif isinstance(params, MultiLobeParams):
        for i, g in enumerate(params.gains, start=1):
            lines.append(f"g_{i} = {float(g)!r}")
        for i, b in enumerate(params.breakpoints, start=1):
            lines.append(f"theta_deg_{i} = {float(np.degrees(b))!r}")
    else:
        raise TypeError(f"unknown fit parameter type {type(params)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_kv(path: Path) -> dict[str, float]:
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            values[key] = float(value)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric value for {key}") from exc
    return values


def _indexed_series(values: dict[str, float], prefix: str, path: Path) -> list[float]:
    """Values of consecutive keys prefix1, prefix2, ..."""
    pattern = re.compile(rf"^{re.escape(prefix)}(\d+)$")
    indices = sorted(int(m.group(1)) for k in values if (m := pattern.match(k)))
    if indices != list(range(1, len(indices) + 1)):
        raise DataError(f"{path}: keys {prefix}1..{prefix}N must be consecutive")
    return [values[f"{prefix}{i}"] for i in indices]


def read_multiball_params(path: str | Path) -> MultiBallParams:
    path = _require_file(path)
    values = _read_kv(path)
    radii = _indexed_series(values, "d_", path)
    q = _indexed_series(values, "q_los_", path)
    if not q:
        raise DataError(f"{path}: no band parameters found")
    return MultiBallParams(tuple(radii), tuple(q))


def read_multilobe_params(path: str | Path) -> MultiLobeParams:
    path = _require_file(path)
    values = _read_kv(path)
    gains = _indexed_series(values, "g_", path)
    breaks = _indexed_series(values, "theta_deg_", path)
    if not gains:
        raise DataError(f"{path}: no sector gains found")
    return MultiLobeParams.from_degrees(gains, breaks)
