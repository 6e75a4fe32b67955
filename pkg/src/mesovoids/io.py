"""File formats: cloud, background and coefficient JSON; field CSV and legacy VTK.

Floats are written with ``repr``, the shortest decimal string that reads
back to the same double, so every save/load cycle is exact and output bytes
depend only on the values.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cloud import DEFAULT_GATE_C, Ball, Cloud, validate_cloud
from .elastic import LameParams
from .errors import GateError, GeometryError, InputError
from .solver import BackgroundField, PointForcePair
from .sphere import Void

CSV_HEADER = "x,y,z,ux,uy,uz,status"


def _dump(obj, path) -> None:
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def _load(path, what: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path} is not valid JSON: {exc}") from exc


def _vec3(value, where: str) -> list[float]:
    try:
        v = [float(c) for c in value]
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: expected three numbers") from exc
    if len(v) != 3 or not all(np.isfinite(v)):
        raise InputError(f"{where}: expected three finite numbers")
    return v


def _number(obj: dict, key: str, where: str) -> float:
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    try:
        return float(obj[key])
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}.{key}: expected a number") from exc


# -- cloud ----------------------------------------------------------------------


def cloud_to_dict(cloud: Cloud) -> dict:
    return {
        "lame": {"lambda": cloud.params.lam, "mu": cloud.params.mu},
        "d": cloud.d,
        "region": {"center": list(cloud.region.center), "radius": cloud.region.radius},
        "voids": [{"center": list(v.center), "radius": v.radius} for v in cloud.voids],
    }


def cloud_from_dict(data, gate_c: float = DEFAULT_GATE_C, validate: bool = True) -> Cloud:
    """Build a cloud and (by default) enforce its geometric invariants.

    Raises:
        InputError: malformed content, or a violated separation or clearance.
        GateError: a void radius violates ``eps < gate_c * d``.
    """
    if not isinstance(data, dict):
        raise InputError("cloud: expected a JSON object")
    for key in ("lame", "d", "region", "voids"):
        if key not in data:
            raise InputError(f"cloud: missing field {key!r}")
    params = LameParams(_number(data["lame"], "lambda", "lame"), _number(data["lame"], "mu", "lame"))
    reg = data["region"]
    if not isinstance(reg, dict):
        raise InputError("cloud.region: expected an object")
    region = Ball(_vec3(reg.get("center"), "region.center"), _number(reg, "radius", "region"))
    if not isinstance(data["voids"], list):
        raise InputError("cloud.voids: expected a list")
    voids = []
    for k, v in enumerate(data["voids"]):
        where = f"voids[{k}]"
        if not isinstance(v, dict):
            raise InputError(f"{where}: expected an object")
        voids.append(Void(_vec3(v.get("center"), f"{where}.center"), _number(v, "radius", where)))
    d = data["d"]
    if isinstance(d, bool) or not isinstance(d, (int, float)):
        raise InputError("cloud.d: expected a number")
    cloud = Cloud(tuple(voids), float(d), region, params)
    if validate:
        report = validate_cloud(cloud, gate_c)
        if not report.checks["separation"]:
            raise GeometryError(
                f"separation invariant violated: min centre distance {report.min_separation!r} < 2d = {2 * cloud.d!r}"
            )
        if not report.checks["clearance"]:
            raise GeometryError(
                f"clearance invariant violated: min distance to region boundary {report.min_clearance!r} < 2d"
            )
        if not report.checks["gate"]:
            raise GateError(f"gate invariant violated: max eps/d = {report.max_eps_ratio!r} >= {gate_c!r}")
    return cloud


def save_cloud(cloud: Cloud, path) -> None:
    _dump(cloud_to_dict(cloud), path)


def load_cloud(path, gate_c: float = DEFAULT_GATE_C, validate: bool = True) -> Cloud:
    return cloud_from_dict(_load(path, "cloud"), gate_c, validate)


# -- background -----------------------------------------------------------------


def background_to_dict(bg: BackgroundField) -> dict:
    return {
        "pairs": [
            {"y0": list(p.y0), "axis": list(p.axis), "gap": p.gap, "magnitude": p.magnitude}
            for p in bg.pairs
        ]
    }


def background_from_dict(data, params: LameParams) -> BackgroundField:
    """Parse force pairs; axes are normalized.  Source clearance is checked at solve time."""
    if not isinstance(data, dict) or not isinstance(data.get("pairs"), list):
        raise InputError("background: expected an object with a 'pairs' list")
    pairs = []
    for k, p in enumerate(data["pairs"]):
        where = f"pairs[{k}]"
        if not isinstance(p, dict):
            raise InputError(f"{where}: expected an object")
        pairs.append(
            PointForcePair(
                _vec3(p.get("y0"), f"{where}.y0"),
                _vec3(p.get("axis"), f"{where}.axis"),
                _number(p, "gap", where),
                _number(p, "magnitude", where),
            )
        )
    return BackgroundField(tuple(pairs), params)


def save_background(bg: BackgroundField, path) -> None:
    _dump(background_to_dict(bg), path)


def load_background(path, params: LameParams) -> BackgroundField:
    return background_from_dict(_load(path, "background"), params)


# -- coefficients -------------------------------------------------------------------


def save_coefficients(coefficients, path, method: str | None = None) -> None:
    c = np.asarray(coefficients, dtype=float).reshape(-1, 6)
    data = {"coefficients": c.tolist()}
    if method is not None:
        data["method"] = method
    _dump(data, path)


def load_coefficients(path) -> np.ndarray:
    data = _load(path, "coefficients")
    if not isinstance(data, dict) or "coefficients" not in data:
        raise InputError("coefficients: missing field 'coefficients'")
    try:
        c = np.array(data["coefficients"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError("coefficients: expected a list of 6-number rows") from exc
    if c.size == 0:
        return np.zeros(0)
    if c.ndim != 2 or c.shape[1] != 6 or not np.all(np.isfinite(c)):
        raise InputError("coefficients: expected a list of 6-number rows")
    return c.reshape(-1)


def save_json(obj, path) -> None:
    """Write a report; non-finite floats are stored as null."""
    _dump(_finite(obj), path)


def _finite(obj):
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj


# -- grids --------------------------------------------------------------------------


def grid_from_dict(data):
    """``{"points": [[x, y, z], ...]}`` or ``{"origin": [...], "spacing": s | [...], "counts": n | [...]}``."""
    from .field import EvaluationGrid

    if not isinstance(data, dict):
        raise InputError("grid: expected a JSON object")
    if "points" in data:
        pts = data["points"]
        if not isinstance(pts, list):
            raise InputError("grid.points: expected a list")
        return EvaluationGrid(np.array([_vec3(p, f"points[{k}]") for k, p in enumerate(pts)]).reshape(-1, 3))
    for key in ("origin", "spacing", "counts"):
        if key not in data:
            raise InputError(f"grid: missing field {key!r} (or give 'points')")
    origin = _vec3(data["origin"], "grid.origin")
    try:
        spacing = np.broadcast_to(np.asarray(data["spacing"], dtype=float), (3,))
        counts_f = np.broadcast_to(np.asarray(data["counts"], dtype=float), (3,))
    except (TypeError, ValueError) as exc:
        raise InputError("grid: spacing and counts must be a number or three numbers") from exc
    if np.any(counts_f != np.round(counts_f)):
        raise InputError("grid.counts: expected integers")
    return EvaluationGrid.lattice(origin, spacing, counts_f.astype(int))


def load_grid(path):
    return grid_from_dict(_load(path, "grid"))


# -- field output -------------------------------------------------------------------


def format_csv(points: np.ndarray, u: np.ndarray, codes: np.ndarray) -> str:
    """CSV rows in grid order; masked points have empty displacement columns."""
    lines = [CSV_HEADER]
    for pt, uu, code in zip(points.tolist(), u.tolist(), codes.tolist()):
        xyz = ",".join(repr(v) for v in pt)
        if code == 0:
            vals = ",".join(repr(v) for v in uu)
        else:
            vals = ",,"
        lines.append(f"{xyz},{vals},{int(code)}")
    return "\n".join(lines) + "\n"


def format_vtk(points: np.ndarray, u: np.ndarray, codes: np.ndarray) -> str:
    """Legacy ASCII VTK POLYDATA with a ``displacement`` vector array.

    Masked points carry a zero vector; their status is kept in the
    ``status`` scalar array.
    """
    n = len(points)
    disp = np.where(codes[:, None] == 0, u, 0.0)
    out = [
        "# vtk DataFile Version 3.0",
        "meso-scale displacement field",
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {n} double",
    ]
    out += [" ".join(repr(v) for v in row) for row in points.tolist()]
    out.append(f"VERTICES {n} {2 * n}")
    out += [f"1 {k}" for k in range(n)]
    out.append(f"POINT_DATA {n}")
    out.append("VECTORS displacement double")
    out += [" ".join(repr(v) for v in row) for row in disp.tolist()]
    out.append("SCALARS status int 1")
    out.append("LOOKUP_TABLE default")
    out += [str(int(c)) for c in codes.tolist()]
    return "\n".join(out) + "\n"


def write_field(path, points, u, codes, fmt: str = "csv") -> None:
    if fmt == "csv":
        text = format_csv(points, u, codes)
    elif fmt == "vtk":
        text = format_vtk(points, u, codes)
    else:
        raise InputError(f"unknown output format {fmt!r}; expected 'csv' or 'vtk'")
    Path(path).write_text(text, encoding="utf-8")


def read_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`format_csv`; masked displacements come back as NaN."""
    rows = Path(path).read_text(encoding="utf-8").splitlines()
    if not rows or rows[0] != CSV_HEADER:
        raise InputError(f"{path}: missing header {CSV_HEADER!r}")
    pts, us, codes = [], [], []
    for line in rows[1:]:
        f = line.split(",")
        pts.append([float(v) for v in f[:3]])
        us.append([float(v) if v else np.nan for v in f[3:6]])
        codes.append(int(f[6]))
    return np.array(pts).reshape(-1, 3), np.array(us).reshape(-1, 3), np.array(codes, dtype=int)
