"""Interchange formats shared by the CLI, the HTTP service and the stores.

All JSON documents use lower_snake_case field names; 3x3 matrices are
serialized as row-major lists of 9 numbers. Python's default float
serialization (shortest round-trip repr, 17 significant digits) preserves
every value exactly.

CSV point files use a header row, comma separators, '.' decimal point and
UTF-8. The id column may be named ``id`` or ``point_id`` (the session
export uses the latter); extra columns are ignored on read.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .geometry import (
    IntersectionResult,
    Ray,
    SystemMode,
    ellipsoid_from_covariance,
)
from .simulate import AccuracyReport


def matrix_to_row_major(matrix: np.ndarray) -> list[float]:
    return [float(x) for x in np.asarray(matrix, dtype=np.float64).reshape(9)]


def matrix_from_row_major(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64).reshape(3, 3)


def vec_to_list(v) -> list[float]:
    return [float(x) for x in np.asarray(v, dtype=np.float64).ravel()]


# -- rays files ---------------------------------------------------------

def rays_to_dict(rays: list[Ray], mode: SystemMode) -> dict:
    return {
        "mode": SystemMode(mode).value,
        "rays": [
            {"origin": vec_to_list(r.origin), "direction": vec_to_list(r.direction)}
            for r in rays
        ],
    }


def rays_from_dict(doc: dict) -> tuple[list[Ray], SystemMode]:
    """Parse a rays document {mode, rays: [{origin, direction}]}.

    Directions are normalized by Ray construction. Raises ValueError on a
    malformed document (including fewer than two rays).
    """
    try:
        mode = SystemMode(doc.get("mode", SystemMode.PROJECTION.value))
        entries = doc["rays"]
        rays = [Ray(origin=e["origin"], direction=e["direction"]) for e in entries]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed rays document: {exc}") from exc
    if len(rays) < 2:
        raise ValueError(f"rays file must contain >= 2 rays, got {len(rays)}")
    return rays, mode


def load_rays_file(path) -> tuple[list[Ray], SystemMode]:
    with open(path, encoding="utf-8") as fh:
        return rays_from_dict(json.load(fh))


# -- intersection results -----------------------------------------------

def result_to_dict(result: IntersectionResult) -> dict:
    return {
        "point": vec_to_list(result.point),
        "residuals": vec_to_list(result.residuals),
        "sigma0": float(result.sigma0),
        "redundancy": int(result.redundancy),
        "covariance_row_major": matrix_to_row_major(result.covariance),
        "ray_count": int(result.ray_count),
        "mode": result.mode.value,
    }


def result_from_dict(doc: dict) -> IntersectionResult:
    return IntersectionResult(
        point=np.asarray(doc["point"], dtype=np.float64),
        residuals=np.asarray(doc["residuals"], dtype=np.float64),
        sigma0=float(doc["sigma0"]),
        redundancy=int(doc["redundancy"]),
        covariance=matrix_from_row_major(doc["covariance_row_major"]),
        ray_count=int(doc["ray_count"]),
        mode=SystemMode(doc["mode"]),
    )


def upper_triangle(covariance: np.ndarray) -> list[float]:
    """Covariance as its 6 upper-triangle values (xx, xy, xz, yy, yz, zz)."""
    q = np.asarray(covariance, dtype=np.float64)
    return [float(q[i, j]) for i in range(3) for j in range(i, 3)]


def result_summary(result: IntersectionResult, confidence_scale: float = 1.0) -> dict:
    """Flat result payload used by the HTTP API and the CLI JSON output."""
    ellipsoid = ellipsoid_from_covariance(
        result.point, result.covariance, confidence_scale
    )
    x, y, z = (float(c) for c in result.point)
    return {
        "x": x,
        "y": y,
        "z": z,
        "sigma0": float(result.sigma0),
        "redundancy": int(result.redundancy),
        "ray_count": int(result.ray_count),
        "mode": result.mode.value,
        "covariance": upper_triangle(result.covariance),
        "ellipsoid": {
            "semi_axes": vec_to_list(ellipsoid.semi_axes),
            "directions": [vec_to_list(d) for d in ellipsoid.axes_directions],
        },
    }


# -- accuracy reports ----------------------------------------------------

def report_to_dict(report: AccuracyReport) -> dict:
    return {
        "n": report.n,
        "rmse": report.rmse,
        "mean_error": report.mean_error,
        "std": report.std,
        "std_pop": report.std_pop,
        "std_defined": report.std_defined,
        "per_point_errors": [
            {"id": pid, "error": err} for pid, err in report.per_point_errors
        ],
    }


def report_from_dict(doc: dict) -> AccuracyReport:
    return AccuracyReport(
        per_point_errors=[(e["id"], float(e["error"])) for e in doc["per_point_errors"]],
        rmse=float(doc["rmse"]),
        mean_error=float(doc["mean_error"]),
        std=float(doc["std"]),
        std_pop=float(doc["std_pop"]),
        n=int(doc["n"]),
        std_defined=bool(doc["std_defined"]),
    )


# -- CSV point files -----------------------------------------------------

def read_points_csv(path) -> list[tuple[str, np.ndarray]]:
    """Read (id, xyz) rows from a CSV file with header id,x,y,z.

    Accepts ``point_id`` as the id column name and ignores any extra
    columns, so session exports are directly re-ingestable.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "id" in fields:
            id_column = "id"
        elif "point_id" in fields:
            id_column = "point_id"
        else:
            raise ValueError(f"{path}: no 'id' or 'point_id' column")
        for column in ("x", "y", "z"):
            if column not in fields:
                raise ValueError(f"{path}: missing '{column}' column")
        points = []
        for row in reader:
            coords = np.array(
                [float(row["x"]), float(row["y"]), float(row["z"])]
            )
            points.append((row[id_column], coords))
    return points


def write_points_csv(path, points: list[tuple[str, np.ndarray]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "z"])
        for pid, coords in points:
            writer.writerow([pid, repr(float(coords[0])), repr(float(coords[1])), repr(float(coords[2]))])


def export_csv(rows: list[dict]) -> str:
    """Render session export rows to CSV text.

    Columns: point_id,label,x,y,z,sigma0,n_rays,sxx,syy,szz. Only points
    with a computed result appear as rows.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(
        ["point_id", "label", "x", "y", "z", "sigma0", "n_rays", "sxx", "syy", "szz"]
    )
    for row in rows:
        writer.writerow(
            [
                row["point_id"],
                row["label"],
                repr(row["x"]),
                repr(row["y"]),
                repr(row["z"]),
                repr(row["sigma0"]),
                row["n_rays"],
                repr(row["sxx"]),
                repr(row["syy"]),
                repr(row["szz"]),
            ]
        )
    return buffer.getvalue()


def dump_json(document, path=None) -> str:
    """Serialize a JSON document deterministically (sorted keys).

    Writes to ``path`` when given; always returns the text.
    """
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
