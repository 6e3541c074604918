"""Durable measurement sessions and project manifests.

A measurement session is an ordered list of named points; each point
accumulates rays (with optional pixel-pick provenance) and carries the
intersection result recomputed from those rays. Results are stored
denormalized next to the rays for fast listing, and re-derived on load as
a corruption check: a stored result is always a pure function of the
stored rays.

Storage is a plain directory of JSON documents::

    <data_dir>/projects/<project_id>/manifest.json
    <data_dir>/projects/<project_id>/images/...
    <data_dir>/sessions/<session_id>.json

Sessions are single-writer; the owning service serializes mutations.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import formats
from .camera import Intrinsics, PixelPick, Pose
from .geometry import (
    DegenerateGeometryError,
    IntersectionResult,
    Ray,
    SystemMode,
    intersect_rays,
)

# Stored results must re-derive from stored rays to within this tolerance.
REDERIVE_TOLERANCE = 1e-9


class UnknownSessionError(Exception):
    """No stored session with the requested id."""


class UnknownPointError(Exception):
    """Session has no point with the requested id."""


class UnknownProjectError(Exception):
    """No stored project with the requested id."""


class StorageUnavailableError(Exception):
    """The storage directory cannot be read or written."""


class CorruptSessionError(Exception):
    """A stored session fails parsing or re-derivation validation."""


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class RayObservation:
    """One accumulated ray plus the pixel pick it came from, if any."""

    ray: Ray
    pick: PixelPick | None = None


@dataclass
class MeasuredPoint:
    """A named point, its rays, and the current intersection result.

    ``result`` is present exactly when the point has >= 2 rays and the
    geometry is non-degenerate; ``degenerate`` records the latter case.
    The intersection mode is fixed at point creation.
    """

    id: str
    label: str
    mode: SystemMode = SystemMode.PROJECTION
    rays: list[RayObservation] = field(default_factory=list)
    result: IntersectionResult | None = None
    degenerate: bool = False


@dataclass
class MeasurementSession:
    id: str
    project_id: str
    points: list[MeasuredPoint] = field(default_factory=list)
    created_at: str = field(default_factory=_utc_now)
    updated_at: str = field(default_factory=_utc_now)


def create_session(project_id: str, session_id: str | None = None) -> MeasurementSession:
    return MeasurementSession(
        id=session_id or uuid.uuid4().hex, project_id=project_id
    )


def get_point(session: MeasurementSession, point_id: str) -> MeasuredPoint:
    for point in session.points:
        if point.id == point_id:
            return point
    raise UnknownPointError(f"no point {point_id!r} in session {session.id}")


def add_point(
    session: MeasurementSession,
    label: str,
    mode: SystemMode = SystemMode.PROJECTION,
    point_id: str | None = None,
) -> MeasuredPoint:
    """Create a new empty point; point ids are unique within a session."""
    point_id = point_id or uuid.uuid4().hex
    if any(p.id == point_id for p in session.points):
        raise ValueError(f"point id {point_id!r} already exists")
    point = MeasuredPoint(id=point_id, label=label, mode=SystemMode(mode))
    session.points.append(point)
    session.updated_at = _utc_now()
    return point


def _recompute(point: MeasuredPoint) -> None:
    # Result is a pure function of the stored rays and the point's mode.
    if len(point.rays) < 2:
        point.result = None
        point.degenerate = False
        return
    try:
        point.result = intersect_rays([obs.ray for obs in point.rays], point.mode)
        point.degenerate = False
    except DegenerateGeometryError:
        point.result = None
        point.degenerate = True


def add_ray(
    session: MeasurementSession,
    point_id: str,
    ray: Ray,
    pick: PixelPick | None = None,
) -> MeasuredPoint:
    """Append a ray to a point and recompute its result.

    With >= 2 rays the result is recomputed; degenerate geometry leaves
    the result absent and sets the point's ``degenerate`` flag instead of
    raising.
    """
    point = get_point(session, point_id)
    point.rays.append(RayObservation(ray=ray, pick=pick))
    _recompute(point)
    session.updated_at = _utc_now()
    return point


def remove_ray(session: MeasurementSession, point_id: str, index: int) -> MeasuredPoint:
    """Remove the ray at ``index`` and recompute (or clear) the result.

    Raises:
        UnknownPointError: If the point does not exist.
        IndexError: If ``index`` is out of range.
    """
    point = get_point(session, point_id)
    if not (0 <= index < len(point.rays)):
        raise IndexError(
            f"ray index {index} out of range for point {point_id!r} "
            f"with {len(point.rays)} rays"
        )
    del point.rays[index]
    _recompute(point)
    session.updated_at = _utc_now()
    return point


# -- serialization -------------------------------------------------------

def _observation_to_dict(obs: RayObservation) -> dict:
    doc = {
        "origin": formats.vec_to_list(obs.ray.origin),
        "direction": formats.vec_to_list(obs.ray.direction),
        "pick": None,
    }
    if obs.pick is not None:
        doc["pick"] = {
            "image_id": obs.pick.image_id,
            "u": float(obs.pick.u),
            "v": float(obs.pick.v),
        }
    return doc


def _observation_from_dict(doc: dict) -> RayObservation:
    pick = None
    if doc.get("pick") is not None:
        p = doc["pick"]
        pick = PixelPick(u=float(p["u"]), v=float(p["v"]), image_id=p["image_id"])
    return RayObservation(
        ray=Ray(origin=doc["origin"], direction=doc["direction"]), pick=pick
    )


def point_to_dict(point: MeasuredPoint) -> dict:
    return {
        "id": point.id,
        "label": point.label,
        "mode": point.mode.value,
        "degenerate": point.degenerate,
        "rays": [_observation_to_dict(obs) for obs in point.rays],
        "result": formats.result_to_dict(point.result) if point.result else None,
    }


def point_from_dict(doc: dict) -> MeasuredPoint:
    result = formats.result_from_dict(doc["result"]) if doc.get("result") else None
    return MeasuredPoint(
        id=doc["id"],
        label=doc["label"],
        mode=SystemMode(doc["mode"]),
        rays=[_observation_from_dict(r) for r in doc["rays"]],
        result=result,
        degenerate=bool(doc.get("degenerate", False)),
    )


def session_to_dict(session: MeasurementSession) -> dict:
    return {
        "id": session.id,
        "project_id": session.project_id,
        "created_at": session.created_at,
        "updated_at": session.updated_at,
        "points": [point_to_dict(p) for p in session.points],
    }


def session_from_dict(doc: dict) -> MeasurementSession:
    return MeasurementSession(
        id=doc["id"],
        project_id=doc["project_id"],
        points=[point_from_dict(p) for p in doc["points"]],
        created_at=doc["created_at"],
        updated_at=doc["updated_at"],
    )


def _validate_rederivation(session: MeasurementSession) -> None:
    """Check every stored result against a recomputation from its rays."""
    for point in session.points:
        expected_result: IntersectionResult | None
        if len(point.rays) < 2:
            expected_result = None
            expected_degenerate = False
        else:
            try:
                expected_result = intersect_rays(
                    [obs.ray for obs in point.rays], point.mode
                )
                expected_degenerate = False
            except DegenerateGeometryError:
                expected_result = None
                expected_degenerate = True
        stored = point.result
        if (stored is None) != (expected_result is None) or (
            point.degenerate != expected_degenerate
        ):
            raise CorruptSessionError(
                f"point {point.id!r}: stored result state disagrees with "
                "recomputation from stored rays"
            )
        if stored is None or expected_result is None:
            continue
        drift = max(
            float(np.max(np.abs(stored.point - expected_result.point))),
            abs(stored.sigma0 - expected_result.sigma0),
            float(np.max(np.abs(stored.covariance - expected_result.covariance))),
        )
        if drift > REDERIVE_TOLERANCE or stored.redundancy != expected_result.redundancy:
            raise CorruptSessionError(
                f"point {point.id!r}: stored result drifts {drift:.3e} from "
                f"recomputation (tolerance {REDERIVE_TOLERANCE:g})"
            )


class SessionStore:
    """JSON-file persistence for sessions under ``<root>/sessions``."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"

    def path_for(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def save(self, session: MeasurementSession) -> Path:
        try:
            self.sessions_dir.mkdir(parents=True, exist_ok=True)
            path = self.path_for(session.id)
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(
                json.dumps(session_to_dict(session), indent=2) + "\n",
                encoding="utf-8",
            )
            tmp.replace(path)
        except OSError as exc:
            raise StorageUnavailableError(f"cannot write {self.sessions_dir}: {exc}") from exc
        return path

    def load(self, session_id: str) -> MeasurementSession:
        path = self.path_for(session_id)
        if not path.exists():
            raise UnknownSessionError(f"no stored session {session_id!r}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            session = session_from_dict(doc)
        except OSError as exc:
            raise StorageUnavailableError(f"cannot read {path}: {exc}") from exc
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise CorruptSessionError(f"{path}: {exc}") from exc
        _validate_rederivation(session)
        return session

    def list_ids(self) -> list[str]:
        if not self.sessions_dir.is_dir():
            return []
        return sorted(p.stem for p in self.sessions_dir.glob("*.json"))


# -- projects ------------------------------------------------------------

@dataclass
class ProjectImage:
    image_id: str
    file: str
    intrinsics: Intrinsics
    pose: Pose


@dataclass
class Project:
    """Posed-image project: what a session's picks are measured on."""

    id: str
    name: str
    images: list[ProjectImage]
    created_at: str = field(default_factory=_utc_now)

    def image(self, image_id: str) -> ProjectImage:
        for img in self.images:
            if img.image_id == image_id:
                return img
        raise KeyError(image_id)


def project_to_dict(project: Project) -> dict:
    return {
        "id": project.id,
        "name": project.name,
        "created_at": project.created_at,
        "images": [
            {
                "image_id": img.image_id,
                "file": img.file,
                "intrinsics": {
                    "fx": img.intrinsics.fx,
                    "fy": img.intrinsics.fy,
                    "cx": img.intrinsics.cx,
                    "cy": img.intrinsics.cy,
                    "width": img.intrinsics.width,
                    "height": img.intrinsics.height,
                },
                "pose": {
                    "center": formats.vec_to_list(img.pose.center),
                    "rotation_row_major": formats.matrix_to_row_major(
                        img.pose.rotation
                    ),
                },
            }
            for img in project.images
        ],
    }


def project_from_dict(doc: dict) -> Project:
    images = []
    seen_ids = set()
    for entry in doc["images"]:
        image_id = entry["image_id"]
        if image_id in seen_ids:
            raise ValueError(f"duplicate image_id {image_id!r}")
        seen_ids.add(image_id)
        intr = entry["intrinsics"]
        pose = entry["pose"]
        images.append(
            ProjectImage(
                image_id=image_id,
                file=entry["file"],
                intrinsics=Intrinsics(
                    fx=float(intr["fx"]),
                    fy=float(intr["fy"]),
                    cx=float(intr["cx"]),
                    cy=float(intr["cy"]),
                    width=int(intr["width"]),
                    height=int(intr["height"]),
                ),
                pose=Pose(
                    center=pose["center"],
                    rotation=formats.matrix_from_row_major(
                        pose["rotation_row_major"]
                    ),
                ),
            )
        )
    return Project(
        id=doc["id"],
        name=doc.get("name", doc["id"]),
        images=images,
        created_at=doc.get("created_at", _utc_now()),
    )


class ProjectStore:
    """Manifest + image files under ``<root>/projects/<id>``."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        self.projects_dir = self.root / "projects"

    def project_dir(self, project_id: str) -> Path:
        return self.projects_dir / project_id

    def manifest_path(self, project_id: str) -> Path:
        return self.project_dir(project_id) / "manifest.json"

    def exists(self, project_id: str) -> bool:
        return self.manifest_path(project_id).exists()

    def missing_images(self, project: Project) -> list[str]:
        """Image files the manifest references but that are not on disk."""
        base = self.project_dir(project.id)
        return [
            img.image_id for img in project.images if not (base / img.file).is_file()
        ]

    def create(self, manifest: dict) -> Project:
        """Register a project from a manifest document.

        The referenced image files must already be present under the
        project directory. Raises FileExistsError for a duplicate id and
        ValueError for an invalid manifest.
        """
        if "id" not in manifest or not manifest["id"]:
            raise ValueError("manifest must carry an id")
        project = project_from_dict(manifest)
        if self.exists(project.id):
            raise FileExistsError(project.id)
        missing = self.missing_images(project)
        if missing:
            raise FileNotFoundError(
                f"missing image files for: {', '.join(missing)}"
            )
        path = self.manifest_path(project.id)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(
                json.dumps(project_to_dict(project), indent=2) + "\n",
                encoding="utf-8",
            )
        except OSError as exc:
            raise StorageUnavailableError(f"cannot write {path}: {exc}") from exc
        return project

    def load(self, project_id: str) -> Project:
        path = self.manifest_path(project_id)
        if not path.exists():
            raise UnknownProjectError(f"no project {project_id!r}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        return project_from_dict(doc)

    def list_projects(self) -> list[Project]:
        if not self.projects_dir.is_dir():
            return []
        projects = []
        for manifest in sorted(self.projects_dir.glob("*/manifest.json")):
            doc = json.loads(manifest.read_text(encoding="utf-8"))
            projects.append(project_from_dict(doc))
        return projects

    def image_path(self, project: Project, image_id: str) -> Path:
        img = project.image(image_id)
        return self.project_dir(project.id) / img.file
