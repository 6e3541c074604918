"""HTTP/JSON measurement service.

Exposes projects, images, sessions and the pick workflow under ``/api``.
The server performs all geometry: every pick is converted to a ray with
the project's stored pose and intrinsics through the same code path the
library uses everywhere else, and every mutation response carries the
authoritative recomputed result. Clients never compute geometry.

Errors are returned as ``{"code": ..., "message": ...}``. Per-session
mutations are serialized with one lock per session id; sessions are
written through to disk on every mutation, so shutdown needs no flush.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from . import formats, session as sessions
from .camera import PickOutOfBoundsError, PixelPick, ray_from_pixel
from .geometry import SystemMode
from .session import (
    CorruptSessionError,
    MeasuredPoint,
    ProjectStore,
    SessionStore,
    StorageUnavailableError,
    UnknownPointError,
    UnknownProjectError,
    UnknownSessionError,
)

ERROR_STATUS = {
    UnknownProjectError: (404, "unknown_project"),
    UnknownSessionError: (404, "unknown_session"),
    UnknownPointError: (404, "unknown_point"),
    PickOutOfBoundsError: (400, "pick_out_of_bounds"),
    CorruptSessionError: (500, "corrupt_session"),
    StorageUnavailableError: (500, "storage_unavailable"),
}


def error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def point_payload(point: MeasuredPoint) -> dict:
    """Current state of a point: status plus the result when computed."""
    payload = {
        "point_id": point.id,
        "label": point.label,
        "mode": point.mode.value,
        "n_rays": len(point.rays),
    }
    if point.result is not None:
        payload["status"] = "ok"
        payload.update(formats.result_summary(point.result))
    elif point.degenerate:
        payload["status"] = "degenerate"
    else:
        payload["status"] = "insufficient_rays"
    return payload


def export_rows(session: sessions.MeasurementSession) -> list[dict]:
    rows = []
    for point in session.points:
        if point.result is None:
            continue
        q = point.result.covariance
        rows.append(
            {
                "point_id": point.id,
                "label": point.label,
                "x": float(point.result.point[0]),
                "y": float(point.result.point[1]),
                "z": float(point.result.point[2]),
                "sigma0": float(point.result.sigma0),
                "n_rays": len(point.rays),
                "sxx": float(q[0, 0]),
                "syy": float(q[1, 1]),
                "szz": float(q[2, 2]),
            }
        )
    return rows


def create_app(data_dir, ui_dir=None) -> FastAPI:
    """Build the service app over a data directory.

    Layout: ``data_dir/projects/<id>/manifest.json`` plus image files, and
    ``data_dir/sessions/<id>.json``. When ``ui_dir`` is given its static
    files are served at ``/``.
    """
    data_dir = Path(data_dir)
    project_store = ProjectStore(data_dir)
    session_store = SessionStore(data_dir)
    session_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    registry_lock = threading.Lock()

    app = FastAPI(title="raymeter", docs_url=None, redoc_url=None)

    def make_handler(status: int, code: str):
        async def handler(request: Request, exc: Exception):
            return error_response(status, code, str(exc))

        return handler

    for err_type, (status, code) in ERROR_STATUS.items():
        app.add_exception_handler(err_type, make_handler(status, code))

    def lock_for(session_id: str) -> threading.Lock:
        with registry_lock:
            return session_locks[session_id]

    # -- projects ---------------------------------------------------------

    @app.get("/api/projects")
    def list_projects():
        return [sessions.project_to_dict(p) for p in project_store.list_projects()]

    @app.post("/api/projects", status_code=201)
    def create_project(manifest: dict = Body(...)):
        try:
            project = project_store.create(manifest)
        except FileExistsError as exc:
            return error_response(409, "duplicate_project", f"project {exc} already exists")
        except FileNotFoundError as exc:
            return error_response(400, "missing_image", str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            return error_response(400, "invalid_manifest", str(exc))
        return sessions.project_to_dict(project)

    @app.get("/api/projects/{project_id}")
    def get_project(project_id: str):
        return sessions.project_to_dict(project_store.load(project_id))

    @app.get("/api/projects/{project_id}/images/{image_id}")
    def get_image(project_id: str, image_id: str):
        project = project_store.load(project_id)
        try:
            path = project_store.image_path(project, image_id)
        except KeyError:
            return error_response(404, "unknown_image", f"no image {image_id!r}")
        if not path.is_file():
            return error_response(404, "unknown_image", f"missing file for {image_id!r}")
        # FileResponse handles Range requests for large images.
        return FileResponse(path)

    # -- sessions and picks -------------------------------------------------

    @app.get("/api/sessions")
    def list_sessions():
        summaries = []
        for sid in session_store.list_ids():
            session = session_store.load(sid)
            summaries.append(
                {
                    "id": session.id,
                    "project_id": session.project_id,
                    "updated_at": session.updated_at,
                    "n_points": len(session.points),
                }
            )
        return summaries

    @app.post("/api/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        project_id = body.get("project_id")
        if not project_id:
            return error_response(400, "invalid_request", "project_id is required")
        project_store.load(project_id)  # 404 when unknown
        session = sessions.create_session(project_id, session_id=body.get("id"))
        with lock_for(session.id):
            session_store.save(session)
        return sessions.session_to_dict(session)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return sessions.session_to_dict(session_store.load(session_id))

    @app.post("/api/sessions/{session_id}/points", status_code=201)
    def create_point(session_id: str, body: dict = Body(...)):
        label = body.get("label", "")
        try:
            mode = SystemMode(body.get("mode", SystemMode.PROJECTION.value))
        except ValueError:
            return error_response(400, "invalid_request", f"unknown mode {body.get('mode')!r}")
        with lock_for(session_id):
            session = session_store.load(session_id)
            try:
                point = sessions.add_point(session, label=label, mode=mode, point_id=body.get("id"))
            except ValueError as exc:
                return error_response(409, "duplicate_point", str(exc))
            session_store.save(session)
        return point_payload(point)

    @app.patch("/api/sessions/{session_id}/points/{point_id}")
    def rename_point(session_id: str, point_id: str, body: dict = Body(...)):
        if "label" not in body:
            return error_response(400, "invalid_request", "label is required")
        with lock_for(session_id):
            session = session_store.load(session_id)
            point = sessions.get_point(session, point_id)
            point.label = str(body["label"])
            session_store.save(session)
        return point_payload(point)

    @app.post("/api/sessions/{session_id}/points/{point_id}/picks")
    def add_pick(session_id: str, point_id: str, body: dict = Body(...)):
        for key in ("image_id", "u", "v"):
            if key not in body:
                return error_response(400, "invalid_request", f"pick needs {key}")
        with lock_for(session_id):
            session = session_store.load(session_id)
            project = project_store.load(session.project_id)
            try:
                image = project.image(str(body["image_id"]))
            except KeyError:
                return error_response(404, "unknown_image", f"no image {body['image_id']!r}")
            pick = PixelPick(u=float(body["u"]), v=float(body["v"]), image_id=image.image_id)
            ray = ray_from_pixel(image.pose, image.intrinsics, pick)
            point = sessions.add_ray(session, point_id, ray, pick=pick)
            session_store.save(session)
        payload = point_payload(point)
        if payload["status"] == "degenerate":
            return JSONResponse(status_code=422, content=payload)
        return payload

    @app.delete("/api/sessions/{session_id}/points/{point_id}/picks/{index}")
    def delete_pick(session_id: str, point_id: str, index: int):
        with lock_for(session_id):
            session = session_store.load(session_id)
            try:
                point = sessions.remove_ray(session, point_id, index)
            except IndexError as exc:
                return error_response(404, "index_out_of_range", str(exc))
            session_store.save(session)
        payload = point_payload(point)
        if payload["status"] == "degenerate":
            return JSONResponse(status_code=422, content=payload)
        return payload

    @app.get("/api/sessions/{session_id}/export")
    def export_session(session_id: str, format: str = "json"):
        session = session_store.load(session_id)
        if format == "json":
            return sessions.session_to_dict(session)
        if format == "csv":
            text = formats.export_csv(export_rows(session))
            return PlainTextResponse(
                text,
                media_type="text/csv",
                headers={
                    "Content-Disposition": f'attachment; filename="{session_id}.csv"'
                },
            )
        return error_response(400, "bad_format", f"unknown export format {format!r}")

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
