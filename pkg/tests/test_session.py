"""Unit tests for measurement sessions, persistence, and projects."""

import copy
import json

import numpy as np
import pytest

from raymeter.camera import Intrinsics, PixelPick, Pose, look_at_pose
from raymeter.geometry import Ray, SystemMode
from raymeter.session import (
    CorruptSessionError,
    MeasurementSession,
    Project,
    ProjectImage,
    ProjectStore,
    SessionStore,
    UnknownPointError,
    UnknownProjectError,
    UnknownSessionError,
    add_point,
    add_ray,
    create_session,
    project_from_dict,
    project_to_dict,
    remove_ray,
    session_from_dict,
    session_to_dict,
)

RAYS = [
    Ray((0, 0, 5), (0, 0, -1)),
    Ray((5, 0, 5), (-1, 0, -1)),
    Ray((0, 5, 5), (0, -1, -1)),
    Ray((-5, 0, 5), (1, 0, -1)),
    Ray((0, -5, 5), (0, 1, -1)),
]


def session_with_point(mode=SystemMode.PROJECTION):
    session = create_session("proj1", session_id="s1")
    point = add_point(session, label="corner", mode=mode, point_id="pt1")
    return session, point


def test_result_appears_at_two_rays():
    session, point = session_with_point()
    add_ray(session, "pt1", RAYS[0])
    assert point.result is None
    add_ray(session, "pt1", RAYS[1])
    assert point.result is not None
    assert point.result.redundancy == 1
    assert np.linalg.norm(point.result.point) < 1e-9


def test_fifth_ray_redundancy():
    session, point = session_with_point()
    for ray in RAYS:
        add_ray(session, "pt1", ray)
    assert point.result.redundancy == 7
    assert point.result.ray_count == 5


def test_degenerate_geometry_flags_point():
    session, point = session_with_point()
    add_ray(session, "pt1", Ray((0, 0, 0), (0, 0, 1)))
    add_ray(session, "pt1", Ray((1, 0, 0), (0, 0, 1)))  # parallel
    assert point.result is None
    assert point.degenerate


def test_remove_ray_clears_result():
    session, point = session_with_point()
    add_ray(session, "pt1", RAYS[0])
    add_ray(session, "pt1", RAYS[1])
    remove_ray(session, "pt1", 1)
    assert point.result is None
    assert len(point.rays) == 1


def test_add_then_remove_restores_point_state():
    session, point = session_with_point()
    add_ray(session, "pt1", RAYS[0])
    add_ray(session, "pt1", RAYS[1])
    before = copy.deepcopy(point)
    add_ray(session, "pt1", RAYS[2])
    remove_ray(session, "pt1", 2)
    assert point.id == before.id and point.label == before.label
    assert len(point.rays) == len(before.rays)
    assert np.array_equal(point.result.point, before.result.point)
    assert point.result.sigma0 == before.result.sigma0
    assert np.array_equal(point.result.covariance, before.result.covariance)


def test_remove_one_of_five_recomputes():
    session, point = session_with_point()
    for ray in RAYS:
        add_ray(session, "pt1", ray)
    remove_ray(session, "pt1", 4)
    assert point.result.ray_count == 4
    assert point.result.redundancy == 5


def test_unknown_point_and_bad_index():
    session, _ = session_with_point()
    with pytest.raises(UnknownPointError):
        add_ray(session, "nope", RAYS[0])
    with pytest.raises(IndexError):
        remove_ray(session, "pt1", 0)


def test_duplicate_point_id_rejected():
    session, _ = session_with_point()
    with pytest.raises(ValueError):
        add_point(session, label="again", point_id="pt1")


def test_pick_provenance_round_trips():
    session, point = session_with_point()
    pick = PixelPick(u=12.5, v=700.25, image_id="cam03")
    add_ray(session, "pt1", RAYS[0], pick=pick)
    restored = session_from_dict(session_to_dict(session))
    obs = restored.points[0].rays[0]
    assert obs.pick == pick


def test_persist_load_round_trip(tmp_path):
    store = SessionStore(tmp_path)
    session, _ = session_with_point(mode=SystemMode.PAPER)
    add_ray(session, "pt1", RAYS[0], pick=PixelPick(1.0, 2.0, "img0"))
    add_ray(session, "pt1", RAYS[1])
    add_point(session, label="empty", point_id="pt2")
    store.save(session)
    loaded = store.load("s1")
    assert session_to_dict(loaded) == session_to_dict(session)


def test_load_missing_session(tmp_path):
    with pytest.raises(UnknownSessionError):
        SessionStore(tmp_path).load("ghost")


def test_load_detects_tampered_result(tmp_path):
    store = SessionStore(tmp_path)
    session, _ = session_with_point()
    add_ray(session, "pt1", RAYS[0])
    add_ray(session, "pt1", RAYS[1])
    path = store.save(session)
    doc = json.loads(path.read_text())
    doc["points"][0]["result"]["point"][0] += 1e-6  # > 1e-9 drift
    path.write_text(json.dumps(doc))
    with pytest.raises(CorruptSessionError):
        store.load("s1")


def test_load_detects_result_for_single_ray(tmp_path):
    store = SessionStore(tmp_path)
    session, _ = session_with_point()
    add_ray(session, "pt1", RAYS[0])
    add_ray(session, "pt1", RAYS[1])
    path = store.save(session)
    doc = json.loads(path.read_text())
    del doc["points"][0]["rays"][1]  # result now inconsistent with 1 ray
    path.write_text(json.dumps(doc))
    with pytest.raises(CorruptSessionError):
        store.load("s1")


def test_load_rejects_unparseable_file(tmp_path):
    store = SessionStore(tmp_path)
    store.sessions_dir.mkdir(parents=True)
    store.path_for("bad").write_text("{not json")
    with pytest.raises(CorruptSessionError):
        store.load("bad")


def test_session_list_ids(tmp_path):
    store = SessionStore(tmp_path)
    assert store.list_ids() == []
    for sid in ("b", "a"):
        store.save(MeasurementSession(id=sid, project_id="p"))
    assert store.list_ids() == ["a", "b"]


def test_mutations_on_distinct_points_commute():
    def build(order):
        session = create_session("proj1", session_id="s1")
        add_point(session, label="a", point_id="a")
        add_point(session, label="b", point_id="b")
        for op in order:
            op(session)
        return session

    ops = [
        lambda s: add_ray(s, "a", RAYS[0]),
        lambda s: add_ray(s, "b", RAYS[1]),
        lambda s: add_ray(s, "a", RAYS[2]),
        lambda s: add_ray(s, "b", RAYS[3]),
        lambda s: remove_ray(s, "b", 0),
        lambda s: add_ray(s, "a", RAYS[4]),
    ]
    reordered = [ops[1], ops[3], ops[4], ops[0], ops[2], ops[5]]
    first = session_to_dict(build(ops))
    second = session_to_dict(build(reordered))
    # point state (rays, results, flags) carries no timestamps
    assert first["points"] == second["points"]


# -- projects --------------------------------------------------------------

def make_project(project_id="demo") -> Project:
    intr = Intrinsics(fx=800.0, fy=800.0, cx=400.0, cy=300.0, width=800, height=600)
    pose = look_at_pose((10.0, 0.0, 10.0), (0.0, 0.0, 0.0))
    return Project(
        id=project_id,
        name="Demo",
        images=[ProjectImage(image_id="cam00", file="images/cam00.png", intrinsics=intr, pose=pose)],
    )


def test_project_manifest_round_trip():
    project = make_project()
    doc = project_to_dict(project)
    assert len(doc["images"][0]["pose"]["rotation_row_major"]) == 9
    restored = project_from_dict(doc)
    assert project_to_dict(restored) == doc


def test_project_store_create_requires_images(tmp_path):
    store = ProjectStore(tmp_path)
    manifest = project_to_dict(make_project())
    with pytest.raises(FileNotFoundError):
        store.create(manifest)
    image = store.project_dir("demo") / "images" / "cam00.png"
    image.parent.mkdir(parents=True)
    image.write_bytes(b"png")
    created = store.create(manifest)
    assert created.id == "demo"
    assert store.load("demo").images[0].image_id == "cam00"
    with pytest.raises(FileExistsError):
        store.create(manifest)


def test_project_store_missing(tmp_path):
    store = ProjectStore(tmp_path)
    with pytest.raises(UnknownProjectError):
        store.load("ghost")
    assert store.list_projects() == []


def test_duplicate_image_ids_rejected():
    doc = project_to_dict(make_project())
    doc["images"].append(dict(doc["images"][0]))
    with pytest.raises(ValueError):
        project_from_dict(doc)
