"""
Driving the measurement service end to end
==========================================

Generates a synthetic posed-image project, starts the HTTP service on a
local port, and plays the operator: create a session, click the same
target in several images, watch sigma0 drop as rays accumulate, then
export the session and score it against the generated ground truth.

(The browser UI talks to exactly these endpoints.)
"""

import json
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from raymeter import evaluate, formats, project_point
from raymeter.scenegen import generate_ring_project
from raymeter.service import create_app
from raymeter.session import project_from_dict

workdir = Path(tempfile.mkdtemp(prefix="raymeter_demo_"))
data_dir = workdir / "data"
project_dir = data_dir / "projects" / "demo"
manifest = generate_ring_project(project_dir, cameras=5, seed=2)
truth = formats.read_points_csv(project_dir / "truth.csv")
print(f"generated project 'demo' with {len(manifest['images'])} images in {project_dir}")

server = uvicorn.Server(
    uvicorn.Config(create_app(data_dir), host="127.0.0.1", port=8123, log_level="warning")
)
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)
base = "http://127.0.0.1:8123"

with httpx.Client(base_url=base) as client:
    session_id = client.post("/api/sessions", json={"project_id": "demo"}).json()["id"]
    print(f"opened session {session_id}\n")

    project = project_from_dict(manifest)
    pid, target = truth[0]
    client.post(f"/api/sessions/{session_id}/points", json={"id": pid, "label": pid})

    # Click the exact projected pixel in one image after another and
    # watch the point's state evolve. A tiny per-view aiming error makes
    # sigma0 realistic.
    for i, image in enumerate(project.images):
        u, v = project_point(image.pose, image.intrinsics, target)
        state = client.post(
            f"/api/sessions/{session_id}/points/{pid}/picks",
            json={"image_id": image.image_id, "u": u + 0.4 * (-1) ** i, "v": v - 0.3},
        ).json()
        if state["status"] == "ok":
            print(f"after pick {i + 1}: point=({state['x']:+.3f}, {state['y']:+.3f}, "
                  f"{state['z']:+.3f})  sigma0={state['sigma0']:.4f} m  "
                  f"redundancy={state['redundancy']}")
        else:
            print(f"after pick {i + 1}: {state['status']}")

    exported = client.get(f"/api/sessions/{session_id}/export", params={"format": "csv"}).text
    export_path = workdir / "measured.csv"
    export_path.write_text(exported)
    report = evaluate(formats.read_points_csv(export_path), truth)
    print(f"\nexport scored against truth: error {report.rmse * 1000:.1f} mm "
          f"on {report.n} point(s)")
    doc = client.get(f"/api/sessions/{session_id}/export", params={"format": "json"}).json()
    print(f"JSON export carries {len(doc['points'][0]['rays'])} rays with pick provenance")
    print(json.dumps(doc["points"][0]["rays"][0]["pick"], indent=2))

server.should_exit = True
thread.join(timeout=5)
print("\nserver stopped; session file kept at",
      data_dir / "sessions" / f"{session_id}.json")
