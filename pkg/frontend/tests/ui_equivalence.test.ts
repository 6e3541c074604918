// End-to-end equivalence against a live measurement server.
//
// Spawns the real backend (make-scene + serve), plays scripted operator
// picks through the same client/panel code path the browser uses, and
// checks that panel values are string-equal (at displayed precision) to
// the CLI's intersection of the very same picks, that sigma falls from
// N=2 to N=5 on the deterministic noisy fixture, and that delete/reload/
// export behave like the session store.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { projectPoint } from "../src/overlay.js";
import { rowFromSessionPoint, rowFromState, formatMeters } from "../src/panel.js";
import type { PointStateDoc, ProjectDoc, SessionDoc } from "../src/types.js";

const PYTHON = process.env.RAYMETER_PYTHON ?? "python3";
const PROJECT_ID = "ringui";

// Deterministic pick-noise fixture (pixels). Chosen so that sigma0
// strictly decreases from the N=2 state to the N=5 state.
const PICK_OFFSETS: Array<[number, number]> = [
  [-0.34, 0.21],
  [-1.48, 0.99],
  [0.18, 1.01],
  [0.96, -0.98],
  [-0.8, -0.2],
];

let dataDir: string;
let server: ChildProcess | null = null;
let base = "";
let client: ApiClient;
let project: ProjectDoc;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const port = address.port;
        probe.close(() => resolve(port));
      } else {
        probe.close(() => reject(new Error("no port")));
      }
    });
  });
}

async function waitForServer(url: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(url);
      if (response.ok) return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error(`server did not come up: ${lastError}`);
}

function cliIntersect(raysDoc: unknown): {
  point: number[];
  sigma0: number;
  redundancy: number;
} {
  const raysPath = join(dataDir, "picked_rays.json");
  writeFileSync(raysPath, JSON.stringify(raysDoc));
  const run = spawnSync(
    PYTHON,
    ["-m", "raymeter.cli", "intersect", "--rays", raysPath, "--json"],
    { encoding: "utf8" },
  );
  expect(run.status, run.stderr).toBe(0);
  return JSON.parse(run.stdout);
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "raymeter-ui-"));
  const generated = spawnSync(
    PYTHON,
    [
      "-m", "raymeter.cli", "make-scene", "--preset", "ring",
      "--cameras", "6", "--out", join(dataDir, "projects", PROJECT_ID),
    ],
    { encoding: "utf8" },
  );
  expect(generated.status, generated.stderr).toBe(0);

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    PYTHON,
    ["-m", "raymeter.cli", "serve", "--port", String(port), "--data-dir", dataDir],
    { stdio: "ignore" },
  );
  await waitForServer(`${base}/api/projects`);
  client = new ApiClient(base);
  project = await client.getProject(PROJECT_ID);
}, 60000);

afterAll(async () => {
  if (server && server.exitCode === null) {
    server.kill("SIGINT");
    await new Promise((resolve) => server!.once("exit", resolve));
  }
});

function pickPixel(imageIndex: number, target: number[], offset: [number, number]) {
  const image = project.images[imageIndex];
  const exact = projectPoint(image.pose, image.intrinsics, target);
  expect(exact).not.toBeNull();
  return {
    image_id: image.image_id,
    u: exact!.u + offset[0],
    v: exact!.v + offset[1],
  };
}

describe("scripted picks against the live server", () => {
  it("panel equals CLI intersect at displayed precision; sigma falls 2 -> 5", async () => {
    const session = await client.createSession(PROJECT_ID);
    await client.createPoint(session.id, { id: "vp1", label: "vp1" });

    const target = [0, 0, 0]; // truth point p1 of the generated scene
    const states: Record<number, PointStateDoc> = {};
    for (let i = 0; i < 5; i++) {
      const { state } = await client.addPick(
        session.id,
        "vp1",
        pickPixel(i, target, PICK_OFFSETS[i]),
      );
      states[state.n_rays] = state;
    }
    expect(states[2].status).toBe("ok");
    expect(states[5].status).toBe("ok");
    expect(states[5].redundancy).toBe(7);

    // sigma decreases from the N=2 to the N=5 state on this fixture
    expect(states[5].sigma0!).toBeLessThan(states[2].sigma0!);
    const row2 = rowFromState(states[2]);
    const row5 = rowFromState(states[5]);
    expect(Number(row5.sigma)).toBeLessThan(Number(row2.sigma));

    // CLI intersect on the very same picks (server-converted rays)
    const exported: SessionDoc = JSON.parse(
      await client.exportText(session.id, "json"),
    );
    const point = exported.points.find((p) => p.id === "vp1")!;
    expect(point.rays).toHaveLength(5);
    const cli = cliIntersect({
      mode: point.mode,
      rays: point.rays.map((r) => ({ origin: r.origin, direction: r.direction })),
    });
    expect(formatMeters(cli.point[0])).toBe(row5.x);
    expect(formatMeters(cli.point[1])).toBe(row5.y);
    expect(formatMeters(cli.point[2])).toBe(row5.z);
    expect(formatMeters(cli.sigma0)).toBe(row5.sigma);
    expect(cli.redundancy).toBe(states[5].redundancy);
  }, 30000);

  it("deleting a pick restores the exact previous row state", async () => {
    const session = await client.createSession(PROJECT_ID);
    await client.createPoint(session.id, { id: "vp2", label: "vp2" });
    const target = [1.6, 0.0, 0.45]; // truth point p2

    let before: PointStateDoc | null = null;
    for (let i = 0; i < 3; i++) {
      const { state } = await client.addPick(
        session.id,
        "vp2",
        pickPixel(i, target, PICK_OFFSETS[i]),
      );
      if (state.n_rays === 2) before = state;
    }
    const { state: after } = await client.deletePick(session.id, "vp2", 2);
    expect(after).toEqual(before);
    expect(rowFromState(after)).toEqual(rowFromState(before!));
  }, 30000);

  it("reload rebuilds identical panel rows from server state", async () => {
    const session = await client.createSession(PROJECT_ID);
    await client.createPoint(session.id, { id: "vp3", label: "vp3" });
    const target = [-1.1, 1.2, -0.3]; // truth point p3
    let last: PointStateDoc | null = null;
    for (let i = 0; i < 3; i++) {
      const { state } = await client.addPick(
        session.id,
        "vp3",
        pickPixel(i, target, PICK_OFFSETS[i]),
      );
      last = state;
    }
    const reloaded = await client.getSession(session.id);
    const point = reloaded.points.find((p) => p.id === "vp3")!;
    expect(rowFromSessionPoint(point)).toEqual(rowFromState(last!));
  }, 30000);

  it("export button bytes equal the export endpoint", async () => {
    const session = await client.createSession(PROJECT_ID);
    await client.createPoint(session.id, { id: "vp4", label: "vp4" });
    for (let i = 0; i < 2; i++) {
      await client.addPick(session.id, "vp4", pickPixel(i, [0, 0, 0], [0, 0]));
    }
    const viaClient = await client.exportText(session.id, "csv");
    const viaFetch = await (await fetch(client.exportUrl(session.id, "csv"))).text();
    expect(viaClient).toBe(viaFetch);
    // standard CSV line endings (CRLF)
    expect(viaClient.split("\n")[0].trimEnd()).toBe(
      "point_id,label,x,y,z,sigma0,n_rays,sxx,syy,szz",
    );
  }, 30000);

  it("out-of-bounds picks surface the documented error code", async () => {
    const session = await client.createSession(PROJECT_ID);
    await client.createPoint(session.id, { id: "vp5", label: "vp5" });
    const error = await client
      .addPick(session.id, "vp5", { image_id: "cam00", u: -10, v: 5 })
      .catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.code).toBe("pick_out_of_bounds");
  }, 30000);

  it("marker centers sit within half a pixel of the projections", () => {
    // The cursor readout shows image coordinates; hovering a rendered
    // marker center must agree with the known projected pixel.
    const truthCsv = readFileSync(
      join(dataDir, "projects", PROJECT_ID, "truth.csv"),
      "utf8",
    );
    const rows = truthCsv.trim().split("\n").slice(1);
    expect(rows.length).toBeGreaterThan(0);
    const image = project.images[1];
    for (const line of rows) {
      const [, x, y, z] = line.split(",");
      const projected = projectPoint(image.pose, image.intrinsics, [
        Number(x),
        Number(y),
        Number(z),
      ]);
      expect(projected).not.toBeNull();
      const markerCenter = {
        u: Math.floor(projected!.u) + 0.5,
        v: Math.floor(projected!.v) + 0.5,
      };
      expect(Math.abs(markerCenter.u - projected!.u)).toBeLessThanOrEqual(0.5);
      expect(Math.abs(markerCenter.v - projected!.v)).toBeLessThanOrEqual(0.5);
    }
  });
});
