// Browser application: image navigator, pick-and-update loop, point
// panel, session management and export.
//
// All geometry values shown anywhere come verbatim from server responses
// (see panel.ts); overlays re-project those server results for drawing
// only. Picks are posted in image pixel coordinates regardless of the
// viewport transform.

import { ApiClient, ApiError } from "./api.js";
import type {
  PointStateDoc,
  ProjectDoc,
  ProjectImageDoc,
  SessionDoc,
} from "./types.js";
import {
  clampPan,
  cursorReadout,
  fitTransform,
  initialViewState,
  insideImage,
  imageToScreen,
  panBy,
  screenToImage,
  ViewState,
  zoomAt,
} from "./viewstate.js";
import { PanelRow, rowFromSessionPoint, rowFromState } from "./panel.js";
import { ellipseForView, projectPoint } from "./overlay.js";

const ELLIPSE_DISPLAY_SCALE = 50; // drawn magnification, labeled in the UI

interface LocalPick {
  imageId: string;
  u: number;
  v: number;
}

class App {
  private readonly client = new ApiClient("");
  private view: ViewState = initialViewState();
  private project: ProjectDoc | null = null;
  private rows = new Map<string, PanelRow>();
  private states = new Map<string, PointStateDoc>();
  private picks = new Map<string, LocalPick[]>();
  private lastSeq = new Map<string, number>();
  private pointOrder: string[] = [];
  private dragging = false;
  private dragMoved = false;
  private dragLast = { x: 0, y: 0 };

  private el<T extends HTMLElement>(id: string): T {
    return document.getElementById(id) as T;
  }

  async start(): Promise<void> {
    this.bindViewportEvents();
    this.el<HTMLButtonElement>("new-session").onclick = () => this.newSession();
    this.el<HTMLButtonElement>("open-session").onclick = () => this.openSession();
    this.el<HTMLButtonElement>("new-point").onclick = () => this.newPoint();
    this.el<HTMLSelectElement>("project-select").onchange = () => {
      const id = this.el<HTMLSelectElement>("project-select").value;
      if (id) this.loadProject(id);
    };
    await this.refreshProjects();
    this.updateSessionUi();
  }

  private toast(message: string, kind: "info" | "error" = "info"): void {
    const host = this.el<HTMLDivElement>("toasts");
    const node = document.createElement("div");
    node.className = `toast ${kind}`;
    node.textContent = message;
    host.appendChild(node);
    setTimeout(() => node.remove(), 4000);
  }

  private fail(error: unknown): void {
    if (error instanceof ApiError) {
      this.toast(`${error.code}: ${error.message}`, "error");
    } else {
      this.toast(String(error), "error");
    }
  }

  // -- projects and images -------------------------------------------------

  private async refreshProjects(): Promise<void> {
    try {
      const projects = await this.client.listProjects();
      const select = this.el<HTMLSelectElement>("project-select");
      select.innerHTML = "<option value=''>select project...</option>";
      for (const project of projects) {
        const option = document.createElement("option");
        option.value = project.id;
        option.textContent = `${project.name} (${project.images.length} views)`;
        select.appendChild(option);
      }
      if (projects.length === 1) {
        select.value = projects[0].id;
        await this.loadProject(projects[0].id);
      }
    } catch (error) {
      this.fail(error);
    }
  }

  private async loadProject(projectId: string): Promise<void> {
    try {
      this.project = await this.client.getProject(projectId);
    } catch (error) {
      this.fail(error);
      return;
    }
    this.view.projectId = projectId;
    this.renderThumbnails();
    if (this.project.images.length > 0) {
      this.showImage(this.project.images[0].image_id);
    }
  }

  private activeImage(): ProjectImageDoc | null {
    if (!this.project || !this.view.imageId) return null;
    return (
      this.project.images.find((i) => i.image_id === this.view.imageId) ?? null
    );
  }

  private renderThumbnails(): void {
    const strip = this.el<HTMLDivElement>("thumbnails");
    strip.innerHTML = "";
    if (!this.project) return;
    for (const image of this.project.images) {
      const cell = document.createElement("div");
      cell.className = "thumb";
      cell.dataset.imageId = image.image_id;
      const img = document.createElement("img");
      img.src = this.client.imageUrl(this.project.id, image.image_id);
      img.alt = image.image_id;
      img.onerror = () => {
        cell.classList.add("failed");
        cell.title = "load failed, click to retry";
        cell.onclick = () => {
          cell.classList.remove("failed");
          img.src = `${img.src.split("#")[0]}#${Date.now()}`;
          cell.onclick = () => this.showImage(image.image_id);
        };
      };
      const label = document.createElement("span");
      label.textContent = image.image_id;
      cell.append(img, label);
      cell.onclick = () => this.showImage(image.image_id);
      strip.appendChild(cell);
    }
  }

  private showImage(imageId: string): void {
    if (!this.project) return;
    this.view.imageId = imageId;
    for (const cell of document.querySelectorAll<HTMLElement>(".thumb")) {
      cell.classList.toggle("active", cell.dataset.imageId === imageId);
    }
    const image = this.activeImage();
    if (!image) return;
    const photo = this.el<HTMLImageElement>("photo");
    photo.src = this.client.imageUrl(this.project.id, imageId);
    const viewport = this.el<HTMLDivElement>("viewport");
    this.view.transform = fitTransform(
      image.intrinsics.width,
      image.intrinsics.height,
      viewport.clientWidth || image.intrinsics.width,
      viewport.clientHeight || image.intrinsics.height,
    );
    this.renderViewport();
  }

  // -- viewport interaction --------------------------------------------------

  private bindViewportEvents(): void {
    const viewport = this.el<HTMLDivElement>("viewport");
    viewport.addEventListener("wheel", (event) => {
      event.preventDefault();
      const image = this.activeImage();
      if (!image) return;
      const rect = viewport.getBoundingClientRect();
      const factor = event.deltaY < 0 ? 1.2 : 1 / 1.2;
      this.view.transform = clampPan(
        zoomAt(
          this.view.transform,
          event.clientX - rect.left,
          event.clientY - rect.top,
          factor,
        ),
        image.intrinsics.width,
        image.intrinsics.height,
        rect.width,
        rect.height,
      );
      this.renderViewport();
    });
    viewport.addEventListener("mousedown", (event) => {
      this.dragging = true;
      this.dragMoved = false;
      this.dragLast = { x: event.clientX, y: event.clientY };
    });
    window.addEventListener("mousemove", (event) => {
      const image = this.activeImage();
      if (!image) return;
      const rect = viewport.getBoundingClientRect();
      const screen = { x: event.clientX - rect.left, y: event.clientY - rect.top };
      const { u, v } = screenToImage(this.view.transform, screen.x, screen.y);
      this.el<HTMLSpanElement>("readout").textContent = cursorReadout(u, v);
      if (!this.dragging) return;
      const dx = event.clientX - this.dragLast.x;
      const dy = event.clientY - this.dragLast.y;
      if (Math.abs(dx) + Math.abs(dy) > 2) this.dragMoved = true;
      this.dragLast = { x: event.clientX, y: event.clientY };
      this.view.transform = clampPan(
        panBy(this.view.transform, dx, dy),
        image.intrinsics.width,
        image.intrinsics.height,
        rect.width,
        rect.height,
      );
      this.renderViewport();
    });
    window.addEventListener("mouseup", (event) => {
      if (!this.dragging) return;
      this.dragging = false;
      if (this.dragMoved) return;
      const rect = viewport.getBoundingClientRect();
      if (
        event.clientX < rect.left ||
        event.clientX > rect.right ||
        event.clientY < rect.top ||
        event.clientY > rect.bottom
      ) {
        return;
      }
      const { u, v } = screenToImage(
        this.view.transform,
        event.clientX - rect.left,
        event.clientY - rect.top,
      );
      void this.pickAt(u, v);
    });
  }

  // -- sessions ----------------------------------------------------------------

  private async newSession(): Promise<void> {
    if (!this.view.projectId) {
      this.toast("select a project first", "error");
      return;
    }
    try {
      const session = await this.client.createSession(this.view.projectId);
      this.adoptSession(session);
      this.toast(`session ${session.id.slice(0, 8)} created`);
    } catch (error) {
      this.fail(error);
    }
  }

  private async openSession(): Promise<void> {
    const field = this.el<HTMLInputElement>("session-id");
    let wanted = field.value.trim();
    try {
      if (!wanted) {
        const sessions = await this.client.listSessions();
        if (sessions.length === 0) {
          this.toast("no stored sessions", "error");
          return;
        }
        wanted = sessions[sessions.length - 1].id;
      }
      const session = await this.client.getSession(wanted);
      if (session.project_id !== this.view.projectId) {
        const select = this.el<HTMLSelectElement>("project-select");
        select.value = session.project_id;
        await this.loadProject(session.project_id);
      }
      this.adoptSession(session);
      this.toast(`session ${session.id.slice(0, 8)} opened`);
    } catch (error) {
      this.fail(error);
    }
  }

  /** Replace all local state with the server's session document. */
  private adoptSession(session: SessionDoc): void {
    this.view.sessionId = session.id;
    this.view.selectedPointId = null;
    this.rows.clear();
    this.states.clear();
    this.picks.clear();
    this.lastSeq.clear();
    this.pointOrder = [];
    for (const point of session.points) {
      this.pointOrder.push(point.id);
      this.rows.set(point.id, rowFromSessionPoint(point));
      this.picks.set(
        point.id,
        point.rays.map((ray) => ({
          imageId: ray.pick?.image_id ?? "",
          u: ray.pick?.u ?? Number.NaN,
          v: ray.pick?.v ?? Number.NaN,
        })),
      );
      if (point.result) {
        this.states.set(point.id, {
          status: "ok",
          point_id: point.id,
          label: point.label,
          mode: point.mode,
          n_rays: point.rays.length,
          x: point.result.point[0],
          y: point.result.point[1],
          z: point.result.point[2],
          sigma0: point.result.sigma0,
          redundancy: point.result.redundancy,
          covariance: [
            point.result.covariance_row_major[0],
            point.result.covariance_row_major[1],
            point.result.covariance_row_major[2],
            point.result.covariance_row_major[4],
            point.result.covariance_row_major[5],
            point.result.covariance_row_major[8],
          ],
        });
      }
    }
    this.updateSessionUi();
    this.renderPanel();
    this.renderViewport();
  }

  private updateSessionUi(): void {
    const active = Boolean(this.view.sessionId);
    this.el<HTMLSpanElement>("session-label").textContent = active
      ? `session ${this.view.sessionId!.slice(0, 8)}`
      : "no session";
    const csv = this.el<HTMLAnchorElement>("export-csv");
    const json = this.el<HTMLAnchorElement>("export-json");
    csv.classList.toggle("disabled", !active);
    json.classList.toggle("disabled", !active);
    if (active) {
      csv.href = this.client.exportUrl(this.view.sessionId!, "csv");
      json.href = this.client.exportUrl(this.view.sessionId!, "json");
    }
  }

  // -- points and picks -----------------------------------------------------------

  private async newPoint(): Promise<void> {
    if (!this.view.sessionId) {
      this.toast("create or open a session first", "error");
      return;
    }
    const label = prompt("point label", `point ${this.pointOrder.length + 1}`);
    if (label === null) return;
    try {
      const { seq, state } = await this.client.createPoint(this.view.sessionId, {
        label,
      });
      this.pointOrder.push(state.point_id);
      this.picks.set(state.point_id, []);
      this.applyState(seq, state);
      this.view.selectedPointId = state.point_id;
      this.renderPanel();
    } catch (error) {
      this.fail(error);
    }
  }

  private async pickAt(u: number, v: number): Promise<void> {
    const image = this.activeImage();
    if (!image || !this.view.sessionId) return;
    if (!insideImage(u, v, image.intrinsics.width, image.intrinsics.height)) {
      this.toast("click is outside the image", "error");
      return;
    }
    if (!this.view.selectedPointId) {
      await this.newPoint();
      if (!this.view.selectedPointId) return;
    }
    const pointId = this.view.selectedPointId;
    try {
      const { seq, state } = await this.client.addPick(this.view.sessionId, pointId, {
        image_id: image.image_id,
        u,
        v,
      });
      this.picks.get(pointId)?.push({ imageId: image.image_id, u, v });
      this.applyState(seq, state);
      if (state.status === "degenerate") {
        this.toast("degenerate geometry: rays do not determine a point", "error");
      }
    } catch (error) {
      this.fail(error);
    }
  }

  private async deletePick(pointId: string, index: number): Promise<void> {
    if (!this.view.sessionId) return;
    try {
      const { seq, state } = await this.client.deletePick(
        this.view.sessionId,
        pointId,
        index,
      );
      this.picks.get(pointId)?.splice(index, 1);
      this.applyState(seq, state);
    } catch (error) {
      this.fail(error);
    }
  }

  private async renamePoint(pointId: string): Promise<void> {
    if (!this.view.sessionId) return;
    const current = this.rows.get(pointId)?.label ?? "";
    const label = prompt("rename point", current);
    if (label === null || label === current) return;
    try {
      const { seq, state } = await this.client.renamePoint(
        this.view.sessionId,
        pointId,
        label,
      );
      this.applyState(seq, state);
    } catch (error) {
      this.fail(error);
    }
  }

  /** Apply a sequenced server response unless a newer one already landed. */
  private applyState(seq: number, state: PointStateDoc): void {
    const last = this.lastSeq.get(state.point_id) ?? 0;
    if (seq <= last) return;
    this.lastSeq.set(state.point_id, seq);
    this.states.set(state.point_id, state);
    this.rows.set(state.point_id, rowFromState(state));
    this.renderPanel();
    this.renderViewport();
  }

  // -- rendering ---------------------------------------------------------------------

  private renderPanel(): void {
    const host = this.el<HTMLDivElement>("points");
    host.innerHTML = "";
    for (const pointId of this.pointOrder) {
      const row = this.rows.get(pointId);
      if (!row) continue;
      const node = document.createElement("div");
      node.className = "point-row";
      node.classList.toggle("selected", pointId === this.view.selectedPointId);
      const header = document.createElement("div");
      header.className = "point-head";
      const badge = `<span class="badge ${row.status}">${row.status}</span>`;
      header.innerHTML = `<span class="label">${row.label}</span>${badge}`;
      const body = document.createElement("div");
      body.className = "point-body";
      body.innerHTML =
        row.status === "ok"
          ? `<span class="coords">${row.x}, ${row.y}, ${row.z} m</span>` +
            `<span class="sigma">&sigma; ${row.sigma} m</span>` +
            `<span class="nrays">${row.nRays} rays</span>`
          : `<span class="coords muted">needs ${Math.max(0, 2 - row.nRays)} more ray(s)</span>` +
            `<span class="nrays">${row.nRays} rays</span>`;
      node.append(header, body);
      node.onclick = () => {
        this.view.selectedPointId = pointId;
        this.renderPanel();
        this.renderViewport();
      };
      header.ondblclick = (event) => {
        event.stopPropagation();
        void this.renamePoint(pointId);
      };
      if (pointId === this.view.selectedPointId) {
        node.appendChild(this.renderPickList(pointId));
        const state = this.states.get(pointId);
        if (state?.status === "ok" && state.ellipsoid) {
          const detail = document.createElement("div");
          detail.className = "ellipsoid-detail";
          const axes = state.ellipsoid.semi_axes
            .map((value) => value.toFixed(4))
            .join(" / ");
          detail.textContent = `ellipsoid semi-axes ${axes} m (drawn x${ELLIPSE_DISPLAY_SCALE})`;
          node.appendChild(detail);
        }
      }
      host.appendChild(node);
    }
  }

  private renderPickList(pointId: string): HTMLElement {
    const list = document.createElement("div");
    list.className = "pick-list";
    const picks = this.picks.get(pointId) ?? [];
    picks.forEach((pick, index) => {
      const entry = document.createElement("div");
      entry.className = "pick-entry";
      entry.innerHTML = `<span>${pick.imageId} @ ${pick.u.toFixed(1)}, ${pick.v.toFixed(1)}</span>`;
      const remove = document.createElement("button");
      remove.textContent = "remove";
      remove.onclick = (event) => {
        event.stopPropagation();
        void this.deletePick(pointId, index);
      };
      entry.appendChild(remove);
      list.appendChild(entry);
    });
    return list;
  }

  private renderViewport(): void {
    const image = this.activeImage();
    const photo = this.el<HTMLImageElement>("photo");
    const svg = this.el<HTMLElement>("overlay") as unknown as SVGSVGElement;
    if (!image) return;
    const t = this.view.transform;
    photo.style.transform = `translate(${t.offsetX}px, ${t.offsetY}px) scale(${t.scale})`;
    while (svg.firstChild) svg.removeChild(svg.firstChild);
    const ns = "http://www.w3.org/2000/svg";

    const mark = (u: number, v: number, cls: string, size = 6) => {
      const { x, y } = imageToScreen(t, u, v);
      const g = document.createElementNS(ns, "g");
      g.setAttribute("class", cls);
      const h = document.createElementNS(ns, "line");
      h.setAttribute("x1", String(x - size));
      h.setAttribute("x2", String(x + size));
      h.setAttribute("y1", String(y));
      h.setAttribute("y2", String(y));
      const w = document.createElementNS(ns, "line");
      w.setAttribute("x1", String(x));
      w.setAttribute("x2", String(x));
      w.setAttribute("y1", String(y - size));
      w.setAttribute("y2", String(y + size));
      g.append(h, w);
      svg.appendChild(g);
    };

    // operator picks on this image
    for (const [pointId, picks] of this.picks) {
      for (const pick of picks) {
        if (pick.imageId !== this.view.imageId || Number.isNaN(pick.u)) continue;
        mark(pick.u, pick.v, pointId === this.view.selectedPointId ? "pick selected" : "pick");
      }
    }

    // server-computed points re-projected into this view (display only)
    for (const [pointId, state] of this.states) {
      if (state.status !== "ok") continue;
      const projected = projectPoint(image.pose, image.intrinsics, [
        state.x!,
        state.y!,
        state.z!,
      ]);
      if (
        !projected ||
        !insideImage(projected.u, projected.v, image.intrinsics.width, image.intrinsics.height)
      ) {
        continue;
      }
      const { x, y } = imageToScreen(t, projected.u, projected.v);
      const circle = document.createElementNS(ns, "circle");
      circle.setAttribute("cx", String(x));
      circle.setAttribute("cy", String(y));
      circle.setAttribute("r", "5");
      circle.setAttribute("class", "computed");
      svg.appendChild(circle);

      if (pointId === this.view.selectedPointId && state.covariance) {
        const ellipse = ellipseForView(
          image.pose,
          image.intrinsics,
          [state.x!, state.y!, state.z!],
          state.covariance,
          ELLIPSE_DISPLAY_SCALE,
        );
        if (ellipse) {
          const node = document.createElementNS(ns, "ellipse");
          const c = imageToScreen(t, ellipse.u, ellipse.v);
          node.setAttribute("cx", String(c.x));
          node.setAttribute("cy", String(c.y));
          node.setAttribute("rx", String(Math.max(2, ellipse.radiusMajor * t.scale)));
          node.setAttribute("ry", String(Math.max(2, ellipse.radiusMinor * t.scale)));
          node.setAttribute(
            "transform",
            `rotate(${(ellipse.angle * 180) / Math.PI} ${c.x} ${c.y})`,
          );
          node.setAttribute("class", "uncertainty");
          svg.appendChild(node);
        }
      }
    }
  }
}

window.addEventListener("DOMContentLoaded", () => {
  void new App().start();
});
