// Point-list panel rows.
//
// A row mirrors the last authoritative server response for its point,
// formatted for display (coordinates and sigma at 3 decimals, meters).
// Nothing in a row is computed locally.

import type { MeasuredPointDoc, PointStateDoc } from "./types.js";

export type RowStatus = "ok" | "insufficient" | "degenerate";

export interface PanelRow {
  pointId: string;
  label: string;
  x: string;
  y: string;
  z: string;
  sigma: string;
  nRays: number;
  status: RowStatus;
}

export function formatMeters(value: number): string {
  return value.toFixed(3);
}

function statusOf(status: PointStateDoc["status"]): RowStatus {
  if (status === "ok") return "ok";
  if (status === "degenerate") return "degenerate";
  return "insufficient";
}

/** Build a row from a mutation response (the authoritative state). */
export function rowFromState(state: PointStateDoc): PanelRow {
  const ok = state.status === "ok";
  return {
    pointId: state.point_id,
    label: state.label,
    x: ok ? formatMeters(state.x!) : "",
    y: ok ? formatMeters(state.y!) : "",
    z: ok ? formatMeters(state.z!) : "",
    sigma: ok ? formatMeters(state.sigma0!) : "",
    nRays: state.n_rays,
    status: statusOf(state.status),
  };
}

/** Build a row from a stored session point (session reload path). */
export function rowFromSessionPoint(point: MeasuredPointDoc): PanelRow {
  if (point.result) {
    return {
      pointId: point.id,
      label: point.label,
      x: formatMeters(point.result.point[0]),
      y: formatMeters(point.result.point[1]),
      z: formatMeters(point.result.point[2]),
      sigma: formatMeters(point.result.sigma0),
      nRays: point.rays.length,
      status: "ok",
    };
  }
  return {
    pointId: point.id,
    label: point.label,
    x: "",
    y: "",
    z: "",
    sigma: "",
    nRays: point.rays.length,
    status: point.degenerate ? "degenerate" : "insufficient",
  };
}
