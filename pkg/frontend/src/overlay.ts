// Display-only projection helpers for overlays.
//
// These re-project server-computed results (3D points, covariances) into
// image space so they can be drawn over the photos. They are rendering
// transforms of authoritative server values; no measurement geometry is
// computed here, and nothing derived in this module is ever displayed as
// a coordinate or sigma value.

import type { IntrinsicsDoc, PoseDoc } from "./types.js";

const MIN_DEPTH = 1e-9;

function rotationRows(pose: PoseDoc): number[][] {
  const m = pose.rotation_row_major;
  return [
    [m[0], m[1], m[2]],
    [m[3], m[4], m[5]],
    [m[6], m[7], m[8]],
  ];
}

/** World point to camera frame (world-from-camera rotation transposed). */
function toCameraFrame(pose: PoseDoc, point: number[]): number[] {
  const r = rotationRows(pose);
  const d = [
    point[0] - pose.center[0],
    point[1] - pose.center[1],
    point[2] - pose.center[2],
  ];
  // R^T d: column i of R dotted with d
  return [
    r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
    r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
    r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
  ];
}

/** Pinhole projection of a world point; null when at/behind the camera. */
export function projectPoint(
  pose: PoseDoc,
  intrinsics: IntrinsicsDoc,
  point: number[],
): { u: number; v: number } | null {
  const pc = toCameraFrame(pose, point);
  if (pc[2] <= MIN_DEPTH) return null;
  return {
    u: (intrinsics.fx * pc[0]) / pc[2] + intrinsics.cx,
    v: (intrinsics.fy * pc[1]) / pc[2] + intrinsics.cy,
  };
}

/** Expand the 6 upper-triangle values (xx,xy,xz,yy,yz,zz) to a 3x3. */
export function covarianceFromUpperTriangle(ut: number[]): number[][] {
  return [
    [ut[0], ut[1], ut[2]],
    [ut[1], ut[3], ut[4]],
    [ut[2], ut[4], ut[5]],
  ];
}

export interface EllipseOverlay {
  u: number;
  v: number;
  /** Semi-axes in image pixels. */
  radiusMajor: number;
  radiusMinor: number;
  /** Major-axis angle in radians, measured from +u toward +v. */
  angle: number;
}

/**
 * Image-plane ellipse of a 3D covariance at a world point: propagate the
 * covariance through the projection Jacobian (2x2 = J Q J^T) and
 * eigendecompose in closed form.
 */
export function ellipseForView(
  pose: PoseDoc,
  intrinsics: IntrinsicsDoc,
  center: number[],
  covarianceUpperTriangle: number[],
  scale = 1.0,
): EllipseOverlay | null {
  const pc = toCameraFrame(pose, center);
  const z = pc[2];
  if (z <= MIN_DEPTH) return null;
  const pixel = {
    u: (intrinsics.fx * pc[0]) / z + intrinsics.cx,
    v: (intrinsics.fy * pc[1]) / z + intrinsics.cy,
  };
  // Jacobian of (u, v) wrt the camera-frame point, then compose with R^T.
  const jc = [
    [intrinsics.fx / z, 0, (-intrinsics.fx * pc[0]) / (z * z)],
    [0, intrinsics.fy / z, (-intrinsics.fy * pc[1]) / (z * z)],
  ];
  const r = rotationRows(pose);
  // j = jc @ R^T (2x3); R^T element (k, col) is r[col][k].
  const j: number[][] = [
    [0, 0, 0],
    [0, 0, 0],
  ];
  for (let row = 0; row < 2; row++) {
    for (let col = 0; col < 3; col++) {
      let acc = 0;
      for (let k = 0; k < 3; k++) {
        acc += jc[row][k] * r[col][k];
      }
      j[row][col] = acc;
    }
  }
  const q = covarianceFromUpperTriangle(covarianceUpperTriangle);
  // q2 = j q j^T (2x2 symmetric)
  const jq = [
    [0, 0, 0],
    [0, 0, 0],
  ];
  for (let row = 0; row < 2; row++) {
    for (let col = 0; col < 3; col++) {
      jq[row][col] = j[row][0] * q[0][col] + j[row][1] * q[1][col] + j[row][2] * q[2][col];
    }
  }
  const a = jq[0][0] * j[0][0] + jq[0][1] * j[0][1] + jq[0][2] * j[0][2];
  const b = jq[0][0] * j[1][0] + jq[0][1] * j[1][1] + jq[0][2] * j[1][2];
  const c = jq[1][0] * j[1][0] + jq[1][1] * j[1][1] + jq[1][2] * j[1][2];
  // closed-form eigenvalues of [[a, b], [b, c]]
  const mean = (a + c) / 2;
  const diff = (a - c) / 2;
  const root = Math.sqrt(diff * diff + b * b);
  const eigMajor = Math.max(mean + root, 0);
  const eigMinor = Math.max(mean - root, 0);
  const angle = 0.5 * Math.atan2(2 * b, a - c);
  return {
    u: pixel.u,
    v: pixel.v,
    radiusMajor: scale * Math.sqrt(eigMajor),
    radiusMinor: scale * Math.sqrt(eigMinor),
    angle,
  };
}
