// Typed mirrors of the server's JSON documents. Field names and shapes
// follow the documented API formats exactly; nothing here is computed
// client-side.

export interface IntrinsicsDoc {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  width: number;
  height: number;
}

export interface PoseDoc {
  center: number[];
  rotation_row_major: number[];
}

export interface ProjectImageDoc {
  image_id: string;
  file: string;
  intrinsics: IntrinsicsDoc;
  pose: PoseDoc;
}

export interface ProjectDoc {
  id: string;
  name: string;
  created_at: string;
  images: ProjectImageDoc[];
}

export interface EllipsoidDoc {
  semi_axes: number[];
  directions: number[][];
}

export type PointStatus = "ok" | "insufficient_rays" | "degenerate";

/** Authoritative point state returned by every pick mutation. */
export interface PointStateDoc {
  status: PointStatus;
  point_id: string;
  label: string;
  mode: string;
  n_rays: number;
  x?: number;
  y?: number;
  z?: number;
  sigma0?: number;
  redundancy?: number;
  /** Upper triangle of the covariance: xx, xy, xz, yy, yz, zz. */
  covariance?: number[];
  ellipsoid?: EllipsoidDoc;
}

export interface PickDoc {
  image_id: string;
  u: number;
  v: number;
}

export interface RayObservationDoc {
  origin: number[];
  direction: number[];
  pick: PickDoc | null;
}

export interface ResultDoc {
  point: number[];
  residuals: number[];
  sigma0: number;
  redundancy: number;
  covariance_row_major: number[];
  ray_count: number;
  mode: string;
}

export interface MeasuredPointDoc {
  id: string;
  label: string;
  mode: string;
  degenerate: boolean;
  rays: RayObservationDoc[];
  result: ResultDoc | null;
}

export interface SessionDoc {
  id: string;
  project_id: string;
  created_at: string;
  updated_at: string;
  points: MeasuredPointDoc[];
}

export interface SessionSummaryDoc {
  id: string;
  project_id: string;
  updated_at: string;
  n_points: number;
}
