// Viewport state and pan/zoom transform math.
//
// Screen coordinates are pixels inside the viewport element; image
// coordinates use the measurement convention (origin at the top-left
// pixel corner, u right, v down, sub-pixel resolution). Picks sent to
// the server are always image coordinates, independent of the current
// zoom.

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export interface ViewState {
  projectId: string | null;
  imageId: string | null;
  transform: ViewTransform;
  sessionId: string | null;
  selectedPointId: string | null;
}

export const MIN_SCALE = 0.02;
export const MAX_SCALE = 200;
/** Fraction of the image that must stay inside the viewport when panning. */
const VISIBLE_MARGIN = 24;

export function initialViewState(): ViewState {
  return {
    projectId: null,
    imageId: null,
    transform: { scale: 1, offsetX: 0, offsetY: 0 },
    sessionId: null,
    selectedPointId: null,
  };
}

export function imageToScreen(
  t: ViewTransform,
  u: number,
  v: number,
): { x: number; y: number } {
  return { x: u * t.scale + t.offsetX, y: v * t.scale + t.offsetY };
}

export function screenToImage(
  t: ViewTransform,
  x: number,
  y: number,
): { u: number; v: number } {
  return { u: (x - t.offsetX) / t.scale, v: (y - t.offsetY) / t.scale };
}

/** Transform that centers the whole image in the viewport. */
export function fitTransform(
  imageWidth: number,
  imageHeight: number,
  viewWidth: number,
  viewHeight: number,
): ViewTransform {
  const scale = Math.max(
    MIN_SCALE,
    Math.min(viewWidth / imageWidth, viewHeight / imageHeight),
  );
  return {
    scale,
    offsetX: (viewWidth - imageWidth * scale) / 2,
    offsetY: (viewHeight - imageHeight * scale) / 2,
  };
}

/**
 * Zoom by `factor` keeping the image point under (x, y) fixed on screen.
 * Scale stays positive and within [MIN_SCALE, MAX_SCALE].
 */
export function zoomAt(
  t: ViewTransform,
  x: number,
  y: number,
  factor: number,
): ViewTransform {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, t.scale * factor));
  const applied = scale / t.scale;
  return {
    scale,
    offsetX: x - (x - t.offsetX) * applied,
    offsetY: y - (y - t.offsetY) * applied,
  };
}

export function panBy(t: ViewTransform, dx: number, dy: number): ViewTransform {
  return { scale: t.scale, offsetX: t.offsetX + dx, offsetY: t.offsetY + dy };
}

/**
 * Clamp the offsets so at least VISIBLE_MARGIN screen pixels of the image
 * remain inside the viewport in each axis.
 */
export function clampPan(
  t: ViewTransform,
  imageWidth: number,
  imageHeight: number,
  viewWidth: number,
  viewHeight: number,
): ViewTransform {
  const w = imageWidth * t.scale;
  const h = imageHeight * t.scale;
  const margin = Math.min(VISIBLE_MARGIN, w, h);
  return {
    scale: t.scale,
    offsetX: Math.min(viewWidth - margin, Math.max(margin - w, t.offsetX)),
    offsetY: Math.min(viewHeight - margin, Math.max(margin - h, t.offsetY)),
  };
}

export function insideImage(
  u: number,
  v: number,
  imageWidth: number,
  imageHeight: number,
): boolean {
  return u >= 0 && u <= imageWidth && v >= 0 && v <= imageHeight;
}

/** Sub-pixel cursor readout string, e.g. "412.25, 300.75 px". */
export function cursorReadout(u: number, v: number): string {
  return `${u.toFixed(2)}, ${v.toFixed(2)} px`;
}
