// Canvas scene: camera math, decimation, hit testing, and the draw pass.
// Everything geometric stays in layout units until the last moment; the
// server owns all vector math, this file only projects it.

import { kindColor, OVERLAY_TARGET_COLOR, OVERLAY_OTHER_COLOR } from "./colors.js";
import type { BBox, ContoursResponse, LabelBox, MapPoint } from "./api.js";
import { clampZoom } from "./state.js";

// Pixels per layout unit at zoom 0. Each zoom step doubles it. Kept small
// so zoom 0 can hold an entire layout; fitCamera picks the real start zoom.
export const BASE_SCALE = 4;

export const POINT_RADIUS_PX = 2.5;

export class Camera {
  constructor(
    public centerX = 0,
    public centerY = 0,
    public zoom = 0,
  ) {}

  get scale(): number {
    return BASE_SCALE * Math.pow(2, this.zoom);
  }

  // Screen y grows downward, layout y grows upward.
  worldToScreen(x: number, y: number, width: number, height: number): [number, number] {
    return [
      width / 2 + (x - this.centerX) * this.scale,
      height / 2 - (y - this.centerY) * this.scale,
    ];
  }

  screenToWorld(px: number, py: number, width: number, height: number): [number, number] {
    return [
      this.centerX + (px - width / 2) / this.scale,
      this.centerY - (py - height / 2) / this.scale,
    ];
  }

  bbox(width: number, height: number): BBox {
    const halfW = width / 2 / this.scale;
    const halfH = height / 2 / this.scale;
    return [this.centerX - halfW, this.centerY - halfH, this.centerX + halfW, this.centerY + halfH];
  }

  pan(dxPx: number, dyPx: number): void {
    this.centerX -= dxPx / this.scale;
    this.centerY += dyPx / this.scale;
  }

  /** Zoom by `delta` steps keeping the world point under (px, py) fixed. */
  zoomAt(delta: number, px: number, py: number, width: number, height: number): void {
    const [wx, wy] = this.screenToWorld(px, py, width, height);
    this.zoom = clampZoom(this.zoom + delta);
    const s = this.scale;
    this.centerX = wx - (px - width / 2) / s;
    this.centerY = wy + (py - height / 2) / s;
  }
}

/** Center and zoom the camera so `extent` fills the canvas with margin. */
export function fitCamera(camera: Camera, extent: BBox, width: number, height: number): void {
  const [minX, minY, maxX, maxY] = extent;
  camera.centerX = (minX + maxX) / 2;
  camera.centerY = (minY + maxY) / 2;
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const fill = 0.9;
  const scale = Math.min((width * fill) / spanX, (height * fill) / spanY);
  camera.zoom = clampZoom(Math.log2(scale / BASE_SCALE));
}

/**
 * Drop points closer than one physical pixel to an already kept one.
 * First point wins inside each pixel cell, so the result is stable for a
 * fixed point order and camera.
 */
export function decimate(
  points: MapPoint[],
  camera: Camera,
  width: number,
  height: number,
  dpr: number,
): MapPoint[] {
  const cell = 1 / Math.max(dpr, 1e-9);
  const seen = new Set<number>();
  const kept: MapPoint[] = [];
  for (const point of points) {
    const [px, py] = camera.worldToScreen(point.x, point.y, width, height);
    const key = Math.floor(px / cell) * 65536 + Math.floor(py / cell);
    if (seen.has(key)) continue;
    seen.add(key);
    kept.push(point);
  }
  return kept;
}

/** Topmost point within `radiusPx` of the cursor, or null. */
export function hitTest(
  points: MapPoint[],
  camera: Camera,
  px: number,
  py: number,
  width: number,
  height: number,
  radiusPx = 6,
): MapPoint | null {
  let best: MapPoint | null = null;
  let bestDist = radiusPx * radiusPx;
  for (const point of points) {
    const [sx, sy] = camera.worldToScreen(point.x, point.y, width, height);
    const d = (sx - px) * (sx - px) + (sy - py) * (sy - py);
    if (d <= bestDist) {
      best = point;
      bestDist = d;
    }
  }
  return best;
}

export interface Scene {
  points: MapPoint[];
  labels: LabelBox[];
  contours: ContoursResponse | null;
  overlay: boolean;
  selectedId: string | null;
}

const CONTOUR_STROKE = "rgba(100, 116, 139, 0.45)";
const LABEL_FONT = "12px system-ui, sans-serif";
const LABEL_COLOR = "#e2e8f0";
const LABEL_HALO = "rgba(15, 23, 42, 0.85)";
const SELECT_RING = "#f8fafc";

export function drawScene(
  ctx: CanvasRenderingContext2D,
  scene: Scene,
  camera: Camera,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);

  if (scene.contours) {
    ctx.strokeStyle = CONTOUR_STROKE;
    ctx.lineWidth = 1;
    for (const level of scene.contours.contours) {
      for (const path of level) {
        if (path.length < 2) continue;
        ctx.beginPath();
        for (let i = 0; i < path.length; i++) {
          const [sx, sy] = camera.worldToScreen(path[i][0], path[i][1], width, height);
          if (i === 0) ctx.moveTo(sx, sy);
          else ctx.lineTo(sx, sy);
        }
        ctx.stroke();
      }
    }
  }

  for (const point of scene.points) {
    const [sx, sy] = camera.worldToScreen(point.x, point.y, width, height);
    if (sx < -4 || sy < -4 || sx > width + 4 || sy > height + 4) continue;
    // overlay points carry their origin dataset in `source`; the target's
    // own points come from the plain points route and have none
    ctx.fillStyle = scene.overlay
      ? point.source
        ? OVERLAY_OTHER_COLOR
        : OVERLAY_TARGET_COLOR
      : kindColor(point.kind);
    ctx.beginPath();
    ctx.arc(sx, sy, POINT_RADIUS_PX, 0, Math.PI * 2);
    ctx.fill();
  }

  if (scene.selectedId) {
    const selected = scene.points.find((p) => p.event_id === scene.selectedId);
    if (selected) {
      const [sx, sy] = camera.worldToScreen(selected.x, selected.y, width, height);
      ctx.strokeStyle = SELECT_RING;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(sx, sy, POINT_RADIUS_PX + 4, 0, Math.PI * 2);
      ctx.stroke();
    }
  }

  // Labels come pre-placed: the server already resolved occlusion, so we
  // draw every box it returned and never re-layout client side.
  ctx.font = LABEL_FONT;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const label of scene.labels) {
    const [ax, ay] = camera.worldToScreen(label.anchor[0], label.anchor[1], width, height);
    ctx.fillStyle = LABEL_HALO;
    const metrics = ctx.measureText(label.label);
    ctx.fillRect(ax - metrics.width / 2 - 4, ay - 10, metrics.width + 8, 20);
    ctx.fillStyle = LABEL_COLOR;
    ctx.fillText(label.label, ax, ay);
  }
}
