import { describe, expect, it } from "vitest";
import type { MapPoint } from "../src/api.js";
import { BASE_SCALE, Camera, decimate, fitCamera, hitTest } from "../src/render.js";
import { MAX_ZOOM } from "../src/state.js";

const W = 800;
const H = 600;

function point(id: string, x: number, y: number): MapPoint {
  return { event_id: id, x, y, kind: "watched", platform: "youtube" };
}

describe("camera projection", () => {
  it("puts the camera center at the canvas center", () => {
    const camera = new Camera(3, -2, 1);
    expect(camera.worldToScreen(3, -2, W, H)).toEqual([W / 2, H / 2]);
  });

  it("round-trips world -> screen -> world", () => {
    const camera = new Camera(1.5, 2.5, 2.25);
    const [sx, sy] = camera.worldToScreen(-4.75, 3.125, W, H);
    const [wx, wy] = camera.screenToWorld(sx, sy, W, H);
    expect(wx).toBeCloseTo(-4.75, 9);
    expect(wy).toBeCloseTo(3.125, 9);
  });

  it("flips y so layout-up is screen-up", () => {
    const camera = new Camera(0, 0, 0);
    const [, syHigh] = camera.worldToScreen(0, 5, W, H);
    const [, syLow] = camera.worldToScreen(0, -5, W, H);
    expect(syHigh).toBeLessThan(syLow);
  });

  it("doubles the scale per zoom step", () => {
    expect(new Camera(0, 0, 1).scale).toBeCloseTo(BASE_SCALE * 2, 9);
    expect(new Camera(0, 0, 3).scale).toBeCloseTo(BASE_SCALE * 8, 9);
  });

  it("keeps the point under the cursor fixed while zooming", () => {
    const camera = new Camera(0, 0, 0);
    const px = 123;
    const py = 456;
    const before = camera.screenToWorld(px, py, W, H);
    camera.zoomAt(1.5, px, py, W, H);
    const after = camera.screenToWorld(px, py, W, H);
    expect(after[0]).toBeCloseTo(before[0], 9);
    expect(after[1]).toBeCloseTo(before[1], 9);
  });

  it("clamps zoomAt at the zoom limits", () => {
    const camera = new Camera(0, 0, 0);
    camera.zoomAt(-5, W / 2, H / 2, W, H);
    expect(camera.zoom).toBe(0);
    camera.zoomAt(99, W / 2, H / 2, W, H);
    expect(camera.zoom).toBe(MAX_ZOOM);
  });

  it("pans opposite to the drag so content follows the pointer", () => {
    const camera = new Camera(0, 0, 0);
    const anchor = camera.worldToScreen(1, 1, W, H);
    camera.pan(40, -25);
    const moved = camera.worldToScreen(1, 1, W, H);
    expect(moved[0]).toBeCloseTo(anchor[0] + 40, 9);
    expect(moved[1]).toBeCloseTo(anchor[1] - 25, 9);
  });

  it("reports the visible bbox symmetric about the center", () => {
    const camera = new Camera(2, -1, 0);
    const [minX, minY, maxX, maxY] = camera.bbox(W, H);
    expect((minX + maxX) / 2).toBeCloseTo(2, 9);
    expect((minY + maxY) / 2).toBeCloseTo(-1, 9);
    expect(maxX - minX).toBeCloseTo(W / BASE_SCALE, 9);
    expect(maxY - minY).toBeCloseTo(H / BASE_SCALE, 9);
  });
});

describe("fitCamera", () => {
  it("centers on the extent and keeps it fully visible", () => {
    const camera = new Camera();
    fitCamera(camera, [-10, -5, 30, 15], W, H);
    expect(camera.centerX).toBeCloseTo(10, 9);
    expect(camera.centerY).toBeCloseTo(5, 9);
    const [minX, minY, maxX, maxY] = camera.bbox(W, H);
    expect(minX).toBeLessThanOrEqual(-10);
    expect(minY).toBeLessThanOrEqual(-5);
    expect(maxX).toBeGreaterThanOrEqual(30);
    expect(maxY).toBeGreaterThanOrEqual(15);
  });

  it("survives a degenerate single-point extent", () => {
    const camera = new Camera();
    fitCamera(camera, [2, 2, 2, 2], W, H);
    expect(camera.centerX).toBe(2);
    expect(Number.isFinite(camera.zoom)).toBe(true);
  });
});

describe("decimation", () => {
  it("keeps the first point in each physical pixel cell", () => {
    const camera = new Camera(0, 0, 0);
    const step = 0.1 / BASE_SCALE;
    const crowd = Array.from({ length: 50 }, (_, i) => point(`p${i}`, i * step, 0));
    const kept = decimate(crowd, camera, W, H, 1);
    expect(kept.length).toBeLessThan(crowd.length);
    expect(kept[0].event_id).toBe("p0");
  });

  it("keeps everything once points are more than a pixel apart", () => {
    const camera = new Camera(0, 0, 0);
    const spread = Array.from({ length: 50 }, (_, i) => point(`p${i}`, i * (2 / BASE_SCALE), 0));
    expect(decimate(spread, camera, W, H, 1).length).toBe(spread.length);
  });

  it("keeps more points on a high-density display", () => {
    const camera = new Camera(0, 0, 0);
    const step = 0.6 / BASE_SCALE;
    const crowd = Array.from({ length: 50 }, (_, i) => point(`p${i}`, i * step, 0));
    const at1x = decimate(crowd, camera, W, H, 1).length;
    const at2x = decimate(crowd, camera, W, H, 2).length;
    expect(at2x).toBeGreaterThan(at1x);
  });
});

describe("hit testing", () => {
  it("finds the nearest point within the radius", () => {
    const camera = new Camera(0, 0, 0);
    const pts = [point("far", 5, 5), point("near", 0.05, 0)];
    const [px, py] = camera.worldToScreen(0, 0, W, H);
    expect(hitTest(pts, camera, px, py, W, H)?.event_id).toBe("near");
  });

  it("returns null when nothing is close enough", () => {
    const camera = new Camera(0, 0, 0);
    const pts = [point("far", 5, 5)];
    const [px, py] = camera.worldToScreen(0, 0, W, H);
    expect(hitTest(pts, camera, px, py, W, H)).toBeNull();
  });
});
