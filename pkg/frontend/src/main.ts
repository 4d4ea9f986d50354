// Application shell: wires the API client, camera, timeline and sidebar to
// the page. All data arrives over HTTP; nothing here computes layout or
// density, it only asks the server and draws the answer.

import { ApiClient, ApiError } from "./api.js";
import type {
  BBox,
  ContoursResponse,
  DatasetManifest,
  LabelBox,
  MapPoint,
  OverlayCreated,
  PointDetail,
  TimeFrame,
} from "./api.js";
import { Camera, decimate, drawScene, fitCamera, hitTest } from "./render.js";
import { clampWindow, decodeFragment, encodeFragment, initialState, inWindow } from "./state.js";
import type { ViewState } from "./state.js";
import { Timeline } from "./timeline.js";
import { Debouncer, SUMMARY_DEBOUNCE_MS } from "./summary.js";
import { sidebarHtml } from "./sidebar.js";

const REFETCH_DEBOUNCE_MS = 150;
const BBOX_PAD = 0.15;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const canvas = element<HTMLCanvasElement>("map");
const mapWrap = element<HTMLDivElement>("map-wrap");
const ctx = canvas.getContext("2d")!;
const datasetSelect = element<HTMLSelectElement>("dataset-select");
const overlaySelect = element<HTMLSelectElement>("overlay-select");
const overlayToggle = element<HTMLButtonElement>("overlay-toggle");
const resetViewButton = element<HTMLButtonElement>("reset-view");
const zoomReadout = element<HTMLSpanElement>("zoom-readout");
const summaryBar = element<HTMLDivElement>("summary");
const banner = element<HTMLDivElement>("banner");
const bannerText = element<HTMLSpanElement>("banner-text");
const bannerClose = element<HTMLButtonElement>("banner-close");
const notice = element<HTMLDivElement>("notice");
const sidebar = element<HTMLElement>("sidebar");
const playToggle = element<HTMLButtonElement>("play-toggle");
const stepButton = element<HTMLButtonElement>("step-frame");
const frameSlider = element<HTMLInputElement>("frame-slider");
const frameLabel = element<HTMLSpanElement>("frame-label");
const clearWindowButton = element<HTMLButtonElement>("clear-window");

// Same-origin by default; `?api=http://host:port` points the page at an
// API served elsewhere (the server's CORS defaults allow it).
const api = new ApiClient(new URLSearchParams(location.search).get("api") ?? "");
const camera = new Camera();
const timeline = new Timeline();
const state: ViewState = initialState();

let datasets: DatasetManifest[] = [];
let fullExtent: BBox = [-1, -1, 1, 1];
let rawPoints: MapPoint[] = [];
let labels: LabelBox[] = [];
let contoursResp: ContoursResponse | null = null;
let selectedDetail: PointDetail | null = null;

let sceneController: AbortController | null = null;
let summaryController: AbortController | null = null;
const refetchDebounce = new Debouncer(REFETCH_DEBOUNCE_MS);
const summaryDebounce = new Debouncer(SUMMARY_DEBOUNCE_MS);
const overlayCache = new Map<string, OverlayCreated>();
let applyingHash = false;

function viewSize(): [number, number] {
  return [mapWrap.clientWidth, mapWrap.clientHeight];
}

function isAbort(error: unknown): boolean {
  return error instanceof DOMException && error.name === "AbortError";
}

function showBanner(message: string): void {
  bannerText.textContent = message;
  banner.classList.add("visible");
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return `${error.code}: ${error.message}`;
  return error instanceof Error ? error.message : String(error);
}

function draw(): void {
  const [w, h] = viewSize();
  const dpr = window.devicePixelRatio || 1;
  drawScene(
    ctx,
    {
      points: decimate(rawPoints, camera, w, h, dpr),
      labels,
      contours: contoursResp,
      overlay: state.overlayOn && state.overlayDatasetId !== null,
      selectedId: state.selectedId,
    },
    camera,
    w,
    h,
  );
  zoomReadout.textContent = `zoom ${camera.zoom.toFixed(2)}`;
}

function paddedBBox(): BBox {
  const [w, h] = viewSize();
  const [minX, minY, maxX, maxY] = camera.bbox(w, h);
  const padX = (maxX - minX) * BBOX_PAD;
  const padY = (maxY - minY) * BBOX_PAD;
  return [minX - padX, minY - padY, maxX + padX, maxY + padY];
}

function syncFragment(): void {
  state.centerX = camera.centerX;
  state.centerY = camera.centerY;
  state.zoom = camera.zoom;
  applyingHash = true;
  history.replaceState(null, "", `#${encodeFragment(state)}`);
  applyingHash = false;
}

async function ensureOverlay(targetId: string, otherId: string, signal: AbortSignal): Promise<OverlayCreated> {
  const key = `${targetId}\n${otherId}`;
  const cached = overlayCache.get(key);
  if (cached) return cached;
  const created = await api.createOverlay(targetId, otherId, signal);
  overlayCache.set(key, created);
  return created;
}

async function refetchScene(): Promise<void> {
  if (!state.datasetId) return;
  sceneController?.abort();
  const controller = new AbortController();
  sceneController = controller;
  const signal = controller.signal;
  const bbox = paddedBBox();
  const windowQuery = { from: state.window?.from, to: state.window?.to };
  try {
    // in overlay mode the other dataset's projected points ride on top of
    // the target's own, so both routes are fetched and concatenated
    let overlayPromise = null;
    if (state.overlayOn && state.overlayDatasetId) {
      overlayPromise = ensureOverlay(state.datasetId, state.overlayDatasetId, signal).then((ov) =>
        api.overlayPoints(ov.overlay_id, bbox, signal),
      );
    }
    const [pts, lbls, cts, overlayPts] = await Promise.all([
      api.points(state.datasetId, { bbox, ...windowQuery }, signal),
      api.labels(
        state.datasetId,
        { bbox, zoom: Math.max(0, Math.floor(camera.zoom)), ...windowQuery },
        signal,
      ),
      api.contours(state.datasetId, windowQuery, signal),
      overlayPromise,
    ]);
    if (signal.aborted) return;
    rawPoints = overlayPts ? pts.points.concat(overlayPts.points) : pts.points;
    labels = lbls.labels;
    contoursResp = cts;
    // the notice is about the time filter, which only the target obeys
    notice.classList.toggle("visible", state.window !== null && pts.points.length === 0);
    draw();
  } catch (error) {
    if (isAbort(error)) return;
    // keep drawing the last good scene; never blank the canvas on an error
    showBanner(describeError(error));
  }
}

function scheduleRefetch(): void {
  refetchDebounce.schedule(() => void refetchScene());
}

async function refreshSummary(): Promise<void> {
  if (!state.datasetId) return;
  summaryController?.abort();
  const controller = new AbortController();
  summaryController = controller;
  try {
    const response = await api.summary(
      state.datasetId,
      { bbox: paddedBBox(), from: state.window?.from, to: state.window?.to },
      controller.signal,
    );
    summaryBar.textContent = response.summary;
  } catch (error) {
    if (!isAbort(error)) summaryBar.textContent = "summary unavailable";
  }
}

function cameraChanged(): void {
  draw();
  scheduleRefetch();
  summaryDebounce.schedule(() => void refreshSummary());
  syncFragment();
}

// -- selection ---------------------------------------------------------

function clearSelection(): void {
  state.selectedId = null;
  selectedDetail = null;
  sidebar.innerHTML = '<p class="placeholder">Click a point to inspect it.</p>';
  draw();
  syncFragment();
}

async function selectPoint(eventId: string, sourceDataset?: string): Promise<void> {
  if (!state.datasetId) return;
  state.selectedId = eventId;
  draw();
  syncFragment();
  sidebar.innerHTML = '<p class="placeholder">loading…</p>';
  try {
    const detail = await api.pointDetail(sourceDataset ?? state.datasetId, eventId);
    if (state.selectedId !== eventId) return;
    selectedDetail = detail;
    sidebar.innerHTML =
      '<button id="sidebar-close" aria-label="close">✕</button>' + sidebarHtml(detail);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      sidebar.innerHTML =
        '<button id="sidebar-close" aria-label="close">✕</button>' + sidebarHtml(null);
    } else if (!isAbort(error)) {
      showBanner(describeError(error));
    }
  }
}

sidebar.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.id === "sidebar-close") clearSelection();
});

window.addEventListener("keydown", (event) => {
  if (event.key === "Escape") clearSelection();
});

// -- canvas interaction ------------------------------------------------

let pointerDown = false;
let dragging = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (event) => {
  pointerDown = true;
  dragging = false;
  lastX = event.offsetX;
  lastY = event.offsetY;
  canvas.setPointerCapture(event.pointerId);
});

canvas.addEventListener("pointermove", (event) => {
  if (!pointerDown) return;
  const dx = event.offsetX - lastX;
  const dy = event.offsetY - lastY;
  if (!dragging && Math.abs(dx) + Math.abs(dy) < 3) return;
  dragging = true;
  canvas.classList.add("dragging");
  camera.pan(dx, dy);
  lastX = event.offsetX;
  lastY = event.offsetY;
  cameraChanged();
});

canvas.addEventListener("pointerup", (event) => {
  canvas.releasePointerCapture(event.pointerId);
  canvas.classList.remove("dragging");
  const wasDrag = dragging;
  pointerDown = false;
  dragging = false;
  if (wasDrag) return;
  const [w, h] = viewSize();
  const hit = hitTest(rawPoints, camera, event.offsetX, event.offsetY, w, h);
  if (hit) void selectPoint(hit.event_id, hit.source);
  else clearSelection();
});

canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  const [w, h] = viewSize();
  camera.zoomAt(-event.deltaY * 0.002, event.offsetX, event.offsetY, w, h);
  cameraChanged();
});

resetViewButton.addEventListener("click", () => {
  const [w, h] = viewSize();
  fitCamera(camera, fullExtent, w, h);
  cameraChanged();
});

bannerClose.addEventListener("click", () => banner.classList.remove("visible"));

// -- timeline ----------------------------------------------------------

timeline.onFrame((frame: TimeFrame, index: number) => {
  state.window = { from: frame.start, to: frame.end };
  state.frameIndex = index;
  frameSlider.value = String(index);
  frameLabel.textContent = frame.start.slice(0, 7);
  if (selectedDetail && !inWindow(selectedDetail.timestamp, state.window)) clearSelection();
  scheduleRefetch();
  summaryDebounce.schedule(() => void refreshSummary());
  syncFragment();
});

timeline.onPlayChange((playing: boolean) => {
  state.playing = playing;
  playToggle.textContent = playing ? "pause" : "play";
});

playToggle.addEventListener("click", () => {
  if (timeline.isPlaying) timeline.pause();
  else timeline.play();
});

stepButton.addEventListener("click", () => {
  timeline.pause();
  timeline.step();
});

frameSlider.addEventListener("input", () => {
  timeline.pause();
  timeline.seek(parseInt(frameSlider.value, 10) || 0);
});

clearWindowButton.addEventListener("click", () => {
  timeline.reset();
  state.window = null;
  state.frameIndex = 0;
  frameSlider.value = "0";
  frameLabel.textContent = "all time";
  notice.classList.remove("visible");
  scheduleRefetch();
  summaryDebounce.schedule(() => void refreshSummary());
  syncFragment();
});

// -- overlay -----------------------------------------------------------

function syncOverlayControls(): void {
  overlayToggle.disabled = overlaySelect.value === "" && !state.overlayOn;
  overlayToggle.textContent = state.overlayOn ? "overlay on" : "overlay off";
}

overlaySelect.addEventListener("change", () => {
  if (state.overlayOn) {
    state.overlayDatasetId = overlaySelect.value || null;
    state.overlayOn = state.overlayDatasetId !== null;
    scheduleRefetch();
    syncFragment();
  }
  syncOverlayControls();
});

overlayToggle.addEventListener("click", () => {
  if (state.overlayOn) {
    state.overlayOn = false;
  } else if (overlaySelect.value) {
    state.overlayDatasetId = overlaySelect.value;
    state.overlayOn = true;
  }
  syncOverlayControls();
  scheduleRefetch();
  syncFragment();
});

// -- dataset loading ----------------------------------------------------

function extentOf(points: MapPoint[]): BBox {
  if (points.length === 0) return [-1, -1, 1, 1];
  let minX = Infinity;
  let minY = Infinity;
  let maxX = -Infinity;
  let maxY = -Infinity;
  for (const p of points) {
    if (p.x < minX) minX = p.x;
    if (p.y < minY) minY = p.y;
    if (p.x > maxX) maxX = p.x;
    if (p.y > maxY) maxY = p.y;
  }
  return [minX, minY, maxX, maxY];
}

function populateOverlayChoices(): void {
  const current = state.overlayDatasetId ?? "";
  overlaySelect.innerHTML = '<option value="">none</option>';
  for (const manifest of datasets) {
    if (manifest.dataset_id === state.datasetId) continue;
    const option = document.createElement("option");
    option.value = manifest.dataset_id;
    option.textContent = manifest.name;
    overlaySelect.append(option);
  }
  overlaySelect.value = current;
  if (overlaySelect.value !== current) {
    state.overlayDatasetId = null;
    state.overlayOn = false;
  }
  syncOverlayControls();
}

async function selectDataset(datasetId: string, keepCamera: boolean): Promise<void> {
  state.datasetId = datasetId;
  datasetSelect.value = datasetId;
  if (state.overlayDatasetId === datasetId) {
    state.overlayDatasetId = null;
    state.overlayOn = false;
  }
  populateOverlayChoices();
  clearSelectionQuiet();
  try {
    const framesResponse = await api.frames(datasetId);
    timeline.setFrames(framesResponse.frames);
    frameSlider.max = String(Math.max(0, framesResponse.count - 1));
    frameSlider.value = "0";
    frameLabel.textContent = "all time";
    if (framesResponse.count > 0) {
      const span = {
        from: framesResponse.frames[0].start,
        to: framesResponse.frames[framesResponse.count - 1].end,
      };
      state.window = clampWindow(state.window, span);
    }

    const everything = await api.points(datasetId, {
      from: state.window?.from,
      to: state.window?.to,
    });
    fullExtent = extentOf(everything.points);
    rawPoints = everything.points;
    const [w, h] = viewSize();
    if (!keepCamera) fitCamera(camera, fullExtent, w, h);

    if (state.frameIndex > 0 && state.frameIndex < framesResponse.count && !state.window) {
      timeline.seek(state.frameIndex);
    }
    draw();
    await refetchScene();
    await refreshSummary();
    syncFragment();
  } catch (error) {
    if (!isAbort(error)) showBanner(describeError(error));
  }
}

function clearSelectionQuiet(): void {
  state.selectedId = null;
  selectedDetail = null;
  sidebar.innerHTML = '<p class="placeholder">Click a point to inspect it.</p>';
}

datasetSelect.addEventListener("change", () => {
  state.window = null;
  state.frameIndex = 0;
  void selectDataset(datasetSelect.value, false);
});

// -- fragment deep links -------------------------------------------------

window.addEventListener("hashchange", () => {
  if (applyingHash) return;
  void applyFragment(location.hash);
});

async function applyFragment(fragment: string): Promise<void> {
  const next = decodeFragment(fragment);
  const datasetChanged = next.datasetId !== null && next.datasetId !== state.datasetId;
  camera.centerX = next.centerX;
  camera.centerY = next.centerY;
  camera.zoom = next.zoom;
  state.window = next.window;
  state.frameIndex = next.frameIndex;
  state.overlayOn = next.overlayOn;
  state.overlayDatasetId = next.overlayDatasetId;
  if (datasetChanged) {
    await selectDataset(next.datasetId!, true);
  } else {
    draw();
    await refetchScene();
  }
  if (next.selectedId) await selectPoint(next.selectedId);
  syncOverlayControls();
}

// -- boot ----------------------------------------------------------------

function resizeCanvas(): void {
  const [w, h] = viewSize();
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.max(1, Math.round(w * dpr));
  canvas.height = Math.max(1, Math.round(h * dpr));
  ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
  draw();
}

new ResizeObserver(() => {
  resizeCanvas();
  scheduleRefetch();
}).observe(mapWrap);

async function boot(): Promise<void> {
  resizeCanvas();
  const fragment = location.hash;
  const saved = decodeFragment(fragment);
  const hasCamera = new URLSearchParams(fragment.replace(/^#/, "")).has("z");

  try {
    const listing = await api.listDatasets();
    datasets = listing.datasets;
  } catch (error) {
    showBanner(describeError(error));
    return;
  }
  if (datasets.length === 0) {
    showBanner("no datasets on the server yet; build one with the CLI");
    return;
  }

  datasetSelect.innerHTML = "";
  for (const manifest of datasets) {
    const option = document.createElement("option");
    option.value = manifest.dataset_id;
    option.textContent = `${manifest.name} (${manifest.event_count})`;
    datasetSelect.append(option);
  }

  const known = new Set(datasets.map((m) => m.dataset_id));
  const firstId = saved.datasetId && known.has(saved.datasetId)
    ? saved.datasetId
    : datasets[0].dataset_id;

  if (hasCamera && saved.datasetId === firstId) {
    camera.centerX = saved.centerX;
    camera.centerY = saved.centerY;
    camera.zoom = saved.zoom;
    state.window = saved.window;
    state.frameIndex = saved.frameIndex;
    state.overlayOn = saved.overlayOn;
    state.overlayDatasetId =
      saved.overlayDatasetId && known.has(saved.overlayDatasetId) ? saved.overlayDatasetId : null;
    if (!state.overlayDatasetId) state.overlayOn = false;
    await selectDataset(firstId, true);
    if (state.overlayDatasetId) overlaySelect.value = state.overlayDatasetId;
    syncOverlayControls();
    if (saved.selectedId) await selectPoint(saved.selectedId);
  } else {
    await selectDataset(firstId, false);
  }
}

void boot();
