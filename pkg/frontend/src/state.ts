// View state and its URL-fragment encoding. The fragment is the only
// persistence layer: reloading a deep link restores dataset, camera,
// window, overlay and selection. Playback never round-trips.

export interface TimeWindow {
  from: string;
  to: string;
}

export interface ViewState {
  datasetId: string | null;
  centerX: number;
  centerY: number;
  zoom: number;
  window: TimeWindow | null;
  overlayOn: boolean;
  overlayDatasetId: string | null;
  selectedId: string | null;
  playing: boolean;
  frameIndex: number;
}

export const MAX_ZOOM = 8;

export function initialState(): ViewState {
  return {
    datasetId: null,
    centerX: 0,
    centerY: 0,
    zoom: 0,
    window: null,
    overlayOn: false,
    overlayDatasetId: null,
    selectedId: null,
    playing: false,
    frameIndex: 0,
  };
}

export function clampZoom(zoom: number): number {
  if (!Number.isFinite(zoom)) return 0;
  return Math.min(MAX_ZOOM, Math.max(0, zoom));
}

/** Clip a window to the dataset span; null when the overlap is empty. */
export function clampWindow(window: TimeWindow | null, span: TimeWindow): TimeWindow | null {
  if (!window) return null;
  const from = window.from > span.from ? window.from : span.from;
  const to = window.to < span.to ? window.to : span.to;
  if (from >= to) return null;
  return { from, to };
}

/**
 * Half-open window test on ISO-8601 instants. Timestamps from the API all
 * carry the same UTC offset, so string order is time order.
 */
export function inWindow(timestamp: string, window: TimeWindow | null): boolean {
  if (!window) return true;
  return timestamp >= window.from && timestamp < window.to;
}

const FLOAT_DIGITS = 5;

export function encodeFragment(state: ViewState): string {
  const parts = new URLSearchParams();
  if (state.datasetId) parts.set("d", state.datasetId);
  parts.set("x", state.centerX.toFixed(FLOAT_DIGITS));
  parts.set("y", state.centerY.toFixed(FLOAT_DIGITS));
  parts.set("z", state.zoom.toFixed(2));
  if (state.window) {
    parts.set("from", state.window.from);
    parts.set("to", state.window.to);
  }
  if (state.overlayOn) parts.set("ovon", "1");
  if (state.overlayDatasetId) parts.set("ov", state.overlayDatasetId);
  if (state.selectedId) parts.set("sel", state.selectedId);
  if (state.frameIndex > 0) parts.set("f", String(state.frameIndex));
  return parts.toString();
}

export function decodeFragment(fragment: string): ViewState {
  const state = initialState();
  const parts = new URLSearchParams(fragment.replace(/^#/, ""));
  state.datasetId = parts.get("d");
  state.centerX = parseFloatOr(parts.get("x"), 0);
  state.centerY = parseFloatOr(parts.get("y"), 0);
  state.zoom = clampZoom(parseFloatOr(parts.get("z"), 0));
  const from = parts.get("from");
  const to = parts.get("to");
  if (from && to && from < to) state.window = { from, to };
  state.overlayOn = parts.get("ovon") === "1";
  state.overlayDatasetId = parts.get("ov");
  state.selectedId = parts.get("sel");
  const frame = parseInt(parts.get("f") ?? "", 10);
  if (Number.isFinite(frame) && frame > 0) state.frameIndex = frame;
  return state;
}

function parseFloatOr(raw: string | null, fallback: number): number {
  if (raw === null) return fallback;
  const value = parseFloat(raw);
  return Number.isFinite(value) ? value : fallback;
}
