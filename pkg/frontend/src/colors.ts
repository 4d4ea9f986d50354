// Kind palette. Mirrors the server's KindStyle table; if a new kind ever
// shows up in the API we fall back to grey rather than dropping the point.

export const KIND_COLORS: Record<string, string> = {
  watched: "#ec4899",
  searched: "#a855f7",
  watched_after_search: "#eab308",
  ad: "#22c55e",
  short: "#3b82f6",
  listened: "#14b8a6",
};

export const FALLBACK_COLOR = "#9ca3af";

// Overlay mode recolors by source dataset instead of by kind.
export const OVERLAY_TARGET_COLOR = "#22c55e";
export const OVERLAY_OTHER_COLOR = "#a855f7";

export function kindColor(kind: string): string {
  return KIND_COLORS[kind] ?? FALLBACK_COLOR;
}
