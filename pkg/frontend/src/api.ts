// Typed client for the tracemap HTTP API. One function per route, no
// caching here; callers pass an AbortSignal when a request can be
// superseded.

export interface DatasetManifest {
  dataset_id: string;
  name: string;
  platforms: string[];
  event_count: number;
  time_min: string;
  time_max: string;
  provider_id: string;
  dim: number;
}

export interface MapPoint {
  event_id: string;
  x: number;
  y: number;
  kind: string;
  platform: string;
  // set only on overlay points: the dataset the event was projected from
  source?: string;
}

export interface PointsResponse {
  dataset_id: string;
  count: number;
  points: MapPoint[];
}

export interface LabelBox {
  label: string;
  rank: number;
  zoom_min: number;
  anchor: [number, number];
  box: [number, number, number, number];
}

export interface LabelsResponse {
  dataset_id: string;
  zoom: number;
  labels: LabelBox[];
}

export interface ContoursResponse {
  dataset_id: string;
  levels: number[];
  contours: [number, number][][][];
}

export interface PointDetail {
  event_id: string;
  title: string;
  url: string | null;
  channel_or_artist: string | null;
  kind: string;
  platform: string;
  timestamp: string;
  text_payload: string;
  thumbnail_url: string | null;
  position: [number, number];
  topics: string[];
}

export interface SummaryResponse {
  dataset_id: string;
  summary: string;
  seed: number;
}

export interface TimeFrame {
  start: string;
  end: string;
}

export interface FramesResponse {
  dataset_id: string;
  step: string;
  count: number;
  frames: TimeFrame[];
}

export interface OverlayCreated {
  overlay_id: string;
  target_id: string;
  other_id: string;
  count: number;
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type BBox = [number, number, number, number];

export interface ViewQuery {
  bbox?: BBox;
  from?: string;
  to?: string;
  zoom?: number;
}

export function buildQuery(params: Record<string, string | number | undefined>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined) search.set(key, String(value));
  }
  const encoded = search.toString();
  return encoded ? `?${encoded}` : "";
}

export function bboxParam(bbox: BBox | undefined): string | undefined {
  if (!bbox) return undefined;
  return bbox.map((v) => v.toPrecision(9)).join(",");
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "HttpError";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = typeof body.message === "string" ? body.message : message;
    }
  } catch {
    // non-JSON error body, keep the status line
  }
  return new ApiError(code, response.status, message);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    const response = await fetch(this.base + path, { signal });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  listDatasets(signal?: AbortSignal): Promise<{ datasets: DatasetManifest[] }> {
    return this.get("/datasets", signal);
  }

  dataset(id: string, signal?: AbortSignal): Promise<DatasetManifest> {
    return this.get(`/datasets/${encodeURIComponent(id)}`, signal);
  }

  points(id: string, query: ViewQuery = {}, signal?: AbortSignal): Promise<PointsResponse> {
    const qs = buildQuery({ bbox: bboxParam(query.bbox), from: query.from, to: query.to });
    return this.get(`/datasets/${encodeURIComponent(id)}/points${qs}`, signal);
  }

  labels(id: string, query: ViewQuery = {}, signal?: AbortSignal): Promise<LabelsResponse> {
    const qs = buildQuery({
      bbox: bboxParam(query.bbox),
      zoom: query.zoom,
      from: query.from,
      to: query.to,
    });
    return this.get(`/datasets/${encodeURIComponent(id)}/labels${qs}`, signal);
  }

  contours(id: string, query: ViewQuery = {}, signal?: AbortSignal): Promise<ContoursResponse> {
    const qs = buildQuery({ from: query.from, to: query.to });
    return this.get(`/datasets/${encodeURIComponent(id)}/contours${qs}`, signal);
  }

  pointDetail(id: string, eventId: string, signal?: AbortSignal): Promise<PointDetail> {
    return this.get(
      `/datasets/${encodeURIComponent(id)}/points/${encodeURIComponent(eventId)}`,
      signal,
    );
  }

  summary(id: string, query: ViewQuery = {}, signal?: AbortSignal): Promise<SummaryResponse> {
    const qs = buildQuery({ bbox: bboxParam(query.bbox), from: query.from, to: query.to });
    return this.get(`/datasets/${encodeURIComponent(id)}/summary${qs}`, signal);
  }

  frames(id: string, signal?: AbortSignal): Promise<FramesResponse> {
    return this.get(`/datasets/${encodeURIComponent(id)}/frames${buildQuery({ step: "month" })}`, signal);
  }

  createOverlay(targetId: string, otherId: string, signal?: AbortSignal): Promise<OverlayCreated> {
    return this.post("/overlays", { target_id: targetId, other_id: otherId }, signal);
  }

  overlayPoints(overlayId: string, bbox?: BBox, signal?: AbortSignal): Promise<PointsResponse> {
    const qs = buildQuery({ bbox: bboxParam(bbox) });
    return this.get(`/overlays/${encodeURIComponent(overlayId)}/points${qs}`, signal);
  }
}
