/**
 * Typed client for the urbanscape service REST v1.
 *
 * The UI never computes image semantics locally; every state change comes
 * back from one of these calls.
 */

export interface SegmentSummary {
  id: number;
  class: string;
  category: string;
  bbox: [number, number, number, number];
  pixel_count: number;
}

export interface CreateResponse {
  id: string;
  state: string;
}

export interface SegmentResponse {
  state: string;
  segments: SegmentSummary[];
}

export interface SelectResponse {
  state: string;
  segment: SegmentSummary;
}

export interface MaskResponse {
  state: string;
  mask: string;
  radius: number;
  sigma: number;
}

export interface ReconstructResponse {
  state: string;
  image: string;
  index: number;
}

export interface UndoResponse {
  state: string;
  history_depth: number;
}

export interface ExportedFile {
  path: string;
  kind: string;
  sha256: string;
  pixel_sha256: string | null;
}

export interface ExportManifest {
  session_id: string;
  directory: string;
  state: string;
  files: ExportedFile[];
}

export interface ReconstructParams {
  prompt: string;
  seed: number;
  guidance?: number;
  strength?: number;
  steps?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "unknown";
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body ?? {}),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ ok: boolean; backends: Record<string, string> }> {
    return this.getJson("/v1/health");
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  createSession(imageBase64: string): Promise<CreateResponse> {
    return this.postJson("/v1/sessions", { image: imageBase64 });
  }

  segment(sessionId: string): Promise<SegmentResponse> {
    return this.postJson(`/v1/sessions/${sessionId}/segment`, {});
  }

  select(sessionId: string, x: number, y: number): Promise<SelectResponse> {
    return this.postJson(`/v1/sessions/${sessionId}/select`, { x, y });
  }

  prepareMask(sessionId: string, radius?: number, sigma?: number): Promise<MaskResponse> {
    const body: Record<string, number> = {};
    if (radius !== undefined) body.radius = radius;
    if (sigma !== undefined) body.sigma = sigma;
    return this.postJson(`/v1/sessions/${sessionId}/mask`, body);
  }

  reconstruct(sessionId: string, params: ReconstructParams): Promise<ReconstructResponse> {
    return this.postJson(`/v1/sessions/${sessionId}/reconstruct`, params);
  }

  undo(sessionId: string): Promise<UndoResponse> {
    return this.postJson(`/v1/sessions/${sessionId}/undo`, {});
  }

  exportProject(sessionId: string): Promise<ExportManifest> {
    return this.postJson(`/v1/sessions/${sessionId}/export`, {});
  }

  overlayUrl(sessionId: string, alpha = 0.5): string {
    return `${this.baseUrl}/v1/sessions/${sessionId}/overlay?alpha=${alpha}`;
  }

  imageUrl(sessionId: string, index: number): string {
    return `${this.baseUrl}/v1/sessions/${sessionId}/image/${index}`;
  }

  async fetchRaster(pathOrUrl: string): Promise<ArrayBuffer> {
    const url = pathOrUrl.startsWith("http") ? pathOrUrl : `${this.baseUrl}${pathOrUrl}`;
    const response = await this.fetchImpl(url);
    if (!response.ok) await parseError(response);
    return response.arrayBuffer();
  }
}
