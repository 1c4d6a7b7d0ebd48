// Typed client for the pose retrieval service. Every score shown in the
// UI comes from these endpoints; nothing is recomputed client-side.

export interface CategoryInfo {
  id: number;
  name: string;
  keypoints: string[];
  // 1-based joint index pairs, as served
  skeleton: [number, number][];
}

export interface EntrySummary {
  person_id: string;
  character: string;
  scene: string;
  area: number;
  num_labeled: number;
}

export interface EntryDetail extends EntrySummary {
  // x, y, visibility for 17 joints
  keypoints: number[];
}

export interface EntriesPage {
  total: number;
  offset: number;
  limit: number;
  entries: EntrySummary[];
}

export interface RankedHit {
  rank: number;
  person_id: string;
  score: number;
  label: string;
  character: string;
  scene: string;
}

export interface RetrievePayload {
  query: string;
  mode: string;
  k: number;
  results: RankedHit[];
}

export interface MetricsPayload {
  mode: string;
  queries: number;
  mean_p1: number;
  mean_p5: number;
  mean_ap: number;
  ap_definition: string;
}

/** The service responded, but not with what we asked for. */
export class ServiceError extends Error {
  constructor(message: string, public readonly status: number) {
    super(message);
    this.name = "ServiceError";
  }
}

export class NotFoundError extends ServiceError {
  constructor(message: string) {
    super(message, 404);
    this.name = "NotFoundError";
  }
}

/** The service could not be reached at all. */
export class NetworkError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NetworkError";
  }
}

/** A successful retrieval plus the exact bytes it arrived as. */
export interface RetrieveResponse {
  payload: RetrievePayload;
  raw: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export type LabelMode = "character" | "scene";

export class ExplorerClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  async category(): Promise<CategoryInfo> {
    return (await this.request<CategoryInfo>("/category")).payload;
  }

  async entries(offset = 0, limit = 50): Promise<EntriesPage> {
    const page = await this.request<EntriesPage>(`/entries?offset=${offset}&limit=${limit}`);
    return page.payload;
  }

  async entry(personId: string): Promise<EntryDetail> {
    const path = `/entries/${encodeURIComponent(personId)}`;
    return (await this.request<EntryDetail>(path)).payload;
  }

  async metrics(mode: LabelMode, k?: number): Promise<MetricsPayload> {
    const suffix = k === undefined ? "" : `&k=${k}`;
    const path = `/metrics/retrieval?mode=${mode}${suffix}`;
    return (await this.request<MetricsPayload>(path)).payload;
  }

  /** Rank neighbors of an indexed person. */
  async retrieveByPerson(personId: string, k: number, mode: LabelMode): Promise<RetrieveResponse> {
    const person = encodeURIComponent(personId);
    return this.request(`/retrieve?person=${person}&k=${k}&mode=${mode}`);
  }

  /** Rank neighbors of an ad-hoc pose given as 51 flat numbers. */
  async retrieveByPose(keypoints: number[], k: number, mode: LabelMode): Promise<RetrieveResponse> {
    const body = keypoints.join(" ");
    return this.request(`/retrieve?k=${k}&mode=${mode}`, { method: "POST", body });
  }

  private async request<T>(path: string, init?: RequestInit): Promise<{ payload: T; raw: string }> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkError(`service unreachable: ${(err as Error).message}`);
    }
    const raw = await response.text();
    if (!response.ok) {
      const message = errorMessage(raw) ?? `request failed with status ${response.status}`;
      if (response.status === 404) throw new NotFoundError(message);
      throw new ServiceError(message, response.status);
    }
    return { payload: JSON.parse(raw) as T, raw };
  }
}

function errorMessage(raw: string): string | null {
  try {
    const doc: unknown = JSON.parse(raw);
    if (typeof doc === "object" && doc !== null && "error" in doc) {
      const msg = (doc as { error: unknown }).error;
      if (typeof msg === "string") return msg;
    }
    return null;
  } catch {
    return null;
  }
}
