import type {
  ApiErrorBody,
  Granularity,
  GraphView,
  HealthResponse,
  NodeKind,
  TopicSeries,
  TopicSnapshot,
  TrendMetric,
  TrendSeries,
  VerdictHistogram,
} from "./types.js";

export interface DashboardConfig {
  apiBaseUrl: string;
  /** Bearer token; omit or null when the server runs without auth. */
  token?: string | null;
}

/**
 * Fetched once at startup from a JSON file next to the bundle, so one build
 * can be pointed at different API hosts.
 */
export async function loadConfig(url = "./config.json"): Promise<DashboardConfig> {
  const response = await fetch(url, { method: "GET" });
  if (!response.ok) {
    throw new Error(`config fetch failed: ${response.status}`);
  }
  const raw = (await response.json()) as Partial<DashboardConfig>;
  if (typeof raw.apiBaseUrl !== "string" || raw.apiBaseUrl === "") {
    throw new Error("config.json must set apiBaseUrl");
  }
  return { apiBaseUrl: raw.apiBaseUrl, token: raw.token ?? null };
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
  }
}

export interface WindowQuery {
  from?: string | null;
  to?: string | null;
}

export interface GraphQuery extends WindowQuery {
  minOccurrence?: number;
  topK?: number | null;
  kinds?: NodeKind[] | null;
}

type Params = Record<string, string | number | null | undefined>;

/**
 * Read-only client for /api/v1. Every request goes through get(), which is
 * the only place a fetch happens; the dashboard never issues anything but GET.
 */
export class ApiClient {
  private readonly base: string;
  private readonly token: string | null;

  constructor(config: DashboardConfig) {
    this.base = config.apiBaseUrl.replace(/\/+$/, "");
    this.token = config.token ?? null;
  }

  private async get<T>(path: string, params: Params = {}, signal?: AbortSignal): Promise<T> {
    const url = new URL(this.base + path);
    for (const [key, value] of Object.entries(params)) {
      if (value !== null && value !== undefined && value !== "") {
        url.searchParams.set(key, String(value));
      }
    }
    const headers: Record<string, string> = {};
    if (this.token !== null) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const response = await fetch(url.toString(), { method: "GET", headers, signal });
    if (!response.ok) {
      let body: ApiErrorBody | null = null;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body, fall through to the generic message
      }
      if (body && body.error) {
        throw new ApiError(body.error.status, body.error.code, body.error.message);
      }
      throw new ApiError(response.status, "http_error", `request failed: ${response.status}`);
    }
    return (await response.json()) as T;
  }

  health(signal?: AbortSignal): Promise<HealthResponse> {
    return this.get("/api/v1/health", {}, signal);
  }

  trends(
    metric: TrendMetric,
    query: WindowQuery & { granularity?: Granularity; platform?: string | null },
    signal?: AbortSignal,
  ): Promise<TrendSeries> {
    return this.get(`/api/v1/trends/${metric}`, {
      granularity: query.granularity,
      from: query.from,
      to: query.to,
      platform: query.platform,
    }, signal);
  }

  topics(day: string, signal?: AbortSignal): Promise<TopicSnapshot[]> {
    return this.get("/api/v1/topics", { day }, signal);
  }

  topicEvolution(
    query: WindowQuery & { topicIds?: number[] | null },
    signal?: AbortSignal,
  ): Promise<TopicSeries[]> {
    const ids = query.topicIds;
    return this.get("/api/v1/topics/evolution", {
      topic_ids: ids && ids.length > 0 ? ids.join(",") : undefined,
      from: query.from,
      to: query.to,
    }, signal);
  }

  graph(query: GraphQuery, signal?: AbortSignal): Promise<GraphView> {
    return this.get("/api/v1/graph", {
      min_occurrence: query.minOccurrence,
      top_k: query.topK,
      kinds: query.kinds && query.kinds.length > 0 ? query.kinds.join(",") : undefined,
      from: query.from,
      to: query.to,
    }, signal);
  }

  verdicts(channel: string | null, signal?: AbortSignal): Promise<VerdictHistogram> {
    return this.get("/api/v1/factcheck/verdicts", { channel }, signal);
  }
}
