// Payload types for the /api/v1 endpoints the dashboard consumes.

export const VERDICT_CATEGORIES = [
  "False",
  "Mostly false",
  "Half true",
  "Mostly true",
  "True",
] as const;

export const NODE_KINDS = ["actor", "organization", "hashtag", "topic"] as const;

export const EDGE_KINDS = ["intentional", "inferred", "passive_mutual"] as const;

export const TREND_LABELS = {
  sentiment: ["negative", "neutral", "positive"],
  hate: ["hate", "normal"],
} as const;

export type VerdictCategory = (typeof VERDICT_CATEGORIES)[number];
export type NodeKind = (typeof NODE_KINDS)[number];
export type EdgeKind = (typeof EDGE_KINDS)[number];
export type TrendMetric = keyof typeof TREND_LABELS;
export type Granularity = "day" | "week";

export interface HealthResponse {
  status: "ok";
  schema_version: number;
}

export interface TrendPoint {
  period_start: string;
  counts: Record<string, number>;
  total: number;
}

export interface TrendSeries {
  metric: TrendMetric;
  granularity: Granularity;
  points: TrendPoint[];
}

export interface TopicSnapshot {
  day: string;
  topic_id: number;
  size: number;
  terms: [string, number][];
  doc_ids: string[];
}

export interface TopicPoint {
  day: string;
  size: number;
}

export interface TopicSeries {
  topic_id: number;
  points: TopicPoint[];
}

export interface GraphNode {
  id: string;
  kind: NodeKind;
  display_name: string;
  occurrence_count: number;
  centrality: number;
}

export interface GraphEdge {
  source: string;
  target: string;
  kind: EdgeKind;
  weight: number;
  directed: boolean;
}

export interface GraphView {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface VerdictHistogram {
  channel: string | null;
  counts: Record<VerdictCategory, number>;
  total: number;
}

export interface ApiErrorBody {
  error: {
    status: number;
    code: string;
    message: string;
  };
}

/** What a view knows about its data between state changes. */
export type Resource<T> =
  | { status: "loading" }
  | { status: "ok"; data: T }
  | { status: "error"; message: string };

export const LOADING: Resource<never> = { status: "loading" };

export function ok<T>(data: T): Resource<T> {
  return { status: "ok", data };
}

export function failed(message: string): Resource<never> {
  return { status: "error", message };
}
