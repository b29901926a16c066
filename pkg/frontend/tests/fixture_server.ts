/**
 * Canned /api/v1 server for contract tests. Serves realistic payloads,
 * records every request it sees, and refuses anything that is not a GET,
 * so the suite can prove the dashboard never mutates server state.
 */
import { createServer, type Server } from "node:http";
import type { AddressInfo } from "node:net";
import type { GraphView, TopicSeries, TopicSnapshot, TrendSeries, VerdictHistogram } from "../src/types.js";

export const TREND_SENTIMENT: TrendSeries = {
  metric: "sentiment",
  granularity: "day",
  points: [
    { period_start: "2025-03-01", counts: { negative: 4, neutral: 7, positive: 2 }, total: 13 },
    { period_start: "2025-03-02", counts: { negative: 6, neutral: 5, positive: 3 }, total: 14 },
    { period_start: "2025-03-03", counts: { negative: 2, neutral: 8, positive: 5 }, total: 15 },
  ],
};

export const TREND_HATE: TrendSeries = {
  metric: "hate",
  granularity: "day",
  points: [
    { period_start: "2025-03-01", counts: { hate: 1, normal: 12 }, total: 13 },
    { period_start: "2025-03-02", counts: { hate: 3, normal: 11 }, total: 14 },
  ],
};

export const TOPIC_SNAPSHOTS: TopicSnapshot[] = [0, 1, 2, 3, 4, 5].map((id) => ({
  day: "2025-03-03",
  topic_id: id,
  size: 12 - id,
  terms: [[`term${id}a`, 2.1], [`term${id}b`, 1.7], [`term${id}c`, 1.2], [`term${id}d`, 0.8]],
  doc_ids: [`p${id}1`, `p${id}2`],
}));

// totals 30, 25, 20, 15, 10, 5: the top five by size are topics 0 through 4
export const EVOLUTION: TopicSeries[] = [
  { topic_id: 0, points: [{ day: "2025-03-01", size: 12 }, { day: "2025-03-02", size: 10 }, { day: "2025-03-03", size: 8 }] },
  { topic_id: 1, points: [{ day: "2025-03-01", size: 9 }, { day: "2025-03-02", size: 8 }, { day: "2025-03-03", size: 8 }] },
  { topic_id: 2, points: [{ day: "2025-03-01", size: 7 }, { day: "2025-03-02", size: 6 }, { day: "2025-03-03", size: 7 }] },
  { topic_id: 3, points: [{ day: "2025-03-01", size: 5 }, { day: "2025-03-02", size: 5 }, { day: "2025-03-03", size: 5 }] },
  { topic_id: 4, points: [{ day: "2025-03-01", size: 4 }, { day: "2025-03-02", size: 3 }, { day: "2025-03-03", size: 3 }] },
  { topic_id: 5, points: [{ day: "2025-03-01", size: 2 }, { day: "2025-03-02", size: 2 }, { day: "2025-03-03", size: 1 }] },
];

// star day: anna in the middle, three spokes, plus a low-centrality topic node
export const STAR_GRAPH: GraphView = {
  nodes: [
    { id: "actor:anna", kind: "actor", display_name: "Anna", occurrence_count: 4, centrality: 0.7071067811865476 },
    { id: "actor:bruno", kind: "actor", display_name: "Bruno", occurrence_count: 2, centrality: 0.4082482904638631 },
    { id: "organization:presse-blatt.de", kind: "organization", display_name: "presse-blatt.de", occurrence_count: 1, centrality: 0.4082482904638631 },
    { id: "hashtag:#energie", kind: "hashtag", display_name: "#energie", occurrence_count: 3, centrality: 0.4082482904638631 },
    { id: "topic:2", kind: "topic", display_name: "topic 2", occurrence_count: 1, centrality: 0.1 },
  ],
  edges: [
    { source: "actor:anna", target: "actor:bruno", kind: "intentional", weight: 2, directed: true },
    { source: "actor:anna", target: "organization:presse-blatt.de", kind: "inferred", weight: 1, directed: true },
    { source: "actor:anna", target: "hashtag:#energie", kind: "intentional", weight: 1, directed: true },
    { source: "actor:anna", target: "topic:2", kind: "inferred", weight: 1, directed: true },
    { source: "actor:bruno", target: "hashtag:#energie", kind: "passive_mutual", weight: 1, directed: false },
  ],
};

export const TRIANGLE_GRAPH: GraphView = {
  nodes: [
    { id: "actor:anna", kind: "actor", display_name: "Anna", occurrence_count: 2, centrality: 0.5773502691896258 },
    { id: "actor:bruno", kind: "actor", display_name: "Bruno", occurrence_count: 2, centrality: 0.5773502691896258 },
    { id: "actor:clara", kind: "actor", display_name: "Clara", occurrence_count: 2, centrality: 0.5773502691896258 },
  ],
  edges: [
    { source: "actor:anna", target: "actor:bruno", kind: "intentional", weight: 1, directed: true },
    { source: "actor:bruno", target: "actor:clara", kind: "intentional", weight: 1, directed: true },
    { source: "actor:clara", target: "actor:anna", kind: "intentional", weight: 1, directed: true },
  ],
};

export const VERDICTS_ALL: VerdictHistogram = {
  channel: null,
  counts: { "False": 1, "Mostly false": 0, "Half true": 2, "Mostly true": 0, "True": 2 },
  total: 5,
};

const VERDICTS_BY_CHANNEL: Record<string, VerdictHistogram> = {
  anna: {
    channel: "anna",
    counts: { "False": 1, "Mostly false": 0, "Half true": 0, "Mostly true": 0, "True": 1 },
    total: 2,
  },
};

export interface SeenRequest {
  method: string;
  path: string;
  auth: string | null;
}

export class FixtureApi {
  readonly log: SeenRequest[] = [];
  /** Swapped by tests to serve a different graph day. */
  graph: GraphView = STAR_GRAPH;
  private server: Server | null = null;
  private baseUrl = "";
  private pendingDelay: { prefix: string; ms: number } | null = null;

  /** Delay the next request whose path starts with prefix, then forget. */
  delayNext(prefix: string, ms: number): void {
    this.pendingDelay = { prefix, ms };
  }

  start(): Promise<string> {
    this.server = createServer((req, res) => {
      const url = new URL(req.url ?? "/", "http://fixture");
      this.log.push({
        method: req.method ?? "?",
        path: url.pathname + url.search,
        auth: req.headers.authorization ?? null,
      });
      const finish = (status: number, body: unknown) => {
        res.writeHead(status, { "content-type": "application/json" });
        res.end(JSON.stringify(body));
      };
      const respond = () => {
        if (req.method !== "GET") {
          finish(405, { error: { status: 405, code: "method_not_allowed", message: "read-only API" } });
          return;
        }
        const body = this.route(url);
        if (body === undefined) {
          finish(404, { error: { status: 404, code: "not_found", message: `no route: ${url.pathname}` } });
        } else {
          finish(200, body);
        }
      };
      if (this.pendingDelay !== null && url.pathname.startsWith(this.pendingDelay.prefix)) {
        const ms = this.pendingDelay.ms;
        this.pendingDelay = null;
        setTimeout(respond, ms);
      } else {
        respond();
      }
    });
    return new Promise((resolve) => {
      this.server!.listen(0, "127.0.0.1", () => {
        const addr = this.server!.address() as AddressInfo;
        this.baseUrl = `http://127.0.0.1:${addr.port}`;
        resolve(this.baseUrl);
      });
    });
  }

  stop(): Promise<void> {
    return new Promise((resolve) => {
      this.server?.closeAllConnections();
      this.server?.close(() => resolve());
    });
  }

  private route(url: URL): unknown {
    const q = url.searchParams;
    switch (url.pathname) {
      case "/config.json":
        return { apiBaseUrl: this.baseUrl, token: null };
      case "/api/v1/health":
        return { status: "ok", schema_version: 1 };
      case "/api/v1/trends/sentiment":
        return TREND_SENTIMENT;
      case "/api/v1/trends/hate":
        return TREND_HATE;
      case "/api/v1/topics":
        return q.get("day") === "2025-03-03" ? TOPIC_SNAPSHOTS : [];
      case "/api/v1/topics/evolution": {
        const raw = q.get("topic_ids");
        if (raw === null) return EVOLUTION;
        // mirror the real API: requested ids always answered, unknown ones empty
        return raw.split(",")
          .map((part) => Number.parseInt(part.trim(), 10))
          .filter((n) => Number.isInteger(n))
          .sort((a, b) => a - b)
          .map((id) => EVOLUTION.find((s) => s.topic_id === id) ?? { topic_id: id, points: [] });
      }
      case "/api/v1/graph": {
        const raw = q.get("kinds");
        if (raw === null) return this.graph;
        const kinds = raw.split(",");
        const nodes = this.graph.nodes.filter((n) => kinds.includes(n.kind));
        const keep = new Set(nodes.map((n) => n.id));
        return {
          nodes,
          edges: this.graph.edges.filter((e) => keep.has(e.source) && keep.has(e.target)),
        };
      }
      case "/api/v1/factcheck/verdicts": {
        const channel = q.get("channel");
        if (channel === null) return VERDICTS_ALL;
        return VERDICTS_BY_CHANNEL[channel] ?? {
          channel,
          counts: { "False": 0, "Mostly false": 0, "Half true": 0, "Mostly true": 0, "True": 0 },
          total: 0,
        };
      }
      default:
        return undefined;
    }
  }
}
