import { createServer, type Server } from "node:http";
import type { AddressInfo } from "node:net";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient, ApiError, loadConfig } from "../src/api.js";
import { FixtureApi } from "./fixture_server.js";

const server = new FixtureApi();
let base = "";

beforeAll(async () => {
  base = await server.start();
});

afterAll(async () => {
  await server.stop();
});

function lastPath(): string {
  return server.log[server.log.length - 1]!.path;
}

describe("loadConfig", () => {
  it("reads apiBaseUrl and token from the served JSON", async () => {
    const config = await loadConfig(`${base}/config.json`);
    expect(config.apiBaseUrl).toBe(base);
    expect(config.token).toBeNull();
  });

  it("rejects a config without apiBaseUrl", async () => {
    await expect(loadConfig("data:application/json,{}")).rejects.toThrow("apiBaseUrl");
  });
});

describe("ApiClient", () => {
  it("builds trend query strings, dropping unset filters", async () => {
    const client = new ApiClient({ apiBaseUrl: base });
    await client.trends("sentiment", {
      granularity: "week", from: "2025-03-01", to: "2025-03-03", platform: null,
    });
    expect(lastPath()).toBe("/api/v1/trends/sentiment?granularity=week&from=2025-03-01&to=2025-03-03");
  });

  it("joins topic ids and graph kinds with commas", async () => {
    const client = new ApiClient({ apiBaseUrl: base });
    await client.topicEvolution({ topicIds: [0, 3] });
    expect(lastPath()).toBe("/api/v1/topics/evolution?topic_ids=0%2C3");
    await client.graph({ kinds: ["actor", "hashtag"], minOccurrence: 2 });
    expect(lastPath()).toBe("/api/v1/graph?min_occurrence=2&kinds=actor%2Chashtag");
  });

  it("tolerates a trailing slash in the base url", async () => {
    const client = new ApiClient({ apiBaseUrl: `${base}/` });
    const health = await client.health();
    expect(health.status).toBe("ok");
    expect(lastPath()).toBe("/api/v1/health");
  });

  it("sends the bearer token only when configured", async () => {
    await new ApiClient({ apiBaseUrl: base, token: "sesame" }).health();
    expect(server.log[server.log.length - 1]!.auth).toBe("Bearer sesame");
    await new ApiClient({ apiBaseUrl: base }).health();
    expect(server.log[server.log.length - 1]!.auth).toBeNull();
  });

  it("the fixture server itself refuses non-GET requests", async () => {
    const response = await fetch(`${base}/api/v1/health`, { method: "POST" });
    expect(response.status).toBe(405);
    // and that rejection is the only non-GET in the whole log
    expect(server.log.filter((r) => r.method !== "GET")).toHaveLength(1);
  });
});

describe("ApiClient error mapping", () => {
  function serveOnce(status: number, body: string, type = "application/json"): Promise<{ url: string; srv: Server }> {
    const srv = createServer((_req, res) => {
      res.writeHead(status, { "content-type": type });
      res.end(body);
    });
    return new Promise((resolve) => {
      srv.listen(0, "127.0.0.1", () => {
        resolve({ url: `http://127.0.0.1:${(srv.address() as AddressInfo).port}`, srv });
      });
    });
  }

  it("surfaces the structured error body as ApiError", async () => {
    const { url, srv } = await serveOnce(
      400, JSON.stringify({ error: { status: 400, code: "bad_day", message: "not a day" } }));
    try {
      const err = await new ApiClient({ apiBaseUrl: url }).health().then(() => null, (e: unknown) => e);
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).code).toBe("bad_day");
      expect((err as ApiError).status).toBe(400);
    } finally {
      srv.close();
    }
  });

  it("falls back to a generic ApiError for non-JSON bodies", async () => {
    const { url, srv } = await serveOnce(502, "bad gateway", "text/plain");
    try {
      const err = await new ApiClient({ apiBaseUrl: url }).health().then(() => null, (e: unknown) => e);
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).code).toBe("http_error");
      expect((err as ApiError).status).toBe(502);
    } finally {
      srv.close();
    }
  });
});
