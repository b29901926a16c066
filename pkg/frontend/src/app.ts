import { ApiClient, ApiError } from "./api.js";
import { isAbort, RequestGate } from "./latest.js";
import {
  initialViewState, setChannel, setGranularity, setGraphFilter, setMetric,
  setPlatform, setRange, toggleTopic, type ViewState,
} from "./state.js";
import {
  failed, LOADING, NODE_KINDS, ok,
  type Granularity, type GraphNode, type GraphView, type NodeKind, type Resource,
  type TopicSeries, type TopicSnapshot, type TrendMetric, type TrendSeries,
  type VerdictHistogram,
} from "./types.js";
import { h, type VNode } from "./vdom.js";
import { renderGraph } from "./views/graph.js";
import { renderTopicEvolution } from "./views/topics.js";
import { renderTrends } from "./views/trends.js";
import { renderVerdicts } from "./views/verdicts.js";

function messageOf(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}

function inputValue(event: unknown): string {
  return String((event as { target: { value: unknown } }).target.value ?? "");
}

/**
 * Owns the ViewState and the last response per view. Every user action is a
 * state transition followed by a refetch of just the views that depend on
 * the changed fields; rendering is a pure readout of (state, responses).
 */
export class Dashboard {
  private state: ViewState;
  private notice: string | null = null;
  private trendsRes: Resource<TrendSeries> = LOADING;
  private evolutionRes: Resource<TopicSeries[]> = LOADING;
  private snapshots: TopicSnapshot[] | null = null;
  private graphRes: Resource<GraphView> = LOADING;
  private verdictsRes: Resource<VerdictHistogram> = LOADING;
  private readonly gate = new RequestGate();

  constructor(
    private readonly client: ApiClient,
    private readonly present: (tree: VNode) => void,
    state: ViewState = initialViewState(),
  ) {
    this.state = state;
  }

  getState(): ViewState {
    return this.state;
  }

  async start(): Promise<void> {
    await Promise.all([
      this.refreshTrends(),
      this.refreshTopics(),
      this.refreshGraph(),
      this.refreshVerdicts(),
    ]);
  }

  async refreshTrends(): Promise<void> {
    const { ticket, signal } = this.gate.begin("trends");
    this.trendsRes = LOADING;
    this.push();
    try {
      const data = await this.client.trends(this.state.metric, {
        granularity: this.state.granularity,
        from: this.state.from,
        to: this.state.to,
        platform: this.state.platform,
      }, signal);
      if (!this.gate.isCurrent("trends", ticket)) return;
      this.trendsRes = ok(data);
    } catch (err) {
      if (isAbort(err) || !this.gate.isCurrent("trends", ticket)) return;
      this.trendsRes = failed(messageOf(err));
    }
    this.push();
  }

  async refreshTopics(): Promise<void> {
    const { ticket, signal } = this.gate.begin("topics");
    this.evolutionRes = LOADING;
    this.push();
    try {
      const ids = this.state.selectedTopicIds;
      const series = await this.client.topicEvolution({
        topicIds: ids.length > 0 ? ids : null,
        from: this.state.from,
        to: this.state.to,
      }, signal);
      if (!this.gate.isCurrent("topics", ticket)) return;
      this.evolutionRes = ok(series);
      // latest day with data feeds the legend's top terms
      const days = series.flatMap((s) => s.points.map((p) => p.day)).sort();
      const last = days[days.length - 1];
      if (last !== undefined) {
        const snaps = await this.client.topics(last, signal);
        if (!this.gate.isCurrent("topics", ticket)) return;
        this.snapshots = snaps;
      }
    } catch (err) {
      if (isAbort(err) || !this.gate.isCurrent("topics", ticket)) return;
      this.evolutionRes = failed(messageOf(err));
    }
    this.push();
  }

  async refreshGraph(): Promise<void> {
    const { ticket, signal } = this.gate.begin("graph");
    this.graphRes = LOADING;
    this.push();
    try {
      const data = await this.client.graph({
        minOccurrence: this.state.graph.minOccurrence,
        topK: this.state.graph.topK,
        kinds: this.state.graph.kinds,
        from: this.state.from,
        to: this.state.to,
      }, signal);
      if (!this.gate.isCurrent("graph", ticket)) return;
      this.graphRes = ok(data);
    } catch (err) {
      if (isAbort(err) || !this.gate.isCurrent("graph", ticket)) return;
      this.graphRes = failed(messageOf(err));
    }
    this.push();
  }

  async refreshVerdicts(): Promise<void> {
    const { ticket, signal } = this.gate.begin("verdicts");
    this.verdictsRes = LOADING;
    this.push();
    try {
      const data = await this.client.verdicts(this.state.channel, signal);
      if (!this.gate.isCurrent("verdicts", ticket)) return;
      this.verdictsRes = ok(data);
    } catch (err) {
      if (isAbort(err) || !this.gate.isCurrent("verdicts", ticket)) return;
      this.verdictsRes = failed(messageOf(err));
    }
    this.push();
  }

  applyRange(from: string | null, to: string | null): Promise<void> {
    try {
      this.state = setRange(this.state, from, to);
      this.notice = null;
    } catch (err) {
      // keep the previous state visible, just surface the complaint
      this.notice = messageOf(err);
      this.push();
      return Promise.resolve();
    }
    return Promise.all([
      this.refreshTrends(), this.refreshTopics(), this.refreshGraph(),
    ]).then(() => undefined);
  }

  applyMetric(metric: TrendMetric): Promise<void> {
    this.state = setMetric(this.state, metric);
    return this.refreshTrends();
  }

  applyGranularity(granularity: Granularity): Promise<void> {
    this.state = setGranularity(this.state, granularity);
    return this.refreshTrends();
  }

  applyPlatform(platform: string | null): Promise<void> {
    this.state = setPlatform(this.state, platform);
    return this.refreshTrends();
  }

  applyTopicToggle(topicId: number): Promise<void> {
    this.state = toggleTopic(this.state, topicId);
    return this.refreshTopics();
  }

  applyTopicSelection(ids: number[]): Promise<void> {
    this.state = { ...this.state, selectedTopicIds: [...ids].sort((a, b) => a - b) };
    return this.refreshTopics();
  }

  applyGraphFilter(patch: { minOccurrence?: number; topK?: number | null; kinds?: NodeKind[] | null }): Promise<void> {
    this.state = setGraphFilter(this.state, patch);
    return this.refreshGraph();
  }

  applyChannel(channel: string | null): Promise<void> {
    this.state = setChannel(this.state, channel);
    return this.refreshVerdicts();
  }

  /** Node click: narrow the per-channel verdict chart to that actor. */
  private readonly onNodeClick = (node: GraphNode): void => {
    if (node.kind !== "actor") return;
    void this.applyChannel(node.display_name);
  };

  render(): VNode {
    return h("div", { class: "dashboard" },
      this.controls(),
      this.notice === null ? null : h("div", { class: "banner notice", role: "alert" }, this.notice),
      renderTrends(this.state, this.trendsRes),
      renderTopicEvolution(this.state, this.evolutionRes, this.snapshots),
      renderGraph(this.state, this.graphRes, this.onNodeClick),
      renderVerdicts(this.state, this.verdictsRes));
  }

  private push(): void {
    this.present(this.render());
  }

  private controls(): VNode {
    const s = this.state;
    const kinds = s.graph.kinds;
    return h("form", { class: "controls", onsubmit: (e) => (e as Event).preventDefault?.() },
      h("label", {}, "metric ",
        h("select", {
          class: "ctl-metric",
          onchange: (e) => void this.applyMetric(inputValue(e) as TrendMetric),
        },
        h("option", { value: "sentiment", selected: s.metric === "sentiment" }, "sentiment"),
        h("option", { value: "hate", selected: s.metric === "hate" }, "hate"))),
      h("label", {}, "granularity ",
        h("select", {
          class: "ctl-granularity",
          onchange: (e) => void this.applyGranularity(inputValue(e) as Granularity),
        },
        h("option", { value: "day", selected: s.granularity === "day" }, "day"),
        h("option", { value: "week", selected: s.granularity === "week" }, "week"))),
      h("label", {}, "from ",
        h("input", {
          class: "ctl-from", type: "date", value: s.from ?? "",
          onchange: (e) => void this.applyRange(inputValue(e) || null, s.to),
        })),
      h("label", {}, "to ",
        h("input", {
          class: "ctl-to", type: "date", value: s.to ?? "",
          onchange: (e) => void this.applyRange(s.from, inputValue(e) || null),
        })),
      h("label", {}, "platform ",
        h("input", {
          class: "ctl-platform", type: "text", value: s.platform ?? "",
          placeholder: "all",
          onchange: (e) => void this.applyPlatform(inputValue(e) || null),
        })),
      h("label", {}, "topics ",
        h("input", {
          class: "ctl-topics", type: "text",
          value: s.selectedTopicIds.join(","),
          placeholder: "ids, empty = top 5",
          onchange: (e) => {
            const ids = inputValue(e)
              .split(",")
              .map((part) => part.trim())
              .filter((part) => part !== "")
              .map(Number)
              .filter((n) => Number.isInteger(n) && n >= 0);
            void this.applyTopicSelection(ids);
          },
        })),
      h("label", {}, "min occurrence ",
        h("input", {
          class: "ctl-min-occurrence", type: "number", min: 0,
          value: s.graph.minOccurrence,
          onchange: (e) => {
            const n = Number(inputValue(e));
            void this.applyGraphFilter({ minOccurrence: Number.isInteger(n) && n >= 0 ? n : 0 });
          },
        })),
      h("label", {}, "top k ",
        h("input", {
          class: "ctl-top-k", type: "number", min: 1, value: s.graph.topK ?? "",
          placeholder: "all",
          onchange: (e) => {
            const raw = inputValue(e);
            const n = Number(raw);
            void this.applyGraphFilter({
              topK: raw !== "" && Number.isInteger(n) && n >= 1 ? n : null,
            });
          },
        })),
      h("span", { class: "kind-boxes" }, "kinds ",
        ...NODE_KINDS.map((kind) =>
          h("label", { class: `ctl-kind-${kind}` },
            h("input", {
              type: "checkbox",
              checked: kinds === null || kinds.includes(kind),
              onchange: () => void this.applyGraphFilter({ kinds: this.toggledKinds(kind) }),
            }),
            kind))),
      h("label", {}, "channel ",
        h("input", {
          class: "ctl-channel", type: "text", value: s.channel ?? "",
          placeholder: "all",
          onchange: (e) => void this.applyChannel(inputValue(e) || null),
        })));
  }

  private toggledKinds(kind: NodeKind): NodeKind[] | null {
    const current = this.state.graph.kinds ?? [...NODE_KINDS];
    const next = current.includes(kind)
      ? current.filter((k) => k !== kind)
      : [...current, kind];
    const all = NODE_KINDS.every((k) => next.includes(k));
    return all ? null : next;
  }
}
