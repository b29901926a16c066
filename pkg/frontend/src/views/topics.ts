import type { ViewState } from "../state.js";
import type { Resource, TopicSeries, TopicSnapshot } from "../types.js";
import { h, type VNode } from "../vdom.js";
import { banner, placeholder, swatch, TOPIC_PALETTE, xPositions, yScale } from "./common.js";

const WIDTH = 640;
const HEIGHT = 240;
const PAD = { left: 40, right: 12, top: 12, bottom: 28 };
const AUTO_SELECT = 5;

function totalSize(series: TopicSeries): number {
  return series.points.reduce((sum, p) => sum + p.size, 0);
}

/**
 * Which topics get a line: the explicit selection when there is one,
 * otherwise the top five by total size over the window (ties go to the
 * smaller topic id so the pick is stable).
 */
export function topicsToRender(state: ViewState, series: TopicSeries[]): TopicSeries[] {
  let chosen: TopicSeries[];
  if (state.selectedTopicIds.length > 0) {
    const wanted = new Set(state.selectedTopicIds);
    chosen = series.filter((s) => wanted.has(s.topic_id));
  } else {
    chosen = [...series]
      .sort((a, b) => totalSize(b) - totalSize(a) || a.topic_id - b.topic_id)
      .slice(0, AUTO_SELECT);
  }
  return chosen.sort((a, b) => a.topic_id - b.topic_id);
}

function termsLabel(topicId: number, snapshots: TopicSnapshot[] | null): string {
  const snap = snapshots?.find((s) => s.topic_id === topicId);
  if (!snap || snap.terms.length === 0) return `topic ${topicId}`;
  return snap.terms.slice(0, 3).map(([term]) => term).join(", ");
}

/**
 * Multi-line chart of per-day topic sizes. Legend rows carry the topic's
 * top terms from the most recent snapshot so lines are identifiable.
 */
export function renderTopicEvolution(
  state: ViewState,
  res: Resource<TopicSeries[]>,
  snapshots: TopicSnapshot[] | null,
): VNode {
  const title = h("h2", {}, "topic evolution");
  if (res.status === "loading") {
    return h("section", { class: "view topics" }, title, placeholder("loading"));
  }
  if (res.status === "error") {
    return h("section", { class: "view topics" }, title, banner(res.message));
  }
  const chosen = topicsToRender(state, res.data);
  if (chosen.length === 0) {
    return h("section", { class: "view topics" }, title, placeholder("no data"));
  }

  const days = [...new Set(chosen.flatMap((s) => s.points.map((p) => p.day)))].sort();
  const xs = xPositions(Math.max(days.length, 1), PAD.left, WIDTH - PAD.right);
  const dayX = new Map(days.map((d, i) => [d, xs[i] ?? PAD.left]));
  const maxSize = Math.max(0, ...chosen.flatMap((s) => s.points.map((p) => p.size)));
  const y = yScale(maxSize, PAD.top, HEIGHT - PAD.bottom);

  const lines = chosen.map((series, i) => {
    const color = TOPIC_PALETTE[i % TOPIC_PALETTE.length] ?? "#333";
    const sorted = [...series.points].sort((a, b) => (a.day < b.day ? -1 : 1));
    return h("g", { class: "topic-series", "data-topic-id": series.topic_id },
      h("polyline", {
        class: "topic-line",
        "data-topic-id": series.topic_id,
        fill: "none",
        stroke: color,
        "stroke-width": 2,
        points: sorted.map((p) => `${dayX.get(p.day)},${y(p.size)}`).join(" "),
      }),
      ...sorted.map((p) =>
        h("circle", {
          class: "topic-point", cx: dayX.get(p.day), cy: y(p.size), r: 3, fill: color,
        },
        h("title", {}, `${p.day}: ${p.size} docs, ${termsLabel(series.topic_id, snapshots)}`))));
  });

  const ticks = days.map((d) =>
    h("text", { class: "x-tick", x: dayX.get(d), y: HEIGHT - 8, "text-anchor": "middle" }, d));

  const legend = h("ul", { class: "legend topic-legend" },
    ...chosen.map((series, i) =>
      h("li", { "data-topic-id": series.topic_id },
        swatch(TOPIC_PALETTE[i % TOPIC_PALETTE.length] ?? "#333"),
        ` topic ${series.topic_id}: ${termsLabel(series.topic_id, snapshots)}`)));

  return h("section", { class: "view topics" },
    title,
    h("svg", { viewBox: `0 0 ${WIDTH} ${HEIGHT}`, width: WIDTH, height: HEIGHT },
      h("line", {
        x1: PAD.left, y1: HEIGHT - PAD.bottom, x2: WIDTH - PAD.right, y2: HEIGHT - PAD.bottom,
        stroke: "#999",
      }),
      h("text", { class: "y-max", x: 4, y: PAD.top + 10 }, String(maxSize)),
      ...lines, ...ticks),
    legend);
}
