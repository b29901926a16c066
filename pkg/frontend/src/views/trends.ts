import type { ViewState } from "../state.js";
import { TREND_LABELS, type Resource, type TrendSeries } from "../types.js";
import { h, type VNode } from "../vdom.js";
import { banner, LABEL_COLORS, placeholder, round2, swatch, xPositions, yScale } from "./common.js";

const WIDTH = 640;
const HEIGHT = 240;
const PAD = { left: 40, right: 12, top: 12, bottom: 28 };

/**
 * Line chart of label counts per period for the active metric. One polyline
 * per label plus one marker group per period, groups laid out in date order.
 */
export function renderTrends(state: ViewState, res: Resource<TrendSeries>): VNode {
  const title = h("h2", {}, `${state.metric} trend`,
    h("span", { class: "subtitle" },
      state.platform === null ? " (all platforms)" : ` (${state.platform})`));
  if (res.status === "loading") {
    return h("section", { class: "view trends" }, title, placeholder("loading"));
  }
  if (res.status === "error") {
    return h("section", { class: "view trends" }, title, banner(res.message));
  }
  const labels = TREND_LABELS[res.data.metric] ?? TREND_LABELS[state.metric];
  const points = [...res.data.points].sort((a, b) =>
    a.period_start < b.period_start ? -1 : a.period_start > b.period_start ? 1 : 0);
  if (points.length === 0) {
    return h("section", { class: "view trends" }, title, placeholder("no data"));
  }

  const xs = xPositions(points.length, PAD.left, WIDTH - PAD.right);
  const maxCount = Math.max(...points.flatMap((p) => labels.map((l) => p.counts[l] ?? 0)));
  const y = yScale(maxCount, PAD.top, HEIGHT - PAD.bottom);

  const lines = labels.map((label) =>
    h("polyline", {
      class: "trend-line",
      "data-label": label,
      fill: "none",
      stroke: LABEL_COLORS[label] ?? "#333",
      "stroke-width": 2,
      points: points.map((p, i) => `${xs[i]},${y(p.counts[label] ?? 0)}`).join(" "),
    }));

  const periods = points.map((p, i) =>
    h("g", { class: "period", "data-period": p.period_start },
      ...labels.map((label) =>
        h("circle", {
          class: "point",
          "data-label": label,
          cx: xs[i],
          cy: y(p.counts[label] ?? 0),
          r: 3,
          fill: LABEL_COLORS[label] ?? "#333",
        },
        h("title", {}, `${p.period_start} ${label}: ${p.counts[label] ?? 0}`))),
      h("text", {
        class: "x-tick", x: xs[i], y: HEIGHT - 8, "text-anchor": "middle",
      }, p.period_start)));

  const axis = h("g", { class: "axis" },
    h("line", {
      x1: PAD.left, y1: HEIGHT - PAD.bottom, x2: WIDTH - PAD.right, y2: HEIGHT - PAD.bottom,
      stroke: "#999",
    }),
    h("text", { class: "y-max", x: 4, y: round2(PAD.top + 10) }, String(maxCount)));

  const legend = h("ul", { class: "legend trend-legend" },
    ...labels.map((label) =>
      h("li", {}, swatch(LABEL_COLORS[label] ?? "#333"), ` ${label}`)));

  return h("section", { class: "view trends" },
    title,
    h("svg", { viewBox: `0 0 ${WIDTH} ${HEIGHT}`, width: WIDTH, height: HEIGHT },
      axis, ...lines, ...periods),
    legend);
}
