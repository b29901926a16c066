import type { ViewState } from "../state.js";
import { VERDICT_CATEGORIES, type Resource, type VerdictHistogram } from "../types.js";
import { h, type VNode } from "../vdom.js";
import { banner, placeholder, round2, swatch, VERDICT_COLORS } from "./common.js";

const WIDTH = 460;
const HEIGHT = 240;
const PAD = { left: 36, right: 8, top: 16, bottom: 40 };

function verdictLegend(): VNode {
  return h("ul", { class: "legend verdict-legend" },
    ...VERDICT_CATEGORIES.map((category) =>
      h("li", {}, swatch(VERDICT_COLORS[category] ?? "#333"), ` ${category}`)));
}

/**
 * Bar chart of claim verdicts for the selected channel (or all channels).
 * Always draws five bars in the fixed category order; a zero count is a
 * zero-height bar, not a missing one.
 */
export function renderVerdicts(state: ViewState, res: Resource<VerdictHistogram>): VNode {
  const scope = state.channel === null ? "all channels" : `channel ${state.channel}`;
  const title = h("h2", {}, "claim verdicts", h("span", { class: "subtitle" }, ` (${scope})`));
  const legend = verdictLegend();
  if (res.status === "loading") {
    return h("section", { class: "view verdicts" }, title, placeholder("loading"), legend);
  }
  if (res.status === "error") {
    return h("section", { class: "view verdicts" }, title, banner(res.message), legend);
  }

  const counts = VERDICT_CATEGORIES.map((c) => res.data.counts[c] ?? 0);
  const maxCount = Math.max(...counts, 1);
  const innerW = WIDTH - PAD.left - PAD.right;
  const innerH = HEIGHT - PAD.top - PAD.bottom;
  const slot = innerW / VERDICT_CATEGORIES.length;
  const barW = round2(slot * 0.6);

  const bars = VERDICT_CATEGORIES.map((category, i) => {
    const count = counts[i] ?? 0;
    const height = round2((count / maxCount) * innerH);
    const x = round2(PAD.left + i * slot + (slot - barW) / 2);
    const yTop = round2(HEIGHT - PAD.bottom - height);
    return h("g", { class: "bar-group", "data-category": category },
      h("rect", {
        class: "bar",
        "data-category": category,
        x, y: yTop, width: barW, height,
        fill: VERDICT_COLORS[category] ?? "#333",
      },
      h("title", {}, `${category}: ${count}`)),
      h("text", {
        class: "bar-count", x: round2(x + barW / 2), y: round2(yTop - 4), "text-anchor": "middle",
      }, String(count)),
      h("text", {
        class: "bar-label", x: round2(x + barW / 2), y: HEIGHT - PAD.bottom + 14,
        "text-anchor": "middle",
      }, category));
  });

  const axis = h("g", { class: "axis" },
    h("line", {
      x1: PAD.left, y1: HEIGHT - PAD.bottom, x2: WIDTH - PAD.right, y2: HEIGHT - PAD.bottom,
      stroke: "#999",
    }),
    h("text", { class: "y-max", x: 4, y: PAD.top + 4 }, String(maxCount)));

  return h("section", { class: "view verdicts" },
    title,
    h("svg", { viewBox: `0 0 ${WIDTH} ${HEIGHT}`, width: WIDTH, height: HEIGHT },
      axis, ...bars),
    h("p", { class: "total" }, `${res.data.total} claims`),
    legend);
}
