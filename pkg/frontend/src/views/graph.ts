import type { ViewState } from "../state.js";
import { EDGE_KINDS, NODE_KINDS, type GraphNode, type GraphView, type Resource } from "../types.js";
import { h, type VNode } from "../vdom.js";
import { banner, KIND_COLORS, placeholder, round2, swatch } from "./common.js";

const WIDTH = 640;
const HEIGHT = 420;

// Documented radius range: centrality 0 maps to 4px, centrality 1 to 24px.
// The centrality vector is unit-norm, so the map is linear and absolute,
// which keeps radii comparable across days and sessions.
export const MIN_RADIUS_PX = 4;
export const MAX_RADIUS_PX = 24;

export function radiusFor(centrality: number): number {
  const c = Math.min(1, Math.max(0, centrality));
  return round2(MIN_RADIUS_PX + c * (MAX_RADIUS_PX - MIN_RADIUS_PX));
}

const EDGE_DASH: Record<string, string | undefined> = {
  intentional: undefined,
  inferred: "6 3",
  passive_mutual: "2 4",
};

interface Placed {
  x: number;
  y: number;
}

/**
 * Small Fruchterman-Reingold style layout. Nodes start on a circle in input
 * order and everything runs in fixed-count plain float loops, so the same
 * graph always lands on the same coordinates (views must replay exactly).
 */
export function layoutGraph(view: GraphView): Map<string, Placed> {
  const nodes = view.nodes;
  const placed = new Map<string, Placed>();
  if (nodes.length === 0) return placed;
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const ring = Math.min(WIDTH, HEIGHT) / 2 - 40;
  const pos = nodes.map((_, i) => {
    const angle = (2 * Math.PI * i) / nodes.length;
    return { x: cx + ring * Math.cos(angle), y: cy + ring * Math.sin(angle) };
  });
  const index = new Map(nodes.map((n, i) => [n.id, i]));
  const pairs = view.edges
    .map((e) => [index.get(e.source), index.get(e.target)] as const)
    .filter((p): p is [number, number] => p[0] !== undefined && p[1] !== undefined && p[0] !== p[1]);

  const k = 0.8 * Math.sqrt((WIDTH * HEIGHT) / nodes.length);
  const steps = 60;
  for (let step = 0; step < steps; step++) {
    const temp = 40 * (1 - step / steps) + 2;
    const disp = nodes.map(() => ({ x: 0, y: 0 }));
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const dx = pos[i]!.x - pos[j]!.x;
        const dy = pos[i]!.y - pos[j]!.y;
        const d = Math.max(Math.hypot(dx, dy), 0.01);
        const push = (k * k) / d / d;
        disp[i]!.x += dx * push;
        disp[i]!.y += dy * push;
        disp[j]!.x -= dx * push;
        disp[j]!.y -= dy * push;
      }
    }
    for (const [a, b] of pairs) {
      const dx = pos[a]!.x - pos[b]!.x;
      const dy = pos[a]!.y - pos[b]!.y;
      const d = Math.max(Math.hypot(dx, dy), 0.01);
      const pull = d / k;
      disp[a]!.x -= (dx / d) * pull;
      disp[a]!.y -= (dy / d) * pull;
      disp[b]!.x += (dx / d) * pull;
      disp[b]!.y += (dy / d) * pull;
    }
    for (let i = 0; i < nodes.length; i++) {
      const d = Math.max(Math.hypot(disp[i]!.x, disp[i]!.y), 0.01);
      const capped = Math.min(d, temp);
      pos[i]!.x += (disp[i]!.x / d) * capped;
      pos[i]!.y += (disp[i]!.y / d) * capped;
      pos[i]!.x = Math.min(WIDTH - 30, Math.max(30, pos[i]!.x));
      pos[i]!.y = Math.min(HEIGHT - 30, Math.max(30, pos[i]!.y));
    }
  }
  nodes.forEach((n, i) => placed.set(n.id, { x: round2(pos[i]!.x), y: round2(pos[i]!.y) }));
  return placed;
}

function graphLegend(): VNode {
  return h("ul", { class: "legend graph-legend" },
    ...NODE_KINDS.map((kind) =>
      h("li", { class: `kind-${kind}` }, swatch(KIND_COLORS[kind] ?? "#333"), ` ${kind}`)),
    ...EDGE_KINDS.map((kind) =>
      h("li", { class: `edge-style-${kind}` },
        h("svg", { width: 28, height: 8, viewBox: "0 0 28 8" },
          h("line", {
            x1: 1, y1: 4, x2: 27, y2: 4, stroke: "#555", "stroke-width": 2,
            "stroke-dasharray": EDGE_DASH[kind],
          })),
        ` ${kind}`)));
}

/**
 * Network view. Radii encode centrality on the documented 4px to 24px range,
 * the three edge kinds get distinct stroke styles and node kinds distinct
 * colors. Clicking a node hands its display name to onNodeClick so the
 * controller can narrow the verdict view to that actor.
 */
export function renderGraph(
  state: ViewState,
  res: Resource<GraphView>,
  onNodeClick?: (node: GraphNode) => void,
): VNode {
  const title = h("h2", {}, "interaction graph");
  const legend = graphLegend();
  if (res.status === "loading") {
    return h("section", { class: "view graph" }, title, placeholder("loading"), legend);
  }
  if (res.status === "error") {
    return h("section", { class: "view graph" }, title, banner(res.message), legend);
  }
  // the server already filters by kinds, repeated here so the rendered tree
  // stays a pure function of (state, response) even on a stale response
  const kinds = state.graph.kinds;
  const nodes = kinds === null
    ? res.data.nodes
    : res.data.nodes.filter((n) => kinds.includes(n.kind));
  const visible = new Set(nodes.map((n) => n.id));
  const edges = res.data.edges.filter((e) => visible.has(e.source) && visible.has(e.target));
  if (nodes.length === 0) {
    return h("section", { class: "view graph" }, title, placeholder("no data"), legend);
  }

  const placed = layoutGraph({ nodes, edges });
  const edgeLines = edges.map((e) => {
    const a = placed.get(e.source)!;
    const b = placed.get(e.target)!;
    return h("line", {
      class: `edge edge-${e.kind}`,
      "data-kind": e.kind,
      x1: a.x, y1: a.y, x2: b.x, y2: b.y,
      stroke: "#888",
      "stroke-width": round2(Math.min(1 + (e.weight - 1) * 0.4, 4)),
      "stroke-dasharray": EDGE_DASH[e.kind],
      "marker-end": e.directed ? "url(#arrow)" : undefined,
    },
    h("title", {}, `${e.source} -> ${e.target} (${e.kind}, weight ${e.weight})`));
  });

  const nodeDots = nodes.map((n) => {
    const p = placed.get(n.id)!;
    return h("g", { class: "node-group", "data-id": n.id },
      h("circle", {
        class: "node",
        "data-id": n.id,
        "data-kind": n.kind,
        "data-centrality": n.centrality,
        cx: p.x, cy: p.y,
        r: radiusFor(n.centrality),
        fill: KIND_COLORS[n.kind] ?? "#333",
        onclick: onNodeClick === undefined ? undefined : () => onNodeClick(n),
      },
      h("title", {}, `${n.display_name} (${n.kind}), centrality ${n.centrality.toFixed(4)}`)),
      h("text", {
        class: "node-label", x: p.x, y: round2(p.y + radiusFor(n.centrality) + 12),
        "text-anchor": "middle",
      }, n.display_name));
  });

  return h("section", { class: "view graph" },
    title,
    h("svg", { viewBox: `0 0 ${WIDTH} ${HEIGHT}`, width: WIDTH, height: HEIGHT },
      h("defs", {},
        h("marker", {
          id: "arrow", viewBox: "0 0 10 10", refX: 9, refY: 5,
          markerWidth: 7, markerHeight: 7, orient: "auto-start-reverse",
        },
        h("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: "#888" }))),
      ...edgeLines, ...nodeDots),
    legend);
}
