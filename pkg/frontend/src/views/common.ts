import { h, type VNode } from "../vdom.js";

export const KIND_COLORS: Record<string, string> = {
  actor: "#1f77b4",
  organization: "#ff7f0e",
  hashtag: "#2ca02c",
  topic: "#9467bd",
};

export const LABEL_COLORS: Record<string, string> = {
  negative: "#c0392b",
  neutral: "#7f8c8d",
  positive: "#27ae60",
  hate: "#8e44ad",
  normal: "#95a5a6",
};

export const VERDICT_COLORS: Record<string, string> = {
  "False": "#c0392b",
  "Mostly false": "#e67e22",
  "Half true": "#f1c40f",
  "Mostly true": "#52be80",
  "True": "#1e8449",
};

export const TOPIC_PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
  "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

export function banner(message: string): VNode {
  return h("div", { class: "banner error", role: "alert" }, message);
}

export function placeholder(text: string): VNode {
  return h("div", { class: "placeholder" }, text);
}

export function swatch(color: string): VNode {
  return h("span", { class: "swatch", style: `background:${color}` });
}

/** Evenly spaced x positions; a single point sits in the middle. */
export function xPositions(count: number, left: number, right: number): number[] {
  if (count === 1) return [(left + right) / 2];
  const step = (right - left) / (count - 1);
  return Array.from({ length: count }, (_, i) => round2(left + i * step));
}

/** Maps value in [0, max] to a y pixel, larger values higher up. */
export function yScale(max: number, top: number, bottom: number): (v: number) => number {
  const span = max > 0 ? max : 1;
  return (v) => round2(bottom - (v / span) * (bottom - top));
}

export function round2(v: number): number {
  return Math.round(v * 100) / 100;
}
