/**
 * Minimal element tree. Views build VNodes, the browser entry point turns
 * them into real DOM, and tests assert on the tree (or its HTML string)
 * without needing a DOM implementation.
 */

export type Attrs = Record<string, string | number | boolean | EventHandler | undefined>;
export type EventHandler = (event: unknown) => void;

export interface VNode {
  tag: string;
  attrs: Attrs;
  children: (VNode | string)[];
}

export function h(tag: string, attrs: Attrs = {}, ...children: (VNode | string | null | undefined)[]): VNode {
  return {
    tag,
    attrs,
    children: children.filter((c): c is VNode | string => c !== null && c !== undefined),
  };
}

// Tags rendered in the SVG namespace; everything else is plain HTML.
const SVG_TAGS = new Set([
  "svg", "g", "circle", "line", "polyline", "rect", "text", "title", "defs", "marker", "path",
]);

export function toElement(node: VNode, doc: Document): Element {
  const el = SVG_TAGS.has(node.tag)
    ? doc.createElementNS("http://www.w3.org/2000/svg", node.tag)
    : doc.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    if (value === undefined || value === false) continue;
    if (typeof value === "function") {
      // attrs like onclick; strip the "on" prefix for addEventListener
      el.addEventListener(name.slice(2), value as EventListener);
    } else if (value === true) {
      el.setAttribute(name, "");
    } else {
      el.setAttribute(name, String(value));
    }
  }
  for (const child of node.children) {
    el.appendChild(typeof child === "string" ? doc.createTextNode(child) : toElement(child, doc));
  }
  return el;
}

const ESCAPES: Record<string, string> = { "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" };

function escape(text: string): string {
  return text.replace(/[&<>"]/g, (ch) => ESCAPES[ch] ?? ch);
}

/** Deterministic serialization; two VNodes with equal HTML render identically. */
export function renderHtml(node: VNode): string {
  const attrs = Object.entries(node.attrs)
    .filter(([, v]) => v !== undefined && v !== false && typeof v !== "function")
    .map(([k, v]) => (v === true ? ` ${k}` : ` ${k}="${escape(String(v))}"`))
    .join("");
  const inner = node.children
    .map((c) => (typeof c === "string" ? escape(c) : renderHtml(c)))
    .join("");
  return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}

/** Depth-first search over a tree, for tests and the controller. */
export function findAll(node: VNode, predicate: (n: VNode) => boolean): VNode[] {
  const hits: VNode[] = [];
  const walk = (n: VNode) => {
    if (predicate(n)) hits.push(n);
    for (const child of n.children) {
      if (typeof child !== "string") walk(child);
    }
  };
  walk(node);
  return hits;
}

export function byClass(node: VNode, className: string): VNode[] {
  return findAll(node, (n) => {
    const cls = n.attrs["class"];
    return typeof cls === "string" && cls.split(/\s+/).includes(className);
  });
}

export function textOf(node: VNode): string {
  return node.children
    .map((c) => (typeof c === "string" ? c : textOf(c)))
    .join("");
}
