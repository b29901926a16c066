import { describe, expect, it } from "vitest";
import { byClass, findAll, h, renderHtml, textOf, toElement } from "../src/vdom.js";

describe("h and renderHtml", () => {
  it("serializes attributes and children deterministically", () => {
    const node = h("div", { class: "box", "data-n": 3 }, "hi ", h("b", {}, "there"));
    expect(renderHtml(node)).toBe('<div class="box" data-n="3">hi <b>there</b></div>');
  });

  it("drops null children and function attrs from markup", () => {
    const node = h("button", { onclick: () => undefined }, null, "go", undefined);
    expect(renderHtml(node)).toBe("<button>go</button>");
    expect(node.children).toEqual(["go"]);
  });

  it("escapes text and attribute values", () => {
    const node = h("span", { title: 'a"b' }, "<script>");
    expect(renderHtml(node)).toBe('<span title="a&quot;b">&lt;script&gt;</span>');
  });

  it("renders boolean attributes bare, omitting false", () => {
    expect(renderHtml(h("option", { selected: true }, "x"))).toBe("<option selected>x</option>");
    expect(renderHtml(h("option", { selected: false }, "x"))).toBe("<option>x</option>");
  });
});

describe("tree queries", () => {
  const tree = h("div", {},
    h("ul", { class: "legend" }, h("li", {}, "a"), h("li", {}, "b")),
    h("span", { class: "legend small" }, "c"));

  it("findAll walks depth first", () => {
    expect(findAll(tree, (n) => n.tag === "li")).toHaveLength(2);
  });

  it("byClass matches one class among several", () => {
    expect(byClass(tree, "legend")).toHaveLength(2);
    expect(byClass(tree, "small")).toHaveLength(1);
  });

  it("textOf flattens nested text", () => {
    expect(textOf(tree)).toBe("abc");
  });
});

describe("toElement", () => {
  // just enough of a Document to observe what toElement does with it
  interface FakeEl {
    tag: string;
    ns: string | null;
    attrs: Record<string, string>;
    listeners: string[];
    kids: (FakeEl | string)[];
    setAttribute(name: string, value: string): void;
    addEventListener(name: string): void;
    appendChild(child: FakeEl | string): void;
  }
  const makeEl = (tag: string, ns: string | null): FakeEl => ({
    tag, ns, attrs: {}, listeners: [], kids: [],
    setAttribute(name, value) { this.attrs[name] = value; },
    addEventListener(name) { this.listeners.push(name); },
    appendChild(child) { this.kids.push(child); },
  });
  const doc = {
    createElement: (tag: string) => makeEl(tag, null),
    createElementNS: (ns: string, tag: string) => makeEl(tag, ns),
    createTextNode: (text: string) => text,
  } as unknown as Document;

  it("uses the SVG namespace for svg tags only", () => {
    const el = toElement(h("svg", {}, h("circle", { r: 4 })), doc) as unknown as FakeEl;
    expect(el.ns).toContain("svg");
    expect((el.kids[0] as FakeEl).ns).toContain("svg");
    const div = toElement(h("div", {}), doc) as unknown as FakeEl;
    expect(div.ns).toBeNull();
  });

  it("wires attributes, handlers, and text children", () => {
    const el = toElement(
      h("button", { class: "go", disabled: true, onclick: () => undefined }, "run"),
      doc,
    ) as unknown as FakeEl;
    expect(el.attrs["class"]).toBe("go");
    expect(el.attrs["disabled"]).toBe("");
    expect(el.listeners).toEqual(["click"]);
    expect(el.kids).toEqual(["run"]);
  });
});
