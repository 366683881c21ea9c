/** Tiny virtual node layer.
 *
 * Rendering builds plain VNode trees so every view is inspectable and
 * clickable in tests without a browser; the DOM is only touched at the
 * very edge (`toDom`) when running for real.
 */

export type Handler = () => void;
export type Child = VNode | string;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: Child[];
  on: Record<string, Handler>;
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  children: Child[] = [],
  on: Record<string, Handler> = {},
): VNode {
  return { tag, attrs, children, on };
}

const SVG_NS = "http://www.w3.org/2000/svg";
const SVG_TAGS = new Set([
  "svg", "path", "circle", "ellipse", "line", "rect", "text", "g", "defs", "marker", "polygon",
]);

export function toDom(node: VNode, doc: Document): Element {
  const namespaced = SVG_TAGS.has(node.tag);
  const element = namespaced
    ? doc.createElementNS(SVG_NS, node.tag)
    : doc.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    element.setAttribute(name, value);
  }
  for (const [event, handler] of Object.entries(node.on)) {
    element.addEventListener(event, handler);
  }
  for (const child of node.children) {
    if (typeof child === "string") {
      element.appendChild(doc.createTextNode(child));
    } else {
      element.appendChild(toDom(child, doc));
    }
  }
  return element;
}

export function findAll(root: VNode, predicate: (node: VNode) => boolean): VNode[] {
  const found: VNode[] = [];
  const walk = (node: VNode) => {
    if (predicate(node)) found.push(node);
    for (const child of node.children) {
      if (typeof child !== "string") walk(child);
    }
  };
  walk(root);
  return found;
}

export function findByAttr(root: VNode, attr: string, value: string): VNode | undefined {
  return findAll(root, (node) => node.attrs[attr] === value)[0];
}

export function textOf(root: VNode): string {
  let out = "";
  const walk = (node: VNode) => {
    for (const child of node.children) {
      if (typeof child === "string") out += child;
      else walk(child);
    }
  };
  walk(root);
  return out;
}

/** Simulate a user click in tests. */
export function click(node: VNode): void {
  const handler = node.on["click"];
  if (!handler) throw new Error(`node <${node.tag}> has no click handler`);
  handler();
}
