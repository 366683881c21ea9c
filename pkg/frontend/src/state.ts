/** View state: one level of the drill-down, deep-linkable via the URL hash.
 *
 * Every state reachable by clicking is reachable by URL and vice versa;
 * the app keeps a stack of visited states so "up" (Esc) reverses one
 * level even after a deep-link entry.
 */

export type ViewState =
  | { level: "overview" }
  | { level: "group"; groupId: string }
  | { level: "form"; formId: string; requestId: string }
  | { level: "control"; formId: string; requestId: string; order: number };

export const OVERVIEW: ViewState = { level: "overview" };

export function stateToHash(state: ViewState): string {
  switch (state.level) {
    case "overview":
      return "#/";
    case "group":
      return `#/group/${encodeURIComponent(state.groupId)}`;
    case "form":
      return `#/form/${encodeURIComponent(state.formId)}/${encodeURIComponent(state.requestId)}`;
    case "control":
      return (
        `#/control/${encodeURIComponent(state.formId)}/` +
        `${encodeURIComponent(state.requestId)}/${state.order}`
      );
  }
}

export function hashToState(hash: string): ViewState {
  const parts = hash.replace(/^#\/?/, "").split("/").filter((p) => p.length > 0);
  if (parts.length === 0) return OVERVIEW;
  const [head, ...rest] = parts.map(decodeURIComponent);
  if (head === "group" && rest.length === 1) {
    return { level: "group", groupId: rest[0] };
  }
  if (head === "form" && rest.length === 2) {
    return { level: "form", formId: rest[0], requestId: rest[1] };
  }
  if (head === "control" && rest.length === 3) {
    const order = Number.parseInt(rest[2], 10);
    if (Number.isFinite(order)) {
      return { level: "control", formId: rest[0], requestId: rest[1], order };
    }
  }
  return OVERVIEW;
}

export function statesEqual(a: ViewState, b: ViewState): boolean {
  return stateToHash(a) === stateToHash(b);
}
