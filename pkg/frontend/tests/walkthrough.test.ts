/** Drill-down acceptance: overview -> circle -> lanes -> detail and back up. */
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { App } from "../src/app.js";
import type { ApiClient } from "../src/api.js";
import { ApiError } from "../src/api.js";
import type {
  CircleSceneDoc,
  DetailSceneDoc,
  LaneSceneDoc,
  OverviewDoc,
} from "../src/types.js";
import { click, findAll, findByAttr, type VNode } from "../src/vdom.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

const meta = fixture<{ group_id: string; form_id: string; request_id: string; control_order: number }>(
  "meta.json",
);

class FixtureApi implements ApiClient {
  overviewDoc = fixture<OverviewDoc>("overview.json");
  groupSceneDoc = fixture<CircleSceneDoc>("group-scene.json");
  formSceneDoc = fixture<LaneSceneDoc>("form-scene.json");
  controlSceneDoc = fixture<DetailSceneDoc>("control-scene.json");
  calls: string[] = [];

  async overview(): Promise<OverviewDoc> {
    this.calls.push("overview");
    return this.overviewDoc;
  }

  async groupScene(groupId: string): Promise<CircleSceneDoc> {
    this.calls.push(`group:${groupId}`);
    if (groupId !== meta.group_id) throw new ApiError(404, "group not found", groupId);
    return this.groupSceneDoc;
  }

  async formScene(formId: string, requestId: string): Promise<LaneSceneDoc> {
    this.calls.push(`form:${formId}:${requestId}`);
    if (formId !== meta.form_id || requestId !== meta.request_id) {
      throw new ApiError(404, "request not found", requestId);
    }
    return this.formSceneDoc;
  }

  async controlScene(formId: string, requestId: string, order: number): Promise<DetailSceneDoc> {
    this.calls.push(`control:${formId}:${requestId}:${order}`);
    if (order !== meta.control_order) throw new ApiError(404, "control not found", String(order));
    return this.controlSceneDoc;
  }

  streamUrl(): string {
    return "http://monitor/api/stream";
  }
}

function glyphsOf(vnode: VNode): VNode[] {
  return findAll(vnode, (n) => n.attrs["class"]?.startsWith("glyph") ?? false);
}

describe("drill-down walkthrough", () => {
  it("reaches the red constraint from the orange glyph and returns with Esc", async () => {
    const api = new FixtureApi();
    const hashes: string[] = [];
    const app = new App({ api, onHashChange: (hash) => hashes.push(hash) });

    // the live overview lists the login destination with a violation
    await app.navigate({ level: "overview" });
    const loginRow = findByAttr(app.vnode!, "data-target", `group:${meta.group_id}`);
    expect(loginRow).toBeDefined();

    // enter the collection-of-forms circle: exactly one orange glyph
    click(loginRow!);
    await app.settled();
    expect(app.state).toEqual({ level: "group", groupId: meta.group_id });
    const glyphs = glyphsOf(app.vnode!);
    expect(glyphs).toHaveLength(1);
    const orange = api.groupSceneDoc.glyphs[0].status_color;
    expect(glyphs[0].attrs["fill"]).toBe(orange);

    // click the glyph: the form lane comparison appears
    click(glyphs[0]);
    await app.settled();
    expect(app.state).toEqual({
      level: "form",
      formId: meta.form_id,
      requestId: meta.request_id,
    });
    const segments = findAll(app.vnode!, (n) => n.attrs["class"]?.startsWith("segment ") ?? false);
    for (const segment of segments) {
      const key = `${segment.attrs["data-lane"]}:${segment.attrs["data-index"]}`;
      expect(segment.attrs["stroke"]).toBe(api.formSceneDoc.segment_colors[key]);
    }

    // the offending request segment is the one colored differently; click it
    const offending = segments.find(
      (segment) =>
        segment.attrs["data-lane"] === "request" &&
        segment.attrs["stroke"] === orange,
    );
    expect(offending).toBeDefined();
    click(offending!);
    await app.settled();
    expect(app.state).toEqual({
      level: "control",
      formId: meta.form_id,
      requestId: meta.request_id,
      order: meta.control_order,
    });

    // the control detail shows exactly one red ellipse, color from the scene enum
    const ellipses = findAll(app.vnode!, (n) => n.attrs["class"] === "constraint");
    const reds = ellipses.filter((e) => e.attrs["fill"] === "red");
    expect(reds).toHaveLength(1);
    expect(api.controlSceneDoc.ellipses.filter((e) => e.fill === "red")).toHaveLength(1);

    // Esc walks back up one level at a time
    app.handleKey("Escape");
    await app.settled();
    expect(app.state.level).toBe("form");
    app.handleKey("Escape");
    await app.settled();
    expect(app.state.level).toBe("group");
    app.handleKey("Escape");
    await app.settled();
    expect(app.state.level).toBe("overview");
    app.handleKey("Escape");
    await app.settled();
    expect(app.state.level).toBe("overview"); // up from the top is a no-op

    // every step was recorded as a deep link
    expect(hashes).toContain(`#/group/${meta.group_id}`);
    expect(hashes).toContain(`#/form/${meta.form_id}/${encodeURIComponent(meta.request_id)}`);
    expect(hashes).toContain(
      `#/control/${meta.form_id}/${encodeURIComponent(meta.request_id)}/${meta.control_order}`,
    );
  });

  it("stale ids show a toast and keep the current view", async () => {
    const api = new FixtureApi();
    const toasts: string[] = [];
    const app = new App({ api, onToast: (message) => toasts.push(message) });
    await app.navigate({ level: "overview" });
    await app.navigate({ level: "form", formId: meta.form_id, requestId: "evt:999" });
    expect(toasts).toHaveLength(1);
    expect(app.state.level).toBe("overview"); // unchanged
    expect(app.vnode).not.toBeNull();
  });

  it("deep links open any level directly", async () => {
    const api = new FixtureApi();
    const app = new App({ api });
    await app.navigate({
      level: "control",
      formId: meta.form_id,
      requestId: meta.request_id,
      order: meta.control_order,
    });
    const ellipses = findAll(app.vnode!, (n) => n.attrs["class"] === "constraint");
    expect(ellipses).toHaveLength(api.controlSceneDoc.ellipses.length);
    // up from a deep link lands on the overview
    await app.up();
    expect(app.state.level).toBe("overview");
  });
});

describe("live updates", () => {
  function envelope(seq: number, groupId: string): string {
    return JSON.stringify({ seq, group_id: groupId, snapshot_id: "snap", verdict: {} });
  }

  class GrowingApi extends FixtureApi {
    extraGlyphs = 0;

    override async groupScene(groupId: string): Promise<CircleSceneDoc> {
      const base = await super.groupScene(groupId);
      const extra = Array.from({ length: this.extraGlyphs }, (_, i) => ({
        ...base.glyphs[0],
        request_id: `evt:${100 + i}`,
        angle: base.glyphs[0].angle + 0.01 * (i + 1),
      }));
      return { ...base, glyphs: [...base.glyphs, ...extra] };
    }
  }

  interface Emittable {
    emit(data: string): void;
  }

  function liveApp(api: FixtureApi): { app: App; sources: Emittable[] } {
    const sources: Emittable[] = [];
    const app = new App({
      api,
      eventSourceFactory: () => {
        const listeners: ((event: { data: string }) => void)[] = [];
        const source = {
          addEventListener: (type: string, fn: (event: { data: string }) => void) => {
            if (type === "verdict") listeners.push(fn);
          },
          close: () => {},
          onerror: null,
          onopen: null,
          emit: (data: string) => listeners.forEach((fn) => fn({ data })),
        };
        sources.push(source);
        return source;
      },
    });
    app.startLive();
    return { app, sources };
  }

  it("a new event in the viewed group adds its glyph", async () => {
    const api = new GrowingApi();
    const { app, sources } = liveApp(api);
    await app.navigate({ level: "group", groupId: meta.group_id });
    expect(glyphsOf(app.vnode!)).toHaveLength(1);

    api.extraGlyphs = 1;
    sources[0].emit(envelope(2, meta.group_id));
    await app.settled();
    expect(glyphsOf(app.vnode!)).toHaveLength(2);
  });

  it("pause buffers events; resume applies them", async () => {
    const api = new GrowingApi();
    const { app, sources } = liveApp(api);
    await app.navigate({ level: "group", groupId: meta.group_id });

    app.pauseLive();
    api.extraGlyphs = 5;
    for (let seq = 2; seq <= 6; seq += 1) {
      sources[0].emit(envelope(seq, meta.group_id));
    }
    await app.settled();
    expect(app.live!.buffer).toHaveLength(5);
    expect(glyphsOf(app.vnode!)).toHaveLength(1); // frozen view

    app.resumeLive();
    await app.settled();
    expect(glyphsOf(app.vnode!)).toHaveLength(6);
  });

  it("events for other groups leave the current scene alone", async () => {
    const api = new GrowingApi();
    const { app, sources } = liveApp(api);
    await app.navigate({ level: "group", groupId: meta.group_id });
    const before = api.calls.length;
    sources[0].emit(envelope(2, "somewhere-else"));
    await app.settled();
    expect(api.calls.length).toBe(before); // no refetch
  });
});
