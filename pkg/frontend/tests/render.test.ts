import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it, vi } from "vitest";

import {
  renderCircle,
  renderDetail,
  renderLanes,
  renderOverview,
  renderScene,
  SceneSchemaError,
  type NavHandlers,
} from "../src/render.js";
import type {
  CircleSceneDoc,
  DetailSceneDoc,
  LaneSceneDoc,
  OverviewDoc,
} from "../src/types.js";
import { click, findAll, findByAttr, textOf } from "../src/vdom.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

function nav(): NavHandlers & { calls: string[] } {
  const calls: string[] = [];
  return {
    calls,
    toGroup: (gid) => calls.push(`group:${gid}`),
    toForm: (fid, rid) => calls.push(`form:${fid}:${rid}`),
    toControl: (fid, rid, order) => calls.push(`control:${fid}:${rid}:${order}`),
  };
}

describe("overview rendering", () => {
  it("renders one clickable row per destination group", () => {
    const doc = fixture<OverviewDoc>("overview.json");
    const handlers = nav();
    const vnode = renderOverview(doc, handlers);
    const rows = findAll(vnode, (n) => n.attrs["class"]?.startsWith("overview-row") ?? false);
    expect(rows).toHaveLength(doc.rows.length);
    click(rows[0]);
    expect(handlers.calls).toEqual([`group:${doc.rows[0].group_id}`]);
  });

  it("shows a placeholder when nothing is monitored", () => {
    const vnode = renderOverview({ snapshot_id: "", event_count: 0, rows: [] }, nav());
    expect(textOf(vnode)).toContain("No destinations");
  });

  it("badges carry the fetched worst status verbatim", () => {
    const doc = fixture<OverviewDoc>("overview.json");
    const vnode = renderOverview(doc, nav());
    for (const row of doc.rows) {
      const badge = findAll(vnode, (n) => n.attrs["class"] === `badge ${row.worst_status}`);
      expect(badge.length).toBeGreaterThan(0);
    }
  });
});

describe("circle rendering", () => {
  const scene = fixture<CircleSceneDoc>("group-scene.json");

  it("renders every sector with the dummy visually distinct", () => {
    const vnode = renderCircle(scene, nav());
    const sectors = findAll(vnode, (n) => n.attrs["class"] === "sector");
    expect(sectors).toHaveLength(scene.sectors.length);
    const dummy = sectors.filter((s) => s.attrs["data-dummy"] === "true");
    expect(dummy).toHaveLength(1);
    const normal = sectors.filter((s) => s.attrs["data-dummy"] === "false");
    expect(new Set(dummy.map((s) => s.attrs["fill"])).size).toBe(1);
    expect(dummy[0].attrs["fill"]).not.toBe(normal[0].attrs["fill"]);
  });

  it("glyph fills come verbatim from the scene document", () => {
    const vnode = renderCircle(scene, nav());
    const glyphs = findAll(vnode, (n) => n.attrs["class"]?.startsWith("glyph") ?? false);
    expect(glyphs).toHaveLength(scene.glyphs.length);
    const sceneColors = scene.glyphs.map((g) => g.status_color).sort();
    const renderedColors = glyphs.map((g) => g.attrs["fill"]).sort();
    expect(renderedColors).toEqual(sceneColors);
  });

  it("matched glyphs drill to the form level of that request", () => {
    const handlers = nav();
    const vnode = renderCircle(scene, handlers);
    const glyph = scene.glyphs[0];
    const target = `form:${scene.sectors[glyph.sector_index].label}:${glyph.request_id}`;
    const node = findByAttr(vnode, "data-target", target);
    expect(node).toBeDefined();
    click(node!);
    expect(handlers.calls).toEqual([target]);
  });

  it("hides glyphs whose color the operator filtered out", () => {
    const hidden = new Set([scene.glyphs[0].status_color]);
    const vnode = renderCircle(scene, nav(), { hiddenColors: hidden });
    const glyphs = findAll(vnode, (n) => n.attrs["class"]?.startsWith("glyph") ?? false);
    expect(glyphs).toHaveLength(0);
  });

  it("dummy glyphs are not clickable", () => {
    const dummyScene: CircleSceneDoc = {
      ...scene,
      glyphs: [
        {
          request_id: "evt:9",
          sector_index: scene.sectors.length - 1,
          angle: scene.sectors[scene.sectors.length - 1].start_angle + 0.1,
          radial_distance: 50,
          status_color: "#d0342c",
        },
      ],
    };
    const vnode = renderCircle(dummyScene, nav());
    const glyphs = findAll(vnode, (n) => n.attrs["class"]?.startsWith("glyph") ?? false);
    expect(glyphs).toHaveLength(1);
    expect(glyphs[0].on["click"]).toBeUndefined();
    expect(glyphs[0].attrs["data-target"]).toBeUndefined();
  });
});

describe("lane rendering", () => {
  const scene = fixture<LaneSceneDoc>("form-scene.json");

  it("renders both lanes with every segment stroke taken from segment_colors", () => {
    const vnode = renderLanes(scene, nav());
    const segments = findAll(vnode, (n) => n.attrs["class"]?.startsWith("segment ") ?? false);
    expect(segments).toHaveLength(
      scene.structure_lane.segments.length + scene.request_lane.segments.length,
    );
    for (const segment of segments) {
      const key = `${segment.attrs["data-lane"]}:${segment.attrs["data-index"]}`;
      expect(segment.attrs["stroke"]).toBe(scene.segment_colors[key]);
    }
  });

  it("draws one link per matched pair", () => {
    const vnode = renderLanes(scene, nav());
    const links = findAll(vnode, (n) => n.attrs["class"] === "link");
    expect(links).toHaveLength(scene.links.length);
  });

  it("request segments with a link drill to the linked control", () => {
    const handlers = nav();
    const vnode = renderLanes(scene, handlers);
    const [param, order] = scene.links[scene.links.length - 1];
    const node = findByAttr(
      vnode,
      "data-target",
      `control:${scene.form_id}:${scene.request_id}:${order}`,
    );
    expect(node).toBeDefined();
    expect(node!.attrs["data-index"]).toBe(String(param));
    click(node!);
    expect(handlers.calls).toEqual([`control:${scene.form_id}:${scene.request_id}:${order}`]);
  });

  it("dashes optional structure segments", () => {
    const dashed = scene.structure_lane.segments.filter((s) => s.style === "dashed");
    const vnode = renderLanes(scene, nav());
    const rendered = findAll(vnode, (n) => n.attrs["stroke-dasharray"] !== undefined);
    expect(rendered).toHaveLength(dashed.length);
  });
});

describe("detail rendering", () => {
  const scene = fixture<DetailSceneDoc>("control-scene.json");

  it("renders control name, type and observed value", () => {
    const vnode = renderDetail(scene);
    const text = textOf(vnode);
    expect(text).toContain(scene.name);
    expect(text).toContain(scene.control_type);
    expect(text).toContain(scene.observed_value);
  });

  it("fills each constraint ellipse with the scene's enum value", () => {
    const vnode = renderDetail(scene);
    const ellipses = findAll(vnode, (n) => n.attrs["class"] === "constraint");
    expect(ellipses).toHaveLength(scene.ellipses.length);
    ellipses.forEach((ellipse, index) => {
      expect(ellipse.attrs["fill"]).toBe(scene.ellipses[index].fill);
      expect(ellipse.attrs["data-fill"]).toBe(scene.ellipses[index].fill);
    });
  });
});

describe("scene dispatch", () => {
  it("rejects unknown scene kinds so the app can keep the previous view", () => {
    expect(() =>
      renderScene({ kind: "hologram" } as never, nav()),
    ).toThrow(SceneSchemaError);
  });
});
