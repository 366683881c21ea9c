/** Scene documents to VNode trees.
 *
 * Colors are taken verbatim from the fetched documents: the monitor
 * computed every verdict, so nothing here derives or adjusts a status
 * color. Clickable regions carry data-target attributes naming the
 * drill destination.
 */

import { h, type VNode } from "./vdom.js";
import type {
  CircleSceneDoc,
  DetailSceneDoc,
  LaneSceneDoc,
  OverviewDoc,
  SceneDoc,
} from "./types.js";

export interface NavHandlers {
  toGroup(groupId: string): void;
  toForm(formId: string, requestId: string): void;
  toControl(formId: string, requestId: string, order: number): void;
}

export class SceneSchemaError extends Error {}

export interface RenderOptions {
  /** Glyph colors hidden by the client-side filter. */
  hiddenColors?: ReadonlySet<string>;
}

export function renderOverview(doc: OverviewDoc, nav: NavHandlers): VNode {
  if (doc.rows.length === 0) {
    return h("div", { class: "overview empty" }, [
      h("p", { class: "placeholder" }, ["No destinations monitored yet."]),
    ]);
  }
  const rows = doc.rows.map((row) =>
    h(
      "tr",
      {
        class: `overview-row status-${row.worst_status}`,
        "data-target": `group:${row.group_id}`,
        "data-status": row.worst_status,
      },
      [
        h("td", { class: "destination" }, [row.destination]),
        h("td", { class: "form-count" }, [String(row.form_count)]),
        h("td", { class: "count normal" }, [String(row.counts["normal"])]),
        h("td", { class: "count deep-anomaly" }, [String(row.counts["deep-anomaly"])]),
        h("td", { class: "count violation" }, [String(row.counts["violation"])]),
        h("td", { class: `badge ${row.worst_status}` }, [row.worst_status]),
      ],
      { click: () => nav.toGroup(row.group_id) },
    ),
  );
  return h("div", { class: "overview" }, [
    h("p", { class: "meta" }, [`${doc.event_count} events, snapshot ${doc.snapshot_id}`]),
    h("table", { class: "overview-table" }, [
      h("thead", {}, [
        h("tr", {}, [
          h("th", {}, ["destination"]),
          h("th", {}, ["forms"]),
          h("th", {}, ["normal"]),
          h("th", {}, ["deep"]),
          h("th", {}, ["violations"]),
          h("th", {}, ["worst"]),
        ]),
      ]),
      h("tbody", {}, rows),
    ]),
  ]);
}

function polar(distance: number, angle: number): [number, number] {
  return [distance * Math.cos(angle), distance * Math.sin(angle)];
}

const fmt = (value: number): string => value.toFixed(4);

export function renderCircle(
  scene: CircleSceneDoc,
  nav: NavHandlers,
  options: RenderOptions = {},
): VNode {
  const hidden = options.hiddenColors ?? new Set<string>();
  const view = scene.radius + 40;
  const children: VNode[] = [];

  for (const sector of scene.sectors) {
    const fill = sector.is_dummy ? "#d9c8e8" : "#f4f6f8";
    if (scene.sectors.length === 1) {
      children.push(
        h("circle", {
          class: "sector",
          "data-sector": String(sector.index),
          "data-dummy": String(sector.is_dummy),
          cx: "0",
          cy: "0",
          r: fmt(scene.radius),
          fill,
          stroke: "#888",
        }),
      );
      continue;
    }
    const start = sector.start_angle;
    const end = start + sector.angular_span;
    const [x1, y1] = polar(scene.radius, start);
    const [x2, y2] = polar(scene.radius, end);
    const largeArc = sector.angular_span > Math.PI ? 1 : 0;
    children.push(
      h("path", {
        class: "sector",
        "data-sector": String(sector.index),
        "data-dummy": String(sector.is_dummy),
        d:
          `M 0 0 L ${fmt(x1)} ${fmt(y1)} ` +
          `A ${fmt(scene.radius)} ${fmt(scene.radius)} 0 ${largeArc} 1 ${fmt(x2)} ${fmt(y2)} Z`,
        fill,
        stroke: "#888",
      }),
    );
    const [lx, ly] = polar(scene.radius * 1.14, (start + end) / 2);
    children.push(
      h(
        "text",
        { class: "sector-label", x: fmt(lx), y: fmt(ly), "font-size": "7", "text-anchor": "middle" },
        [sector.is_dummy ? "dummy" : sector.label.slice(0, 8)],
      ),
    );
  }

  for (const glyph of scene.glyphs) {
    if (hidden.has(glyph.status_color)) continue;
    const sector = scene.sectors[glyph.sector_index];
    const [x, y] = polar(glyph.radial_distance, glyph.angle);
    const attrs: Record<string, string> = {
      class: sector.is_dummy ? "glyph dummy" : "glyph",
      cx: fmt(x),
      cy: fmt(y),
      r: "4",
      fill: glyph.status_color,
      "data-request-id": glyph.request_id,
      "data-color": glyph.status_color,
    };
    if (sector.is_dummy) {
      // dummy requests matched no form; there is no deeper level to show
      children.push(h("circle", attrs));
    } else {
      attrs["data-target"] = `form:${sector.label}:${glyph.request_id}`;
      children.push(
        h("circle", attrs, [], { click: () => nav.toForm(sector.label, glyph.request_id) }),
      );
    }
  }

  children.push(h("circle", { class: "center", cx: "0", cy: "0", r: "6", fill: "#444" }));
  children.push(
    h(
      "text",
      { class: "center-label", x: "0", y: "20", "font-size": "8", "text-anchor": "middle" },
      [scene.destination],
    ),
  );

  return h(
    "svg",
    {
      class: "scene circle-scene",
      viewBox: `${fmt(-view)} ${fmt(-view)} ${fmt(2 * view)} ${fmt(2 * view)}`,
      width: "560",
      height: "560",
    },
    children,
  );
}

const SEGMENT_HALF = 14;

export function renderLanes(scene: LaneSceneDoc, nav: NavHandlers): VNode {
  const ys = [
    ...scene.structure_lane.segments.map((s) => s.y_position),
    ...scene.request_lane.segments.map((s) => s.y_position),
    0,
  ];
  const bottom = Math.max(...ys) + 30;
  const linkOf = new Map<number, number>(scene.links.map(([param, order]) => [param, order]));
  const structureY = new Map(scene.structure_lane.segments.map((s) => [s.index, s.y_position]));
  const requestY = new Map(scene.request_lane.segments.map((s) => [s.index, s.y_position]));
  const children: VNode[] = [];

  for (const [param, order] of scene.links) {
    children.push(
      h("line", {
        class: "link",
        x1: fmt(scene.structure_lane.x_position + SEGMENT_HALF),
        y1: fmt(structureY.get(order) ?? 0),
        x2: fmt(scene.request_lane.x_position - SEGMENT_HALF),
        y2: fmt(requestY.get(param) ?? 0),
        stroke: "#b0b8bf",
      }),
    );
  }

  const lanes: [string, typeof scene.structure_lane][] = [
    ["structure", scene.structure_lane],
    ["request", scene.request_lane],
  ];
  for (const [name, lane] of lanes) {
    const x = lane.x_position;
    children.push(
      h("line", {
        class: "lane-axis",
        "data-lane": name,
        x1: fmt(x),
        y1: "0",
        x2: fmt(x),
        y2: fmt(bottom),
        stroke: "#444",
        "stroke-width": "1.5",
      }),
    );
    children.push(
      h("polygon", {
        class: "lane-arrow",
        points: `${fmt(x - 4)},${fmt(bottom - 8)} ${fmt(x)},${fmt(bottom)} ${fmt(x + 4)},${fmt(bottom - 8)}`,
        fill: "#444",
      }),
    );
    for (const segment of lane.segments) {
      const color = scene.segment_colors[`${name}:${segment.index}`];
      const attrs: Record<string, string> = {
        class: `segment ${name}-segment`,
        "data-lane": name,
        "data-index": String(segment.index),
        "data-color": color,
        x1: fmt(x - SEGMENT_HALF),
        y1: fmt(segment.y_position),
        x2: fmt(x + SEGMENT_HALF),
        y2: fmt(segment.y_position),
        stroke: color,
        "stroke-width": "4",
      };
      if (segment.style === "dashed") {
        attrs["stroke-dasharray"] = "6 4";
      }
      let on: Record<string, () => void> = {};
      if (name === "request") {
        const order = linkOf.get(segment.index);
        if (order !== undefined) {
          attrs["data-target"] = `control:${scene.form_id}:${scene.request_id}:${order}`;
          on = { click: () => nav.toControl(scene.form_id, scene.request_id, order) };
        }
      }
      children.push(h("line", attrs, [], on));
      const anchor = name === "structure" ? "end" : "start";
      const dx = name === "structure" ? -SEGMENT_HALF - 4 : SEGMENT_HALF + 4;
      children.push(
        h(
          "text",
          {
            class: "segment-label",
            x: fmt(x + dx),
            y: fmt(segment.y_position + 3),
            "font-size": "9",
            "text-anchor": anchor,
          },
          [segment.label],
        ),
      );
    }
  }

  const width = scene.request_lane.x_position + 120;
  return h(
    "svg",
    {
      class: "scene lane-scene",
      viewBox: `0 -10 ${fmt(width)} ${fmt(bottom + 20)}`,
      width: fmt(width * 2),
      height: fmt((bottom + 20) * 2),
    },
    children,
  );
}

export function renderDetail(scene: DetailSceneDoc): VNode {
  const ring = 95;
  const children: VNode[] = [
    h("rect", {
      class: "control-box",
      x: "-70",
      y: "-30",
      width: "140",
      height: "60",
      fill: "#ffffff",
      stroke: "#444",
    }),
    h("text", { class: "control-name", x: "0", y: "-12", "font-size": "10", "text-anchor": "middle" }, [
      scene.name,
    ]),
    h("text", { class: "control-type", x: "0", y: "2", "font-size": "8", "text-anchor": "middle" }, [
      scene.control_type,
    ]),
    h("text", { class: "control-value", x: "0", y: "16", "font-size": "8", "text-anchor": "middle" }, [
      scene.observed_value,
    ]),
  ];
  scene.ellipses.forEach((ellipse, index) => {
    const [cx, cy] = polar(ring, ellipse.angle);
    children.push(
      h("ellipse", {
        class: "constraint",
        "data-fill": ellipse.fill,
        cx: fmt(cx),
        cy: fmt(cy),
        rx: "52",
        ry: "20",
        fill: ellipse.fill,
        "fill-opacity": "0.85",
        stroke: "#333",
        "data-index": String(index),
      }),
    );
    children.push(
      h(
        "text",
        {
          class: "constraint-label",
          x: fmt(cx),
          y: fmt(cy + 3),
          "font-size": "7",
          "text-anchor": "middle",
          fill: "#ffffff",
        },
        [ellipse.label],
      ),
    );
  });
  const extent = ring + 60;
  return h(
    "svg",
    {
      class: "scene detail-scene",
      viewBox: `${fmt(-extent)} ${fmt(-extent)} ${fmt(2 * extent)} ${fmt(2 * extent)}`,
      width: "560",
      height: "560",
    },
    children,
  );
}

export function renderScene(
  scene: SceneDoc,
  nav: NavHandlers,
  options: RenderOptions = {},
): VNode {
  switch (scene.kind) {
    case "circle":
      return renderCircle(scene, nav, options);
    case "lanes":
      return renderLanes(scene, nav);
    case "detail":
      return renderDetail(scene);
    default:
      throw new SceneSchemaError(
        `unknown scene kind ${(scene as { kind?: string }).kind ?? "(none)"}`,
      );
  }
}
