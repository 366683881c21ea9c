/** Wire types mirroring the monitor's JSON documents. */

export type StatusValue = "normal" | "deep-anomaly" | "violation";

export interface CircleSectorDoc {
  index: number;
  angular_span: number;
  start_angle: number;
  label: string;
  is_dummy: boolean;
}

export interface CircleGlyphDoc {
  request_id: string;
  sector_index: number;
  angle: number;
  radial_distance: number;
  status_color: string;
}

export interface CircleSceneDoc {
  kind: "circle";
  destination: string;
  radius: number;
  sectors: CircleSectorDoc[];
  glyphs: CircleGlyphDoc[];
}

export interface LaneSegmentDoc {
  index: number;
  y_position: number;
  style: "solid" | "dashed";
  label: string;
}

export interface LaneDoc {
  x_position: number;
  direction: string;
  segments: LaneSegmentDoc[];
}

export interface LaneSceneDoc {
  kind: "lanes";
  form_id: string;
  request_id: string;
  structure_lane: LaneDoc;
  request_lane: LaneDoc;
  links: [number, number][];
  segment_colors: Record<string, string>;
}

export interface DetailEllipseDoc {
  label: string;
  angle: number;
  fill: "green" | "red";
}

export interface DetailSceneDoc {
  kind: "detail";
  name: string;
  control_type: string;
  observed_value: string;
  ellipses: DetailEllipseDoc[];
}

export type SceneDoc = CircleSceneDoc | LaneSceneDoc | DetailSceneDoc;

export interface OverviewRow {
  group_id: string;
  destination: string;
  form_count: number;
  counts: Record<StatusValue, number>;
  worst_status: StatusValue;
}

export interface OverviewDoc {
  snapshot_id: string;
  event_count: number;
  rows: OverviewRow[];
}

export interface VerdictRecord {
  request: {
    request_id: string;
    timestamp: string;
    method: string;
    destination: string;
    referer: string | null;
    params: [string, string][];
    decode_warning: boolean;
  };
  l1: { matched_form_id: string | null; dummy_reason: string | null };
  status_per_level: Record<string, StatusValue>;
  overall: StatusValue;
}

export interface VerdictEnvelope {
  seq: number;
  group_id: string;
  snapshot_id: string;
  verdict: VerdictRecord;
}
