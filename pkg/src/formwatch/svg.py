"""Headless SVG rendering of the three scene kinds.

Output is a standalone SVG document, byte-stable across runs for
identical scenes: floats are formatted to fixed precision and all
iteration follows scene order. Element ids embed the originating
request/form/control identifiers (sanitized for XML) so tests and the
UI can address individual pieces of geometry; the exact raw id rides
along in a data attribute.
"""
from __future__ import annotations

import math
import re
from xml.sax.saxutils import escape, quoteattr

from .model import stable_digest
from .scenes import (
    CONSTRAINT_FILLS,
    DUMMY_SECTOR_FILL,
    LINK_COLOR,
    SECTOR_FILL,
    CircleScene,
    DetailScene,
    LaneScene,
    SegmentStyle,
)

__all__ = ["render_svg"]

_ID_SAFE = re.compile(r"[^A-Za-z0-9_.-]")


def _element_id(prefix: str, raw: str) -> str:
    clean = _ID_SAFE.sub("_", raw)
    return f"{prefix}-{clean}-{stable_digest(raw)[:6]}"


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _svg_document(width: float, height: float, view_box: str, body: list[str]) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}"'
        f' height="{_fmt(height)}" viewBox="{view_box}">',
        *body,
        "</svg>",
        "",
    ]
    return "\n".join(lines)


def _polar(radius: float, angle: float) -> tuple[float, float]:
    return radius * math.cos(angle), radius * math.sin(angle)


def _render_circle(scene: CircleScene) -> str:
    margin = 30.0
    view = scene.radius + margin
    body: list[str] = []

    for sector in scene.sectors:
        fill = DUMMY_SECTOR_FILL if sector.is_dummy else SECTOR_FILL
        sector_id = f"sector-{sector.index}"
        if len(scene.sectors) == 1:
            body.append(
                f'<circle id="{sector_id}" class="sector" cx="0" cy="0"'
                f' r="{_fmt(scene.radius)}" fill="{fill}" stroke="#888" stroke-width="1"'
                f" data-label={quoteattr(sector.label)}/>"
            )
            continue
        start = sector.start_angle
        end = start + sector.angular_span
        x1, y1 = _polar(scene.radius, start)
        x2, y2 = _polar(scene.radius, end)
        large_arc = 1 if sector.angular_span > math.pi else 0
        path = (
            f"M 0 0 L {_fmt(x1)} {_fmt(y1)} "
            f"A {_fmt(scene.radius)} {_fmt(scene.radius)} 0 {large_arc} 1 {_fmt(x2)} {_fmt(y2)} Z"
        )
        body.append(
            f'<path id="{sector_id}" class="sector" d="{path}" fill="{fill}"'
            f' stroke="#888" stroke-width="1" data-label={quoteattr(sector.label)}/>'
        )
        label_x, label_y = _polar(scene.radius * 1.12, (start + end) / 2.0)
        body.append(
            f'<text class="sector-label" x="{_fmt(label_x)}" y="{_fmt(label_y)}"'
            f' font-size="7" text-anchor="middle">{escape(sector.label)}</text>'
        )

    for glyph in scene.glyphs:
        x, y = _polar(glyph.radial_distance, glyph.angle)
        glyph_id = _element_id("glyph", glyph.request_id)
        body.append(
            f'<circle id="{glyph_id}" class="glyph" cx="{_fmt(x)}" cy="{_fmt(y)}" r="3"'
            f' fill="{glyph.status_color}" data-request-id={quoteattr(glyph.request_id)}'
            f' data-sector="{glyph.sector_index}"/>'
        )

    body.append('<circle id="center" class="center" cx="0" cy="0" r="6" fill="#444"/>')
    body.append(
        f'<text class="center-label" x="0" y="18" font-size="8"'
        f' text-anchor="middle">{escape(scene.destination)}</text>'
    )
    view_box = f"{_fmt(-view)} {_fmt(-view)} {_fmt(2 * view)} {_fmt(2 * view)}"
    return _svg_document(2 * view, 2 * view, view_box, body)


_SEGMENT_HALF = 14.0


def _render_lanes(scene: LaneScene) -> str:
    longest = max(
        [s.y_position for s in scene.structure_lane.segments]
        + [s.y_position for s in scene.request_lane.segments]
        + [0.0]
    )
    bottom = longest + 30.0
    colors = dict(scene.segment_colors)
    body: list[str] = []

    for lane_name, lane in (("structure", scene.structure_lane), ("request", scene.request_lane)):
        x = lane.x_position
        body.append(
            f'<line id="lane-{lane_name}" class="lane-axis" x1="{_fmt(x)}" y1="0"'
            f' x2="{_fmt(x)}" y2="{_fmt(bottom)}" stroke="#444" stroke-width="1.5"/>'
        )
        # arrowhead conveys the downward direction
        body.append(
            f'<path class="lane-arrow" d="M {_fmt(x - 4)} {_fmt(bottom - 8)}'
            f" L {_fmt(x)} {_fmt(bottom)} L {_fmt(x + 4)} {_fmt(bottom - 8)} Z"
            f' fill="#444"/>'
        )
        anchor = "end" if lane_name == "structure" else "start"
        text_dx = -_SEGMENT_HALF - 4 if lane_name == "structure" else _SEGMENT_HALF + 4
        for segment in lane.segments:
            color = colors[f"{lane_name}:{segment.index}"]
            dash = ' stroke-dasharray="6 4"' if segment.style is SegmentStyle.DASHED else ""
            body.append(
                f'<line id="seg-{lane_name}-{segment.index}" class="segment"'
                f' x1="{_fmt(x - _SEGMENT_HALF)}" y1="{_fmt(segment.y_position)}"'
                f' x2="{_fmt(x + _SEGMENT_HALF)}" y2="{_fmt(segment.y_position)}"'
                f' stroke="{color}" stroke-width="3"{dash}/>'
            )
            body.append(
                f'<text class="segment-label" x="{_fmt(x + text_dx)}"'
                f' y="{_fmt(segment.y_position + 3)}" font-size="8"'
                f' text-anchor="{anchor}">{escape(segment.label)}</text>'
            )

    structure_y = {s.index: s.y_position for s in scene.structure_lane.segments}
    request_y = {s.index: s.y_position for s in scene.request_lane.segments}
    for param_index, order_index in scene.links:
        x1 = scene.request_lane.x_position - _SEGMENT_HALF
        y1 = request_y[param_index]
        x2 = scene.structure_lane.x_position + _SEGMENT_HALF
        y2 = structure_y[order_index]
        body.append(
            f'<line id="link-{param_index}-{order_index}" class="link" x1="{_fmt(x2)}"'
            f' y1="{_fmt(y2)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}"'
            f' stroke="{LINK_COLOR}" stroke-width="1"/>'
        )

    width = scene.request_lane.x_position + 90.0
    view_box = f"0 {_fmt(-10.0)} {_fmt(width)} {_fmt(bottom + 20.0)}"
    return _svg_document(width, bottom + 20.0, view_box, body)


def _render_detail(scene: DetailScene) -> str:
    ring = 95.0
    half_w, half_h = 70.0, 30.0
    body: list[str] = [
        f'<rect id="control-box" class="control" x="{_fmt(-half_w)}" y="{_fmt(-half_h)}"'
        f' width="{_fmt(2 * half_w)}" height="{_fmt(2 * half_h)}" fill="#ffffff"'
        f' stroke="#444" stroke-width="1.5"/>',
        f'<text class="control-name" x="0" y="-12" font-size="10"'
        f' text-anchor="middle">{escape(scene.name)}</text>',
        f'<text class="control-type" x="0" y="2" font-size="8"'
        f' text-anchor="middle">{escape(scene.control_type)}</text>',
        f'<text class="control-value" x="0" y="16" font-size="8"'
        f' text-anchor="middle">{escape(scene.observed_value)}</text>',
    ]
    for j, ellipse in enumerate(scene.ellipses):
        cx, cy = _polar(ring, ellipse.angle)
        fill = CONSTRAINT_FILLS[ellipse.fill]
        body.append(
            f'<ellipse id="constraint-{j}" class="constraint" cx="{_fmt(cx)}" cy="{_fmt(cy)}"'
            f' rx="52" ry="20" fill="{fill}" fill-opacity="0.85" stroke="#333"'
            f' data-fill={quoteattr(ellipse.fill.value)}/>'
        )
        body.append(
            f'<text class="constraint-label" x="{_fmt(cx)}" y="{_fmt(cy + 3)}" font-size="7"'
            f' text-anchor="middle" fill="#ffffff">{escape(ellipse.label)}</text>'
        )
    extent = ring + 60.0
    view_box = f"{_fmt(-extent)} {_fmt(-extent)} {_fmt(2 * extent)} {_fmt(2 * extent)}"
    return _svg_document(2 * extent, 2 * extent, view_box, body)


def render_svg(scene: CircleScene | LaneScene | DetailScene) -> str:
    """Render any scene to standalone SVG text."""
    if isinstance(scene, CircleScene):
        return _render_circle(scene)
    if isinstance(scene, LaneScene):
        return _render_lanes(scene)
    if isinstance(scene, DetailScene):
        return _render_detail(scene)
    raise TypeError(f"not a renderable scene: {type(scene).__name__}")
