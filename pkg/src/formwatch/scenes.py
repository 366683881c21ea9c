"""Renderer-independent geometry for the three monitoring views.

Level 1 is a circle of equal form sectors around a destination, with
one extra dummy sector catching requests that failed matching. Level 2
is a pair of parallel directed lanes comparing a form's ordered
control set against one request's ordered pairs. Level 3 is a single
control's properties in a rectangle ringed by one ellipse per declared
constraint. Colors come straight from the classifier's status enums;
nothing here re-derives a verdict.

Coordinates are abstract units (circle radius 100, lane pitch 20);
renderers scale as they wish.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .classify import ClassifiedRequest, ConstraintVerdict, LevelStatus
from .model import ControlSpec, DestinationGroup, FormStructure, unit_hash

__all__ = [
    "RADIUS",
    "LANE_PITCH",
    "STATUS_COLORS",
    "CONSTRAINT_FILLS",
    "DUMMY_SECTOR_FILL",
    "SECTOR_FILL",
    "SegmentStyle",
    "EllipseFill",
    "CircleSector",
    "CircleGlyph",
    "CircleScene",
    "LaneSegment",
    "Lane",
    "LaneScene",
    "DetailEllipse",
    "DetailScene",
    "layout_overview",
    "layout_form",
    "layout_control",
]

RADIUS = 100.0
LANE_PITCH = 20.0
STRUCTURE_LANE_X = 60.0
REQUEST_LANE_X = 180.0

# normal is a neutral gray-blue; deep anomalies and violations use
# colorblind-safe orange and red; the dummy sector is set apart by fill
STATUS_COLORS: Mapping[LevelStatus, str] = {
    LevelStatus.NORMAL: "#6b8cae",
    LevelStatus.DEEP_ANOMALY: "#e69f00",
    LevelStatus.VIOLATION: "#d0342c",
}
SECTOR_FILL = "#f4f6f8"
DUMMY_SECTOR_FILL = "#d9c8e8"
LINK_COLOR = "#b0b8bf"


class SegmentStyle(str, Enum):
    SOLID = "solid"
    DASHED = "dashed"


class EllipseFill(str, Enum):
    GREEN = "green"
    RED = "red"


CONSTRAINT_FILLS: Mapping[EllipseFill, str] = {
    EllipseFill.GREEN: "#2e8b57",
    EllipseFill.RED: "#d0342c",
}


@dataclass(frozen=True)
class CircleSector:
    index: int
    angular_span: float
    label: str
    is_dummy: bool

    @property
    def start_angle(self) -> float:
        return self.index * self.angular_span


@dataclass(frozen=True)
class CircleGlyph:
    request_id: str
    sector_index: int
    angle: float
    radial_distance: float
    status_color: str


@dataclass(frozen=True)
class CircleScene:
    destination: str
    radius: float
    sectors: tuple[CircleSector, ...]
    glyphs: tuple[CircleGlyph, ...]

    def to_dict(self) -> dict:
        return {
            "kind": "circle",
            "destination": self.destination,
            "radius": self.radius,
            "sectors": [
                {
                    "index": s.index,
                    "angular_span": s.angular_span,
                    "start_angle": s.start_angle,
                    "label": s.label,
                    "is_dummy": s.is_dummy,
                }
                for s in self.sectors
            ],
            "glyphs": [
                {
                    "request_id": g.request_id,
                    "sector_index": g.sector_index,
                    "angle": g.angle,
                    "radial_distance": g.radial_distance,
                    "status_color": g.status_color,
                }
                for g in self.glyphs
            ],
        }


@dataclass(frozen=True)
class LaneSegment:
    index: int
    y_position: float
    style: SegmentStyle
    label: str


@dataclass(frozen=True)
class Lane:
    x_position: float
    direction: str
    segments: tuple[LaneSegment, ...]


@dataclass(frozen=True)
class LaneScene:
    form_id: str
    request_id: str
    structure_lane: Lane
    request_lane: Lane
    links: tuple[tuple[int, int], ...]
    segment_colors: tuple[tuple[str, str], ...]

    def color_of(self, lane: str, index: int) -> str:
        key = f"{lane}:{index}"
        for name, color in self.segment_colors:
            if name == key:
                return color
        raise KeyError(key)

    def to_dict(self) -> dict:
        def lane_dict(lane: Lane) -> dict:
            return {
                "x_position": lane.x_position,
                "direction": lane.direction,
                "segments": [
                    {
                        "index": s.index,
                        "y_position": s.y_position,
                        "style": s.style.value,
                        "label": s.label,
                    }
                    for s in lane.segments
                ],
            }

        return {
            "kind": "lanes",
            "form_id": self.form_id,
            "request_id": self.request_id,
            "structure_lane": lane_dict(self.structure_lane),
            "request_lane": lane_dict(self.request_lane),
            "links": [list(link) for link in self.links],
            "segment_colors": dict(self.segment_colors),
        }


@dataclass(frozen=True)
class DetailEllipse:
    label: str
    angle: float
    fill: EllipseFill


@dataclass(frozen=True)
class DetailScene:
    name: str
    control_type: str
    observed_value: str
    ellipses: tuple[DetailEllipse, ...]

    def to_dict(self) -> dict:
        return {
            "kind": "detail",
            "name": self.name,
            "control_type": self.control_type,
            "observed_value": self.observed_value,
            "ellipses": [
                {"label": e.label, "angle": e.angle, "fill": e.fill.value}
                for e in self.ellipses
            ],
        }


def layout_overview(
    group: DestinationGroup, classified: Sequence[ClassifiedRequest]
) -> CircleScene:
    """Circle-of-forms scene for one destination group.

    N form sectors plus one dummy sector share the circle equally.
    Glyph placement inside a sector is a pure hash of the request id,
    so repeated renders of the same data are identical.
    """
    forms = group.forms
    count = len(forms)
    span = 2.0 * math.pi / (count + 1)

    sectors = [
        CircleSector(index=i, angular_span=span, label=form.form_id, is_dummy=False)
        for i, form in enumerate(forms)
    ]
    sectors.append(CircleSector(index=count, angular_span=span, label="dummy", is_dummy=True))
    sector_of_form = {form.form_id: i for i, form in enumerate(forms)}

    glyphs = []
    for item in classified:
        if item.l1.is_matched:
            form_id = item.l1.matched_form_id or ""
            if form_id not in sector_of_form:
                raise ValueError(
                    f"request {item.request.request_id} matched form {form_id},"
                    f" which is not in group {group.destination_page!r}"
                )
            sector_index = sector_of_form[form_id]
        else:
            sector_index = count
        rid = item.request.request_id
        angle = sector_index * span + unit_hash(rid, "angle") * span * 0.9
        radial = (0.3 + 0.65 * unit_hash(rid, "radial")) * RADIUS
        status = item.status("l1") or LevelStatus.VIOLATION
        glyphs.append(
            CircleGlyph(
                request_id=rid,
                sector_index=sector_index,
                angle=angle,
                radial_distance=radial,
                status_color=STATUS_COLORS[status],
            )
        )

    return CircleScene(
        destination=group.destination_page,
        radius=RADIUS,
        sectors=tuple(sectors),
        glyphs=tuple(glyphs),
    )


def layout_form(form: FormStructure, classified: ClassifiedRequest) -> LaneScene:
    """Parallel-lane comparison of one form against one matched request."""
    if not classified.l1.is_matched or classified.l1.matched_form_id != form.form_id:
        raise ValueError(
            f"request {classified.request.request_id} was not matched to form {form.form_id}"
        )
    diff = classified.l2
    assert diff is not None

    controls = sorted(form.controls, key=lambda c: c.order_index)
    structure_segments = tuple(
        LaneSegment(
            index=control.order_index,
            y_position=(control.order_index + 1) * LANE_PITCH,
            style=SegmentStyle.SOLID if control.mandatory else SegmentStyle.DASHED,
            label=control.name,
        )
        for control in controls
    )
    request_segments = tuple(
        LaneSegment(
            index=param_index,
            y_position=(param_index + 1) * LANE_PITCH,
            style=SegmentStyle.SOLID,
            label=name,
        )
        for param_index, (name, _value) in enumerate(classified.request.params)
    )

    matched_orders = {order for _, order in diff.matched}
    matched_params = {param for param, _ in diff.matched}
    failed_params = {
        check.param_index
        for check in classified.l3
        if any(not verdict.satisfied for verdict in check.verdicts)
    }

    normal = STATUS_COLORS[LevelStatus.NORMAL]
    violation = STATUS_COLORS[LevelStatus.VIOLATION]
    deep = STATUS_COLORS[LevelStatus.DEEP_ANOMALY]

    colors: list[tuple[str, str]] = []
    for control in controls:
        missing_mandatory = control.mandatory and control.order_index not in matched_orders
        colors.append(
            (f"structure:{control.order_index}", violation if missing_mandatory else normal)
        )
    for param_index in range(len(classified.request.params)):
        if param_index not in matched_params:
            color = violation
        elif param_index in failed_params:
            color = deep
        else:
            color = normal
        colors.append((f"request:{param_index}", color))

    return LaneScene(
        form_id=form.form_id,
        request_id=classified.request.request_id,
        structure_lane=Lane(x_position=STRUCTURE_LANE_X, direction="down", segments=structure_segments),
        request_lane=Lane(x_position=REQUEST_LANE_X, direction="down", segments=request_segments),
        links=diff.matched,
        segment_colors=tuple(colors),
    )


def layout_control(
    control: ControlSpec, observed: str, verdicts: Sequence[ConstraintVerdict]
) -> DetailScene:
    """Rectangle of control properties ringed by constraint ellipses."""
    if len(verdicts) != len(control.constraints):
        raise ValueError(
            f"control {control.name!r} declares {len(control.constraints)} constraint(s)"
            f" but {len(verdicts)} verdict(s) were supplied"
        )
    for constraint, verdict in zip(control.constraints, verdicts):
        if verdict.constraint != constraint:
            raise ValueError(
                f"verdict for control {control.name!r} does not correspond to its constraint"
            )

    total = len(verdicts)
    ellipses = tuple(
        DetailEllipse(
            label=verdict.constraint.describe(),
            angle=2.0 * math.pi * j / total,
            fill=EllipseFill.GREEN if verdict.satisfied else EllipseFill.RED,
        )
        for j, verdict in enumerate(verdicts)
    )
    return DetailScene(
        name=control.name,
        control_type=control.control_type.value,
        observed_value=observed,
        ellipses=ellipses,
    )
