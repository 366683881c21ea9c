"""Three-level verdicts for captured requests against the learned structure.

Level 1 locates the destination group and checks method and source
page. Level 2 compares the submitted name/value pairs against the
matched form's ordered control set. Level 3 checks each matched value
against its control's declared constraints. A level that passes while
a deeper one fails is pre-flagged as a deep anomaly so an operator
scanning the overview can tell where drilling down will pay off.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum
from urllib.parse import urlsplit

from .capture import FormRequest, parse_query_string
from .model import (
    ApplicationStructure,
    ConstraintKind,
    ControlConstraint,
    ControlSpec,
    DestinationGroup,
    FormStructure,
)

__all__ = [
    "DummyReason",
    "LevelStatus",
    "Level1Result",
    "ControlSetDiff",
    "ConstraintVerdict",
    "ControlValueCheck",
    "ClassifiedRequest",
    "find_destination_group",
    "level1_match",
    "level2_diff",
    "level3_check",
    "classify",
    "worst_status",
]


class DummyReason(str, Enum):
    UNKNOWN_DESTINATION = "unknown-destination"
    INVALID_METHOD = "invalid-method"
    INVALID_SOURCE = "invalid-source"


class LevelStatus(str, Enum):
    NORMAL = "normal"
    DEEP_ANOMALY = "deep-anomaly"
    VIOLATION = "violation"


_STATUS_RANK = {LevelStatus.NORMAL: 0, LevelStatus.DEEP_ANOMALY: 1, LevelStatus.VIOLATION: 2}


def worst_status(statuses) -> LevelStatus:
    worst = LevelStatus.NORMAL
    for status in statuses:
        if _STATUS_RANK[status] > _STATUS_RANK[worst]:
            worst = status
    return worst


@dataclass(frozen=True)
class Level1Result:
    """Either the id of the matched form or why the request is a dummy."""

    matched_form_id: str | None = None
    dummy_reason: DummyReason | None = None

    def __post_init__(self) -> None:
        if (self.matched_form_id is None) == (self.dummy_reason is None):
            raise ValueError("exactly one of matched_form_id/dummy_reason must be set")

    @property
    def is_matched(self) -> bool:
        return self.matched_form_id is not None


@dataclass(frozen=True)
class ControlSetDiff:
    """Outcome of comparing submitted pairs against a form's control set.

    ``matched`` holds (param index, control order_index) pairs. Names in
    the missing lists repeat once per unmatched same-named control.
    """

    missing_mandatory: tuple[str, ...]
    unknown_params: tuple[str, ...]
    missing_optional: tuple[str, ...]
    order_warning: bool
    matched: tuple[tuple[int, int], ...]

    @property
    def is_violation(self) -> bool:
        # missing optional controls and reordering alone are advisory
        return bool(self.missing_mandatory or self.unknown_params)


@dataclass(frozen=True)
class ConstraintVerdict:
    constraint: ControlConstraint
    satisfied: bool
    observed: str


@dataclass(frozen=True)
class ControlValueCheck:
    """Constraint verdicts for one matched (control, param) pair."""

    control_order: int
    param_index: int
    verdicts: tuple[ConstraintVerdict, ...]


@dataclass(frozen=True)
class ClassifiedRequest:
    request: FormRequest
    l1: Level1Result
    l2: ControlSetDiff | None
    l3: tuple[ControlValueCheck, ...]
    status_per_level: tuple[tuple[str, LevelStatus], ...]

    def status(self, level: str) -> LevelStatus | None:
        for name, value in self.status_per_level:
            if name == level:
                return value
        return None

    @property
    def overall(self) -> LevelStatus:
        return worst_status(status for _, status in self.status_per_level)

    def violated_levels(self) -> tuple[str, ...]:
        return tuple(
            level for level, status in self.status_per_level if status is LevelStatus.VIOLATION
        )

    def to_dict(self) -> dict:
        """Verdict record: the JSON shape consumed by reports, stream and UI."""
        request = self.request
        return {
            "request": {
                "request_id": request.request_id,
                "timestamp": request.timestamp,
                "method": request.method,
                "destination": request.destination,
                "referer": request.referer,
                "params": [[name, value] for name, value in request.params],
                "decode_warning": request.decode_warning,
            },
            "l1": {
                "matched_form_id": self.l1.matched_form_id,
                "dummy_reason": self.l1.dummy_reason.value if self.l1.dummy_reason else None,
            },
            "l2": None
            if self.l2 is None
            else {
                "missing_mandatory": list(self.l2.missing_mandatory),
                "unknown_params": list(self.l2.unknown_params),
                "missing_optional": list(self.l2.missing_optional),
                "order_warning": self.l2.order_warning,
                "matched": [list(pair) for pair in self.l2.matched],
            },
            "l3": [
                {
                    "control_order": check.control_order,
                    "param_index": check.param_index,
                    "verdicts": [
                        {
                            "constraint": verdict.constraint.to_dict(),
                            "satisfied": verdict.satisfied,
                            "observed": verdict.observed,
                        }
                        for verdict in check.verdicts
                    ],
                }
                for check in self.l3
            ],
            "status_per_level": {level: status.value for level, status in self.status_per_level},
            "overall": self.overall.value,
        }


def _split_base(url: str) -> tuple[str, str, str]:
    parts = urlsplit(url)
    return parts.scheme, parts.netloc, parts.path


def find_destination_group(
    request: FormRequest, structure: ApplicationStructure
) -> DestinationGroup | None:
    """Locate the group a request is addressed to, or None when unknown.

    POST requests carry the form's action verbatim, so matching is
    exact URL equality. A GET form encodes its parameters in the
    request query, so for GET the query is matched by containment: the
    destination's own query pairs must all appear in the request, and
    submitted control values on top of them do not break the match.
    Among several containment matches the most specific destination
    (most query pairs) wins, ties going to first-discovered.
    """
    if request.method == "GET":
        request_base = _split_base(request.destination)
        request_pairs = Counter(parse_query_string(urlsplit(request.destination).query))
        best: DestinationGroup | None = None
        best_specificity = -1
        for group in structure.groups:
            if _split_base(group.destination_page) != request_base:
                continue
            destination_pairs = Counter(
                parse_query_string(urlsplit(group.destination_page).query)
            )
            if any(request_pairs[pair] < count for pair, count in destination_pairs.items()):
                continue
            if len(destination_pairs) > best_specificity:
                best = group
                best_specificity = len(destination_pairs)
        return best

    for group in structure.groups:
        if group.destination_page == request.destination:
            return group
    return None


def _jaccard(left: set[str], right: set[str]) -> float:
    if not left and not right:
        return 1.0
    union = left | right
    return len(left & right) / len(union)


def level1_match(
    request: FormRequest,
    structure: ApplicationStructure,
    *,
    allow_missing_referer: bool = False,
) -> Level1Result:
    """Validate destination, method and source page; pick the form.

    Among forms surviving the method and source filters, the one whose
    control names are closest (Jaccard similarity) to the submitted
    names wins; ties go to the lowest within-group index.
    """
    group = find_destination_group(request, structure)
    if group is None or not group.forms:
        return Level1Result(dummy_reason=DummyReason.UNKNOWN_DESTINATION)

    method_matches = [form for form in group.forms if form.method.value == request.method]
    if not method_matches:
        return Level1Result(dummy_reason=DummyReason.INVALID_METHOD)

    if request.referer is None and allow_missing_referer:
        source_matches = method_matches
    else:
        source_matches = [
            form for form in method_matches if form.source_page == request.referer
        ]
    if not source_matches:
        return Level1Result(dummy_reason=DummyReason.INVALID_SOURCE)

    param_names = set(request.param_names())
    best = source_matches[0]
    best_score = -1.0
    for form in source_matches:
        score = _jaccard(param_names, set(form.control_names()))
        if score > best_score:
            best = form
            best_score = score
    return Level1Result(matched_form_id=best.form_id)


def level2_diff(request: FormRequest, form: FormStructure) -> ControlSetDiff:
    """Greedy in-order matching of submitted pairs to declared controls.

    Each param consumes the next unconsumed control of the same name,
    so duplicate names are allowed up to the declared multiplicity and
    anything beyond that overflows into unknown params.
    """
    controls = sorted(form.controls, key=lambda c: c.order_index)
    available: dict[str, deque[ControlSpec]] = {}
    for control in controls:
        available.setdefault(control.name, deque()).append(control)

    matched: list[tuple[int, int]] = []
    unknown: list[str] = []
    consumed: set[int] = set()
    for param_index, (name, _value) in enumerate(request.params):
        queue = available.get(name)
        if queue:
            control = queue.popleft()
            consumed.add(control.order_index)
            matched.append((param_index, control.order_index))
        else:
            unknown.append(name)

    missing_mandatory = [
        c.name for c in controls if c.order_index not in consumed and c.mandatory
    ]
    missing_optional = [
        c.name for c in controls if c.order_index not in consumed and not c.mandatory
    ]
    matched_orders = [order for _, order in matched]
    order_warning = any(
        later < earlier for earlier, later in zip(matched_orders, matched_orders[1:])
    )
    return ControlSetDiff(
        missing_mandatory=tuple(missing_mandatory),
        unknown_params=tuple(unknown),
        missing_optional=tuple(missing_optional),
        order_warning=order_warning,
        matched=tuple(matched),
    )


def level3_check(value: str, control: ControlSpec) -> list[ConstraintVerdict]:
    """One verdict per declared constraint, in declaration order."""
    verdicts = []
    for constraint in control.constraints:
        if constraint.kind is ConstraintKind.MAX_LENGTH:
            satisfied = len(value) <= (constraint.limit or 0)
        elif constraint.kind is ConstraintKind.FIXED_VALUE:
            satisfied = value == constraint.expected
        else:
            satisfied = value in (constraint.allowed or frozenset())
        verdicts.append(ConstraintVerdict(constraint=constraint, satisfied=satisfied, observed=value))
    return verdicts


def classify(
    request: FormRequest,
    structure: ApplicationStructure,
    *,
    allow_missing_referer: bool = False,
) -> ClassifiedRequest:
    """Full three-level classification; pure in (request, structure)."""
    l1 = level1_match(request, structure, allow_missing_referer=allow_missing_referer)
    if not l1.is_matched:
        return ClassifiedRequest(
            request=request,
            l1=l1,
            l2=None,
            l3=(),
            status_per_level=(("l1", LevelStatus.VIOLATION),),
        )

    form = structure.find_form(l1.matched_form_id or "")
    assert form is not None  # matched ids come from this structure
    diff = level2_diff(request, form)

    checks: list[ControlValueCheck] = []
    for param_index, control_order in diff.matched:
        control = form.control_at(control_order)
        assert control is not None
        value = request.params[param_index][1]
        checks.append(
            ControlValueCheck(
                control_order=control_order,
                param_index=param_index,
                verdicts=tuple(level3_check(value, control)),
            )
        )

    l3_failed = any(not verdict.satisfied for check in checks for verdict in check.verdicts)
    l2_failed = diff.is_violation

    l3_status = LevelStatus.VIOLATION if l3_failed else LevelStatus.NORMAL
    if l2_failed:
        l2_status = LevelStatus.VIOLATION
    elif l3_failed:
        l2_status = LevelStatus.DEEP_ANOMALY
    else:
        l2_status = LevelStatus.NORMAL
    l1_status = LevelStatus.DEEP_ANOMALY if (l2_failed or l3_failed) else LevelStatus.NORMAL

    return ClassifiedRequest(
        request=request,
        l1=l1,
        l2=diff,
        l3=tuple(checks),
        status_per_level=(("l1", l1_status), ("l2", l2_status), ("l3", l3_status)),
    )
