"""Domain model for an application's declared form structure.

The structure is what the crawler learned about a target application:
which pages declare forms, where those forms submit to, which controls
they carry and what value restrictions the HTML declares. Everything
here is an immutable value object; the monitor shares one structure
snapshot across any number of concurrent readers.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence
from urllib.parse import urlsplit

__all__ = [
    "ControlType",
    "ConstraintKind",
    "FormMethod",
    "ControlConstraint",
    "ControlSpec",
    "FormStructure",
    "DestinationGroup",
    "ApplicationStructure",
    "compute_form_id",
    "stable_digest",
    "unit_hash",
    "infer_mandatory",
    "validate_structure",
]


class ControlType(str, Enum):
    TEXT = "text"
    PASSWORD = "password"
    HIDDEN = "hidden"
    CHECKBOX = "checkbox"
    RADIO = "radio"
    SELECT = "select"
    TEXTAREA = "textarea"
    SUBMIT = "submit"
    FILE = "file"
    OTHER = "other"


class ConstraintKind(str, Enum):
    MAX_LENGTH = "max-length"
    FIXED_VALUE = "fixed-value"
    ALLOWED_SET = "allowed-set"


class FormMethod(str, Enum):
    GET = "GET"
    POST = "POST"


@dataclass(frozen=True)
class ControlConstraint:
    """One declared restriction on the values a control may carry.

    Exactly the payload field matching ``kind`` is populated:
    ``limit`` for MAX_LENGTH, ``expected`` for FIXED_VALUE and
    ``allowed`` for ALLOWED_SET. Use the factory classmethods; the
    plain constructor is unchecked so that broken data loaded from
    disk can still be represented and reported by the validator.
    """

    kind: ConstraintKind
    limit: int | None = None
    expected: str | None = None
    allowed: frozenset[str] | None = None

    @classmethod
    def max_length(cls, limit: int) -> "ControlConstraint":
        if limit < 0:
            raise ValueError(f"max-length limit must be >= 0, got {limit}")
        return cls(kind=ConstraintKind.MAX_LENGTH, limit=int(limit))

    @classmethod
    def fixed_value(cls, expected: str) -> "ControlConstraint":
        return cls(kind=ConstraintKind.FIXED_VALUE, expected=expected)

    @classmethod
    def allowed_set(cls, values: Iterable[str]) -> "ControlConstraint":
        allowed = frozenset(values)
        if not allowed:
            raise ValueError("allowed-set constraint needs at least one value")
        return cls(kind=ConstraintKind.ALLOWED_SET, allowed=allowed)

    def describe(self) -> str:
        """Short human-readable label, used by the control detail scene."""
        if self.kind is ConstraintKind.MAX_LENGTH:
            return f"length <= {self.limit}"
        if self.kind is ConstraintKind.FIXED_VALUE:
            return f"value == {self.expected!r}"
        values = ", ".join(sorted(self.allowed or ()))
        return f"value in {{{values}}}"

    def to_dict(self) -> dict:
        record: dict = {"kind": self.kind.value}
        if self.kind is ConstraintKind.MAX_LENGTH:
            record["limit"] = self.limit
        elif self.kind is ConstraintKind.FIXED_VALUE:
            record["expected"] = self.expected
        else:
            record["allowed"] = sorted(self.allowed or ())
        return record

    @classmethod
    def from_dict(cls, record: Mapping) -> "ControlConstraint":
        kind = ConstraintKind(record["kind"])
        if kind is ConstraintKind.MAX_LENGTH:
            return cls(kind=kind, limit=int(record["limit"]))
        if kind is ConstraintKind.FIXED_VALUE:
            return cls(kind=kind, expected=str(record["expected"]))
        return cls(kind=kind, allowed=frozenset(str(v) for v in record["allowed"]))


@dataclass(frozen=True)
class ControlSpec:
    """One form control as declared in HTML, in document order."""

    name: str
    control_type: ControlType
    order_index: int
    mandatory: bool
    constraints: tuple[ControlConstraint, ...] = ()


@dataclass(frozen=True)
class FormStructure:
    """A declared form: where it lives, where it submits, its controls."""

    form_id: str
    source_page: str
    destination_page: str
    method: FormMethod
    controls: tuple[ControlSpec, ...] = ()

    def control_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.controls)

    def control_at(self, order_index: int) -> ControlSpec | None:
        for control in self.controls:
            if control.order_index == order_index:
                return control
        return None


@dataclass(frozen=True)
class DestinationGroup:
    """All known forms that submit to one destination URL."""

    destination_page: str
    forms: tuple[FormStructure, ...] = ()


@dataclass(frozen=True)
class ApplicationStructure:
    """The crawler's complete picture of one application."""

    base_url: str
    crawled_at: str
    groups: tuple[DestinationGroup, ...] = ()
    diagnostics: tuple[str, ...] = ()

    def iter_forms(self) -> Iterable[FormStructure]:
        for group in self.groups:
            yield from group.forms

    def find_form(self, form_id: str) -> FormStructure | None:
        for form in self.iter_forms():
            if form.form_id == form_id:
                return form
        return None

    def with_groups(self, groups: Sequence[DestinationGroup]) -> "ApplicationStructure":
        return replace(self, groups=tuple(groups))


def stable_digest(*parts: object) -> str:
    """Hex digest of a canonical JSON encoding of ``parts``.

    Single stable hash used everywhere an identifier or reproducible
    pseudo-random placement is derived from structure/request data.
    """
    payload = json.dumps(parts, separators=(",", ":"), sort_keys=True, default=str)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def unit_hash(*parts: object) -> float:
    """Deterministic float strictly inside (0, 1) derived from ``parts``."""
    bucket = int(stable_digest(*parts)[:16], 16)
    return (bucket + 0.5) / float(1 << 64)


def compute_form_id(
    source_page: str,
    destination_page: str,
    method: FormMethod | str,
    control_names: Sequence[str],
) -> str:
    """Stable 12-hex-digit identifier for a form.

    Depends only on where the form lives, where it submits, its method
    and its ordered control names, so re-crawling unchanged pages keeps
    ids (and drill-down URLs) stable.
    """
    method_value = method.value if isinstance(method, FormMethod) else str(method)
    return stable_digest(source_page, destination_page, method_value, list(control_names))[:12]


def infer_mandatory(control_type: ControlType, html_attributes: Mapping[str, str | None]) -> bool:
    """Decide whether a control is assumed present in every legitimate submission.

    Unchecked checkboxes are omitted from submissions entirely, so
    checkboxes are never mandatory. A radio group is mandatory only
    when some member is pre-checked (callers pass ``checked`` for every
    member of such a group). Every other control type is always
    serialized by browsers, hence mandatory.
    """
    if control_type is ControlType.CHECKBOX:
        return False
    if control_type is ControlType.RADIO:
        return "checked" in html_attributes
    return True


def _is_absolute_url(url: str) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return bool(parts.scheme) and bool(parts.netloc)


def _expected_payload_fields(kind: ConstraintKind) -> str:
    return {
        ConstraintKind.MAX_LENGTH: "limit",
        ConstraintKind.FIXED_VALUE: "expected",
        ConstraintKind.ALLOWED_SET: "allowed",
    }[kind]


def _validate_constraint(constraint: ControlConstraint, where: str, out: list[str]) -> None:
    populated = {
        name
        for name, value in (
            ("limit", constraint.limit),
            ("expected", constraint.expected),
            ("allowed", constraint.allowed),
        )
        if value is not None
    }
    expected_field = _expected_payload_fields(constraint.kind)
    if populated != {expected_field}:
        out.append(
            f"{where}: constraint {constraint.kind.value} must populate exactly"
            f" {expected_field!r}, found {sorted(populated) or 'nothing'}"
        )
        return
    if constraint.kind is ConstraintKind.MAX_LENGTH and (constraint.limit or 0) < 0:
        out.append(f"{where}: max-length limit must be >= 0, got {constraint.limit}")
    if constraint.kind is ConstraintKind.ALLOWED_SET and not constraint.allowed:
        out.append(f"{where}: allowed-set constraint is empty")


_ENUMERATED_TYPES = (ControlType.CHECKBOX, ControlType.RADIO, ControlType.SELECT)


def _validate_form(form: FormStructure, out: list[str]) -> None:
    label = f"form {form.form_id} ({form.source_page} -> {form.destination_page})"
    if not _is_absolute_url(form.destination_page):
        out.append(f"{label}: destination page is not an absolute URL")
    if not _is_absolute_url(form.source_page):
        out.append(f"{label}: source page is not an absolute URL")

    indices = sorted(c.order_index for c in form.controls)
    if indices != list(range(len(form.controls))):
        out.append(f"{label}: control order indices are not contiguous from 0, got {indices}")
    pairs = {(c.name, c.order_index) for c in form.controls}
    if len(pairs) != len(form.controls):
        out.append(f"{label}: duplicate (name, order_index) pair among controls")

    for control in form.controls:
        where = f"{label}, control {control.name!r}@{control.order_index}"
        if not control.name:
            out.append(f"{where}: control name is empty")
        if control.control_type in _ENUMERATED_TYPES and not any(
            c.kind is ConstraintKind.ALLOWED_SET for c in control.constraints
        ):
            out.append(
                f"{where}: {control.control_type.value} control lacks an allowed-set constraint"
            )
        for constraint in control.constraints:
            _validate_constraint(constraint, where, out)


def validate_structure(structure: ApplicationStructure) -> list[str]:
    """Check every structural invariant; returns violation descriptions.

    Total: never raises, an empty list means the structure is well
    formed. Violations are data for the operator, not exceptions.
    """
    out: list[str] = []
    if not _is_absolute_url(structure.base_url):
        out.append(f"structure base_url {structure.base_url!r} is not an absolute URL")

    seen_destinations: set[str] = set()
    for group in structure.groups:
        if group.destination_page in seen_destinations:
            out.append(f"duplicate destination group {group.destination_page!r}")
        seen_destinations.add(group.destination_page)
        for form in group.forms:
            if form.destination_page != group.destination_page:
                out.append(
                    f"form {form.form_id} has destination {form.destination_page!r}"
                    f" but sits in group {group.destination_page!r}"
                )
            _validate_form(form, out)
    return out
