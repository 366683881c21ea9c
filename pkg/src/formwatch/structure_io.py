"""Load and save the versioned structure document.

This single canonical JSON format is the contract between the crawler
(which writes it) and the monitor (which loads it); the two run as
separate processes. Serialization is deterministic so identical
structures produce identical bytes.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .model import (
    ApplicationStructure,
    ControlConstraint,
    ControlSpec,
    ControlType,
    DestinationGroup,
    FormMethod,
    FormStructure,
    stable_digest,
    validate_structure,
)

__all__ = [
    "FORMAT_VERSION",
    "StructureLoadError",
    "StructureParseError",
    "StructureFormatError",
    "StructureValidationError",
    "structure_to_dict",
    "structure_from_dict",
    "save_structure",
    "load_structure",
    "structure_digest",
]

FORMAT_VERSION = 1


class StructureLoadError(ValueError):
    """Base for everything that can go wrong reading a structure file."""


class StructureParseError(StructureLoadError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"structure file is not valid JSON at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class StructureFormatError(StructureLoadError):
    pass


class StructureValidationError(StructureLoadError):
    def __init__(self, violations: list[str]):
        listing = "; ".join(violations)
        super().__init__(f"structure violates {len(violations)} invariant(s): {listing}")
        self.violations = violations


def structure_to_dict(structure: ApplicationStructure) -> dict:
    doc: dict = {
        "version": FORMAT_VERSION,
        "base_url": structure.base_url,
        "crawled_at": structure.crawled_at,
        "groups": [
            {
                "destination": group.destination_page,
                "forms": [
                    {
                        "id": form.form_id,
                        "source": form.source_page,
                        "method": form.method.value,
                        "controls": [
                            {
                                "name": control.name,
                                "type": control.control_type.value,
                                "order": control.order_index,
                                "mandatory": control.mandatory,
                                "constraints": [c.to_dict() for c in control.constraints],
                            }
                            for control in form.controls
                        ],
                    }
                    for form in group.forms
                ],
            }
            for group in structure.groups
        ],
    }
    if structure.diagnostics:
        doc["diagnostics"] = list(structure.diagnostics)
    return doc


def _require(record: Mapping, key: str, where: str):
    if key not in record:
        raise StructureFormatError(f"{where}: missing required key {key!r}")
    return record[key]


def structure_from_dict(doc: Mapping) -> ApplicationStructure:
    if not isinstance(doc, Mapping):
        raise StructureFormatError("structure document must be a JSON object")
    version = _require(doc, "version", "document")
    if version != FORMAT_VERSION:
        raise StructureFormatError(f"unsupported structure format version {version!r}")

    groups = []
    for group_index, group_record in enumerate(_require(doc, "groups", "document")):
        where = f"groups[{group_index}]"
        destination = str(_require(group_record, "destination", where))
        forms = []
        for form_index, form_record in enumerate(_require(group_record, "forms", where)):
            form_where = f"{where}.forms[{form_index}]"
            try:
                method = FormMethod(str(_require(form_record, "method", form_where)).upper())
            except ValueError:
                raise StructureFormatError(
                    f"{form_where}: method must be GET or POST, got {form_record.get('method')!r}"
                ) from None
            controls = []
            for control_record in _require(form_record, "controls", form_where):
                try:
                    control_type = ControlType(str(control_record["type"]))
                except (KeyError, ValueError):
                    raise StructureFormatError(
                        f"{form_where}: bad control type {control_record.get('type')!r}"
                    ) from None
                try:
                    constraints = tuple(
                        ControlConstraint.from_dict(c) for c in control_record.get("constraints", [])
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    raise StructureFormatError(f"{form_where}: bad constraint ({exc})") from None
                controls.append(
                    ControlSpec(
                        name=str(_require(control_record, "name", form_where)),
                        control_type=control_type,
                        order_index=int(_require(control_record, "order", form_where)),
                        mandatory=bool(_require(control_record, "mandatory", form_where)),
                        constraints=constraints,
                    )
                )
            forms.append(
                FormStructure(
                    form_id=str(_require(form_record, "id", form_where)),
                    source_page=str(_require(form_record, "source", form_where)),
                    destination_page=destination,
                    method=method,
                    controls=tuple(controls),
                )
            )
        groups.append(DestinationGroup(destination_page=destination, forms=tuple(forms)))

    structure = ApplicationStructure(
        base_url=str(_require(doc, "base_url", "document")),
        crawled_at=str(doc.get("crawled_at", "")),
        groups=tuple(groups),
        diagnostics=tuple(str(d) for d in doc.get("diagnostics", [])),
    )
    violations = validate_structure(structure)
    if violations:
        raise StructureValidationError(violations)
    return structure


def save_structure(structure: ApplicationStructure, path: str | Path) -> None:
    violations = validate_structure(structure)
    if violations:
        raise StructureValidationError(violations)
    text = json.dumps(structure_to_dict(structure), indent=2, sort_keys=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_structure(path: str | Path) -> ApplicationStructure:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureParseError(exc.msg, exc.lineno, exc.colno) from None
    return structure_from_dict(doc)


def structure_digest(structure: ApplicationStructure) -> str:
    """Short stable id of a structure snapshot, for tagging verdicts."""
    return stable_digest(structure_to_dict(structure))[:12]
