"""Generate labeled normal and tampered request corpora.

Normal requests are built directly from a form's declared structure so
they satisfy every constraint by construction. Tampered requests apply
exactly one structural attack primitive each (method flip, forged
source, removed mandatory control, injected control, oversized value,
tampered fixed value, out-of-set value), carrying the level the
classifier is expected to flag. The label file is the ground truth the
classifier test suite is measured against; nothing here consults the
classifier to decide a label.
"""
from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Sequence
from urllib.parse import urlsplit, urlunsplit

from .capture import FormRequest, encode_form_urlencoded
from .model import (
    ApplicationStructure,
    ConstraintKind,
    ControlConstraint,
    ControlSpec,
    FormMethod,
    FormStructure,
)

__all__ = [
    "MutationKind",
    "MUTATION_LEVEL",
    "LabeledRequest",
    "GenerationError",
    "MutationInapplicableError",
    "gen_normal",
    "mutate",
    "stack_mutations",
    "generate_corpus",
    "write_corpus",
    "read_labels",
]


class MutationKind(str, Enum):
    NONE = "none"
    METHOD_FLIP = "method-flip"
    SOURCE_FORGE = "source-forge"
    DROP_MANDATORY = "drop-mandatory"
    INJECT_PARAM = "inject-param"
    OVERFLOW_MAXLENGTH = "overflow-maxlength"
    TAMPER_FIXED_VALUE = "tamper-fixed-value"
    OUT_OF_SET = "out-of-set"


# each mutation primitive targets exactly one classification level
MUTATION_LEVEL = {
    MutationKind.METHOD_FLIP: "l1",
    MutationKind.SOURCE_FORGE: "l1",
    MutationKind.DROP_MANDATORY: "l2",
    MutationKind.INJECT_PARAM: "l2",
    MutationKind.OVERFLOW_MAXLENGTH: "l3",
    MutationKind.TAMPER_FIXED_VALUE: "l3",
    MutationKind.OUT_OF_SET: "l3",
}

FORGED_REFERER = "http://attacker.invalid/lure.html"
_INJECTED_NAMES = ("debug", "cmd", "admin_mode", "trace", "redirect")
_ALPHABET = "".join(
    c for c in string.printable if c not in "&=%" and (c == " " or not c.isspace())
)


class GenerationError(ValueError):
    """A control whose declared constraints admit no value."""


class MutationInapplicableError(ValueError):
    def __init__(self, kind: "MutationKind", form_id: str, why: str):
        super().__init__(f"{kind.value} not applicable to form {form_id}: {why}")
        self.kind = kind


@dataclass(frozen=True)
class LabeledRequest:
    request: FormRequest
    origin_form: str
    mutation: MutationKind
    expected_violation_level: str | None

    def __post_init__(self) -> None:
        if (self.mutation is MutationKind.NONE) != (self.expected_violation_level is None):
            raise ValueError("expected_violation_level must be set iff a mutation was applied")


def _first(constraints: Sequence[ControlConstraint], kind: ConstraintKind) -> ControlConstraint | None:
    for constraint in constraints:
        if constraint.kind is kind:
            return constraint
    return None


def _satisfies(value: str, constraints: Sequence[ControlConstraint]) -> bool:
    for c in constraints:
        if c.kind is ConstraintKind.MAX_LENGTH and len(value) > (c.limit or 0):
            return False
        if c.kind is ConstraintKind.FIXED_VALUE and value != c.expected:
            return False
        if c.kind is ConstraintKind.ALLOWED_SET and value not in (c.allowed or frozenset()):
            return False
    return True


def _random_text(rng: random.Random, length: int) -> str:
    return "".join(rng.choice(_ALPHABET) for _ in range(length))


def _normal_value(control: ControlSpec, rng: random.Random) -> str:
    fixed = _first(control.constraints, ConstraintKind.FIXED_VALUE)
    if fixed is not None:
        value = fixed.expected or ""
        if not _satisfies(value, control.constraints):
            raise GenerationError(
                f"control {control.name!r}: fixed value conflicts with other constraints"
            )
        return value
    allowed = _first(control.constraints, ConstraintKind.ALLOWED_SET)
    if allowed is not None:
        candidates = [v for v in sorted(allowed.allowed or ()) if _satisfies(v, control.constraints)]
        if not candidates:
            raise GenerationError(
                f"control {control.name!r}: no allowed value satisfies every constraint"
            )
        return rng.choice(candidates)
    max_length = _first(control.constraints, ConstraintKind.MAX_LENGTH)
    if max_length is not None:
        limit = max_length.limit or 0
        if limit == 0:
            return ""
        return _random_text(rng, rng.randint(1, min(limit, 16)))
    return _random_text(rng, rng.randint(1, 16))


def _destination_for(form: FormStructure, method: str, params: Sequence[tuple[str, str]]) -> str:
    """The destination URL a browser submission would produce.

    POST sends the action verbatim; for GET the form data replaces any
    query the action carried, as HTML form submission specifies.
    """
    if method != "GET":
        return form.destination_page
    parts = urlsplit(form.destination_page)
    query = encode_form_urlencoded(list(params))
    return urlunsplit((parts.scheme, parts.netloc, parts.path, query, ""))


def gen_normal(form: FormStructure, seed: int) -> FormRequest:
    """A request that conforms to the form at every level.

    Every mandatory control gets exactly one value; each optional
    control is included with probability one half. Deterministic in
    (form, seed).
    """
    rng = random.Random(f"normal:{form.form_id}:{seed}")
    params: list[tuple[str, str]] = []
    for control in sorted(form.controls, key=lambda c: c.order_index):
        if not control.mandatory and rng.random() >= 0.5:
            continue
        params.append((control.name, _normal_value(control, rng)))
    method = form.method.value
    return FormRequest(
        request_id="draft",
        timestamp="1970-01-01T00:00:00Z",
        method=method,
        destination=_destination_for(form, method, params),
        referer=form.source_page,
        params=tuple(params),
    )


def _param_control_pairs(
    form: FormStructure, params: Sequence[tuple[str, str]]
) -> list[tuple[int, ControlSpec]]:
    """Greedy positional pairing of generated params to controls by name.

    Local and deliberately independent of the classifier's matcher:
    labels must not be derived through the code path they judge.
    """
    from collections import deque

    pools: dict[str, deque[ControlSpec]] = {}
    for control in sorted(form.controls, key=lambda c: c.order_index):
        pools.setdefault(control.name, deque()).append(control)
    pairs = []
    for index, (name, _value) in enumerate(params):
        pool = pools.get(name)
        if pool:
            pairs.append((index, pool.popleft()))
    return pairs


def _with_params(
    base: FormRequest, form: FormStructure, params: Sequence[tuple[str, str]]
) -> FormRequest:
    return replace(
        base,
        params=tuple(params),
        destination=_destination_for(form, base.method, params),
    )


def _constraint_targets(
    base: FormRequest, form: FormStructure, kind: ConstraintKind
) -> list[tuple[int, ControlConstraint]]:
    targets = []
    for index, control in _param_control_pairs(form, base.params):
        constraint = _first(control.constraints, kind)
        if constraint is not None:
            targets.append((index, constraint))
    return targets


def _applicable_kinds(base: FormRequest, form: FormStructure) -> list[MutationKind]:
    kinds = [MutationKind.METHOD_FLIP, MutationKind.SOURCE_FORGE, MutationKind.INJECT_PARAM]
    if any(c.mandatory for c in form.controls):
        kinds.append(MutationKind.DROP_MANDATORY)
    if _constraint_targets(base, form, ConstraintKind.MAX_LENGTH):
        kinds.append(MutationKind.OVERFLOW_MAXLENGTH)
    if _constraint_targets(base, form, ConstraintKind.FIXED_VALUE):
        kinds.append(MutationKind.TAMPER_FIXED_VALUE)
    if _constraint_targets(base, form, ConstraintKind.ALLOWED_SET):
        kinds.append(MutationKind.OUT_OF_SET)
    return kinds


def mutate(
    base: FormRequest, form: FormStructure, kind: MutationKind, seed: int
) -> LabeledRequest:
    """Apply exactly one attack primitive to a conformant request."""
    if kind is MutationKind.NONE:
        return LabeledRequest(base, form.form_id, MutationKind.NONE, None)
    rng = random.Random(f"mutate:{form.form_id}:{kind.value}:{seed}")
    params = list(base.params)

    if kind is MutationKind.METHOD_FLIP:
        flipped = "POST" if base.method == "GET" else "GET"
        mutated = replace(
            base, method=flipped, destination=_destination_for(form, flipped, params)
        )
    elif kind is MutationKind.SOURCE_FORGE:
        mutated = replace(base, referer=FORGED_REFERER)
    elif kind is MutationKind.DROP_MANDATORY:
        mandatory_names = {c.name for c in form.controls if c.mandatory}
        present = sorted({n for n, _ in params if n in mandatory_names})
        if not present:
            raise MutationInapplicableError(kind, form.form_id, "no mandatory control present")
        victim = rng.choice(present)
        index = next(i for i, (n, _) in enumerate(params) if n == victim)
        del params[index]
        mutated = _with_params(base, form, params)
    elif kind is MutationKind.INJECT_PARAM:
        declared = {c.name for c in form.controls}
        candidates = [n for n in _INJECTED_NAMES if n not in declared]
        if not candidates:
            raise MutationInapplicableError(kind, form.form_id, "every probe name is declared")
        name = rng.choice(candidates)
        params.insert(rng.randint(0, len(params)), (name, "1"))
        mutated = _with_params(base, form, params)
    elif kind is MutationKind.OVERFLOW_MAXLENGTH:
        targets = _constraint_targets(base, form, ConstraintKind.MAX_LENGTH)
        if not targets:
            raise MutationInapplicableError(kind, form.form_id, "no max-length value present")
        index, constraint = targets[rng.randrange(len(targets))]
        oversize = (constraint.limit or 0) + 1 + rng.randrange(8)
        params[index] = (params[index][0], _random_text(rng, oversize))
        mutated = _with_params(base, form, params)
    elif kind is MutationKind.TAMPER_FIXED_VALUE:
        targets = _constraint_targets(base, form, ConstraintKind.FIXED_VALUE)
        if not targets:
            raise MutationInapplicableError(kind, form.form_id, "no fixed value present")
        index, constraint = targets[rng.randrange(len(targets))]
        payload = "1' OR '1'='1"
        if payload == constraint.expected:
            payload += "--"
        params[index] = (params[index][0], payload)
        mutated = _with_params(base, form, params)
    elif kind is MutationKind.OUT_OF_SET:
        targets = _constraint_targets(base, form, ConstraintKind.ALLOWED_SET)
        if not targets:
            raise MutationInapplicableError(kind, form.form_id, "no allowed-set value present")
        index, constraint = targets[rng.randrange(len(targets))]
        allowed = constraint.allowed or frozenset()
        value = "~oob~"
        while value in allowed:
            value += _random_text(rng, 4)
        params[index] = (params[index][0], value)
        mutated = _with_params(base, form, params)
    else:  # pragma: no cover - exhaustive above
        raise MutationInapplicableError(kind, form.form_id, "unknown mutation kind")

    return LabeledRequest(mutated, form.form_id, kind, MUTATION_LEVEL[kind])


_LEVEL_ORDER = {"l1": 1, "l2": 2, "l3": 3}


def stack_mutations(
    base: FormRequest, form: FormStructure, kinds: Sequence[MutationKind], seed: int
) -> LabeledRequest:
    """Apply several primitives; the expected level is the shallowest hit.

    Excluded from the exact-oracle corpus: stacking loses single-fault
    labeling, so only the minimum mutated level stays predictable.
    """
    if not kinds or any(k is MutationKind.NONE for k in kinds):
        raise ValueError("stack_mutations needs one or more real mutation kinds")
    current = base
    for offset, kind in enumerate(kinds):
        current = mutate(current, form, kind, seed + offset).request
    shallowest = min((MUTATION_LEVEL[k] for k in kinds), key=_LEVEL_ORDER.__getitem__)
    return LabeledRequest(current, form.form_id, kinds[0], shallowest)


def generate_corpus(
    structure: ApplicationStructure,
    count: int,
    anomaly_rate: float,
    seed: int,
) -> list[LabeledRequest]:
    """Labeled corpus: pure function of (structure, count, rate, seed)."""
    if not 0.0 <= anomaly_rate <= 1.0:
        raise ValueError("anomaly_rate must be within [0, 1]")
    forms = list(structure.iter_forms())
    if not forms:
        raise GenerationError("structure declares no forms to generate traffic for")

    rng = random.Random(f"corpus:{seed}")
    items: list[LabeledRequest] = []
    for _ in range(count):
        form = forms[rng.randrange(len(forms))]
        base = gen_normal(form, rng.randrange(1 << 31))
        if rng.random() < anomaly_rate:
            kinds = _applicable_kinds(base, form)
            kind = kinds[rng.randrange(len(kinds))]
            items.append(mutate(base, form, kind, rng.randrange(1 << 31)))
        else:
            items.append(LabeledRequest(base, form.form_id, MutationKind.NONE, None))
    return items


_EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


def _origin_form_uri(destination: str, base_url: str) -> str:
    dest = urlsplit(destination)
    base = urlsplit(base_url)
    if (dest.scheme, dest.netloc) != (base.scheme, base.netloc):
        return destination  # cross-host action; keep absolute
    path = dest.path or "/"
    return f"{path}?{dest.query}" if dest.query else path


def write_corpus(
    items: Sequence[LabeledRequest],
    capture_path: str | Path,
    labels_path: str | Path,
    *,
    base_url: str,
    file_id: str | None = None,
) -> list[str]:
    """Emit the capture file and its sidecar label file.

    Request ids are assigned the same way ingest derives them
    (file id + line number), so labels join verdicts exactly.
    Returns the assigned ids in order.
    """
    capture_path = Path(capture_path)
    labels_path = Path(labels_path)
    resolved_file_id = file_id if file_id is not None else capture_path.name

    capture_lines = []
    label_lines = []
    ids = []
    for line_no, item in enumerate(items, start=1):
        request = item.request
        request_id = f"{resolved_file_id}:{line_no}"
        ids.append(request_id)
        ts = (_EPOCH + timedelta(seconds=line_no - 1)).strftime("%Y-%m-%dT%H:%M:%SZ")
        record: dict = {
            "ts": ts,
            "method": request.method,
            "uri": _origin_form_uri(request.destination, base_url),
        }
        if request.referer is not None:
            record["referer"] = request.referer
        if request.method != "GET":
            record["body"] = encode_form_urlencoded(request.params)
        capture_lines.append(json.dumps(record, separators=(",", ":")))
        label_lines.append(
            json.dumps(
                {
                    "request_id": request_id,
                    "origin_form": item.origin_form,
                    "mutation": item.mutation.value,
                    "expected_level": item.expected_violation_level,
                },
                separators=(",", ":"),
            )
        )

    capture_path.write_text("\n".join(capture_lines) + "\n", encoding="utf-8")
    labels_path.write_text("\n".join(label_lines) + "\n", encoding="utf-8")
    return ids


def read_labels(path: str | Path) -> dict[str, dict]:
    labels = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        labels[record["request_id"]] = record
    return labels
