"""Builders shared across test modules."""
from __future__ import annotations

from formwatch.capture import FormRequest
from formwatch.model import (
    ApplicationStructure,
    ControlConstraint,
    ControlSpec,
    ControlType,
    DestinationGroup,
    FormMethod,
    FormStructure,
    compute_form_id,
)
from formwatch.crawler import group_by_destination


def make_control(
    name: str,
    order_index: int,
    control_type: ControlType = ControlType.TEXT,
    mandatory: bool = True,
    constraints: tuple[ControlConstraint, ...] = (),
) -> ControlSpec:
    return ControlSpec(
        name=name,
        control_type=control_type,
        order_index=order_index,
        mandatory=mandatory,
        constraints=constraints,
    )


def make_form(
    controls: tuple[ControlSpec, ...],
    source: str = "http://app.local/page.html",
    destination: str = "http://app.local/handler.php",
    method: FormMethod = FormMethod.POST,
) -> FormStructure:
    return FormStructure(
        form_id=compute_form_id(source, destination, method, [c.name for c in controls]),
        source_page=source,
        destination_page=destination,
        method=method,
        controls=controls,
    )


def make_structure(
    *forms: FormStructure, base_url: str = "http://app.local/"
) -> ApplicationStructure:
    return ApplicationStructure(
        base_url=base_url,
        crawled_at="2024-01-01T00:00:00+00:00",
        groups=tuple(group_by_destination(list(forms))),
    )


def make_request(
    params: tuple[tuple[str, str], ...],
    destination: str = "http://app.local/handler.php",
    referer: str | None = "http://app.local/page.html",
    method: str = "POST",
    request_id: str = "capture:1",
) -> FormRequest:
    return FormRequest(
        request_id=request_id,
        timestamp="2024-01-01T00:00:00Z",
        method=method,
        destination=destination,
        referer=referer,
        params=params,
    )


def conforming_request(form: FormStructure, request_id: str = "capture:1") -> FormRequest:
    """A request mirroring the form exactly, one value per control."""
    from formwatch.model import ConstraintKind

    params = []
    for control in sorted(form.controls, key=lambda c: c.order_index):
        value = "x"
        for constraint in control.constraints:
            if constraint.kind is ConstraintKind.FIXED_VALUE:
                value = constraint.expected or ""
                break
            if constraint.kind is ConstraintKind.ALLOWED_SET:
                value = sorted(constraint.allowed or ())[0]
                break
            if constraint.kind is ConstraintKind.MAX_LENGTH:
                value = "x" * min(3, constraint.limit or 0)
        params.append((control.name, value))
    destination = form.destination_page
    if form.method is FormMethod.GET and params:
        from formwatch.capture import encode_form_urlencoded
        from urllib.parse import urlsplit, urlunsplit

        # for GET the form data replaces any query the action carried
        parts = urlsplit(destination)
        query = encode_form_urlencoded(params)
        destination = urlunsplit((parts.scheme, parts.netloc, parts.path, query, ""))
    return make_request(
        tuple(params),
        destination=destination,
        referer=form.source_page,
        method=form.method.value,
        request_id=request_id,
    )
