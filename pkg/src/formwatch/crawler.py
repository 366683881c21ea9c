"""Crawl a target application and extract its declared form structure.

Traversal is breadth-first over anchor hrefs from a seed URL, bounded
by page count and (optionally) the seed's host. Extraction is a
lenient tag-soup pass built on html.parser: real applications serve
unclosed tags and the crawler must recover rather than abort. Only
restrictions declared in HTML are recorded; anything a script imposes
at runtime is invisible here.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from typing import Callable, Iterable, Sequence
from urllib.parse import urljoin, urlsplit

import requests

from .capture import strip_fragment
from .model import (
    ApplicationStructure,
    ControlConstraint,
    ControlSpec,
    ControlType,
    DestinationGroup,
    FormMethod,
    FormStructure,
    compute_form_id,
    infer_mandatory,
)

__all__ = [
    "CrawlConfig",
    "CrawlReport",
    "PageExtraction",
    "ActionResolutionError",
    "resolve_action",
    "extract_forms",
    "extract_page",
    "group_by_destination",
    "crawl",
]

USER_AGENT = "formwatch-crawler/0.1"


class ActionResolutionError(ValueError):
    """A form action attribute that cannot be resolved to an absolute URL."""

    def __init__(self, action: str):
        super().__init__(f"cannot resolve form action {action!r}")
        self.action = action


@dataclass(frozen=True)
class CrawlConfig:
    seed_url: str
    max_pages: int = 100
    same_host_only: bool = True
    request_timeout: float = 10.0
    politeness_delay: float = 0.0
    session_cookie: str | None = None

    def __post_init__(self) -> None:
        if self.max_pages < 1:
            raise ValueError("max_pages must be >= 1")
        if self.request_timeout < 0 or self.politeness_delay < 0:
            raise ValueError("timeouts and delays must be >= 0")


@dataclass(frozen=True)
class CrawlReport:
    pages_fetched: int
    pages_failed: tuple[tuple[str, str], ...]
    forms_found: int


@dataclass(frozen=True)
class FetchedPage:
    """What a fetcher returns: final URL after redirects, body, HTML-ness."""

    url: str
    text: str
    is_html: bool = True


Fetcher = Callable[[str], FetchedPage]


def resolve_action(base: str, action_attribute: str) -> str:
    """Resolve a form action against its source page (RFC 3986 rules).

    Empty action targets the page itself; the fragment is dropped, the
    query kept. Non-fetchable results (javascript:, mailto:, relative
    garbage that stays scheme-less) raise so the caller can quarantine
    the form instead of silently recording a bogus destination.
    """
    action = action_attribute.strip()
    if not action:
        return strip_fragment(base)
    try:
        resolved = urljoin(base, action)
        parts = urlsplit(resolved)
    except ValueError:
        raise ActionResolutionError(action_attribute) from None
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise ActionResolutionError(action_attribute)
    return strip_fragment(resolved)


@dataclass
class _RawControl:
    tag: str
    attrs: dict[str, str | None]
    options: list[str] = field(default_factory=list)
    text: str = ""


@dataclass
class _RawForm:
    attrs: dict[str, str | None]
    controls: list[_RawControl] = field(default_factory=list)


class _PageParser(HTMLParser):
    """Single lenient pass collecting anchor hrefs and raw form data."""

    _control_tags = ("input", "select", "textarea", "button")

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.links: list[str] = []
        self.forms: list[_RawForm] = []
        self._form: _RawForm | None = None
        self._select: _RawControl | None = None
        self._option_active = False
        self._option_value: str | None = None
        self._option_text: list[str] = []
        self._textarea: _RawControl | None = None

    @staticmethod
    def _attr_dict(attrs: list[tuple[str, str | None]]) -> dict[str, str | None]:
        out: dict[str, str | None] = {}
        for name, value in attrs:
            out.setdefault(name, value)
        return out

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        attr_map = self._attr_dict(attrs)
        if tag == "a":
            href = attr_map.get("href")
            if href:
                self.links.append(href)
            return
        if tag == "form":
            self._finish_form()
            self._form = _RawForm(attrs=attr_map)
            return
        if self._form is None:
            return
        if tag == "select":
            self._finish_select()
            self._select = _RawControl(tag="select", attrs=attr_map)
            return
        if tag == "option":
            self._finish_option()
            self._option_active = True
            self._option_value = attr_map.get("value")
            self._option_text = []
            return
        if tag == "textarea":
            self._textarea = _RawControl(tag="textarea", attrs=attr_map)
            return
        if tag in ("input", "button"):
            self._form.controls.append(_RawControl(tag=tag, attrs=attr_map))

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        self.handle_starttag(tag, attrs)
        if tag in ("form", "select", "textarea", "option"):
            self.handle_endtag(tag)

    def handle_endtag(self, tag: str) -> None:
        if tag == "form":
            self._finish_form()
        elif tag == "select":
            self._finish_select()
        elif tag == "option":
            self._finish_option()
        elif tag == "textarea" and self._textarea is not None:
            control = self._textarea
            self._textarea = None
            if self._form is not None:
                self._form.controls.append(control)

    def handle_data(self, data: str) -> None:
        if self._textarea is not None:
            self._textarea.text += data
        elif self._option_active:
            self._option_text.append(data)

    def _finish_option(self) -> None:
        if not self._option_active:
            return
        # a declared value attribute wins, even when empty; otherwise the
        # submitted value is the option's text
        if self._option_value is not None:
            value = self._option_value
        else:
            value = "".join(self._option_text).strip()
        if self._select is not None:
            self._select.options.append(value)
        self._option_active = False
        self._option_value = None
        self._option_text = []

    def _finish_select(self) -> None:
        self._finish_option()
        if self._select is not None:
            control = self._select
            self._select = None
            if self._form is not None:
                self._form.controls.append(control)

    def _finish_form(self) -> None:
        self._finish_select()
        if self._textarea is not None:
            control = self._textarea
            self._textarea = None
            if self._form is not None:
                self._form.controls.append(control)
        if self._form is not None:
            self.forms.append(self._form)
            self._form = None

    def finalize(self) -> None:
        self.close()
        self._finish_form()


_INPUT_TYPES = {
    "text": ControlType.TEXT,
    "password": ControlType.PASSWORD,
    "hidden": ControlType.HIDDEN,
    "checkbox": ControlType.CHECKBOX,
    "radio": ControlType.RADIO,
    "submit": ControlType.SUBMIT,
    "file": ControlType.FILE,
}

# These never participate in a submission, so monitoring them would only
# produce false missing-control reports.
_NON_SUBMITTING = ("button", "reset")


def _control_type(raw: _RawControl) -> ControlType | None:
    if raw.tag == "select":
        return ControlType.SELECT
    if raw.tag == "textarea":
        return ControlType.TEXTAREA
    declared = (raw.attrs.get("type") or ("submit" if raw.tag == "button" else "text")).lower()
    if declared in _NON_SUBMITTING:
        return None
    if raw.tag == "button":
        return ControlType.SUBMIT if declared == "submit" else ControlType.OTHER
    return _INPUT_TYPES.get(declared, ControlType.OTHER)


def _max_length(raw: _RawControl) -> int | None:
    declared = raw.attrs.get("maxlength")
    if declared is None:
        return None
    try:
        limit = int(declared.strip())
    except (ValueError, AttributeError):
        return None
    return limit if limit >= 0 else None


def _constraints_for(raw: _RawControl, control_type: ControlType) -> list[ControlConstraint]:
    constraints: list[ControlConstraint] = []
    value = raw.attrs.get("value")
    if control_type in (ControlType.HIDDEN, ControlType.SUBMIT):
        if value is not None:
            constraints.append(ControlConstraint.fixed_value(value))
    elif control_type is ControlType.CHECKBOX:
        constraints.append(ControlConstraint.allowed_set([value if value is not None else "on"]))
    elif control_type is ControlType.RADIO:
        # placeholder; the group pass below unions declared values
        constraints.append(ControlConstraint.allowed_set([value if value is not None else "on"]))
    elif control_type is ControlType.SELECT:
        if raw.options:
            constraints.append(ControlConstraint.allowed_set(raw.options))
    elif control_type is ControlType.TEXTAREA:
        if "readonly" in raw.attrs:
            constraints.append(ControlConstraint.fixed_value(raw.text))
    elif "readonly" in raw.attrs and value is not None:
        constraints.append(ControlConstraint.fixed_value(value))

    limit = _max_length(raw)
    if limit is not None and control_type is not ControlType.SELECT:
        constraints.append(ControlConstraint.max_length(limit))
    return constraints


def _apply_group_semantics(
    raw_controls: list[tuple[_RawControl, ControlType]],
) -> list[tuple[_RawControl, ControlType, bool, list[ControlConstraint]]]:
    """Resolve radio/checkbox name groups: union values, unify mandatory.

    A radio group with a pre-checked member is always submitted by
    browsers, so the whole group is mandatory; any member's declared
    value is acceptable for any same-named control.
    """
    grouped_values: dict[tuple[str, ControlType], set[str]] = {}
    radio_group_checked: dict[str, bool] = {}
    for raw, control_type in raw_controls:
        name = (raw.attrs.get("name") or "").strip()
        if control_type in (ControlType.RADIO, ControlType.CHECKBOX):
            value = raw.attrs.get("value")
            grouped_values.setdefault((name, control_type), set()).add(
                value if value is not None else "on"
            )
            if control_type is ControlType.RADIO:
                checked = radio_group_checked.get(name, False)
                radio_group_checked[name] = checked or ("checked" in raw.attrs)

    out = []
    for raw, control_type in raw_controls:
        name = (raw.attrs.get("name") or "").strip()
        constraints = _constraints_for(raw, control_type)
        if control_type in (ControlType.RADIO, ControlType.CHECKBOX):
            union = grouped_values[(name, control_type)]
            constraints = [
                ControlConstraint.allowed_set(union)
                if c.kind.value == "allowed-set"
                else c
                for c in constraints
            ]
        if control_type is ControlType.RADIO:
            attrs = {"checked": None} if radio_group_checked.get(name) else {}
            mandatory = infer_mandatory(control_type, attrs)
        else:
            mandatory = infer_mandatory(control_type, raw.attrs)
        out.append((raw, control_type, mandatory, constraints))
    return out


@dataclass(frozen=True)
class PageExtraction:
    forms: tuple[FormStructure, ...]
    links: tuple[str, ...]
    notes: tuple[str, ...]


def extract_page(html: str, page_url: str) -> PageExtraction:
    """Extract forms and anchor links from one page, never raising."""
    parser = _PageParser()
    notes: list[str] = []
    try:
        parser.feed(html)
        parser.finalize()
    except Exception as exc:  # pragma: no cover - html.parser rarely raises
        notes.append(f"{page_url}: unparseable document ({exc})")
        return PageExtraction((), (), tuple(notes))

    page_base = strip_fragment(page_url)
    forms: list[FormStructure] = []
    for raw_form in parser.forms:
        action_attr = raw_form.attrs.get("action")
        try:
            destination = (
                page_base if action_attr is None else resolve_action(page_url, action_attr)
            )
        except ActionResolutionError as exc:
            notes.append(f"{page_url}: quarantined form with action {exc.action!r}")
            continue
        method = FormMethod.POST if (
            (raw_form.attrs.get("method") or "").strip().lower() == "post"
        ) else FormMethod.GET

        typed = []
        for raw in raw_form.controls:
            name = (raw.attrs.get("name") or "").strip()
            if not name:
                continue  # nameless controls never appear in submissions
            control_type = _control_type(raw)
            if control_type is None:
                continue
            typed.append((raw, control_type))

        controls = []
        for index, (raw, control_type, mandatory, constraints) in enumerate(
            _apply_group_semantics(typed)
        ):
            controls.append(
                ControlSpec(
                    name=(raw.attrs.get("name") or "").strip(),
                    control_type=control_type,
                    order_index=index,
                    mandatory=mandatory,
                    constraints=tuple(constraints),
                )
            )

        form_id = compute_form_id(page_base, destination, method, [c.name for c in controls])
        forms.append(
            FormStructure(
                form_id=form_id,
                source_page=page_base,
                destination_page=destination,
                method=method,
                controls=tuple(controls),
            )
        )
    return PageExtraction(tuple(forms), tuple(parser.links), tuple(notes))


def extract_forms(html: str, page_url: str) -> list[FormStructure]:
    """One FormStructure per form element, controls in document order."""
    return list(extract_page(html, page_url).forms)


def group_by_destination(forms: Sequence[FormStructure]) -> list[DestinationGroup]:
    """Partition forms by exact destination URL, in first-discovery order."""
    ordered: dict[str, list[FormStructure]] = {}
    for form in forms:
        ordered.setdefault(form.destination_page, []).append(form)
    return [
        DestinationGroup(destination_page=destination, forms=tuple(members))
        for destination, members in ordered.items()
    ]


def _default_fetcher(config: CrawlConfig) -> Fetcher:
    session = requests.Session()
    session.headers["User-Agent"] = USER_AGENT
    if config.session_cookie:
        session.headers["Cookie"] = config.session_cookie

    def fetch(url: str) -> FetchedPage:
        response = session.get(url, timeout=config.request_timeout)
        response.raise_for_status()
        content_type = response.headers.get("content-type", "")
        is_html = ("html" in content_type) if content_type else True
        return FetchedPage(url=str(response.url), text=response.text, is_html=is_html)

    return fetch


def _candidate_links(page: FetchedPage, extraction: PageExtraction, config: CrawlConfig) -> list[str]:
    seed_host = urlsplit(config.seed_url).netloc
    resolved = []
    for href in extraction.links:
        try:
            absolute = strip_fragment(urljoin(page.url, href))
            parts = urlsplit(absolute)
        except ValueError:
            continue
        if parts.scheme not in ("http", "https"):
            continue
        if config.same_host_only and parts.netloc != seed_host:
            continue
        resolved.append(absolute)
    # deterministic visit order: FIFO discovery, same-page ties sorted
    return sorted(set(resolved))


def crawl(
    config: CrawlConfig,
    fetcher: Fetcher | None = None,
    now: Callable[[], datetime] | None = None,
) -> tuple[ApplicationStructure, CrawlReport]:
    """Breadth-first crawl from the seed, returning structure and report.

    Deterministic for identical page contents: pages are visited in
    FIFO discovery order with same-page ties broken lexicographically,
    and forms keep their per-page document order.
    """
    fetch = fetcher or _default_fetcher(config)
    clock = now or (lambda: datetime.now(timezone.utc))

    seed = strip_fragment(config.seed_url)
    queue: deque[str] = deque([seed])
    seen: set[str] = {seed}
    fetched = 0
    failed: list[tuple[str, str]] = []
    forms: list[FormStructure] = []
    diagnostics: list[str] = []

    while queue and (fetched + len(failed)) < config.max_pages:
        url = queue.popleft()
        if config.politeness_delay > 0 and (fetched + len(failed)) > 0:
            time.sleep(config.politeness_delay)
        try:
            page = fetch(url)
        except Exception as exc:
            failed.append((url, str(exc)))
            continue
        fetched += 1
        if not page.is_html:
            continue
        extraction = extract_page(page.text, page.url)
        diagnostics.extend(extraction.notes)
        forms.extend(extraction.forms)
        for link in _candidate_links(page, extraction, config):
            if link not in seen:
                seen.add(link)
                queue.append(link)

    structure = ApplicationStructure(
        base_url=seed,
        crawled_at=clock().isoformat(),
        groups=tuple(group_by_destination(forms)),
        diagnostics=tuple(diagnostics),
    )
    report = CrawlReport(
        pages_fetched=fetched,
        pages_failed=tuple(failed),
        forms_found=len(forms),
    )
    return structure, report
