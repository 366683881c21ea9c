"""Parse captured HTTP traffic into form request events.

The native capture format is JSON Lines, one request per line:

    {"ts":"<RFC3339>","method":"POST","uri":"/wp-login.php",
     "referer":"http://host/wp-login.php","body":"log=a&pwd=b"}

``uri`` is origin-form; ``body`` is the raw urlencoded string and is
absent for GET, whose parameters live in the ``uri`` query. Lines
beginning with ``#`` are comments. Plain access logs do not record
POST bodies, which this model needs, hence the dedicated format; a
degraded combined-log mode covers GET-only monitoring.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence
from urllib.parse import urlencode, urljoin, urlsplit, urlunsplit

__all__ = [
    "FormRequest",
    "CaptureParseError",
    "MultipartUnsupportedError",
    "RejectedLine",
    "parse_query_string",
    "parse_capture_line",
    "parse_capture_text",
    "parse_combined_log_line",
    "encode_form_urlencoded",
    "strip_fragment",
]


class CaptureParseError(ValueError):
    """A capture line that cannot be turned into a FormRequest."""

    def __init__(self, message: str, line_no: int = 0):
        super().__init__(f"line {line_no}: {message}" if line_no else message)
        self.line_no = line_no
        self.reason = message


class MultipartUnsupportedError(CaptureParseError):
    """Multipart form bodies are out of scope; only urlencoded is handled."""


@dataclass(frozen=True)
class FormRequest:
    """One captured form submission."""

    request_id: str
    timestamp: str
    method: str
    destination: str
    referer: str | None
    params: tuple[tuple[str, str], ...] = ()
    decode_warning: bool = False

    def param_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.params)


@dataclass(frozen=True)
class RejectedLine:
    line_no: int
    line: str
    reason: str


_HEX = "0123456789abcdefABCDEF"


def _decode_component(raw: str) -> tuple[str, bool]:
    """Decode one urlencoded component ('+' to space, percent escapes).

    On any malformed escape or undecodable byte sequence the raw wire
    text is returned unchanged with ok=False; parsing stays lenient and
    the caller flags the request instead of dropping it.
    """
    if "%" not in raw and "+" not in raw:
        return raw, True
    out = bytearray()
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch == "%":
            code = raw[i + 1 : i + 3]
            if len(code) == 2 and code[0] in _HEX and code[1] in _HEX:
                out.append(int(code, 16))
                i += 3
            else:
                return raw, False
        elif ch == "+":
            out += b" "
            i += 1
        else:
            out += ch.encode("utf-8")
            i += 1
    try:
        return out.decode("utf-8"), True
    except UnicodeDecodeError:
        return raw, False


def _parse_pairs(raw: str) -> tuple[list[tuple[str, str]], bool]:
    pairs: list[tuple[str, str]] = []
    warned = False
    for segment in raw.split("&"):
        if not segment:
            continue
        name, _, value = segment.partition("=")
        decoded_name, name_ok = _decode_component(name)
        decoded_value, value_ok = _decode_component(value)
        warned = warned or not (name_ok and value_ok)
        pairs.append((decoded_name, decoded_value))
    return pairs, warned


def parse_query_string(raw: str) -> list[tuple[str, str]]:
    """Split a query/body string into ordered (name, value) pairs.

    Splits on '&' then on the first '='; a segment without '=' becomes
    a name with empty value. Never raises.
    """
    return _parse_pairs(raw)[0]


def strip_fragment(url: str) -> str:
    parts = urlsplit(url)
    return urlunsplit((parts.scheme, parts.netloc, parts.path, parts.query, ""))


def encode_form_urlencoded(pairs: Sequence[tuple[str, str]]) -> str:
    """Inverse of parse_query_string for round-trip-safe emission."""
    return urlencode(list(pairs))


def parse_capture_line(
    line: str,
    *,
    base_url: str,
    line_no: int = 0,
    file_id: str = "capture",
) -> FormRequest:
    """Parse one JSON capture record into a FormRequest.

    The destination is the request-line path+query resolved against
    ``base_url``. Request ids are a deterministic function of
    (file_id, line_no) so re-parsing a capture reproduces them.
    """
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CaptureParseError(f"not valid JSON ({exc.msg})", line_no) from None
    if not isinstance(record, dict):
        raise CaptureParseError("capture record must be a JSON object", line_no)

    missing = [key for key in ("ts", "method", "uri") if key not in record]
    if missing:
        raise CaptureParseError(f"missing required field(s) {missing}", line_no)

    method = str(record["method"]).upper()
    uri = str(record["uri"])
    body = record.get("body")
    if body is not None and "Content-Disposition:" in str(body):
        raise MultipartUnsupportedError("multipart form bodies are not supported", line_no)

    destination = strip_fragment(urljoin(base_url, uri))
    if method == "GET":
        params, warned = _parse_pairs(urlsplit(uri).query)
    elif body is not None:
        params, warned = _parse_pairs(str(body))
    else:
        params, warned = [], False
    referer = record.get("referer")

    return FormRequest(
        request_id=f"{file_id}:{line_no}",
        timestamp=str(record["ts"]),
        method=method,
        destination=destination,
        referer=strip_fragment(str(referer)) if referer else None,
        params=tuple(params),
        decode_warning=warned,
    )


def parse_capture_text(
    text: str | Iterable[str],
    *,
    base_url: str,
    file_id: str = "capture",
) -> tuple[list[FormRequest], list[RejectedLine]]:
    """Parse a whole capture stream; per-line failures never abort the batch."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    requests: list[FormRequest] = []
    rejected: list[RejectedLine] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            requests.append(
                parse_capture_line(stripped, base_url=base_url, line_no=line_no, file_id=file_id)
            )
        except CaptureParseError as exc:
            rejected.append(RejectedLine(line_no, line, exc.reason))
    return requests, rejected


_COMBINED_LOG = re.compile(
    r'^(?P<host>\S+) (?P<ident>\S+) (?P<user>\S+) \[(?P<ts>[^\]]+)\]'
    r' "(?P<method>[A-Z]+) (?P<uri>\S+) (?P<proto>[^"]*)"'
    r' (?P<status>\d{3}) (?P<size>\S+)'
    r'(?: "(?P<referer>[^"]*)" "(?P<agent>[^"]*)")?\s*$'
)


def parse_combined_log_line(
    line: str,
    *,
    base_url: str,
    line_no: int = 0,
    file_id: str = "accesslog",
) -> FormRequest:
    """Degraded mode: combined access-log lines, GET-only monitoring.

    Access logs carry no POST bodies, so POST lines parse with empty
    params and will surface as missing-mandatory at the control-set
    level; use the JSON capture format for full monitoring.
    """
    match = _COMBINED_LOG.match(line)
    if match is None:
        raise CaptureParseError("not a combined-log-format line", line_no)
    uri = match.group("uri")
    method = match.group("method")
    params, warned = _parse_pairs(urlsplit(uri).query) if method == "GET" else ([], False)
    referer = match.group("referer")
    if referer in (None, "", "-"):
        referer = None
    return FormRequest(
        request_id=f"{file_id}:{line_no}",
        timestamp=match.group("ts"),
        method=method,
        destination=strip_fragment(urljoin(base_url, uri)),
        referer=strip_fragment(referer) if referer else None,
        params=tuple(params),
        decode_warning=warned,
    )
