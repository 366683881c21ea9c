#!/usr/bin/env python3
"""Regenerate the UI test fixtures from the monitor implementation.

Produces one tampered login event and captures the overview plus all
three scene documents exactly as the HTTP API serves them, so the UI
tests exercise the real wire contract.

Usage: python3 frontend/scripts/generate_fixtures.py
"""
from __future__ import annotations

import json
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent.parent

import sys

sys.path.insert(0, str(REPO_ROOT / "src"))

from formwatch.capture import encode_form_urlencoded
from formwatch.service import Monitor, group_id_for
from formwatch.simulate import MutationKind, gen_normal, mutate
from formwatch.structure_io import load_structure


def main() -> None:
    structure = load_structure(REPO_ROOT / "tests" / "fixtures" / "structure.json")
    monitor = Monitor(structure)

    login = next(
        form
        for form in structure.iter_forms()
        if form.destination_page == "http://demo.local/wp-login.php"
    )
    base = gen_normal(login, 42)
    labeled = mutate(base, login, MutationKind.TAMPER_FIXED_VALUE, 7)
    line = json.dumps(
        {
            "ts": "2024-01-01T00:00:00Z",
            "method": "POST",
            "uri": "/wp-login.php",
            "referer": labeled.request.referer,
            "body": encode_form_urlencoded(labeled.request.params),
        }
    )
    result = monitor.ingest_lines(line)
    assert result["accepted"] == 1, result

    gid = group_id_for(login.destination_page)
    rid = "evt:1"
    event = monitor._find_event(rid)
    order = next(
        check.control_order
        for check in event.classified.l3
        if any(not v.satisfied for v in check.verdicts)
    )

    out = REPO_ROOT / "frontend" / "tests" / "fixtures"
    out.mkdir(parents=True, exist_ok=True)

    def dump(name: str, payload) -> None:
        (out / name).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    dump("overview.json", monitor.overview())
    dump("group-scene.json", monitor.group_scene(gid).to_dict())
    dump("form-scene.json", monitor.form_scene(login.form_id, rid).to_dict())
    dump("control-scene.json", monitor.control_scene(login.form_id, rid, order).to_dict())
    dump(
        "meta.json",
        {"group_id": gid, "form_id": login.form_id, "request_id": rid, "control_order": order},
    )
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main()
