from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from formwatch.classify import LevelStatus
from formwatch.model import FormMethod
from formwatch.service import Monitor, MonitorError, NotFoundError, UNKNOWN_GROUP_ID, create_app, group_id_for
from formwatch.simulate import MutationKind, generate_corpus, mutate, gen_normal, write_corpus
from formwatch.structure_io import load_structure, structure_to_dict

FIXTURE_STRUCTURE = Path(__file__).resolve().parent / "fixtures" / "structure.json"


@pytest.fixture()
def structure():
    return load_structure(FIXTURE_STRUCTURE)


@pytest.fixture()
def monitor(structure):
    return Monitor(structure)


def _capture_lines(structure, count=10, anomaly_rate=0.0, seed=1, tmp_path=None) -> str:
    items = generate_corpus(structure, count=count, anomaly_rate=anomaly_rate, seed=seed)
    lines = []
    for item in items:
        request = item.request
        record = {
            "ts": request.timestamp,
            "method": request.method,
            "uri": request.destination.replace("http://demo.local", "") or "/",
        }
        if request.referer:
            record["referer"] = request.referer
        if request.method != "GET":
            from formwatch.capture import encode_form_urlencoded

            record["body"] = encode_form_urlencoded(request.params)
        lines.append(json.dumps(record))
    return "\n".join(lines) + "\n"


def _login_form(structure):
    return next(
        form
        for form in structure.iter_forms()
        if form.destination_page == "http://demo.local/wp-login.php"
    )


def _tampered_line(structure) -> str:
    form = _login_form(structure)
    base = gen_normal(form, 42)
    labeled = mutate(base, form, MutationKind.TAMPER_FIXED_VALUE, 7)
    from formwatch.capture import encode_form_urlencoded

    record = {
        "ts": "2024-01-01T00:00:00Z",
        "method": "POST",
        "uri": "/wp-login.php",
        "referer": labeled.request.referer,
        "body": encode_form_urlencoded(labeled.request.params),
    }
    return json.dumps(record)


class TestIngest:
    def test_batch_of_valid_lines_all_accepted(self, monitor, structure):
        result = monitor.ingest_lines(_capture_lines(structure, count=10))
        assert result == {"accepted": 10, "rejected": []}

    def test_malformed_line_rejected_others_kept(self, monitor, structure):
        text = _capture_lines(structure, count=9) + "{nonsense\n"
        result = monitor.ingest_lines(text)
        assert result["accepted"] == 9
        assert len(result["rejected"]) == 1
        assert "{nonsense" in result["rejected"][0]["line"]

    def test_comments_and_blanks_skipped(self, monitor, structure):
        text = "# header\n\n" + _capture_lines(structure, count=2)
        assert monitor.ingest_lines(text)["accepted"] == 2

    def test_no_structure_is_service_error(self):
        empty = Monitor()
        with pytest.raises(MonitorError):
            empty.ingest_lines("# nothing")

    def test_request_ids_sequential_across_batches(self, monitor, structure):
        monitor.ingest_lines(_capture_lines(structure, count=3))
        monitor.ingest_lines(_capture_lines(structure, count=2, seed=9))
        ids = [e.classified.request.request_id for e in monitor._events]
        assert ids == ["evt:1", "evt:2", "evt:3", "evt:4", "evt:5"]


class TestOverview:
    def test_fixture_with_no_events_four_normal_rows(self, monitor):
        overview = monitor.overview()
        assert len(overview["rows"]) == 4
        assert all(row["worst_status"] == "normal" for row in overview["rows"])
        assert [row["form_count"] for row in overview["rows"]] == [3, 2, 1, 1]

    def test_counts_accumulate_by_status(self, monitor, structure):
        monitor.ingest_lines(_capture_lines(structure, count=20))
        monitor.ingest_lines(_tampered_line(structure))
        overview = monitor.overview()
        total = sum(sum(row["counts"].values()) for row in overview["rows"])
        assert total == 21
        login_row = next(
            row for row in overview["rows"] if row["destination"].endswith("wp-login.php")
        )
        # a constraint breach is an overall violation even though the
        # level-1 glyph shows it as a deep anomaly
        assert login_row["counts"]["violation"] == 1
        assert login_row["worst_status"] == "violation"

    def test_unknown_destination_routed_to_synthetic_row(self, monitor):
        line = json.dumps({"ts": "t", "method": "POST", "uri": "/ghost.php", "body": "a=1"})
        monitor.ingest_lines(line)
        rows = monitor.overview()["rows"]
        unknown = [row for row in rows if row["group_id"] == UNKNOWN_GROUP_ID]
        assert len(unknown) == 1
        assert unknown[0]["counts"]["violation"] == 1

    def test_worst_status_ranks_violation_over_deep(self, monitor, structure):
        monitor.ingest_lines(_tampered_line(structure))
        line = json.dumps(
            {"ts": "t", "method": "GET", "uri": "/wp-login.php", "referer": "http://demo.local/wp-login.html"}
        )
        monitor.ingest_lines(line)
        login_row = next(
            row
            for row in monitor.overview()["rows"]
            if row["destination"].endswith("wp-login.php")
        )
        assert login_row["worst_status"] == "violation"


class TestScenes:
    def test_group_scene_shows_deep_anomaly_glyph(self, monitor, structure):
        monitor.ingest_lines(_tampered_line(structure))
        gid = group_id_for("http://demo.local/wp-login.php")
        scene = monitor.group_scene(gid)
        assert len(scene.glyphs) == 1
        from formwatch.scenes import STATUS_COLORS

        assert scene.glyphs[0].status_color == STATUS_COLORS[LevelStatus.DEEP_ANOMALY]
        assert len(scene.sectors) == 2  # one login form + dummy

    def test_unknown_group_scene_is_dummy_only(self, monitor):
        line = json.dumps({"ts": "t", "method": "POST", "uri": "/ghost.php", "body": "a=1"})
        monitor.ingest_lines(line)
        scene = monitor.group_scene(UNKNOWN_GROUP_ID)
        assert len(scene.sectors) == 1
        assert scene.sectors[0].is_dummy
        assert len(scene.glyphs) == 1

    def test_form_scene_for_stored_event(self, monitor, structure):
        monitor.ingest_lines(_tampered_line(structure))
        form = _login_form(structure)
        scene = monitor.form_scene(form.form_id, "evt:1")
        assert len(scene.structure_lane.segments) == 6

    def test_control_scene_for_tampered_value(self, monitor, structure):
        monitor.ingest_lines(_tampered_line(structure))
        form = _login_form(structure)
        event = monitor._find_event("evt:1")
        tampered_order = next(
            check.control_order
            for check in event.classified.l3
            if any(not v.satisfied for v in check.verdicts)
        )
        scene = monitor.control_scene(form.form_id, "evt:1", tampered_order)
        reds = [e for e in scene.ellipses if e.fill.value == "red"]
        assert len(reds) == 1

    def test_unknown_ids_echoed_in_not_found(self, monitor, structure):
        monitor.ingest_lines(_capture_lines(structure, count=1))
        with pytest.raises(NotFoundError) as exc:
            monitor.group_scene("feedfacecafe")
        assert exc.value.identifier == "feedfacecafe"
        with pytest.raises(NotFoundError):
            monitor.form_scene("nope", "evt:1")
        form = _login_form(structure)
        with pytest.raises(NotFoundError):
            monitor.form_scene(form.form_id, "evt:999")
        with pytest.raises(NotFoundError):
            monitor.control_scene(form.form_id, "evt:1", 99)


class TestSnapshots:
    def test_events_tagged_with_classifying_snapshot(self, monitor, structure):
        monitor.ingest_lines(_capture_lines(structure, count=2))
        first_snapshot = monitor.snapshot_id
        smaller = structure.with_groups(structure.groups[:2])
        monitor.set_structure(smaller)
        assert monitor.snapshot_id != first_snapshot
        assert all(e.snapshot_id == first_snapshot for e in monitor._events)

    def test_scene_never_mixes_snapshots(self, monitor, structure):
        monitor.ingest_lines(_tampered_line(structure))
        gid = group_id_for("http://demo.local/wp-login.php")
        assert len(monitor.group_scene(gid).glyphs) == 1
        monitor.set_structure(structure.with_groups(structure.groups))  # same content
        # identical structure -> identical snapshot id -> events still visible
        assert len(monitor.group_scene(gid).glyphs) == 1
        smaller = structure.with_groups(structure.groups[:3])
        monitor.set_structure(smaller)
        assert monitor.group_scene(gid).glyphs == ()


class TestRetention:
    def test_fifo_eviction_keeps_counters_cumulative(self, structure):
        monitor = Monitor(structure, retention=5)
        monitor.ingest_lines(_capture_lines(structure, count=12))
        assert len(monitor._events) == 5
        total = sum(
            sum(counts.values()) for counts in monitor.counters()["groups"].values()
        )
        assert total == 12
        with pytest.raises(NotFoundError):
            monitor.form_scene(_login_form(structure).form_id, "evt:1")


class TestJournal:
    def test_replay_reproduces_state_and_ids(self, structure, tmp_path):
        journal = tmp_path / "journal.jsonl"
        first = Monitor(structure, journal_path=journal)
        first.ingest_lines(_capture_lines(structure, count=8, anomaly_rate=0.5, seed=3))
        reborn = Monitor(structure, journal_path=journal)
        assert reborn.counters() == first.counters()
        assert [e.classified.request.request_id for e in reborn._events] == [
            e.classified.request.request_id for e in first._events
        ]
        assert [e.classified.to_dict() for e in reborn._events] == [
            e.classified.to_dict() for e in first._events
        ]

    def test_counter_audit_under_concurrent_queries(self, structure, tmp_path):
        journal = tmp_path / "journal.jsonl"
        monitor = Monitor(structure, journal_path=journal)
        stop = threading.Event()
        observed_totals = []

        def query_loop():
            while not stop.is_set():
                overview = monitor.overview()
                observed_totals.append(
                    sum(sum(row["counts"].values()) for row in overview["rows"])
                )

        readers = [threading.Thread(target=query_loop) for _ in range(3)]
        for reader in readers:
            reader.start()
        try:
            for batch in range(10):
                monitor.ingest_lines(
                    _capture_lines(structure, count=10, anomaly_rate=0.3, seed=batch)
                )
        finally:
            stop.set()
            for reader in readers:
                reader.join(timeout=5)

        recomputed = Monitor(structure, journal_path=journal)
        assert recomputed.counters() == monitor.counters()
        assert all(0 <= total <= 100 for total in observed_totals)


class TestHttpApi:
    @pytest.fixture()
    def client(self, monitor):
        return TestClient(create_app(monitor, keepalive_seconds=0.2))

    def test_health(self, client):
        body = client.get("/api/health").json()
        assert body["structure_loaded"] is True

    def test_put_structure_swaps_snapshot(self, client, structure):
        response = client.put("/api/structure", json=structure_to_dict(structure))
        assert response.status_code == 200
        assert response.json()["snapshot_id"]

    def test_put_invalid_structure_rejected(self, client):
        response = client.put("/api/structure", json={"version": 1, "groups": "nope"})
        assert response.status_code == 400

    def test_post_events_and_overview(self, client, structure):
        response = client.post(
            "/api/events",
            content=_capture_lines(structure, count=5).encode(),
            headers={"content-type": "text/plain"},
        )
        assert response.status_code == 200
        assert response.json()["accepted"] == 5
        overview = client.get("/api/overview").json()
        assert len(overview["rows"]) == 4

    def test_scene_routes(self, client, monitor, structure):
        client.post("/api/events", content=_tampered_line(structure).encode())
        gid = group_id_for("http://demo.local/wp-login.php")
        circle = client.get(f"/api/groups/{gid}/scene").json()
        assert circle["kind"] == "circle"
        assert len(circle["glyphs"]) == 1
        form = _login_form(structure)
        lanes = client.get(f"/api/forms/{form.form_id}/requests/evt:1/scene").json()
        assert lanes["kind"] == "lanes"
        event = monitor._find_event("evt:1")
        order = next(
            check.control_order
            for check in event.classified.l3
            if any(not v.satisfied for v in check.verdicts)
        )
        detail = client.get(
            f"/api/forms/{form.form_id}/requests/evt:1/controls/{order}/scene"
        ).json()
        assert detail["kind"] == "detail"
        assert [e["fill"] for e in detail["ellipses"]].count("red") == 1

    def test_unknown_scene_ids_return_404_with_id(self, client):
        response = client.get("/api/groups/deadbeef0000/scene")
        assert response.status_code == 404
        assert response.json()["missing"] == "deadbeef0000"

    def test_events_without_structure_conflict(self, structure):
        client = TestClient(create_app(Monitor(), keepalive_seconds=0.2))
        response = client.post("/api/events", content=b'{"ts":"t","method":"GET","uri":"/"}')
        assert response.status_code == 409

    def test_stream_delivers_verdicts_in_order(self, structure):
        # the bundled test client buffers streaming bodies, so the SSE
        # contract is exercised against a real server
        import requests as requests_lib
        import time
        import uvicorn

        monitor = Monitor(structure)
        app = create_app(monitor, keepalive_seconds=0.2)
        config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        deadline = time.time() + 10
        while not server.started:
            assert time.time() < deadline, "server did not start"
            time.sleep(0.01)
        port = server.servers[0].sockets[0].getsockname()[1]
        base = f"http://127.0.0.1:{port}"

        collected: list[dict] = []
        connected = threading.Event()
        done = threading.Event()

        def consume():
            with requests_lib.get(f"{base}/api/stream", stream=True, timeout=10) as response:
                for raw in response.iter_lines(decode_unicode=True):
                    if raw == ": formwatch verdict stream":
                        connected.set()
                    if raw and raw.startswith("data:"):
                        collected.append(json.loads(raw[len("data:"):]))
                        if len(collected) >= 3:
                            break
            done.set()

        consumer = threading.Thread(target=consume, daemon=True)
        consumer.start()
        try:
            assert connected.wait(timeout=5), "stream never connected"
            response = requests_lib.post(
                f"{base}/api/events", data=_capture_lines(structure, count=3), timeout=10
            )
            assert response.status_code == 200
            assert done.wait(timeout=10), "stream consumer did not finish"
        finally:
            server.should_exit = True
            thread.join(timeout=10)
        assert [e["seq"] for e in collected] == [1, 2, 3]
        assert [e["verdict"]["request"]["request_id"] for e in collected] == [
            "evt:1",
            "evt:2",
            "evt:3",
        ]
