"""Operator entry points: crawl, classify, simulate, serve."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .capture import parse_capture_text
from .classify import LevelStatus, classify, find_destination_group
from .crawler import CrawlConfig, crawl
from .scenes import layout_form, layout_overview
from .service import Monitor, create_app, group_id_for
from .simulate import generate_corpus, write_corpus
from .structure_io import StructureLoadError, load_structure, save_structure
from .svg import render_svg


@click.group(name="formwatch")
@click.version_option(version="0.1.0", prog_name="formwatch")
def main() -> None:
    """Learn a web application's form structure and monitor traffic against it."""


@main.command(name="crawl")
@click.option("--seed", "seed_url", required=True, help="Absolute URL to start crawling from.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--max-pages", default=100, show_default=True, type=click.IntRange(min=1))
@click.option("--same-host/--any-host", "same_host", default=True, show_default=True)
@click.option("--timeout", default=10.0, show_default=True, type=float)
@click.option("--delay", default=0.0, show_default=True, type=float, help="Politeness delay between fetches (seconds).")
@click.option("--cookie", default=None, help="Session cookie header for authenticated crawls.")
def cmd_crawl(seed_url, out_path, max_pages, same_host, timeout, delay, cookie) -> None:
    """Crawl an application and write its structure file."""
    config = CrawlConfig(
        seed_url=seed_url,
        max_pages=max_pages,
        same_host_only=same_host,
        request_timeout=timeout,
        politeness_delay=delay,
        session_cookie=cookie,
    )
    try:
        structure, report = crawl(config)
        save_structure(structure, out_path)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc

    click.echo(f"pages fetched:  {report.pages_fetched}")
    click.echo(f"pages failed:   {len(report.pages_failed)}")
    for url, reason in report.pages_failed:
        click.echo(f"  {url}: {reason}")
    click.echo(f"forms found:    {report.forms_found}")
    click.echo(f"groups:         {len(structure.groups)}")
    for diagnostic in structure.diagnostics:
        click.echo(f"note: {diagnostic}")
    click.echo(f"structure written to {out_path}")


@main.command(name="classify")
@click.option("--structure", "structure_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--capture", "capture_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--svg", "svg_dir", default=None, type=click.Path(file_okay=False), help="Directory for rendered scenes.")
@click.option("--allow-missing-referer", is_flag=True, default=False)
def cmd_classify(structure_path, capture_path, report_path, svg_dir, allow_missing_referer) -> None:
    """Classify a capture file; exit 0 only when no request violates."""
    try:
        structure = load_structure(structure_path)
    except StructureLoadError as exc:
        raise click.ClickException(str(exc)) from exc

    capture_file = Path(capture_path)
    requests, rejected = parse_capture_text(
        capture_file.read_text(encoding="utf-8"),
        base_url=structure.base_url,
        file_id=capture_file.name,
    )
    classified = [
        classify(request, structure, allow_missing_referer=allow_missing_referer)
        for request in requests
    ]

    with Path(report_path).open("w", encoding="utf-8") as report:
        for item in classified:
            report.write(json.dumps(item.to_dict(), separators=(",", ":")) + "\n")

    violations = sum(1 for item in classified if item.overall is LevelStatus.VIOLATION)
    deep = sum(1 for item in classified if item.overall is LevelStatus.DEEP_ANOMALY)
    click.echo(f"classified:  {len(classified)}")
    click.echo(f"violations:  {violations}")
    click.echo(f"anomalies:   {deep}")
    for reject in rejected:
        click.echo(f"rejected line {reject.line_no}: {reject.reason}", err=True)

    if svg_dir is not None:
        _write_scenes(structure, classified, Path(svg_dir))
        click.echo(f"scenes written to {svg_dir}")

    if violations:
        sys.exit(1)


def _write_scenes(structure, classified, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    by_group: dict[str, list] = {}
    for item in classified:
        group = find_destination_group(item.request, structure)
        if group is None:
            continue
        by_group.setdefault(group.destination_page, []).append(item)
    for group in structure.groups:
        scene = layout_overview(group, by_group.get(group.destination_page, []))
        gid = group_id_for(group.destination_page)
        (directory / f"overview-{gid}.svg").write_text(render_svg(scene), encoding="utf-8")
    for item in classified:
        if item.overall is LevelStatus.NORMAL or not item.l1.is_matched:
            continue
        form = structure.find_form(item.l1.matched_form_id or "")
        if form is None:
            continue
        safe_rid = item.request.request_id.replace(":", "_").replace("/", "_")
        scene = layout_form(form, item)
        (directory / f"form-{form.form_id}-{safe_rid}.svg").write_text(
            render_svg(scene), encoding="utf-8"
        )


@main.command(name="simulate")
@click.option("--structure", "structure_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--count", required=True, type=click.IntRange(min=1))
@click.option("--anomaly-rate", default=0.3, show_default=True, type=click.FloatRange(min=0.0, max=1.0))
@click.option("--seed", default=1, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--labels", "labels_path", required=True, type=click.Path(dir_okay=False))
def cmd_simulate(structure_path, count, anomaly_rate, seed, out_path, labels_path) -> None:
    """Generate a labeled corpus of normal and tampered requests."""
    try:
        structure = load_structure(structure_path)
        items = generate_corpus(structure, count=count, anomaly_rate=anomaly_rate, seed=seed)
        write_corpus(items, out_path, labels_path, base_url=structure.base_url)
    except (StructureLoadError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    mutated = sum(1 for item in items if item.expected_violation_level is not None)
    click.echo(f"requests:  {len(items)} ({mutated} tampered)")
    click.echo(f"capture:   {out_path}")
    click.echo(f"labels:    {labels_path}")


@main.command(name="serve")
@click.option("--structure", "structure_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--listen", default="127.0.0.1:8700", show_default=True, help="HOST:PORT to bind.")
@click.option("--journal", "journal_path", default=None, type=click.Path(dir_okay=False), help="Append-only event journal, replayed on restart.")
@click.option("--retention", default=100_000, show_default=True, type=click.IntRange(min=1))
@click.option("--allow-missing-referer", is_flag=True, default=False)
def cmd_serve(structure_path, listen, journal_path, retention, allow_missing_referer) -> None:
    """Run the monitor service over a structure file."""
    import uvicorn

    try:
        structure = load_structure(structure_path)
    except StructureLoadError as exc:
        raise click.ClickException(str(exc)) from exc
    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.ClickException(f"--listen must be HOST:PORT, got {listen!r}")

    monitor = Monitor(
        structure,
        retention=retention,
        journal_path=journal_path,
        allow_missing_referer=allow_missing_referer,
    )
    app = create_app(monitor)
    click.echo(f"monitoring {structure.base_url} on http://{listen}")
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")


if __name__ == "__main__":
    main()
