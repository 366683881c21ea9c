from __future__ import annotations

import sys
import threading
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from formwatch.crawler import CrawlConfig, crawl

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_SITE = REPO_ROOT / "fixtures" / "wordpress_demo"


class _QuietHandler(SimpleHTTPRequestHandler):
    def log_message(self, *args) -> None:
        pass


@pytest.fixture(scope="session")
def site_server():
    """Serve the bundled demo site on an ephemeral localhost port."""
    handler = partial(_QuietHandler, directory=str(FIXTURE_SITE))
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield f"http://{host}:{port}"
    server.shutdown()
    thread.join(timeout=5)


@pytest.fixture(scope="session")
def crawled_site(site_server):
    config = CrawlConfig(seed_url=f"{site_server}/index.html", max_pages=50)
    return crawl(config)


@pytest.fixture(scope="session")
def site_structure(crawled_site):
    structure, _report = crawled_site
    return structure


@pytest.fixture(scope="session")
def site_report(crawled_site):
    _structure, report = crawled_site
    return report
