import socket
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    # one line per acceptance criterion, tagged via record_property("acceptance", label)
    if report.when == "call" or (report.when == "setup" and report.failed):
        label = dict(report.user_properties).get("acceptance")
        if label is not None:
            _ACCEPTANCE.append((label, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in sorted(_ACCEPTANCE):
        terminalreporter.line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {label}")


@pytest.fixture
def sample_request():
    return (DATA / "sample_find_service.xml").read_text()


@pytest.fixture
def sample_tmodel():
    return (DATA / "sample_tmodel.xml").read_text()


@pytest.fixture
def sample_query():
    return (DATA / "sample_find_tmodel.xml").read_text()


class StubServer:
    """Tiny HTTP server; ``routes`` maps a path to (status, body, delay_seconds)."""

    def __init__(self):
        self.routes = {}
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                status, body, delay = stub.routes.get(self.path, (404, b"not found", 0))
                if delay:
                    time.sleep(delay)
                try:
                    self.send_response(status)
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                except (BrokenPipeError, ConnectionResetError):
                    pass

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    def url(self, path):
        return f"http://127.0.0.1:{self.httpd.server_address[1]}{path}"

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_server():
    server = StubServer()
    yield server
    server.close()


@pytest.fixture
def closed_port_url():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    return f"http://127.0.0.1:{port}/service?wsdl"
