"""Keyword discovery over the registry and WSDL link validation."""

from __future__ import annotations

import csv
import io
import re
import socket
import urllib.error
import urllib.parse
import urllib.request
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .errors import InvalidUrl
from .store import RegistryStore, ServiceRecord
from .wsxml import DiscoveryQuery

STOPWORDS = frozenset({"the", "and", "for", "web", "service", "services"})
DEFAULT_TIMEOUT_MS = 5000
DEFAULT_PARALLELISM = 8

_SPLIT = re.compile(r"[^0-9A-Za-z]+")


def tokenize(text: str) -> frozenset[str]:
    return frozenset(
        t for t in (tok.lower() for tok in _SPLIT.split(text)) if len(t) >= 3 and t not in STOPWORDS
    )


def service_tokens(record: ServiceRecord) -> frozenset[str]:
    """Tokens of the function name and of every keyedReference name."""
    tokens = set(tokenize(record.tmodel.function))
    for ref in record.tmodel.keyed_references:
        tokens |= tokenize(ref.key_name)
    return frozenset(tokens)


def _match(query: str, records: Iterable[ServiceRecord]) -> list[tuple[int, str]]:
    wanted = tokenize(query)
    if not wanted:
        return []
    hits = []
    for rec in records:
        overlap = len(wanted & service_tokens(rec))
        if overlap:
            hits.append((overlap, rec.ws_id))
    hits.sort(key=lambda h: (-h[0], h[1]))
    return hits


def find_tmodel(q: DiscoveryQuery, store: RegistryStore) -> list[str]:
    """ws_ids sharing at least one token with ``q.key_name``, best overlap first, capped at key_limit."""
    return [ws_id for _, ws_id in _match(q.key_name, store.list_all())[: q.key_limit]]


def find_by_function(text: str, store: RegistryStore) -> list[str]:
    """Candidates for a request's functional requirement, ordered like ``find_tmodel``, uncapped."""
    return [ws_id for _, ws_id in _match(text, store.list_all())]


# -- link validation --------------------------------------------------------

OK = "ok"
TIMEOUT = "timeout"
REFUSED = "connection-refused"
DNS = "dns"
NON_2XX = "non-2xx"
ERROR = "error"


@dataclass(frozen=True)
class FetchResult:
    url: str
    category: str
    status: Optional[int] = None
    body: Optional[bytes] = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.category == OK


def check_url(url: str) -> None:
    parts = urllib.parse.urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.hostname:
        raise InvalidUrl(url)


def _is_timeout(exc: BaseException) -> bool:
    return isinstance(exc, (socket.timeout, TimeoutError)) or "timed out" in str(exc)


def fetch_url(url: str, timeout_ms: int = DEFAULT_TIMEOUT_MS) -> FetchResult:
    """HTTP GET ``url``; network failures are reported as a category, not raised."""
    check_url(url)
    try:
        with urllib.request.urlopen(url, timeout=timeout_ms / 1000.0) as resp:
            return FetchResult(url, OK, resp.status, resp.read())
    except urllib.error.HTTPError as exc:
        return FetchResult(url, NON_2XX, exc.code, detail=str(exc.reason))
    except urllib.error.URLError as exc:
        reason = exc.reason
        if isinstance(reason, socket.gaierror):
            return FetchResult(url, DNS, detail=str(reason))
        if isinstance(reason, ConnectionRefusedError):
            return FetchResult(url, REFUSED, detail=str(reason))
        if _is_timeout(reason if isinstance(reason, BaseException) else exc):
            return FetchResult(url, TIMEOUT, detail=str(reason))
        return FetchResult(url, ERROR, detail=str(reason))
    except ConnectionRefusedError as exc:
        return FetchResult(url, REFUSED, detail=str(exc))
    except (socket.timeout, TimeoutError) as exc:
        return FetchResult(url, TIMEOUT, detail=str(exc))
    except OSError as exc:
        return FetchResult(url, ERROR, detail=str(exc))


@dataclass
class ValidationEntry:
    ws_id: str
    url: str
    status: Optional[int]
    category: str


@dataclass
class ValidationReport:
    entries: list[ValidationEntry] = field(default_factory=list)

    @property
    def reachable(self) -> list[str]:
        return [e.ws_id for e in self.entries if e.category == OK]

    @property
    def unreachable(self) -> list[str]:
        return [e.ws_id for e in self.entries if e.category != OK]

    def counts(self) -> dict[str, int]:
        """``reachable``/``unreachable`` totals plus one count per failure category."""
        out = {"reachable": len(self.reachable), "unreachable": len(self.unreachable)}
        out.update(sorted(Counter(e.category for e in self.entries if e.category != OK).items()))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["ws_id", "url", "status", "category"])
        for e in self.entries:
            writer.writerow([e.ws_id, e.url, "" if e.status is None else e.status, e.category])
        return buf.getvalue()


Fetcher = Callable[[str, int], FetchResult]


def validate_dataset(
    records: Sequence[tuple[str, str]],
    timeout_ms: int = DEFAULT_TIMEOUT_MS,
    parallelism: int = DEFAULT_PARALLELISM,
    fetcher: Fetcher = fetch_url,
) -> ValidationReport:
    """Check every dataset row's WSDL link; entries keep input order."""

    def one(item: tuple[str, str]) -> FetchResult:
        url = item[1]
        try:
            return fetcher(url, timeout_ms)
        except InvalidUrl:
            return FetchResult(url, "invalid-url")

    if not records:
        return ValidationReport()
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        results = list(pool.map(one, records))
    return ValidationReport(
        [ValidationEntry(ws_id, url, r.status, r.category) for (ws_id, url), r in zip(records, results)]
    )
