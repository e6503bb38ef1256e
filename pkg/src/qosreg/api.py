"""Request handling shared by the HTTP server and the CLI.

``App.handle`` maps (method, path, body bytes) to a ``Response``; both
transports write ``Response.body`` untouched, so identical inputs give
byte-identical payloads.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import unquote

from . import errors, reputation, wsxml
from .predictor import FeatureMatrix, ingest_csv, ingest_csv_text
from .predictor.pcr import EvaluationReport
from .registry import Registry, Selection

XML = "application/xml"
CSV = "text/csv"

_STATUS = (
    ((errors.MalformedXml, errors.SchemaViolation, errors.UnparseableQoSValue), 400),
    ((errors.BadHeader, errors.NonNumericCell, errors.EmptyConstraints, errors.UnknownProperty), 400),
    ((errors.DuplicateId,), 409),
    ((errors.NotFound, errors.NoCandidates), 404),
    ((errors.TooFewRows, errors.DegenerateData), 422),
)


@dataclass(frozen=True)
class Response:
    status: int
    content_type: str
    body: bytes

    @property
    def ok(self) -> bool:
        return self.status < 400


def _xml(root: ET.Element, status: int = 200) -> Response:
    return Response(status, XML, ET.tostring(root, encoding="unicode").encode("utf-8") + b"\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def error_response(exc: Exception) -> Response:
    status = 500
    for kinds, code in _STATUS:
        if isinstance(exc, kinds):
            status = code
            break
    attrs = {"code": str(status), "type": type(exc).__name__}
    element = getattr(exc, "element", "") or getattr(exc, "column", "")
    if element:
        attrs["element"] = element
    node = ET.Element("error", attrs)
    node.text = str(exc)
    return _xml(node, status)


def _text(body: bytes) -> str:
    return body.decode("utf-8")


def render_selection(sel: Selection) -> Response:
    root = ET.Element("serviceList", {
        "count": str(len(sel.answer.entries)),
        "scorer": sel.ranking.scorer,
        "reputationMode": sel.answer.mode,
    })
    for i, e in enumerate(sel.answer.entries, 1):
        ET.SubElement(root, "service", {
            "rank": str(i),
            "ws_id": e.ws_id,
            "overviewURL": e.overview_url,
            "qosScore": _fmt(e.qos_score),
            "reputation": _fmt(e.reputation),
            "qosSource": "assured" if e.fallback else "predicted",
        })
    for msg in sel.ranking.warnings:
        ET.SubElement(root, "warning").text = msg
    return _xml(root)


def render_evaluation(report: EvaluationReport) -> Response:
    return Response(200, CSV, report.to_csv().encode("utf-8"))


def read_training_body(body: bytes) -> FeatureMatrix:
    """A feature CSV, or ``<train path="..."/>`` naming one on the server's disk."""
    text = _text(body)
    if not text.lstrip().startswith("<"):
        return ingest_csv_text(text)
    try:
        node = ET.fromstring(text)
    except ET.ParseError as exc:
        raise errors.MalformedXml(str(exc)) from None
    path = node.get("path")
    if node.tag != "train" or not path:
        raise errors.SchemaViolation('expected <train path="..."/>', "train")
    try:
        return ingest_csv(Path(path))
    except OSError as exc:
        raise errors.BadHeader(f"cannot read {path}: {exc}") from None


class App:
    def __init__(self, registry: Registry):
        self.registry = registry
        self._routes: dict[tuple[str, str], Callable[[bytes], Response]] = {
            ("POST", "/publish"): self.publish,
            ("POST", "/discover"): self.discover,
            ("POST", "/select"): self.select,
            ("POST", "/train"): self.train,
            ("GET", "/services"): self.services,
            ("GET", "/reputation"): self.reputation_table,
            ("GET", "/health"): self.health,
        }

    def handle(self, method: str, path: str, body: bytes = b"") -> Response:
        path = path.split("?", 1)[0].rstrip("/") or "/"
        try:
            route = self._routes.get((method, path))
            if route is not None:
                return route(body)
            if method == "GET" and path.startswith("/reputation/"):
                return self.reputation_of(unquote(path[len("/reputation/"):]))
            if method == "POST" and path.startswith("/usage/"):
                return self.usage(unquote(path[len("/usage/"):]))
            node = ET.Element("error", {"code": "404", "type": "NoRoute"})
            node.text = f"no route for {method} {path}"
            return _xml(node, 404)
        except errors.QosRegError as exc:
            return error_response(exc)
        except UnicodeDecodeError as exc:
            return error_response(errors.MalformedXml(f"body is not UTF-8: {exc}"))

    # -- endpoints ----------------------------------------------------------------

    def publish(self, body: bytes, wsdl_text: Optional[str] = None) -> Response:
        tmodel = wsxml.parse_tmodel(body)
        ws_id = self.registry.publish(tmodel, wsdl_text)
        rec = self.registry.store.get(ws_id)
        return _xml(ET.Element("published", {
            "ws_id": ws_id,
            "wsdl": "cached" if rec.wsdl_text else "none",
            "predicted": "yes" if rec.predicted_qos is not None else "no",
        }), 201)

    def discover(self, body: bytes) -> Response:
        query = wsxml.parse_find_tmodel(body)
        ids = self.registry.discover(query)
        root = ET.Element("tModelList", {"tM_find_Key": query.find_key, "count": str(len(ids))})
        for ws_id in ids:
            rec = self.registry.store.get(ws_id)
            ET.SubElement(root, "tModelInfo", {
                "ws_id": ws_id,
                "tModelKey": rec.tmodel.tmodel_key,
                "function": rec.tmodel.function,
                "overviewURL": rec.tmodel.overview_url,
            })
        return _xml(root)

    def select(self, body: bytes) -> Response:
        return render_selection(self.registry.select(wsxml.parse_request(body)))

    def train(self, body: bytes) -> Response:
        return render_evaluation(self.registry.train(read_training_body(body)))

    def services(self, body: bytes = b"") -> Response:
        root = ET.Element("services", {"count": str(len(self.registry.store))})
        for rec in self.registry.store.list_all():
            node = ET.SubElement(root, "service", {
                "ws_id": rec.ws_id,
                "function": rec.tmodel.function,
                "overviewURL": rec.tmodel.overview_url,
                "publishedAt": rec.published_at,
            })
            for tag, q in (("assured", rec.assured_qos), ("predicted", rec.predicted_qos)):
                if q is not None:
                    ET.SubElement(node, tag, {name: _fmt(v) for name, v in q.items()})
        return _xml(root)

    def reputation_of(self, ws_id: str) -> Response:
        rec = self.registry.store.reputation(ws_id)
        mode = self.registry.config.reputation_mode
        score = reputation.reputation_score(self.registry.store, ws_id, mode)
        return _xml(ET.Element("reputation", {
            "ws_id": ws_id,
            "credibility": str(rec.credibility),
            "compared": str(rec.compared),
            "usage_count": str(rec.usage_count),
            "score": _fmt(score),
            "mode": mode,
        }))

    def reputation_table(self, body: bytes = b"") -> Response:
        text = reputation.reputation_csv(self.registry.store, self.registry.config.reputation_mode)
        return Response(200, CSV, text.encode("utf-8"))

    def usage(self, ws_id: str) -> Response:
        count = self.registry.confirm_usage(ws_id)
        return _xml(ET.Element("usage", {"ws_id": ws_id, "usage_count": str(count)}))

    def health(self, body: bytes = b"") -> Response:
        return _xml(ET.Element("health", {
            "status": "ok",
            "services": str(len(self.registry.store)),
            "model": "loaded" if self.registry.model is not None else "none",
        }))
