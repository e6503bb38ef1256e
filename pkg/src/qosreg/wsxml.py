"""Parse and serialize the three registry XML messages.

Canonical grammar::

    <find_service generic="1.0" xmlns="urn:uddi-org:api">
      <functionalReq>credit card validation</functionalReq>
      <qualityReq><property>price</property><value>0.01</value><weight>2</weight></qualityReq>
      <MaxService>2</MaxService>
    </find_service>

    <tModel tModelKey="...">
      <function>Stock_Quote_Service</function>
      <ws_id>abdc12345</ws_id>
      <overviewDoc><overviewURL>http://...</overviewURL></overviewDoc>
      <categoryBag>
        <keyedReference tModelKey="..." keyName="Availability" keyValue="99.9%"/>
      </categoryBag>
    </tModel>

    <find_tModel generic="1.0" xmlns="urn:uddi-org:api">
      <categoryBag>
        <keyedReference tM_find_Key="..." keyName="Stock market trading services" keylimit="50"/>
      </categoryBag>
    </find_tModel>

A default namespace (``urn:uddi-org:api`` or any other) is ignored when
matching element names.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

from .errors import MalformedXml, SchemaViolation
from .qos import normalize_property

UDDI_NS = "urn:uddi-org:api"
DEFAULT_KEY_LIMIT = 50


@dataclass(frozen=True)
class QualityReq:
    property: str
    value: float
    weight: int


@dataclass(frozen=True)
class RequestMessage:
    functional_req: str
    quality_reqs: tuple[QualityReq, ...] = ()
    max_service: int = 1

    def __post_init__(self):
        object.__setattr__(self, "quality_reqs", tuple(self.quality_reqs))


@dataclass(frozen=True)
class KeyedReference:
    tmodel_key: str
    key_name: str
    key_value: str


@dataclass(frozen=True)
class TModelDocument:
    tmodel_key: str
    function: str
    ws_id: str
    overview_url: str = ""
    keyed_references: tuple[KeyedReference, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "keyed_references", tuple(self.keyed_references))

    def reference(self, key_name: str) -> Optional[KeyedReference]:
        for ref in self.keyed_references:
            if ref.key_name == key_name:
                return ref
        return None


@dataclass(frozen=True)
class DiscoveryQuery:
    find_key: str
    key_name: str
    key_limit: int = DEFAULT_KEY_LIMIT


# -- helpers ----------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_root(xml: str | bytes, expected: str) -> ET.Element:
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc
    if _local(root.tag) != expected:
        raise SchemaViolation(f"expected root <{expected}>, got <{_local(root.tag)}>", expected)
    return root


def _children(parent: ET.Element, name: str) -> list[ET.Element]:
    return [c for c in parent if _local(c.tag) == name]


def _child(parent: ET.Element, name: str, required: bool = True) -> Optional[ET.Element]:
    found = _children(parent, name)
    if len(found) > 1:
        raise SchemaViolation(f"<{name}> appears more than once", name)
    if not found:
        if required:
            raise SchemaViolation(f"missing <{name}>", name)
        return None
    return found[0]


def _text(parent: ET.Element, name: str, required: bool = True) -> Optional[str]:
    node = _child(parent, name, required)
    if node is None:
        return None
    return (node.text or "").strip()


def _attr(node: ET.Element, name: str, required: bool = True) -> Optional[str]:
    value = node.get(name)
    if value is None and required:
        raise SchemaViolation(f"<{_local(node.tag)}> lacks attribute {name}", name)
    return value


def _int(text: str, element: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise SchemaViolation(f"<{element}> is not an integer: {text!r}", element) from None


def _tostring(root: ET.Element) -> str:
    return ET.tostring(root, encoding="unicode")


def _fmt_float(x: float) -> str:
    return repr(float(x))


# -- find_service -----------------------------------------------------------


def parse_request(xml: str | bytes) -> RequestMessage:
    root = _parse_root(xml, "find_service")
    functional = _text(root, "functionalReq")
    if not functional:
        raise SchemaViolation("empty <functionalReq>", "functionalReq")

    reqs = []
    seen = set()
    for node in _children(root, "qualityReq"):
        prop = normalize_property(_text(node, "property"))
        if not prop:
            raise SchemaViolation("empty <property>", "property")
        if prop in seen:
            raise SchemaViolation(f"duplicate property {prop!r}", "property")
        seen.add(prop)
        raw_value = _text(node, "value")
        try:
            value = float(raw_value)
        except ValueError:
            raise SchemaViolation(f"<value> is not numeric: {raw_value!r}", "value") from None
        if not math.isfinite(value) or value < 0:
            raise SchemaViolation(f"<value> must be finite and >= 0: {raw_value!r}", "value")
        weight = _int(_text(node, "weight"), "weight")
        if not 1 <= weight <= 5:
            raise SchemaViolation(f"<weight> must be in 1..5, got {weight}", "weight")
        reqs.append(QualityReq(prop, value, weight))

    max_service = _int(_text(root, "MaxService"), "MaxService")
    if max_service < 1:
        raise SchemaViolation("<MaxService> must be >= 1", "MaxService")
    return RequestMessage(functional, tuple(reqs), max_service)


def serialize_request(m: RequestMessage) -> str:
    root = ET.Element("find_service", {"generic": "1.0", "xmlns": UDDI_NS})
    ET.SubElement(root, "functionalReq").text = m.functional_req
    for q in m.quality_reqs:
        node = ET.SubElement(root, "qualityReq")
        ET.SubElement(node, "property").text = q.property
        ET.SubElement(node, "value").text = _fmt_float(q.value)
        ET.SubElement(node, "weight").text = str(q.weight)
    ET.SubElement(root, "MaxService").text = str(m.max_service)
    return _tostring(root)


# -- tModel -----------------------------------------------------------------


def parse_tmodel(xml: str | bytes) -> TModelDocument:
    root = _parse_root(xml, "tModel")
    tmodel_key = (_attr(root, "tModelKey") or "").strip()
    if not tmodel_key:
        raise SchemaViolation("empty tModelKey", "tModelKey")
    ws_id = _text(root, "ws_id")
    if not ws_id:
        raise SchemaViolation("empty <ws_id>", "ws_id")
    function = _text(root, "function", required=False) or ""

    overview_url = ""
    doc = _child(root, "overviewDoc", required=False)
    if doc is not None:
        overview_url = _text(doc, "overviewURL", required=False) or ""

    refs = []
    bag = _child(root, "categoryBag", required=False)
    if bag is not None:
        names = set()
        for node in _children(bag, "keyedReference"):
            name = _attr(node, "keyName")
            if not name:
                raise SchemaViolation("empty keyName", "keyName")
            if name in names:
                raise SchemaViolation(f"duplicate keyName {name!r}", "keyedReference")
            names.add(name)
            refs.append(
                KeyedReference(_attr(node, "tModelKey", required=False) or "", name, _attr(node, "keyValue"))
            )
    return TModelDocument(tmodel_key, function, ws_id, overview_url, tuple(refs))


def serialize_tmodel(d: TModelDocument) -> str:
    root = ET.Element("tModel", {"tModelKey": d.tmodel_key})
    ET.SubElement(root, "function").text = d.function
    ET.SubElement(root, "ws_id").text = d.ws_id
    doc = ET.SubElement(root, "overviewDoc")
    ET.SubElement(doc, "overviewURL").text = d.overview_url
    bag = ET.SubElement(root, "categoryBag")
    for ref in d.keyed_references:
        ET.SubElement(
            bag,
            "keyedReference",
            {"tModelKey": ref.tmodel_key, "keyName": ref.key_name, "keyValue": ref.key_value},
        )
    return _tostring(root)


# -- find_tModel ------------------------------------------------------------


def parse_find_tmodel(xml: str | bytes) -> DiscoveryQuery:
    root = _parse_root(xml, "find_tModel")
    bag = _child(root, "categoryBag")
    refs = _children(bag, "keyedReference")
    if len(refs) != 1:
        raise SchemaViolation("<categoryBag> must hold exactly one keyedReference", "keyedReference")
    ref = refs[0]
    find_key = _attr(ref, "tM_find_Key", required=False) or ""
    key_name = _attr(ref, "keyName")
    raw_limit = _attr(ref, "keylimit", required=False)
    key_limit = DEFAULT_KEY_LIMIT if raw_limit is None else _int(raw_limit, "keylimit")
    if key_limit < 1:
        raise SchemaViolation("keylimit must be >= 1", "keylimit")
    return DiscoveryQuery(find_key, key_name, key_limit)


def serialize_find_tmodel(q: DiscoveryQuery) -> str:
    root = ET.Element("find_tModel", {"generic": "1.0", "xmlns": UDDI_NS})
    bag = ET.SubElement(root, "categoryBag")
    ET.SubElement(
        bag,
        "keyedReference",
        {"tM_find_Key": q.find_key, "keyName": q.key_name, "keylimit": str(q.key_limit)},
    )
    return _tostring(root)
