"""WSDL message metrics and regression error measures."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import EmptyInput, LengthMismatch, MalformedXml

INTERFACE_FEATURES = ("data_weight", "distinct_message_count", "message_entropy", "message_repetition_scale")


@dataclass(frozen=True)
class InterfaceMetrics:
    data_weight: int
    distinct_message_count: int
    message_entropy: float
    message_repetition_scale: float
    message_count: int = 0

    def as_features(self) -> dict[str, float]:
        d = asdict(self)
        return {name: float(d[name]) for name in INTERFACE_FEATURES}


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _part_type(part: ET.Element) -> str:
    return part.get("type") or part.get("element") or ""


def entropy_bits(counts) -> float:
    """Shannon entropy in bits of a frequency table."""
    total = sum(counts)
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h + 0.0  # normalizes -0.0


def compute_wsdl_metrics(wsdl: str | bytes) -> InterfaceMetrics:
    """Message-level interface metrics of a WSDL document.

    A message's signature is the sorted list of its parts' type (or
    element) names; entropy and repetition are taken over how often each
    signature occurs.
    """
    try:
        root = ET.fromstring(wsdl)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    signatures: Counter[tuple[str, ...]] = Counter()
    data_weight = 0
    for node in root.iter():
        if not isinstance(node.tag, str) or _local(node.tag) != "message":
            continue
        parts = [c for c in node if isinstance(c.tag, str) and _local(c.tag) == "part"]
        data_weight += len(parts)
        signatures[tuple(sorted(_part_type(p) for p in parts))] += 1

    total = sum(signatures.values())
    distinct = len(signatures)
    return InterfaceMetrics(
        data_weight=data_weight,
        distinct_message_count=distinct,
        message_entropy=entropy_bits(signatures.values()) if distinct > 1 else 0.0,
        message_repetition_scale=total / distinct if distinct else 1.0,
        message_count=total,
    )


def _pair(pred, obs) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=float).ravel()
    o = np.asarray(obs, dtype=float).ravel()
    if p.size != o.size:
        raise LengthMismatch(f"{p.size} predictions vs {o.size} observations")
    if p.size == 0:
        raise EmptyInput("no values to compare")
    return p, o


def mae(pred, obs) -> float:
    """Mean absolute error over every (service, property) pair."""
    p, o = _pair(pred, obs)
    return float(np.abs(o - p).sum() / p.size)


def rmse(pred, obs) -> float:
    p, o = _pair(pred, obs)
    return float(np.sqrt(np.square(o - p).sum() / p.size))
