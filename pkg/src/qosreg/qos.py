"""QoS property vocabulary, the QoSVector value type and quantity parsing."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

# Canonical five properties, in the order used everywhere (CSV columns,
# reports, model targets).
PROPERTIES = ("response_time", "availability", "throughput", "reliability", "latency")

LOWER_BETTER = "<"
HIGHER_BETTER = ">"

DIRECTIONS = {
    "response_time": LOWER_BETTER,
    "availability": HIGHER_BETTER,
    "throughput": HIGHER_BETTER,
    "reliability": HIGHER_BETTER,
    "latency": LOWER_BETTER,
}

# Extension properties a request may constrain even though no predictor
# produces them; their values come from provider-assured tModel entries.
EXTENSION_DIRECTIONS = {"price": LOWER_BETTER}

FRACTION_PROPERTIES = frozenset({"availability", "reliability"})

# Substring -> canonical field for decorated keyedReference names such as
# "Average_Throughput".
_CONTAINS_MAP = (
    ("availability", "availability"),
    ("throughput", "throughput"),
    ("reliability", "reliability"),
    ("response", "response_time"),
    ("latency", "latency"),
)

_WS = re.compile(r"\s+")
_QUANTITY = re.compile(
    r"^\s*(?P<cmp><=|>=|<|>)?\s*(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(?P<unit>%|ms|s|Mbps|bps)?\s*$"
)


def normalize_property(name: str) -> str:
    """Lowercase and collapse internal whitespace ("Response  Time" -> "response time")."""
    return _WS.sub(" ", name.strip()).lower()


def canonical_property(name: str) -> Optional[str]:
    """Map an exact property name (any casing, spaces or underscores) to a field name."""
    key = normalize_property(name.replace("_", " ")).replace(" ", "_")
    return key if key in DIRECTIONS else None


def match_reference_name(key_name: str) -> Optional[str]:
    """Case-insensitive contains-match of a keyedReference name onto a canonical field."""
    lowered = key_name.lower()
    for needle, prop in _CONTAINS_MAP:
        if needle in lowered:
            return prop
    return None


def direction_of(name: str) -> Optional[str]:
    prop = canonical_property(name)
    if prop is not None:
        return DIRECTIONS[prop]
    return EXTENSION_DIRECTIONS.get(property_key(name))


def property_key(name: str) -> str:
    """Stable key for any property name: canonical field name or a normalized extension name."""
    prop = canonical_property(name)
    if prop is not None:
        return prop
    return normalize_property(name.replace("_", " ")).replace(" ", "_")


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str = ""
    comparator: str = ""


def parse_quantity(text: str) -> Quantity:
    """Parse a keyValue such as ``"99.9%"`` or ``">10Mbps"``.

    At most one leading comparator and one trailing unit token are
    stripped. Raises ValueError when the remainder is not a number.
    """
    m = _QUANTITY.match(text)
    if m is None:
        raise ValueError(f"not a numeric quantity: {text!r}")
    value = float(m.group("num"))
    if not math.isfinite(value):
        raise ValueError(f"non-finite quantity: {text!r}")
    return Quantity(value, m.group("unit") or "", m.group("cmp") or "")


@dataclass(frozen=True)
class QoSVector:
    """The five QoS properties (each optional) plus an extension map.

    Units: response_time and latency in ms, throughput in invocations/s,
    availability and reliability as fractions in [0, 1].
    """

    response_time: Optional[float] = None
    availability: Optional[float] = None
    throughput: Optional[float] = None
    reliability: Optional[float] = None
    latency: Optional[float] = None
    extras: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name, value in self.items():
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
            if name in FRACTION_PROPERTIES and value > 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        object.__setattr__(self, "extras", dict(self.extras))

    def get(self, name: str) -> Optional[float]:
        key = property_key(name)
        if key in DIRECTIONS:
            return getattr(self, key)
        return self.extras.get(key)

    def items(self) -> Iterator[tuple[str, float]]:
        for prop in PROPERTIES:
            value = getattr(self, prop)
            if value is not None:
                yield prop, value
        yield from sorted(self.extras.items())

    def to_dict(self) -> dict:
        return dict(self.items())

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "QoSVector":
        known = {}
        extras = {}
        for name, value in data.items():
            key = property_key(name)
            if key in DIRECTIONS:
                known[key] = float(value)
            else:
                extras[key] = float(value)
        return cls(**known, extras=extras)

    def __len__(self) -> int:
        return sum(1 for _ in self.items())
