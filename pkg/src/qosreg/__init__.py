"""QoS-aware web service registry.

Publish tModel service descriptions, discover candidates by keyword,
predict QoS from interface and code metrics, rank by a weighted
constraint tree and break ties by provider reputation.
"""

from .config import Config, load_config
from .qos import PROPERTIES, QoSVector
from .registry import Registry
from .store import RegistryStore, ReputationRecord, ServiceRecord
from .wsxml import (
    DiscoveryQuery,
    KeyedReference,
    QualityReq,
    RequestMessage,
    TModelDocument,
    parse_find_tmodel,
    parse_request,
    parse_tmodel,
    serialize_find_tmodel,
    serialize_request,
    serialize_tmodel,
)

__version__ = "0.1.0"

__all__ = [
    "Config",
    "DiscoveryQuery",
    "KeyedReference",
    "PROPERTIES",
    "QoSVector",
    "QualityReq",
    "Registry",
    "RegistryStore",
    "ReputationRecord",
    "RequestMessage",
    "ServiceRecord",
    "TModelDocument",
    "load_config",
    "parse_find_tmodel",
    "parse_request",
    "parse_tmodel",
    "serialize_find_tmodel",
    "serialize_request",
    "serialize_tmodel",
]
