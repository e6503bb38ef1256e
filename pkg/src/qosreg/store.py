"""Journaled store of published services, predicted QoS and reputation counters.

Every mutation is appended to a line-delimited JSON journal before the
call returns; opening a store replays the journal. ``compact`` rewrites
the journal from the current state.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

from .errors import DuplicateId, NotFound, UnparseableQoSValue
from .qos import FRACTION_PROPERTIES, QoSVector, match_reference_name, parse_quantity, property_key
from .wsxml import KeyedReference, TModelDocument


@dataclass(frozen=True)
class ReputationRecord:
    ws_id: str
    credibility: int = 0
    usage_count: int = 0
    compared: int = 0  # number of properties the credibility count was taken over


@dataclass(frozen=True)
class ServiceRecord:
    ws_id: str
    tmodel: TModelDocument
    assured_qos: QoSVector
    published_at: str
    wsdl_text: Optional[str] = None
    predicted_qos: Optional[QoSVector] = None

    def __post_init__(self):
        if self.ws_id != self.tmodel.ws_id:
            raise ValueError("ws_id must equal tmodel.ws_id")


def extract_assured_qos(tmodel: TModelDocument) -> QoSVector:
    """Provider-assured QoS from a tModel's keyedReferences.

    Names are contains-matched onto the five canonical properties; a
    percent value is divided by 100. Other references with a numeric value
    land in the extension map (e.g. ``price``); non-numeric ones that do
    not name a QoS property are ignored.
    """
    known: dict[str, float] = {}
    extras: dict[str, float] = {}
    for ref in tmodel.keyed_references:
        prop = match_reference_name(ref.key_name)
        try:
            q = parse_quantity(ref.key_value)
        except ValueError:
            if prop is not None:
                raise UnparseableQoSValue(
                    f"{ref.key_name}={ref.key_value!r} is not a numeric QoS value"
                ) from None
            continue
        value = q.value / 100.0 if q.unit == "%" else q.value
        if prop is None:
            extras.setdefault(property_key(ref.key_name), value)
            continue
        if value < 0 or (prop in FRACTION_PROPERTIES and value > 1):
            raise UnparseableQoSValue(f"{ref.key_name}={ref.key_value!r} is out of range")
        known.setdefault(prop, value)
    return QoSVector(**known, extras=extras)


# -- (de)serialization of journal payloads ---------------------------------


def _tmodel_from_dict(d: dict) -> TModelDocument:
    refs = tuple(KeyedReference(**r) for r in d["keyed_references"])
    return TModelDocument(d["tmodel_key"], d["function"], d["ws_id"], d["overview_url"], refs)


def _qos_to_dict(q: Optional[QoSVector]) -> Optional[dict]:
    return None if q is None else q.to_dict()


def _qos_from_dict(d: Optional[dict]) -> Optional[QoSVector]:
    return None if d is None else QoSVector.from_dict(d)


def record_to_dict(r: ServiceRecord) -> dict:
    return {
        "ws_id": r.ws_id,
        "tmodel": asdict(r.tmodel),
        "assured_qos": _qos_to_dict(r.assured_qos),
        "published_at": r.published_at,
        "wsdl_text": r.wsdl_text,
        "predicted_qos": _qos_to_dict(r.predicted_qos),
    }


def record_from_dict(d: dict) -> ServiceRecord:
    return ServiceRecord(
        ws_id=d["ws_id"],
        tmodel=_tmodel_from_dict(d["tmodel"]),
        assured_qos=_qos_from_dict(d["assured_qos"]),
        published_at=d["published_at"],
        wsdl_text=d.get("wsdl_text"),
        predicted_qos=_qos_from_dict(d.get("predicted_qos")),
    )


class RegistryStore:
    """Services keyed by ws_id with an append-only journal.

    Writers serialize on one lock. Readers never lock: each mutation swaps
    in fresh dicts, so a reader holding the previous reference sees a
    consistent snapshot.
    """

    def __init__(self, journal: str | os.PathLike | None = None, fsync: bool = True):
        self.path = Path(journal) if journal is not None else None
        self.fsync = fsync
        self._lock = threading.RLock()
        self._state: tuple[dict[str, ServiceRecord], dict[str, ReputationRecord]] = ({}, {})
        self._last_ts: Optional[datetime] = None
        if self.path is not None and self.path.exists():
            self._replay()

    @property
    def _records(self) -> dict[str, ServiceRecord]:
        return self._state[0]

    @property
    def _reputation(self) -> dict[str, ReputationRecord]:
        return self._state[1]

    # -- journal ----------------------------------------------------------

    def _replay(self) -> None:
        lines = self.path.read_text(encoding="utf-8").splitlines()
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError:
                # A torn final line from a crash mid-append is dropped.
                if lineno == len(lines):
                    break
                raise ValueError(f"{self.path}:{lineno}: corrupt journal entry") from None
            self._apply(entry)

    def _append(self, entry: dict) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
            fh.flush()
            if self.fsync:
                os.fsync(fh.fileno())

    def _apply(self, entry: dict) -> None:
        op = entry["op"]
        records = dict(self._records)
        reputation = dict(self._reputation)
        if op == "publish":
            rec = record_from_dict(entry["record"])
            records[rec.ws_id] = rec
            reputation[rec.ws_id] = ReputationRecord(rec.ws_id)
            self._last_ts = datetime.fromisoformat(rec.published_at)
        elif op == "predict":
            ws_id = entry["ws_id"]
            records[ws_id] = replace(records[ws_id], predicted_qos=_qos_from_dict(entry["qos"]))
        elif op == "credibility":
            ws_id = entry["ws_id"]
            reputation[ws_id] = replace(
                reputation[ws_id], credibility=entry["value"], compared=entry.get("compared", 0)
            )
        elif op == "usage":
            ws_id = entry["ws_id"]
            reputation[ws_id] = replace(reputation[ws_id], usage_count=entry["count"])
        elif op == "remove":
            records.pop(entry["ws_id"], None)
            reputation.pop(entry["ws_id"], None)
        else:
            raise ValueError(f"unknown journal op {op!r}")
        self._state = (records, reputation)

    def _commit(self, entry: dict) -> None:
        self._append(entry)
        self._apply(entry)

    def _next_timestamp(self) -> str:
        now = datetime.now(timezone.utc)
        if self._last_ts is not None and now <= self._last_ts:
            now = self._last_ts + timedelta(microseconds=1)
        return now.isoformat(timespec="microseconds")

    def compact(self) -> None:
        """Rewrite the journal as the minimal entry sequence for the current state."""
        if self.path is None:
            return
        with self._lock:
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                for rec in self.list_all():
                    rep = self._reputation[rec.ws_id]
                    for entry in (
                        {"op": "publish", "record": record_to_dict(rec)},
                        {"op": "credibility", "ws_id": rec.ws_id, "value": rep.credibility,
                         "compared": rep.compared},
                        {"op": "usage", "ws_id": rec.ws_id, "count": rep.usage_count},
                    ):
                        fh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)

    # -- mutations ------------------------------------------------------------

    def publish(self, tmodel: TModelDocument, wsdl_text: Optional[str] = None) -> str:
        assured = extract_assured_qos(tmodel)
        with self._lock:
            if tmodel.ws_id in self._records:
                raise DuplicateId(tmodel.ws_id)
            rec = ServiceRecord(tmodel.ws_id, tmodel, assured, self._next_timestamp(), wsdl_text)
            self._commit({"op": "publish", "record": record_to_dict(rec)})
        return rec.ws_id

    def set_predicted_qos(self, ws_id: str, q: QoSVector) -> None:
        with self._lock:
            self._require(ws_id)
            self._commit({"op": "predict", "ws_id": ws_id, "qos": q.to_dict()})

    def set_credibility(self, ws_id: str, value: int, compared: int) -> None:
        with self._lock:
            self._require(ws_id)
            self._commit({"op": "credibility", "ws_id": ws_id, "value": int(value),
                          "compared": int(compared)})

    def increment_usage(self, ws_id: str) -> int:
        with self._lock:
            self._require(ws_id)
            count = self._reputation[ws_id].usage_count + 1
            self._commit({"op": "usage", "ws_id": ws_id, "count": count})
        return count

    def remove(self, ws_id: str) -> None:
        with self._lock:
            self._require(ws_id)
            self._commit({"op": "remove", "ws_id": ws_id})

    # -- reads ------------------------------------------------------------------

    def _require(self, ws_id: str) -> ServiceRecord:
        try:
            return self._records[ws_id]
        except KeyError:
            raise NotFound(ws_id) from None

    def get(self, ws_id: str) -> ServiceRecord:
        return self._require(ws_id)

    def reputation(self, ws_id: str) -> ReputationRecord:
        try:
            return self._reputation[ws_id]
        except KeyError:
            raise NotFound(ws_id) from None

    def list_all(self) -> list[ServiceRecord]:
        return sorted(self._records.values(), key=lambda r: (r.published_at, r.ws_id))

    def reputations(self) -> list[ReputationRecord]:
        records, reputation = self._state
        ordered = sorted(records.values(), key=lambda r: (r.published_at, r.ws_id))
        return [reputation[r.ws_id] for r in ordered]

    def __contains__(self, ws_id: str) -> bool:
        return ws_id in self._records

    def __len__(self) -> int:
        return len(self._records)
