"""Provider credibility, usage counts, and the reputation-ordered final answer."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import NoCandidates
from .qos import QoSVector
from .selector import ScoredService
from .store import RegistryStore, ReputationRecord

LITERAL = "literal"
NORMALIZED = "normalized"
MODES = (LITERAL, NORMALIZED)

DEFAULT_TOLERANCE = 0.10
EPS = 1e-9


def compared_properties(predicted: QoSVector, assured: QoSVector) -> list[str]:
    """Properties present in both vectors."""
    return [name for name, _ in predicted.items() if assured.get(name) is not None]


def credibility(predicted: QoSVector, assured: QoSVector, tolerance: float = DEFAULT_TOLERANCE) -> int:
    """Count the properties whose predicted value agrees with the provider's claim.

    Agreement means ``|predicted - assured| <= tolerance * max(|assured|, 1e-9)``;
    tolerance 0 demands exact equality.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    count = 0
    for name in compared_properties(predicted, assured):
        qv, qa = predicted.get(name), assured.get(name)
        if qv == qa or abs(qv - qa) <= tolerance * max(abs(qa), EPS):
            count += 1
    return count


def record_usage(store: RegistryStore, ws_id: str) -> int:
    return store.increment_usage(ws_id)


def score(rec: ReputationRecord, mode: str = LITERAL, max_count: int = 0) -> float:
    if mode == LITERAL:
        return float(rec.credibility + rec.usage_count)
    if mode == NORMALIZED:
        cred = rec.credibility / rec.compared if rec.compared else 0.0
        usage = rec.usage_count / max_count if max_count else 0.0
        return 0.5 * cred + 0.5 * usage
    raise ValueError(f"unknown reputation mode {mode!r}")


def reputation_score(
    store: RegistryStore, ws_id: str, mode: str = LITERAL, candidates: Optional[Sequence[str]] = None
) -> float:
    """Credibility plus usage count; in normalized mode each term is scaled to [0, 1].

    ``candidates`` sets the population whose largest usage count
    normalizes the usage term (default: the service alone).
    """
    rec = store.reputation(ws_id)
    max_count = max(store.reputation(c).usage_count for c in (candidates or [ws_id]))
    return score(rec, mode, max_count)


@dataclass
class FinalEntry:
    ws_id: str
    overview_url: str
    qos_score: float
    reputation: float
    fallback: bool = False


@dataclass
class FinalAnswer:
    entries: list[FinalEntry]
    mode: str

    def ids(self) -> list[str]:
        return [e.ws_id for e in self.entries]


def finalize(
    store: RegistryStore,
    ranked: Sequence[ScoredService],
    max_service: int,
    mode: str = LITERAL,
    count_usage: bool = True,
) -> FinalAnswer:
    """Cut the QoS ranking to ``max_service`` and reorder that slice by reputation.

    The sort is stable, so equal reputations keep their QoS order. When
    ``count_usage`` is set each returned service's usage count advances by
    one after the ordering is fixed.
    """
    if not ranked:
        raise NoCandidates("nothing to finalize")
    top = list(ranked[:max_service])
    ids = [s.ws_id for s in top]
    reps = {s.ws_id: reputation_score(store, s.ws_id, mode, ids) for s in top}
    top.sort(key=lambda s: -reps[s.ws_id])
    entries = [
        FinalEntry(s.ws_id, store.get(s.ws_id).tmodel.overview_url, s.total, reps[s.ws_id], s.fallback)
        for s in top
    ]
    if count_usage:
        for e in entries:
            record_usage(store, e.ws_id)
    return FinalAnswer(entries, mode)


def reputation_csv(store: RegistryStore, mode: str = LITERAL, ws_ids: Optional[Sequence[str]] = None) -> str:
    ids = list(ws_ids) if ws_ids is not None else [r.ws_id for r in store.reputations()]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ws_id", "credibility", "usage_count", "score", "mode"])
    for ws_id in ids:
        rec = store.reputation(ws_id)
        w.writerow([ws_id, rec.credibility, rec.usage_count, repr(reputation_score(store, ws_id, mode, ids)), mode])
    return buf.getvalue()
