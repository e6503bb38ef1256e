"""Weighted AND-OR constraint trees and QoS-score ranking.

Leaf scores use min-max normalization over the candidate set: the best
candidate at a leaf scores 1 and the worst 0. An AND node is the weighted
sum of its children (edge weights sum to 1), an OR node the maximum.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import EmptyConstraints, NoCandidates, UnknownProperty
from .qos import DIRECTIONS, EXTENSION_DIRECTIONS, HIGHER_BETTER, LOWER_BETTER, QoSVector, direction_of, property_key
from .wsxml import RequestMessage

MINMAX = "minmax"
RANK_STEP = "rank-paper"
SCORERS = (MINMAX, RANK_STEP)


@dataclass(frozen=True)
class Leaf:
    property: str  # property_key form, e.g. "response_time" or "price"
    direction: str  # LOWER_BETTER or HIGHER_BETTER
    threshold: Optional[float] = None


@dataclass(frozen=True)
class AndNode:
    children: tuple["Node", ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.children) != len(self.weights) or not self.children:
            raise ValueError("an AND node needs one weight per child")
        if abs(math.fsum(self.weights) - 1.0) > 1e-9 or any(not 0 < w <= 1 for w in self.weights):
            raise ValueError("AND edge weights must lie in (0, 1] and sum to 1")


@dataclass(frozen=True)
class OrNode:
    children: tuple["Node", ...]


Node = Union[Leaf, AndNode, OrNode]


@dataclass(frozen=True)
class WeightedTree:
    root: Node

    def leaves(self) -> list[Leaf]:
        out: list[Leaf] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                out.append(node)
            else:
                stack.extend(reversed(node.children))
        return out

    @property
    def edge_weights(self) -> tuple[float, ...]:
        return self.root.weights if isinstance(self.root, AndNode) else (1.0,)


def build_tree(m: RequestMessage, extensions: Mapping[str, str] = EXTENSION_DIRECTIONS) -> WeightedTree:
    """Flat AND tree with one leaf per quality constraint, weights normalized to sum 1."""
    if not m.quality_reqs:
        raise EmptyConstraints("request carries no quality constraints")
    leaves = []
    for q in m.quality_reqs:
        key = property_key(q.property)
        direction = direction_of(q.property) or extensions.get(key)
        if direction is None:
            raise UnknownProperty(q.property)
        leaves.append(Leaf(key, direction, q.value))
    total = sum(q.weight for q in m.quality_reqs)
    return WeightedTree(AndNode(tuple(leaves), tuple(q.weight / total for q in m.quality_reqs)))


def leaf_scores(values: Sequence[tuple[str, Optional[float]]], direction: str) -> list[tuple[str, float]]:
    """Min-max score every candidate at one leaf.

    Candidates lacking a value score 0; if every present value is equal
    they all score 1.
    """
    present = [v for _, v in values if v is not None]
    if not present:
        return [(ws_id, 0.0) for ws_id, _ in values]
    lo, hi = min(present), max(present)
    span = hi - lo
    out = []
    for ws_id, v in values:
        if v is None:
            s = 0.0
        elif span == 0:
            s = 1.0
        elif direction == HIGHER_BETTER:
            s = (v - lo) / span
        else:
            s = (hi - v) / span
        out.append((ws_id, min(max(s, 0.0), 1.0)))
    return out


def leaf_scores_step(values: Sequence[tuple[str, Optional[float]]], direction: str) -> list[tuple[str, float]]:
    """Literal step-scoring variant, for side-by-side comparison with min-max.

    Candidates are ordered by value, descending. At a "<" leaf the first
    scores 1, the last 0, and the x-th ``2 * (last - x) / 10``; at a ">"
    leaf the first scores 0, the last 1, and the x-th
    ``2 * (first - x) / 10``. Scores are not clipped.
    """
    present = sorted(((v, ws_id) for ws_id, v in values if v is not None), key=lambda t: (-t[0], t[1]))
    scores = {ws_id: 0.0 for ws_id, _ in values}
    if len(present) == 1:
        scores[present[0][1]] = 1.0
    elif present:
        first, last = present[0][0], present[-1][0]
        for pos, (v, ws_id) in enumerate(present):
            if pos == 0:
                s = 1.0 if direction == LOWER_BETTER else 0.0
            elif pos == len(present) - 1:
                s = 0.0 if direction == LOWER_BETTER else 1.0
            elif direction == LOWER_BETTER:
                s = 2 * (last - v) / 10
            else:
                s = 2 * (first - v) / 10
            scores[ws_id] = s
    return [(ws_id, scores[ws_id]) for ws_id, _ in values]


@dataclass
class ScoredService:
    ws_id: str
    leaf_scores: dict[str, float]
    total: float
    fallback: bool = False  # a canonical-property leaf read provider-assured QoS for lack of a prediction


@dataclass
class Ranking:
    services: list[ScoredService]
    leaves: list[Leaf]
    warnings: list[str] = field(default_factory=list)
    scorer: str = MINMAX
    weights: Optional[tuple[float, ...]] = None  # per-leaf edge weights when the tree is a flat AND

    def ids(self) -> list[str]:
        return [s.ws_id for s in self.services]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "ws_id", "total"] + [leaf.property for leaf in self.leaves])
        for i, s in enumerate(self.services, 1):
            w.writerow([i, s.ws_id, repr(s.total)] + [repr(s.leaf_scores[l.property]) for l in self.leaves])
        return buf.getvalue()


QoSSource = Callable[[str], tuple[Optional[QoSVector], Optional[QoSVector]]]


def _evaluate(node: Node, per_leaf: Mapping[str, float]) -> float:
    if isinstance(node, Leaf):
        return per_leaf[node.property]
    if isinstance(node, AndNode):
        return math.fsum(w * _evaluate(c, per_leaf) for c, w in zip(node.children, node.weights))
    return max(_evaluate(c, per_leaf) for c in node.children)


def _violates(leaf: Leaf, value: Optional[float]) -> bool:
    if leaf.threshold is None or value is None:
        return False
    if leaf.direction == LOWER_BETTER:
        return value > leaf.threshold
    return value < leaf.threshold


def rank(
    tree: WeightedTree,
    candidates: Sequence[str],
    qos_source: QoSSource,
    scorer: str = MINMAX,
    apply_thresholds: bool = True,
) -> Ranking:
    """Score and order candidates, best first (ties by ws_id).

    ``qos_source(ws_id)`` returns ``(predicted, assured)``; each leaf reads
    the predicted value and falls back to the assured one. Leaves with a
    threshold act as hard filters unless that would drop every candidate.
    """
    if not candidates:
        raise NoCandidates("no candidate services")
    if scorer not in SCORERS:
        raise ValueError(f"unknown scorer {scorer!r}")
    leaves = tree.leaves()

    values: dict[str, dict[str, Optional[float]]] = {}
    fallback: dict[str, bool] = {}
    for ws_id in candidates:
        predicted, assured = qos_source(ws_id)
        row = {}
        used_assured = False
        for leaf in leaves:
            v = predicted.get(leaf.property) if predicted is not None else None
            if v is None and assured is not None:
                v = assured.get(leaf.property)
                used_assured = used_assured or (v is not None and leaf.property in DIRECTIONS)
            row[leaf.property] = v
        values[ws_id] = row
        fallback[ws_id] = used_assured

    warnings = []
    pool = list(candidates)
    if apply_thresholds:
        passing = [c for c in pool if not any(_violates(l, values[c][l.property]) for l in leaves)]
        if passing:
            pool = passing
        else:
            warnings.append("every candidate violates a quality constraint; constraints not applied")

    score_fn = leaf_scores if scorer == MINMAX else leaf_scores_step
    per_leaf: dict[str, dict[str, float]] = {c: {} for c in pool}
    for leaf in leaves:
        for ws_id, s in score_fn([(c, values[c][leaf.property]) for c in pool], leaf.direction):
            per_leaf[ws_id][leaf.property] = s

    scored = [
        ScoredService(c, per_leaf[c], _evaluate(tree.root, per_leaf[c]), fallback[c]) for c in pool
    ]
    scored.sort(key=lambda s: (-s.total, s.ws_id))
    flat = isinstance(tree.root, AndNode) and all(isinstance(c, Leaf) for c in tree.root.children)
    return Ranking(scored, leaves, warnings, scorer, tree.root.weights if flat else None)
