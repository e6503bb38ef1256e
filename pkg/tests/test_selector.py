import math
import random

import pytest

from qosreg.errors import EmptyConstraints, NoCandidates, UnknownProperty
from qosreg.qos import QoSVector
from qosreg.selector import (
    AndNode,
    Leaf,
    OrNode,
    WeightedTree,
    build_tree,
    leaf_scores,
    leaf_scores_step,
    rank,
)
from qosreg.wsxml import QualityReq, RequestMessage, parse_request


def source(table, assured=None):
    assured = assured or {}
    return lambda ws_id: (table.get(ws_id), assured.get(ws_id))


class TestBuildTree:
    def test_sample_request(self, sample_request):
        tree = build_tree(parse_request(sample_request))
        assert tree.edge_weights == pytest.approx((0.4, 0.6), abs=1e-12)
        assert [(l.property, l.direction) for l in tree.leaves()] == [("price", "<"), ("response_time", "<")]

    def test_single(self):
        tree = build_tree(RequestMessage("x", (QualityReq("throughput", 1, 5),)))
        assert tree.edge_weights == (1.0,)
        assert tree.leaves()[0].direction == ">"

    def test_equal_weights(self):
        props = ["response time", "availability", "throughput", "reliability", "latency"]
        tree = build_tree(RequestMessage("x", tuple(QualityReq(p, 1, 1) for p in props)))
        assert tree.edge_weights == (0.2,) * 5
        assert math.fsum(tree.edge_weights) == 1.0

    def test_errors(self):
        with pytest.raises(EmptyConstraints):
            build_tree(RequestMessage("x"))
        with pytest.raises(UnknownProperty):
            build_tree(RequestMessage("x", (QualityReq("colour", 1, 1),)))


class TestLeafScores:
    def test_lower_better(self):
        assert leaf_scores([("a", 2), ("b", 4), ("c", 6)], "<") == [("a", 1.0), ("b", 0.5), ("c", 0.0)]

    def test_higher_better(self):
        assert leaf_scores([("a", 2), ("b", 4), ("c", 6)], ">") == [("a", 0.0), ("b", 0.5), ("c", 1.0)]

    def test_equal_and_missing(self):
        assert leaf_scores([("a", 3), ("b", 3), ("c", None)], "<") == [("a", 1.0), ("b", 1.0), ("c", 0.0)]

    def test_step_mode_endpoints(self):
        scores = dict(leaf_scores_step([("a", 2), ("b", 4), ("c", 6)], "<"))
        # descending order is c, b, a: first scores 1, last 0, middle 2*(2-4)/10
        assert scores == {"c": 1.0, "a": 0.0, "b": pytest.approx(-0.4)}


class TestRank:
    def test_dominance(self):
        tree = build_tree(RequestMessage("x", (QualityReq("latency", 100, 2), QualityReq("availability", 0, 3))))
        r = rank(tree, ["a", "b"], source({"a": QoSVector(latency=1, availability=0.9),
                                           "b": QoSVector(latency=5, availability=0.5)}))
        assert r.ids() == ["a", "b"]
        assert r.services[0].total == 1.0 and r.services[1].total == 0.0

    def test_single_candidate(self):
        tree = build_tree(RequestMessage("x", (QualityReq("latency", 100, 2),)))
        assert rank(tree, ["a"], source({"a": QoSVector(latency=3)})).services[0].total == 1.0

    def test_brute_force_three(self):
        tree = build_tree(RequestMessage("x", (QualityReq("price", 100, 2), QualityReq("response time", 100, 3))))
        table = {
            "a": QoSVector(response_time=10, extras={"price": 0.5}),
            "b": QoSVector(response_time=30, extras={"price": 0.1}),
            "c": QoSVector(response_time=20, extras={"price": 0.3}),
        }
        r = rank(tree, list(table), source(table))
        expected = {
            "a": 0.4 * (0.5 - 0.5) / 0.4 + 0.6 * (30 - 10) / 20,
            "b": 0.4 * (0.5 - 0.1) / 0.4 + 0.6 * 0.0,
            "c": 0.4 * (0.5 - 0.3) / 0.4 + 0.6 * (30 - 20) / 20,
        }
        for s in r.services:
            assert abs(s.total - expected[s.ws_id]) <= 1e-12
        assert r.ids() == ["a", "c", "b"]

    def test_ties_by_id(self):
        tree = build_tree(RequestMessage("x", (QualityReq("latency", 100, 1),)))
        r = rank(tree, ["b", "a"], source({"a": QoSVector(latency=1), "b": QoSVector(latency=1)}))
        assert r.ids() == ["a", "b"]

    def test_thresholds_filter(self):
        tree = build_tree(RequestMessage("x", (QualityReq("latency", 4, 1),)))
        r = rank(tree, ["a", "b"], source({"a": QoSVector(latency=3), "b": QoSVector(latency=5)}))
        assert r.ids() == ["a"] and not r.warnings

    def test_thresholds_skipped_when_all_fail(self):
        tree = build_tree(RequestMessage("x", (QualityReq("latency", 1, 1),)))
        r = rank(tree, ["a", "b"], source({"a": QoSVector(latency=3), "b": QoSVector(latency=5)}))
        assert r.ids() == ["a", "b"] and len(r.warnings) == 1

    def test_fallback_to_assured(self):
        tree = build_tree(RequestMessage("x", (QualityReq("latency", 100, 1), QualityReq("price", 100, 1))))
        r = rank(tree, ["a", "b"], source(
            {"a": QoSVector(latency=2)},
            {"a": QoSVector(extras={"price": 1.0}), "b": QoSVector(latency=1, extras={"price": 2.0})},
        ))
        by_id = {s.ws_id: s for s in r.services}
        # price lives only in assured QoS for everyone, so it does not count as a fallback
        assert by_id["a"].fallback is False
        assert by_id["b"].fallback is True
        assert by_id["b"].leaf_scores["latency"] == 1.0

    def test_no_candidates(self):
        tree = build_tree(RequestMessage("x", (QualityReq("latency", 1, 1),)))
        with pytest.raises(NoCandidates):
            rank(tree, [], source({}))

    def test_or_node(self):
        tree = WeightedTree(OrNode((Leaf("latency", "<"), Leaf("throughput", ">"))))
        r = rank(tree, ["a", "b"], source({"a": QoSVector(latency=1, throughput=1),
                                           "b": QoSVector(latency=2, throughput=9)}))
        assert [s.total for s in r.services] == [1.0, 1.0]

    def test_nested_and(self):
        inner = AndNode((Leaf("latency", "<"), Leaf("throughput", ">")), (0.5, 0.5))
        tree = WeightedTree(AndNode((inner, Leaf("availability", ">")), (0.5, 0.5)))
        r = rank(tree, ["a", "b"], source({"a": QoSVector(latency=1, throughput=1, availability=0.5),
                                           "b": QoSVector(latency=2, throughput=9, availability=0.9)}))
        assert {s.ws_id: s.total for s in r.services} == {"a": 0.25, "b": 0.75}
        assert r.weights is None

    def test_csv(self, sample_request):
        tree = build_tree(parse_request(sample_request))
        r = rank(tree, ["a"], source({"a": QoSVector(response_time=1, extras={"price": 1})}))
        assert r.to_csv().splitlines()[0] == "rank,ws_id,total,price,response_time"

    def test_monotonicity(self):
        rng = random.Random(11)
        props = ["latency", "throughput", "availability"]
        for _ in range(100):
            tree = build_tree(RequestMessage("x", tuple(QualityReq(p, 0 if p != "latency" else 1e9,
                                                                   rng.randint(1, 5)) for p in props)))
            table = {f"s{i}": QoSVector(latency=rng.uniform(1, 100), throughput=rng.uniform(1, 100),
                                        availability=rng.random()) for i in range(rng.randint(2, 8))}
            before = rank(tree, list(table), source(table)).ids()
            target = rng.choice(list(table))
            q = table[target]
            table[target] = QoSVector(latency=q.latency * rng.uniform(0.1, 1), throughput=q.throughput,
                                      availability=q.availability)
            after = rank(tree, list(table), source(table)).ids()
            assert after.index(target) <= before.index(target)
