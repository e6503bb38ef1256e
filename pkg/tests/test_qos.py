import pytest

from qosreg.qos import (
    HIGHER_BETTER,
    LOWER_BETTER,
    QoSVector,
    canonical_property,
    direction_of,
    match_reference_name,
    normalize_property,
    parse_quantity,
)


@pytest.mark.parametrize(
    "text, value, unit, cmp",
    [
        ("99.9%", 99.9, "%", ""),
        (">10Mbps", 10.0, "Mbps", ">"),
        ("<= 250ms", 250.0, "ms", "<="),
        ("0.01", 0.01, "", ""),
        (">=3s", 3.0, "s", ">="),
        ("1e3bps", 1000.0, "bps", ""),
    ],
)
def test_parse_quantity(text, value, unit, cmp):
    q = parse_quantity(text)
    assert (q.value, q.unit, q.comparator) == (value, unit, cmp)


@pytest.mark.parametrize("text", ["fast", "10 Gbps", "%", ">>1", "", "nan", "1%%"])
def test_parse_quantity_rejects(text):
    with pytest.raises(ValueError):
        parse_quantity(text)


def test_normalize_property():
    assert normalize_property("  Response   Time ") == "response time"
    assert normalize_property("Response time") == normalize_property("Response Time")


def test_canonical_and_directions():
    assert canonical_property("Response time") == "response_time"
    assert canonical_property("response_time") == "response_time"
    assert canonical_property("price") is None
    assert direction_of("latency") == LOWER_BETTER
    assert direction_of("Availability") == HIGHER_BETTER
    assert direction_of("price") == LOWER_BETTER
    assert direction_of("color") is None


def test_reference_contains_match():
    assert match_reference_name("Average_Throughput") == "throughput"
    assert match_reference_name("AVERAGE_RELIABILITY") == "reliability"
    assert match_reference_name("Response_Time_ms") == "response_time"
    assert match_reference_name("price") is None


class TestQoSVector:
    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            QoSVector(availability=1.2)
        with pytest.raises(ValueError):
            QoSVector(latency=-1.0)

    def test_dict_round_trip_with_extras(self):
        q = QoSVector(response_time=12.5, reliability=0.9, extras={"price": 0.02})
        assert QoSVector.from_dict(q.to_dict()) == q
        assert q.get("Response Time") == 12.5
        assert q.get("price") == 0.02
        assert q.get("latency") is None
        assert len(q) == 3
