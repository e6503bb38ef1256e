"""Hypothesis strategies for the three XML message types."""

from hypothesis import strategies as st

from qosreg.wsxml import DiscoveryQuery, KeyedReference, QualityReq, RequestMessage, TModelDocument

# XML 1.0-safe text without surrounding whitespace
_chars = st.characters(blacklist_categories=("Cc", "Cs", "Co", "Cn"), max_codepoint=0xFFFD)
text = st.text(_chars, min_size=1, max_size=30).map(str.strip).filter(bool)
attr_text = st.text(_chars, max_size=30)
properties = st.sampled_from(
    ["response time", "availability", "throughput", "reliability", "latency", "price"]
)


@st.composite
def requests(draw):
    props = draw(st.lists(properties, unique=True, max_size=6))
    reqs = tuple(
        QualityReq(
            p,
            draw(st.floats(min_value=0, max_value=1e12, allow_nan=False, allow_infinity=False)),
            draw(st.integers(1, 5)),
        )
        for p in props
    )
    return RequestMessage(draw(text), reqs, draw(st.integers(1, 10_000)))


@st.composite
def tmodels(draw):
    names = draw(st.lists(text, unique=True, max_size=6))
    refs = tuple(KeyedReference(draw(attr_text), n, draw(attr_text)) for n in names)
    return TModelDocument(
        draw(text), draw(st.one_of(st.just(""), text)), draw(text), draw(st.one_of(st.just(""), text)), refs
    )


queries = st.builds(DiscoveryQuery, attr_text, attr_text, st.integers(1, 10**6))
