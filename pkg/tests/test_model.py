import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from nbrwcut import CommunitySpec, DegreeLaw, PairedGraph, SpecError, generate_graph, validate_spec
from nbrwcut.model import (
    CRITICAL,
    CUTOFF,
    NO_CUTOFF,
    RegimeThresholds,
    half_edge_layout,
    require_valid,
    sample_degree_sequence,
)

from conftest import random_spec


def test_layout_is_contiguous_per_vertex(small_spec):
    degrees, offsets, owner = half_edge_layout(small_spec)
    assert degrees.tolist() == [3, 3, 4, 2, 4, 3, 4, 4, 3, 2]
    assert offsets[-1] == small_spec.N == 32
    for v, d in enumerate(degrees):
        assert np.all(owner[offsets[v]:offsets[v] + d] == v)
    with pytest.raises(ValueError):
        owner[0] = 3


def test_community_and_deg_recoverable(small_spec):
    g = generate_graph(small_spec, 0)
    assert np.all(g.community[:small_spec.N0] == 0)
    assert np.all(g.community[small_spec.N0:] == 1)
    assert np.all(g.deg == g.vertex_degrees[g.owner] - 1)
    assert g.deg.min() >= 1


def test_generated_pairing_invariants(small_spec):
    g = generate_graph(small_spec, 7)
    idx = np.arange(g.N)
    assert np.all(g.eta[g.eta] == idx)
    assert np.all(g.eta != idx)
    assert g.outgoing[:g.spec.N0].sum() == g.spec.p == g.outgoing[g.spec.N0:].sum()
    cross = g.community != g.community[g.eta]
    assert np.array_equal(cross, g.outgoing)
    assert g.type_of(int(np.flatnonzero(g.outgoing)[0])) == "outgoing"


def test_generation_is_deterministic(small_spec):
    a, b = generate_graph(small_spec, 99), generate_graph(small_spec, 99)
    assert np.array_equal(a.eta, b.eta)
    others = {tuple(generate_graph(small_spec, s).eta) for s in range(20)}
    assert len(others) > 10


def _all_pairings(spec):
    """Brute-force list of every admissible pairing of a tiny spec."""
    N, N0 = spec.N, spec.N0

    def matchings(items):
        if not items:
            yield []
            return
        a = items[0]
        for k in range(1, len(items)):
            for rest in matchings(items[1:k] + items[k + 1:]):
                yield [(a, items[k])] + rest

    out = set()
    for m in matchings(list(range(N))):
        cross = sum((a < N0) != (b < N0) for a, b in m)
        if cross == spec.p:
            eta = [0] * N
            for a, b in m:
                eta[a], eta[b] = b, a
            out.add(tuple(eta))
    return out


def test_pairing_is_uniform_over_admissible_matchings():
    spec = CommunitySpec([2, 2], [2, 2], 2)
    universe = _all_pairings(spec)
    # 6 outgoing pairs per side, one internal matching each, 2 crossing bijections
    assert len(universe) == 6 * 6 * 2
    counts = Counter(tuple(generate_graph(spec, s).eta.tolist()) for s in range(14_400))
    assert set(counts) <= universe
    obs = np.array([counts.get(e, 0) for e in sorted(universe)])
    assert stats.chisquare(obs).pvalue > 1e-3


def test_validate_reports_without_raising():
    r = validate_spec(CommunitySpec([3, 3, 1], [2, 3], 3))
    assert not r.model_valid
    text = " ".join(r.problems)
    assert "odd" in text and "degree" in text
    assert not validate_spec(CommunitySpec([3, 3], [3, 3], 8)).model_valid
    with pytest.raises(SpecError):
        require_valid(CommunitySpec([3, 3], [3, 3], 8))


def test_theorem_regime_flag():
    assert not validate_spec(CommunitySpec([2, 2, 2], [3, 3], 2)).theorem_regime
    assert validate_spec(CommunitySpec([3] * 10, [4] * 10, 2)).theorem_regime
    # alpha = 1 + 1: model-valid but outside the theorem's regime
    r = validate_spec(CommunitySpec([3, 3], [3, 3], 6))
    assert r.model_valid and not r.theorem_regime


def test_regime_classification():
    th = RegimeThresholds()
    assert th.classify(10.0) == CUTOFF
    assert th.classify(0.1) == NO_CUTOFF
    assert th.classify(1.0) == CRITICAL
    assert RegimeThresholds(cutoff=1.0).classify(1.0) == CUTOFF
    r = validate_spec(CommunitySpec([3] * 1000, [3] * 1000, 2))
    assert r.regime_hint == NO_CUTOFF
    assert r.c == pytest.approx((2 / 3000 + 2 / 3000) * np.log(6000))


def test_spec_hash_stable():
    a = CommunitySpec([3, 3], [4, 4], 2)
    assert a.spec_hash() == CommunitySpec((3, 3), (4, 4), 2).spec_hash()
    assert a.spec_hash() != CommunitySpec([3, 3], [4, 4], 4).spec_hash()
    assert len(a.spec_hash()) == 16


def test_from_pairing_rejects_bad_input(small_spec):
    g = generate_graph(small_spec, 3)
    assert np.array_equal(PairedGraph.from_pairing(small_spec, g.eta).outgoing, g.outgoing)
    eta = g.eta.copy()
    eta[0], eta[1] = eta[1], eta[0]
    with pytest.raises(SpecError):
        PairedGraph.from_pairing(small_spec, eta)
    with pytest.raises(SpecError):
        PairedGraph.from_pairing(small_spec, np.arange(small_spec.N))


def test_degree_law_validation():
    with pytest.raises(SpecError):
        DegreeLaw((), ())
    with pytest.raises(SpecError):
        DegreeLaw((2, 3), (0.5, 0.5))
    with pytest.raises(SpecError):
        DegreeLaw((3, 4), (0.5, 0.6))
    law = DegreeLaw.from_mapping({"4": 0.25, "3": 0.75})
    assert law.support == (3, 4)
    assert law.mean == pytest.approx(3.25)
    assert DegreeLaw.from_mapping(law.to_dict()) == law


def test_degree_sequence_parity():
    law = DegreeLaw.uniform(3, 4)
    for seed in range(20):
        d = sample_degree_sequence(law, 101, seed)
        assert d.sum() % 2 == 0 and set(d.tolist()) <= {3, 4}
    assert np.array_equal(sample_degree_sequence(law, 50, 4), sample_degree_sequence(law, 50, 4))
    with pytest.raises(SpecError, match="parity-unreachable"):
        sample_degree_sequence(DegreeLaw.uniform(3, 5), 7, 0)
    assert sample_degree_sequence(DegreeLaw.uniform(3, 5), 8, 0).sum() % 2 == 0


def test_degree_sequence_follows_law():
    law = DegreeLaw((3, 4, 5), (0.2, 0.5, 0.3))
    d = sample_degree_sequence(law, 20_000, 1)
    obs = np.array([np.sum(d == k) for k in law.support])
    assert stats.chisquare(obs, np.array(law.probs) * d.size).pvalue > 1e-3


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), gseed=st.integers(0, 2**63))
def test_random_specs_generate_valid_graphs(seed, gseed):
    spec = random_spec(np.random.default_rng(seed))
    assert validate_spec(spec).model_valid
    g = generate_graph(spec, gseed)
    assert np.all(g.eta[g.eta] == np.arange(g.N))
    assert g.outgoing[:spec.N0].sum() == spec.p
    assert np.all(g.outgoing[:spec.N0] == (g.eta[:spec.N0] >= spec.N0))


def test_multi_edges_and_loops_are_kept():
    # with one vertex per side, internal pairs must be self-loops
    spec = CommunitySpec([4], [4], 2)
    g = generate_graph(spec, 0)
    internal = np.flatnonzero(~g.outgoing)
    assert all(g.owner[x] == g.owner[g.eta[x]] for x in internal)
    assert set(itertools.chain(g.eta[g.outgoing].tolist())) == set(np.flatnonzero(g.outgoing).tolist())
