import functools

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from artin_relhyp.acceptance import E7, FREE2
from artin_relhyp.artin import equal_in_G, is_strongly_artin_reduced
from artin_relhyp.coned import XPath, build_ball, sample_geodesic
from artin_relhyp.dihedral import DihedralPair
from artin_relhyp.relhyp import (
    BETA_CLOSE,
    BIGON_BOUND,
    PIPELINE_CLOSE,
    DeltaRow,
    MalformedPathError,
    ScanReport,
    bigon_scan,
    build_beta,
    condense,
    decompose_blocks,
    delta_report,
    sample_pipeline_paths,
    verify_pipeline,
)
from artin_relhyp.words import EMPTY, GroupSpec, concat, parse_word

P12, P23 = DihedralPair(1, 2, 7), DihedralPair(2, 3, 7)


@functools.lru_cache(maxsize=1)
def _balls():
    return build_ball(E7, 2, 1), build_ball(E7, 3, 2)


@pytest.fixture(scope="module")
def balls():
    return _balls()


def cone_path(ball, words_and_pairs):
    """X-path hopping through cones: start at 1, then (pair, next vertex word) steps."""
    cur = ball.locate(EMPTY)
    nodes = [cur]
    for pair, w in words_and_pairs:
        nxt = ball.locate(parse_word(w))
        nodes += [ball.cone_for(cur, pair), nxt]
        cur = nxt
    return XPath(tuple(nodes), len(nodes) - 1)


def test_gamma_path_is_one_block(balls):
    small, _ = balls
    p = small.gamma_path(small.locate(EMPTY), parse_word("a1 a2"))
    bp = decompose_blocks(small, p)
    assert [b.kind for b in bp.blocks] == ["gamma"]
    assert bp.blocks[0].label == parse_word("a1 a2")


def test_cone_block_labels(balls):
    small, _ = balls
    p = cone_path(small, [(P12, "a1 a2")])
    bp = decompose_blocks(small, p)
    (blk,) = bp.blocks
    assert blk.kind == "cone" and blk.pair == P12
    assert equal_in_G(blk.label, parse_word("a1 a2"), E7) and len(blk.label) == 2


def test_malformed_paths_rejected(balls):
    small, _ = balls
    one = small.locate(EMPTY)
    cone = small.cone_for(one, P12)
    with pytest.raises(MalformedPathError):
        decompose_blocks(small, XPath((one, cone), 1))
    with pytest.raises(MalformedPathError):
        decompose_blocks(small, XPath((one, cone, one), 2))
    with pytest.raises(KeyError):
        decompose_blocks(small, XPath((one, small.locate(parse_word("a1 a2"))), 2))


def test_condense_merges_shared_boundary_generator():
    # cone(1,2) to a2, then cone(2,3) to a2 a2 a3: labels a2 | a2 a3 -> a2^2 | a3
    ball = build_ball(E7, 3, 0)
    p = cone_path(ball, [(P12, "a2"), (P23, "a2^2 a3")])
    bp = decompose_blocks(ball, p)
    beta = build_beta(bp)
    assert beta.parts == (parse_word("a2"), parse_word("a2 a3"))
    cp = condense(bp, beta)
    assert cp.parts == (parse_word("a2^2"), parse_word("a3"))
    assert cp.word == beta.word == parse_word("a2^2 a3")


def test_condense_keeps_gamma_neighbours(balls):
    small, _ = balls
    one = small.locate(EMPTY)
    a1 = small.locate(parse_word("a1"))
    target = small.locate(parse_word("a1 a2"))
    p = XPath((one, a1, small.cone_for(a1, P12), target), 3)
    cp = condense(decompose_blocks(small, p))
    assert cp.parts == (parse_word("a1"), parse_word("a2"))


def test_pipeline_on_sampled_geodesics(balls):
    small, large = balls
    reports = [verify_pipeline(small, p, metric_ball=large)
               for p in sample_pipeline_paths(small, large, 40, seed=0)]
    assert all(r.ok for r in reports), [c.name for r in reports for c in r.failures()]
    for r in reports:
        assert r.haus_alpha_gamma <= PIPELINE_CLOSE and r.haus_alpha_beta <= BETA_CLOSE
        assert is_strongly_artin_reduced(r.u, E7)
        assert r.record().startswith("pipeline ") and " ok=1 " in r.record()


def test_pipeline_single_edge(balls):
    small, large = balls
    one = small.locate(EMPTY)
    p = small.gamma_path(one, parse_word("a3"))
    rep = verify_pipeline(small, p, metric_ball=large)
    assert rep.ok and rep.u == parse_word("a3") and rep.haus_alpha_gamma == 0


def test_pipeline_scope_gate():
    spec = GroupSpec.uniform(3, 5)
    ball = build_ball(spec, 1)
    p = ball.gamma_path(0, parse_word("a1"))
    with pytest.raises(ValueError):
        verify_pipeline(ball, p)
    with pytest.warns(UserWarning):
        verify_pipeline(ball, p, allow_non_theorem_scope=True)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_pipeline_preserves_endpoints(seed):
    small, large = _balls()
    rng = np.random.default_rng(seed)
    u, v = (int(x) for x in rng.integers(0, small.n_group, size=2))
    assume(u != v)
    p = sample_geodesic(small, u, v, rng)
    rep = verify_pipeline(small, p, metric_ball=large)
    assert rep.ok
    assert equal_in_G(concat(small.words[u], rep.u), small.words[v], E7)


def test_e7_small_scan_fixtures(balls):
    # [DERIVED] frozen maxima on the (2, 1) ball, seed 0
    small, large = balls
    vertex = bigon_scan(small, large, "vertex", seed=0)
    claim = bigon_scan(small, large, "claim", seed=0, max_quadrilaterals=300)
    assert (vertex.max_delta, vertex.pairs) == (2, 666)
    assert (claim.max_delta, claim.pairs) == (4, 300)
    assert sum(vertex.histogram.values()) == vertex.pairs
    assert max(vertex.histogram) == vertex.max_delta
    assert claim.max_delta <= BIGON_BOUND


def test_scan_reproducible(balls):
    small, large = balls
    a = bigon_scan(small, large, "claim", seed=5, max_quadrilaterals=100)
    b = bigon_scan(small, large, "claim", seed=5, max_quadrilaterals=100)
    assert a.records() == b.records()
    with pytest.raises(ValueError):
        bigon_scan(small, large, "bogus")


def test_free_group_bigons_are_trivial():
    small, large = build_ball(FREE2, 3, 1), build_ball(FREE2, 4, 2)
    assert bigon_scan(small, large, "vertex").max_delta == 0


def test_delta_report():
    row = DeltaRow("E7", ScanReport("vertex", 2, pairs=10), ScanReport("claim", 4, pairs=5))
    summary = delta_report([row])
    assert summary.common == 4 and summary.ok
    assert summary.records()[-1] == "delta_summary specs=1 common=4 bound=28 ok=1"
    bad = delta_report([DeltaRow("x", ScanReport("vertex", 30), None)])
    assert not bad.ok


def test_scan_merge():
    a = ScanReport("vertex", 2, ("w", 1), pairs=3)
    a.histogram[2] = 3
    b = ScanReport("vertex", 5, ("w", 2), pairs=1)
    b.histogram[5] = 1
    m = a.merge(b)
    assert m.max_delta == 5 and m.pairs == 4 and m.witness == ("w", 2) and m.histogram[2] == 3
