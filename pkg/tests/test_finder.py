import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rainbow_matching.finder import (
    RESTART,
    TAGS,
    AugmentState,
    AugmentTrace,
    FinderInvariantError,
    Found,
    HypothesisViolated,
    Stuck,
    TraceStep,
    find_rainbow_matching,
    order_bound,
    replay_trace,
)
from rainbow_matching.generators import (
    double_k4,
    properly_coloured_k4,
    random_with_min_colour_degree,
)
from rainbow_matching.graph import (
    EdgeColouredGraph,
    RainbowMatching,
    colour_degree,
    is_rainbow_matching,
    min_colour_degree,
)
from rainbow_matching.oracle import max_rainbow_matching
from strategies import graphs


def state(n, edges, k, m, mprime=()):
    return AugmentState(EdgeColouredGraph(n, edges), k, m, mprime, debug=True)


def colours_of(matching):
    return sorted(c for *_, c in matching)


def quad_graph(k, seed):
    """Graph on 4k-4 vertices built from k-1 planted quadruples {x, y, z, w}.

    Inside quadruple i the edges x y, z w, x w, y z have colour i and x z,
    y w have colour k, the only colour outside [k-1].  Random edges between
    quadruples then give every vertex all the remaining colours of [k-1].
    Fresh colours never leave a quadruple, which is what drives the finder
    into its last phase.
    """
    rng = random.Random(seed)
    n = 4 * k - 4
    perm = list(range(n))
    rng.shuffle(perm)
    col = {}
    quad_of = {}
    for i in range(1, k):
        x, y, z, w = perm[4 * i - 4 : 4 * i]
        quad_of.update(dict.fromkeys((x, y, z, w), i))
        for a, b in ((x, y), (z, w), (x, w), (y, z)):
            col[frozenset((a, b))] = i
        col[frozenset((x, z))] = col[frozenset((y, w))] = k
    for v in range(n):
        have = {c for e, c in col.items() if v in e}
        for j in range(1, k):
            if j != quad_of[v] and j not in have:
                free = [u for u in range(n) if quad_of[u] != quad_of[v] and frozenset((u, v)) not in col]
                col[frozenset((rng.choice(free), v))] = j
    return EdgeColouredGraph(n, [(*sorted(e), c) for e, c in col.items()])


# -- top level -----------------------------------------------------------------


def test_order_bound():
    assert [order_bound(k) for k in range(1, 7)] == [1, 5, 9, 12, 16, 20]


def test_k1_any_edge():
    g = EdgeColouredGraph(5, [(3, 4, 9), (1, 2, 2)])
    outcome, trace = find_rainbow_matching(g, 1)
    assert isinstance(outcome, Found) and outcome.size == 1
    assert trace.tags() == ["induction-base"]


def test_k0_is_empty():
    outcome, _ = find_rainbow_matching(EdgeColouredGraph(0), 0)
    assert outcome == Found(RainbowMatching())


def test_no_edges_reports_colour_degree():
    outcome, trace = find_rainbow_matching(EdgeColouredGraph(3), 1)
    assert isinstance(outcome, HypothesisViolated)
    assert outcome.reason == "colour-degree" and outcome.holds_for(EdgeColouredGraph(3))
    assert replay_trace(EdgeColouredGraph(3), 1, trace) == outcome


def test_k4_k2_reports_order():
    g = properly_coloured_k4()
    outcome, trace = find_rainbow_matching(g, 2, debug=True)
    assert outcome == HypothesisViolated("order", 2, 4)
    assert outcome.required_n == 5 and outcome.holds_for(g)
    assert trace.tags()[-1] == "hypothesis-violated"
    assert replay_trace(g, 2, trace) == outcome


def test_double_k4_k3_reports_order():
    g = double_k4()
    outcome, _ = find_rainbow_matching(g, 3, debug=True)
    assert isinstance(outcome, HypothesisViolated) and outcome.reason == "order"
    assert max_rainbow_matching(g).size == 2


def test_low_colour_degree_witness():
    # star plus a disjoint edge: no rainbow 2-matching touches the centre twice
    g = EdgeColouredGraph(6, [(0, 1, 1), (0, 2, 2), (0, 3, 3), (4, 5, 1)])
    outcome, _ = find_rainbow_matching(g, 3)
    assert isinstance(outcome, HypothesisViolated)
    assert outcome.reason == "colour-degree"
    assert colour_degree(g, outcome.vertex) < 3 == outcome.k


def test_random_k4_n12_seed1():
    g = random_with_min_colour_degree(12, 4, 4, 0.3, 1)
    outcome, trace = find_rainbow_matching(g, 4, debug=True)
    assert isinstance(outcome, Found) and outcome.size == 4
    assert is_rainbow_matching(g, outcome.matching)
    assert max_rainbow_matching(g, cutoff=4).size >= 4
    assert replay_trace(g, 4, trace) == outcome


def test_finds_opportunistically_below_the_order_bound():
    g = EdgeColouredGraph(4, [(0, 1, 1), (2, 3, 2)])
    outcome, _ = find_rainbow_matching(g, 2)
    assert isinstance(outcome, Found)


# -- direct extension and M' growth ----------------------------------------------


def test_direct_extension_fresh_edge_in_w():
    st_ = state(6, [(0, 1, 1), (2, 3, 2), (4, 5, 7)], 3, [(0, 1), (2, 3)])
    found = st_.try_direct_extension()
    assert colours_of(found) == [1, 2, 7]
    assert st_.trace.steps[-1].tag == "direct-extension"


def test_direct_extension_none():
    st_ = state(6, [(0, 1, 1), (2, 3, 2), (4, 5, 1)], 3, [(0, 1), (2, 3)])
    assert st_.try_direct_extension() is None


def test_direct_extension_ignores_edges_meeting_m():
    st_ = state(6, [(0, 1, 1), (2, 3, 2), (0, 5, 7), (1, 4, 8)], 3, [(0, 1), (2, 3)])
    assert st_.try_direct_extension() is None


def test_grow_mprime_absorbs_and_relabels():
    # W edge 4-5 has colour 2, not yet in M': it becomes z_1 w_1
    st_ = state(6, [(0, 1, 1), (2, 3, 2), (4, 5, 2)], 3, [(0, 1), (2, 3)])
    assert st_.grow_mprime() is None
    assert st_.s == 1
    assert (st_.z[1], st_.w[1]) == (4, 5)
    assert (st_.x[1], st_.y[1]) == (2, 3)  # pair of colour 2 moved to index 1
    assert st_.g.colour(2, 3) == 1 == st_.g.colour(4, 5)
    assert st_.trace.restarts == {3: 1}
    st_.check()


def test_grow_mprime_fresh_edge_found():
    st_ = state(6, [(0, 1, 1), (2, 3, 2), (4, 5, 9)], 3, [(0, 1), (2, 3)])
    assert colours_of(st_.grow_mprime()) == [1, 2, 9]


def test_grow_mprime_fixed_point():
    st_ = state(
        8, [(0, 1, 1), (2, 3, 2), (4, 5, 1), (6, 7, 1)], 3, [(0, 1), (2, 3)], [(4, 5)]
    )
    assert st_.grow_mprime() is None and st_.s == 1


# -- claim (b), M0 swap, claim (d) -----------------------------------------------


def chain_state(extra_edges=(), mprime=()):
    """k = 3, M = {0-1 (1), 2-3 (2)}, z_2 = 4 via y_2 z_2 = 3-4 in colour 5."""
    edges = [(0, 1, 1), (2, 3, 2), (3, 4, 5)] + list(extra_edges)
    n = 1 + max(max(u, v) for u, v, _ in edges)
    st_ = state(n, edges, 3, [(0, 1), (2, 3)], mprime)
    st_._attach(2, 4, 3)
    return st_


def test_claim_b_base_cases():
    st_ = chain_state()
    assert st_.claim_b_matching(3, 1) == []
    assert st_.claim_b_matching(2, 1) == [(2, 3, 2)]
    assert st_.claim_b_matching(2, 2) == [(3, 4, 5)]
    assert st_.claim_b_matching(1, 5) == [(0, 1, 1), (2, 3, 2)]


def test_claim_b_avoids_colours():
    st_ = chain_state()
    for i in (1, 2, 3):
        for j in range(2 if i == 1 else 1, 7):  # z_1 is not attached
            mb = st_.claim_b_matching(i, j)
            cols = [c for *_, c in mb]
            assert len(mb) == 3 - i
            assert j not in cols and all(c >= i for c in cols)
            assert is_rainbow_matching(st_.g, mb)


def test_claim_b_needs_the_chain():
    st_ = state(6, [(0, 1, 1), (2, 3, 2)], 3, [(0, 1), (2, 3)])
    with pytest.raises(FinderInvariantError):
        st_.claim_b_matching(2, 2)


def test_m0_swap_fresh_colour_found():
    st_ = chain_state([(2, 5, 7)])
    found = st_.m0_swap(2, 5)
    assert sorted(found) == [(0, 1, 1), (2, 5, 7), (3, 4, 5)]
    assert st_.trace.steps[-1].tag == "m0-swap"


def test_m0_swap_colour_missing_from_m0_found():
    # c(x_2 w) = 2 is not a colour of M0 = {0-1 (1), 3-4 (5)}
    st_ = chain_state([(2, 5, 2)])
    found = st_.m0_swap(2, 5)
    assert sorted(found) == [(0, 1, 1), (2, 5, 2), (3, 4, 5)]


def test_m0_swap_absorbs_and_increases_s():
    st_ = chain_state([(2, 5, 1)])
    assert st_.m0_swap(2, 5) is RESTART
    assert st_.s == 1
    m = sorted((min(u, v), max(u, v)) for u, v, _ in st_.m_pairs())
    assert m == [(0, 1), (3, 4)]
    assert (st_.z[1], st_.w[1]) == (2, 5)
    st_.check()
    step = st_.trace.steps[-1]
    assert step.tag == "m0-swap" and step.absorbed == (2, 5, 1)


def test_m0_swap_colour_in_s_does_nothing():
    st_ = chain_state([(6, 7, 1), (2, 5, 1)], mprime=[(6, 7)])
    assert st_.s == 1
    assert st_.m0_swap(2, 5) is None


def test_build_zchain_dispatches_m0_swap():
    # x_2 5 has colour 5 > 1, shared with y_2 z_2, so it joins M' next to M0
    g = EdgeColouredGraph(6, [(0, 1, 1), (2, 3, 2), (3, 4, 5), (2, 5, 5)])
    st_ = AugmentState(g, 3, [(0, 1), (2, 3)], debug=True)
    assert st_.build_zchain() is RESTART
    assert st_.s == 1
    assert st_.trace.tags() == ["zchain-attach", "m0-swap"]


def test_claim_d_with_u_in_mprime():
    st_ = state(7, [(0, 1, 1), (2, 3, 2), (4, 5, 1), (4, 6, 7)], 3, [(0, 1), (2, 3)], [(4, 5)])
    found = st_.claim_d_construction(4, 6, st_.s + 1)
    assert sorted(found) == [(0, 1, 1), (2, 3, 2), (4, 6, 7)]
    assert st_.trace.steps[-1].tag == "claim-d-construction"


def test_claim_d_with_u_in_m_uses_the_chain():
    st_ = state(
        8,
        [(0, 1, 1), (2, 3, 2), (4, 5, 1), (3, 7, 5), (0, 6, 2)],
        3,
        [(0, 1), (2, 3)],
        [(4, 5)],
    )
    st_._attach(2, 7, 3)
    found = st_.claim_d_construction(0, 6, 2)
    assert sorted(found) == [(0, 6, 2), (3, 7, 5), (4, 5, 1)]


def test_claim_d_precondition():
    st_ = state(7, [(0, 1, 1), (2, 3, 2), (4, 5, 1), (4, 6, 1)], 3, [(0, 1), (2, 3)], [(4, 5)])
    with pytest.raises(FinderInvariantError):
        st_.claim_d_construction(4, 6, 2)  # colour 1 lies in [1]


def test_exploit_finds_claim_d_edge():
    g = EdgeColouredGraph(8, [(0, 1, 1), (2, 3, 2), (4, 5, 1), (3, 6, 5), (4, 7, 5)])
    st_ = AugmentState(g, 3, [(0, 1), (2, 3)], [(4, 5)], debug=True)
    assert st_.build_zchain() is None
    assert st_.chain == {2: 6}
    found = st_.exploit_low_colour_degree()
    assert sorted(found) == [(0, 1, 1), (2, 3, 2), (4, 7, 5)]


def test_exploit_reports_deficient_vertex():
    g = EdgeColouredGraph(8, [(0, 1, 1), (2, 3, 2), (4, 5, 1), (3, 6, 5), (7, 5, 1)])
    st_ = AugmentState(g, 3, [(0, 1), (2, 3)], [(4, 5)], debug=True)
    assert st_.build_zchain() is None
    res = st_.exploit_low_colour_degree()
    assert res == Stuck(7, res.where)


# -- the s = k - 1 end game ------------------------------------------------------


def full_state(k, edges, n):
    m = [(4 * i, 4 * i + 1) for i in range(k - 1)]
    mp = [(4 * i + 2, 4 * i + 3) for i in range(k - 1)]
    return state(n, edges, k, m, mp)


def quad_edges(k, fresh=None, skip=()):
    """x_i y_i = (4i-4, 4i-3), z_i w_i = (4i-2, 4i-1), fresh x z and y w edges."""
    fresh = fresh or k
    out = []
    for i in range(1, k):
        x, y, z, w = range(4 * i - 4, 4 * i)
        out += [(x, y, i), (z, w, i)]
        if i not in skip:
            out += [(x, z, fresh), (y, w, fresh)]
    return out


def test_spare_vertex_outside():
    edges = [(0, 1, 1), (4, 5, 2), (2, 3, 1), (6, 7, 2), (8, 9, 5)]
    st_ = full_state(3, edges, 10)
    found = st_.finalize_full_s()
    assert sorted(found) == [(0, 1, 1), (4, 5, 2), (8, 9, 5)]
    assert st_.trace.steps[-1].tag == "spare-vertex-patch"


def test_spare_vertex_meets_m():
    edges = [(0, 1, 1), (4, 5, 2), (2, 3, 1), (6, 7, 2), (0, 8, 5)]
    st_ = full_state(3, edges, 9)
    found = st_.finalize_full_s()
    assert sorted(found) == [(0, 8, 5), (2, 3, 1), (4, 5, 2)]


def test_quadruple_saturation_records_structure():
    st_ = full_state(4, quad_edges(4), 12)
    res = st_.quadruple_saturation()
    assert res == {1: (4, 4), 2: (4, 4), 3: (4, 4)}
    assert st_.trace.steps[-1].tag == "quadruple-saturation"


def test_quadruple_saturation_swaps_z_and_w():
    edges = quad_edges(4, skip=(1,)) + [(0, 3, 4), (1, 2, 4)]
    st_ = full_state(4, edges, 12)
    assert isinstance(st_.quadruple_saturation(), dict)
    assert (st_.z[1], st_.w[1]) == (3, 2)
    st_.check()


def test_quadruple_saturation_cross_edge_patch():
    edges = quad_edges(4) + [(0, 6, 5)]  # x_1 z_2 fresh
    st_ = full_state(4, edges, 12)
    found = st_.quadruple_saturation()
    assert isinstance(found, RainbowMatching)
    assert sorted(found) == [(0, 6, 5), (2, 3, 1), (4, 5, 2), (8, 9, 3)]


def test_quadruple_saturation_stuck_at_vertex_without_fresh_edge():
    edges = quad_edges(4, skip=(3,)) + [(9, 11, 4)]  # x_3 = 8 sees only old colours
    st_ = full_state(4, edges, 12)
    res = st_.quadruple_saturation()
    assert isinstance(res, Stuck) and res.vertex == 8


@pytest.mark.parametrize(
    "pivot, expected",
    [
        # v = z_2: the displayed case
        (6, [(0, 6, 2), (2, 3, 1), (5, 7, 4), (8, 9, 3)]),
        # v = w_2: use x_2 z_2 instead
        (7, [(0, 7, 2), (2, 3, 1), (4, 6, 4), (8, 9, 3)]),
        # v = y_2
        (5, [(0, 5, 2), (2, 3, 1), (4, 6, 4), (8, 9, 3)]),
    ],
)
def test_final_patch_pivots(pivot, expected):
    st_ = full_state(4, quad_edges(4) + [(0, pivot, 2)], 12)
    structure = st_.quadruple_saturation()
    found = st_.final_patch(structure)
    assert sorted(found) == expected
    assert st_.trace.steps[-1].tag == "final-patch"


def test_final_patch_pivot_in_third_quadruple():
    st_ = full_state(4, quad_edges(4) + [(0, 9, 2)], 12)  # v = y_3, colour 2
    found = st_.final_patch(st_.quadruple_saturation())
    assert sorted(found) == [(0, 9, 2), (2, 3, 1), (4, 6, 4), (10, 11, 3)]


def test_finalize_full_s_runs_the_end_game():
    st_ = full_state(4, quad_edges(4) + [(0, 6, 2)], 12)
    found = st_.finalize_full_s()
    assert len(found) == 4
    assert st_.trace.tags()[-2:] == ["quadruple-saturation", "final-patch"]


@pytest.mark.parametrize("seed", range(20))
def test_quadruple_family(seed):
    k = 4 + seed % 3
    g = quad_graph(k, seed)
    assert min_colour_degree(g) >= k and g.n == order_bound(k)
    outcome, trace = find_rainbow_matching(g, k, debug=True)
    assert isinstance(outcome, Found) and outcome.size == k
    assert is_rainbow_matching(g, outcome.matching)
    assert replay_trace(g, k, trace) == outcome


def test_quadruple_family_reaches_the_end_game():
    tags = set()
    for seed in range(300):
        g = quad_graph(4, seed)
        outcome, trace = find_rainbow_matching(g, 4)
        assert isinstance(outcome, Found)
        tags.update(trace.tags())
    assert {"quadruple-saturation", "final-patch", "m0-swap", "claim-d-construction"} <= tags


# -- state invariants ------------------------------------------------------------


def test_state_requires_matching_of_size_k_minus_1():
    with pytest.raises(ValueError):
        state(4, [(0, 1, 1)], 3, [(0, 1)])


def test_check_detects_broken_chain():
    st_ = chain_state()
    st_.chain[2] = 0  # a vertex of M
    with pytest.raises(FinderInvariantError):
        st_.check()


def test_mprime_colour_must_come_from_m():
    with pytest.raises(FinderInvariantError):
        state(6, [(0, 1, 1), (2, 3, 2), (4, 5, 3)], 3, [(0, 1), (2, 3)], [(4, 5)])


# -- traces ----------------------------------------------------------------------


def test_trace_rejects_unknown_tags():
    with pytest.raises(ValueError):
        AugmentTrace().add(TraceStep("magic", 1, 0))
    assert "final-patch" in TAGS


def test_trace_json_round_trip_and_replay():
    g = quad_graph(4, 3)
    outcome, trace = find_rainbow_matching(g, 4)
    again = AugmentTrace.loads(trace.dumps())
    assert again.dumps() == trace.dumps()
    assert again.to_json() == trace.to_json()
    assert replay_trace(g, 4, again) == outcome


def test_replay_rejects_tampered_trace():
    g = EdgeColouredGraph(6, [(0, 1, 1), (2, 3, 2), (3, 4, 5), (2, 5, 1), (4, 5, 3), (0, 5, 7)])
    outcome, trace = find_rainbow_matching(g, 3)
    assert replay_trace(g, 3, trace) == outcome
    bad = AugmentTrace.from_json(trace.to_json())
    last = bad.steps[-1]
    last.matching = tuple((u, v, c + 100) for u, v, c in last.matching)
    with pytest.raises(ValueError):
        replay_trace(g, 3, bad)


def test_replay_rejects_false_witness():
    g = properly_coloured_k4()
    _, trace = find_rainbow_matching(g, 2)
    bigger = EdgeColouredGraph(9, [(u, v, c) for u, v, c in g.edges] + [(5, 6, 1)])
    with pytest.raises(ValueError):
        replay_trace(bigger, 2, trace)


# -- properties ------------------------------------------------------------------


def check_outcome(g, k, outcome, trace):
    if isinstance(outcome, Found):
        assert outcome.size == k and is_rainbow_matching(g, outcome.matching)
    else:
        assert outcome.holds_for(g)
        assert not (min_colour_degree(g) >= k and g.n >= order_bound(k))
    assert replay_trace(g, k, trace) == outcome
    for level, r in trace.restarts.items():
        assert r <= level - 1


@given(graphs(max_n=9, max_palette=6), st.integers(1, 4))
def test_any_graph_sound_and_replayable(g, k):
    outcome, trace = find_rainbow_matching(g, k, debug=True)
    check_outcome(g, k, outcome, trace)
    if isinstance(outcome, Found):
        assert max_rainbow_matching(g, cutoff=k).size >= k


@given(
    st.integers(1, 4).flatmap(
        lambda k: st.tuples(
            st.just(k),
            st.integers(max(order_bound(k), k + 1), order_bound(k) + 3),
            st.integers(0, k + 1),
            st.floats(0.0, 0.6),
            st.integers(0, 2**32 - 1),
        )
    )
)
def test_found_whenever_hypothesis_holds(params):
    k, n, extra, p, seed = params
    g = random_with_min_colour_degree(n, k, k + extra, p, seed)
    outcome, trace = find_rainbow_matching(g, k, debug=True)
    assert isinstance(outcome, Found)
    check_outcome(g, k, outcome, trace)


@given(graphs(max_n=8), st.integers(1, 3), st.randoms(use_true_random=False))
def test_outcome_kind_invariant_under_colour_renaming(g, k, rnd):
    palette = sorted(g.palette())
    names = rnd.sample(range(1, 100), len(palette))
    h = EdgeColouredGraph(g.n, [(u, v, names[palette.index(c)]) for u, v, c in g.edges])
    a, _ = find_rainbow_matching(g, k)
    b, _ = find_rainbow_matching(h, k)
    if min_colour_degree(g) >= k and g.n >= order_bound(k):
        assert isinstance(a, Found) and isinstance(b, Found)
