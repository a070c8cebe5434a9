import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from conftest import TEST_GRAPHS
from wormising.graph import (
    Graph,
    boundary,
    complete_graph,
    grid_graph,
    path_graph,
    path_subset,
    shortest_path,
    torus_graph,
)
from wormising.measure import theorem1_bound
from wormising.oracle import (
    CapExceeded,
    enumerate_subsets,
    exact_chi,
    exact_chi_from_correlations,
    exact_two_point,
    exact_two_point_from_pi,
    mixing_report,
    spin_correlations,
    transition_matrix,
)
from wormising.worm import ChainParams, make_rng, run


def test_enumerate_k2():
    d = enumerate_subsets(complete_graph(2), 0.5)
    assert d.lambda_c0 == 1.0
    assert d.lambda_class(0, 1) == 0.5
    assert d.pi_c0 == pytest.approx(2 / 3)


def test_enumerate_k3():
    d = enumerate_subsets(complete_graph(3), 0.5)
    assert d.lambda_c0 == pytest.approx(1.125)
    for u, v in itertools.combinations(range(3), 2):
        assert d.lambda_class(u, v) == pytest.approx(0.75)
    assert d.Z == pytest.approx(7.875)
    assert len(d.states) == 8


@pytest.mark.parametrize("g", [path_graph(5), grid_graph(1, 4),
                               Graph.from_edges(5, [(0, 1), (0, 2), (0, 3), (3, 4)])])
def test_tree_has_only_empty_even_subgraph(g):
    d = enumerate_subsets(g, 0.7)
    assert d.lambda_c0 == 1.0


def test_enumerate_cap():
    with pytest.raises(CapExceeded, match="cap exceeded"):
        enumerate_subsets(torus_graph(4, 4), 0.5)


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_distribution_invariants(name, x):
    g = TEST_GRAPHS[name]()
    d = enumerate_subsets(g, x)
    assert abs(d.pi.sum() - 1) <= 1e-12
    assert d.total_weight == pytest.approx((1 + x) ** g.m, rel=1e-13)
    # every subset is in exactly one class: the classes with |W| <= 4 never exceed the total
    assert sum(d.class_weights.values()) <= d.total_weight * (1 + 1e-13)
    for W, w in d.class_weights.items():
        assert w > 0
        assert w <= d.lambda_c0 * (1 + 1e-12)
    # direct per-subset recomputation of the states and their boundaries
    for A, b in zip(d.states, d.state_boundary):
        bd = boundary(g, int(A))
        assert sum(1 << v for v in bd) == b
        assert d.weights[d.index[int(A)]] == pytest.approx((g.n if not bd else 2) * x ** int(A).bit_count())


def test_two_point_k2_is_tanh_beta():
    x = 0.5
    beta = math.atanh(x)
    assert abs(exact_two_point(complete_graph(2), x, 0, 1) - math.tanh(beta)) <= 1e-12


def test_two_point_path_ends():
    x = 0.6
    assert abs(exact_two_point(path_graph(4), x, 0, 3) - x**3) <= 1e-12


def test_two_point_k3():
    x = 0.5
    assert exact_two_point(complete_graph(3), x, 0, 2) == pytest.approx((x + x * x) / (1 + x**3))
    assert exact_two_point(complete_graph(3), x, 0, 2) == pytest.approx(2 / 3)


def test_chi_values():
    beta = math.atanh(0.5)
    assert exact_chi(complete_graph(2), 0.5) == pytest.approx(beta * 1.5)
    assert exact_chi(complete_graph(3), 0.5) == pytest.approx(beta * 7 / 3)


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_expansion_matches_spin_sum(name, x):
    g = TEST_GRAPHS[name]()
    d = enumerate_subsets(g, x)
    C = spin_correlations(g, math.atanh(x))
    for u, v in itertools.combinations(g.vertices, 2):
        assert abs(exact_two_point(g, x, u, v, d) - C[u, v]) <= 1e-12
        assert abs(exact_two_point_from_pi(g, x, u, v, d) - C[u, v]) <= 1e-12
    chi_spin = math.atanh(x) * C.sum() / g.n
    assert abs(exact_chi(g, x, d) - chi_spin) <= 1e-12 * chi_spin
    assert abs(exact_chi_from_correlations(g, x, d) - chi_spin) <= 1e-12 * chi_spin


def test_transition_k2():
    d = enumerate_subsets(complete_graph(2), 0.5)
    P = transition_matrix(complete_graph(2), 0.5, d).P
    assert P[d.index[0], d.index[1]] == pytest.approx(0.25)
    assert P[d.index[1], d.index[0]] == pytest.approx(0.5)


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_transition_invariants(name, x):
    g = TEST_GRAPHS[name]()
    d = enumerate_subsets(g, x)
    P = transition_matrix(g, x, d).P
    assert np.abs(P.sum(axis=1) - 1).max() <= 1e-12
    assert np.diag(P).min() >= 0.5 - 1e-12
    assert np.abs(d.pi @ P - d.pi).max() <= 1e-12
    F = d.pi[:, None] * P
    assert np.abs(F - F.T).max() <= 1e-12
    off = P[~np.eye(len(P), dtype=bool)]
    assert off[off > 0].min() >= x / (2 * g.n * g.max_degree)
    # transitions only between states one edge apart
    for i, j in zip(*np.nonzero(P)):
        if i != j:
            assert (int(d.states[i]) ^ int(d.states[j])).bit_count() == 1


def _random_connected(seed, n, extra):
    rng = np.random.default_rng(seed)
    edges = {(int(rng.integers(0, v)), v) for v in range(1, n)}
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in edges]
    rng.shuffle(pairs)
    edges |= set(pairs[:extra])
    return Graph.from_edges(n, edges)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(0, 6), st.floats(0.02, 0.98))
def test_detailed_balance_random_graphs(seed, n, extra, x):
    g = _random_connected(seed, n, extra)
    if g.m > 10:
        return
    d = enumerate_subsets(g, x)
    P = transition_matrix(g, x, d).P
    F = d.pi[:, None] * P
    assert np.abs(F - F.T).max() <= 1e-12
    assert np.abs(d.pi @ P - d.pi).max() <= 1e-12


def test_mixing_k2_closed_form():
    g = complete_graph(2)
    d = enumerate_subsets(g, 0.5)
    P = transition_matrix(g, 0.5, d).P
    rep = mixing_report(P, d.pi, [0.25, 1e-6])
    t = np.arange(len(rep.tv))
    assert np.allclose(rep.tv, 2 / 3 * 0.25**t, rtol=1e-12, atol=1e-15)
    assert rep.mix[0.25] == 1
    assert rep.slem == pytest.approx(0.25)
    assert rep.relaxation_time == pytest.approx(4 / 3)


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_mixing_properties(name, x):
    g = TEST_GRAPHS[name]()
    d = enumerate_subsets(g, x)
    P = transition_matrix(g, x, d).P
    rep = mixing_report(P, d.pi, [0.25, 0.01])
    assert np.all(np.diff(rep.tv) <= 1e-15)
    for delta, t in rep.mix.items():
        assert rep.tv[t] <= delta and (t == 0 or rep.tv[t - 1] > delta)
        assert t <= theorem1_bound(g, x, delta)
        # standard spectral upper bound for reversible chains
        assert t <= math.ceil(rep.relaxation_time * math.log(1 / (delta * d.pi_min)))


def test_mixing_nonergodic_detected():
    P = np.eye(2)
    with pytest.raises(RuntimeError, match="not ergodic"):
        mixing_report(P, np.array([0.5, 0.5]), [0.25], max_steps=50)


@pytest.mark.parametrize("name", sorted(TEST_GRAPHS))
def test_shift_by_shortest_path_is_bijection(name):
    g = TEST_GRAPHS[name]()
    x = 0.4
    d = enumerate_subsets(g, x)
    even = {A for A in range(1 << g.m) if not boundary(g, A)}
    for u, v in itertools.combinations(g.vertices, 2):
        p = path_subset(g, shortest_path(g, u, v))
        cuv = {A for A in range(1 << g.m) if boundary(g, A) == (u, v)}
        assert {A ^ p for A in cuv} == even
        dist = len(shortest_path(g, u, v)) - 1
        assert d.lambda_c0 <= x ** (-dist) * d.lambda_class(u, v) * (1 + 1e-12)


@pytest.mark.parametrize("g", [complete_graph(3), complete_graph(4), grid_graph(2, 3)])
def test_sampler_matches_exact_pi_per_state(g):
    x = 0.5
    d = enumerate_subsets(g, x)
    P = transition_matrix(g, x, d).P
    stride = mixing_report(P, d.pi, [1e-3]).mix[1e-3]
    stats = run(g, None, 2_000_000, ChainParams(x), make_rng(99), stride=stride)
    samples = stats.mask_trace[1:]
    counts = np.array([np.count_nonzero(samples == s) for s in d.states])
    assert counts.sum() == len(samples)
    assert chisquare(counts, d.pi * len(samples)).pvalue > 1e-3
