import itertools
from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wormising.graph import (
    GraphError,
    boundary,
    complete_graph,
    cycle_graph,
    decompose_even_subgraph,
    edge_subset,
    generate,
    grid_graph,
    iter_bits,
    load_graph,
    parse_graph_spec,
    path_graph,
    path_subset,
    shortest_path,
    subset_edges,
    torus_graph,
)


def test_load_k2():
    g = load_graph("2 1\n0 1")
    assert (g.n, g.m, g.max_degree) == (2, 1, 1)


def test_load_triangle_with_comments():
    g = load_graph("# triangle\n3 3\n0 1\n0 2\n\n1 2\n")
    assert g == complete_graph(3)


@pytest.mark.parametrize(
    "text, msg",
    [
        ("2 2\n0 1\n0 1", "parallel"),
        ("2 1\n0 0", "loop"),
        ("4 2\n0 1\n2 3", "connected"),
        ("1 0", "n >= 2"),
        ("3 3\n0 1\n1 2", "declares"),
        ("3 x\n0 1", "integer"),
        ("2 1\n0 5", "range"),
    ],
)
def test_load_errors(text, msg):
    with pytest.raises(GraphError, match=msg):
        load_graph(text)


def test_canonical_ordering():
    g = load_graph("4 4\n3 2\n1 0\n2 0\n3 1\n")
    assert g.edges == ((0, 1), (0, 2), (1, 3), (2, 3))
    assert g.adjacency == ((1, 2), (0, 3), (0, 3), (1, 2))
    assert load_graph(g.to_text()) == g


@pytest.mark.parametrize(
    "kind, sizes, counts",
    [
        ("complete", (4,), (4, 6, 3)),
        ("grid", (3, 3), (9, 12, 4)),
        ("path", (5,), (5, 4, 2)),
        ("cycle", (5,), (5, 5, 2)),
        ("torus", (3, 4), (12, 24, 4)),
    ],
)
def test_generate_counts(kind, sizes, counts):
    g = generate(kind, *sizes)
    assert (g.n, g.m, g.max_degree) == counts
    assert sum(g.degrees) == 2 * g.m


def test_generate_errors():
    with pytest.raises(GraphError):
        torus_graph(2, 5)
    with pytest.raises(GraphError):
        generate("grid", 1, 1)
    with pytest.raises(GraphError):
        generate("hypercube", 3)


def test_grid_row_major():
    g = grid_graph(2, 3)
    assert g.edges == ((0, 1), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (4, 5))


@pytest.mark.parametrize("spec, n, m", [("k4", 4, 6), ("path5", 5, 4), ("cycle6", 6, 6),
                                        ("grid2x3", 6, 7), ("torus16x16", 256, 512)])
def test_parse_graph_spec(spec, n, m):
    g = parse_graph_spec(spec)
    assert (g.n, g.m) == (n, m)


@pytest.mark.parametrize("spec", ["k", "grid3", "path3x3", "blob4"])
def test_parse_graph_spec_rejects(spec):
    with pytest.raises(GraphError):
        parse_graph_spec(spec)


def test_boundary_examples():
    k3 = complete_graph(3)
    assert boundary(k3, edge_subset(k3, [(0, 1)])) == (0, 1)
    assert boundary(k3, edge_subset(k3, [(0, 1), (0, 2), (1, 2)])) == ()
    k4 = complete_graph(4)
    # star at 0: vertex 0 has degree 3, leaves degree 1
    assert boundary(k4, edge_subset(k4, [(0, 1), (0, 2), (0, 3)])) == (0, 1, 2, 3)


@given(st.integers(min_value=0, max_value=(1 << 24) - 1))
def test_handshake(mask):
    g = torus_graph(3, 4)
    assert len(boundary(g, mask & ((1 << g.m) - 1))) % 2 == 0


def _all_simple_paths(g, u, v):
    for k in range(g.n - 1):
        for mid in itertools.permutations([w for w in g.vertices if w not in (u, v)], k):
            seq = [u, *mid, v]
            if all(g.has_edge(a, b) for a, b in zip(seq, seq[1:])):
                yield seq


def test_shortest_path_examples():
    k3 = complete_graph(3)
    assert shortest_path(k3, 1, 2, edge_subset(k3, [(0, 1), (0, 2), (1, 2)])) == [1, 2]
    c4 = cycle_graph(4)
    paths = list(_all_simple_paths(c4, 0, 2))
    shortest = min(len(p) for p in paths)
    assert sorted(p for p in paths if len(p) == shortest) == [[0, 1, 2], [0, 3, 2]]
    assert shortest_path(c4, 0, 2) == [0, 1, 2]
    assert shortest_path(path_graph(3), 0, 2) == [0, 1, 2]
    assert shortest_path(c4, 2, 0) == [0, 1, 2]


def test_shortest_path_restricted_disconnected():
    c4 = cycle_graph(4)
    with pytest.raises(GraphError):
        shortest_path(c4, 0, 2, edge_subset(c4, [(0, 1)]))


@pytest.mark.parametrize("g", [grid_graph(3, 3), complete_graph(5), cycle_graph(6)])
def test_shortest_path_is_lexicographic_minimum(g):
    for u, v in itertools.combinations(g.vertices, 2):
        paths = list(_all_simple_paths(g, u, v))
        shortest = min(len(p) for p in paths)
        assert shortest_path(g, u, v) == min(p for p in paths if len(p) == shortest)


def _bfs(g, s, allowed):
    dist = {s: 0}
    q = deque([s])
    while q:
        a = q.popleft()
        for b in g.adjacency[a]:
            if b not in dist and allowed >> g.edge_id(a, b) & 1:
                dist[b] = dist[a] + 1
                q.append(b)
    return dist


@settings(max_examples=200)
@given(st.integers(0, (1 << 17) - 1), st.integers(0, 11), st.integers(0, 11))
def test_shortest_path_length_is_bfs_distance(mask, u, v):
    g = grid_graph(3, 4)
    d = _bfs(g, u, mask)
    if v not in d:
        with pytest.raises(GraphError):
            shortest_path(g, u, v, mask)
        return
    p = shortest_path(g, u, v, mask)
    assert len(p) - 1 == d[v]
    assert {p[0], p[-1]} == {u, v}
    assert all(mask >> g.edge_id(a, b) & 1 for a, b in zip(p, p[1:]))
    assert shortest_path(g, u, v, mask) == p


def test_decompose_examples():
    k3 = complete_graph(3)
    assert decompose_even_subgraph(k3, 0) == []
    assert decompose_even_subgraph(k3, 0b111) == [[0, 1, 2, 0]]
    # 3x3 grid, vertices numbered left to right, bottom to top from 1:
    # cycle v4 v5 v8 v7 is 3-4-7-6 zero-indexed
    g = grid_graph(3, 3)
    cyc = edge_subset(g, [(3, 4), (4, 7), (7, 6), (6, 3)])
    assert decompose_even_subgraph(g, cyc) == [[3, 4, 7, 6, 3]]


def test_decompose_rejects_odd():
    k3 = complete_graph(3)
    with pytest.raises(GraphError):
        decompose_even_subgraph(k3, 0b001)


def test_decompose_two_triangles_sharing_vertex():
    g = load_graph("5 6\n0 1\n0 2\n1 2\n2 3\n2 4\n3 4\n")
    assert decompose_even_subgraph(g, (1 << 6) - 1) == [[0, 1, 2, 0], [2, 3, 4, 2]]


def _even_subgraph(g, mask):
    # pair up odd vertices along shortest paths to cancel all odd degrees
    mask &= (1 << g.m) - 1
    odd = list(boundary(g, mask))
    for a, b in zip(odd[::2], odd[1::2]):
        mask ^= path_subset(g, shortest_path(g, a, b))
    return mask


@settings(max_examples=200)
@given(st.sampled_from(["grid3x4", "k5", "torus3x3"]), st.integers(0, (1 << 24) - 1))
def test_decomposition_properties(spec, raw):
    g = parse_graph_spec(spec)
    B = _even_subgraph(g, raw)
    assert boundary(g, B) == ()
    cycles = decompose_even_subgraph(g, B)
    union = 0
    for cyc in cycles:
        assert cyc[0] == cyc[-1] == min(cyc)
        assert cyc[1] < cyc[-2]
        body = cyc[:-1]
        assert len(body) == len(set(body)) >= 3
        es = path_subset(g, cyc)
        assert es.bit_count() == len(body)
        assert union & es == 0
        assert all(len(nb) == 2 for nb in _degrees_in(g, es).values())
        union |= es
    assert union == B
    assert decompose_even_subgraph(g, B) == cycles


def _degrees_in(g, mask):
    nb = {}
    for a, b in subset_edges(g, mask):
        nb.setdefault(a, []).append(b)
        nb.setdefault(b, []).append(a)
    return nb


def test_bit_helpers():
    g = complete_graph(4)
    m = edge_subset(g, [(2, 3), (0, 1)])
    assert list(iter_bits(m)) == [0, 5]
    assert subset_edges(g, m) == [(0, 1), (2, 3)]
