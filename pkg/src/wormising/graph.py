"""Finite simple connected graphs with canonical orderings.

Edge subsets are plain Python ints used as bitmasks over edge indices:
bit ``e`` is set when edge ``graph.edges[e]`` is present. Symmetric
difference is ``^`` and ``|A|`` is ``A.bit_count()``.
"""
from __future__ import annotations

import hashlib
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

EdgeSubset = int


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(repr=False)
    edge_index: dict[tuple[int, int], int] = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> Graph:
        """Build a canonical graph, rejecting loops, parallel edges and disconnection."""
        if n < 2:
            raise GraphError(f"need n >= 2, got {n}")
        canon = []
        seen = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if not (0 <= a < n and 0 <= b < n):
                raise GraphError(f"edge ({a}, {b}) out of range for n={n}")
            if a == b:
                raise GraphError(f"loop at vertex {a}")
            e = (a, b) if a < b else (b, a)
            if e in seen:
                raise GraphError(f"parallel edge {e}")
            seen.add(e)
            canon.append(e)
        canon.sort()
        adj = [[] for _ in range(n)]
        for a, b in canon:
            adj[a].append(b)
            adj[b].append(a)
        adjacency = tuple(tuple(sorted(nb)) for nb in adj)
        g = cls(n, tuple(canon), adjacency, {e: i for i, e in enumerate(canon)})
        if not g._connected():
            raise GraphError("graph is not connected")
        return g

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> range:
        return range(self.n)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(nb) for nb in self.adjacency)

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    def edge_id(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        try:
            return self.edge_index[key]
        except KeyError:
            raise GraphError(f"({u}, {v}) is not an edge") from None

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edge_index

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(offsets, neighbours, edge ids) in sorted-neighbour order, for compiled kernels."""
        ptr = np.zeros(self.n + 1, dtype=np.int64)
        nbr = np.empty(2 * self.m, dtype=np.int64)
        eid = np.empty(2 * self.m, dtype=np.int64)
        k = 0
        for u, nb in enumerate(self.adjacency):
            for w in nb:
                nbr[k] = w
                eid[k] = self.edge_id(u, w)
                k += 1
            ptr[u + 1] = k
        for arr in (ptr, nbr, eid):
            arr.flags.writeable = False
        return ptr, nbr, eid

    @cached_property
    def incidence_masks(self) -> tuple[int, ...]:
        """Per vertex, the bitmask of incident edge ids."""
        masks = [0] * self.n
        for i, (a, b) in enumerate(self.edges):
            masks[a] |= 1 << i
            masks[b] |= 1 << i
        return tuple(masks)

    def digest(self) -> str:
        h = hashlib.sha256(f"{self.n}\n".encode())
        for a, b in self.edges:
            h.update(f"{a} {b}\n".encode())
        return h.hexdigest()

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"] + [f"{a} {b}" for a, b in self.edges]
        return "\n".join(lines) + "\n"

    def distance(self, u: int, v: int) -> int:
        return len(shortest_path(self, u, v)) - 1


# -- edge subsets ------------------------------------------------------------

def edge_subset(graph: Graph, pairs) -> EdgeSubset:
    mask = 0
    for u, v in pairs:
        mask |= 1 << graph.edge_id(u, v)
    return mask


def subset_edges(graph: Graph, subset: EdgeSubset) -> list[tuple[int, int]]:
    return [graph.edges[i] for i in iter_bits(subset)]


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def full_subset(graph: Graph) -> EdgeSubset:
    return (1 << graph.m) - 1


def subset_to_array(graph: Graph, subset: EdgeSubset) -> np.ndarray:
    occ = np.zeros(graph.m, dtype=np.uint8)
    for i in iter_bits(subset):
        occ[i] = 1
    return occ


def subset_from_array(occ) -> EdgeSubset:
    mask = 0
    for i in np.flatnonzero(np.asarray(occ)):
        mask |= 1 << int(i)
    return mask


def boundary(graph: Graph, subset: EdgeSubset) -> tuple[int, ...]:
    """Sorted odd-degree vertices of the spanning subgraph (V, subset)."""
    return tuple(
        v for v, inc in enumerate(graph.incidence_masks)
        if (inc & subset).bit_count() & 1
    )


# -- loading and generators --------------------------------------------------

def load_graph(text: str) -> Graph:
    """Parse the edge-list format: header ``n m`` then ``m`` lines ``u v``."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected two integers, got {s!r}")
        try:
            rows.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise GraphError(f"line {lineno}: not an integer pair: {s!r}") from None
    if not rows:
        raise GraphError("empty graph document")
    (n, m), body = rows[0], rows[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges, found {len(body)}")
    return Graph.from_edges(n, body)


def read_graph(path) -> Graph:
    with open(path) as fh:
        return load_graph(fh.read())


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def grid_graph(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1:
        raise GraphError("grid sides must be positive")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph.from_edges(rows * cols, edges)


def torus_graph(rows: int, cols: int) -> Graph:
    # side 2 would create parallel edges
    if rows < 3 or cols < 3:
        raise GraphError("torus sides must be >= 3")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            edges.append((v, r * cols + (c + 1) % cols))
            edges.append((v, ((r + 1) % rows) * cols + c))
    return Graph.from_edges(rows * cols, edges)


_GENERATORS = {
    "path": path_graph,
    "cycle": cycle_graph,
    "complete": complete_graph,
    "grid": grid_graph,
    "torus": torus_graph,
}


def generate(kind: str, *sizes: int) -> Graph:
    try:
        fn = _GENERATORS[kind]
    except KeyError:
        raise GraphError(f"unknown graph kind {kind!r}") from None
    try:
        return fn(*sizes)
    except TypeError:
        raise GraphError(f"wrong number of size parameters for {kind}") from None


_SPEC_RE = re.compile(r"^(k|path|cycle|grid|torus)(\d+)(?:x(\d+))?$")


def parse_graph_spec(spec: str) -> Graph:
    """Generator shorthand: ``k4``, ``path5``, ``cycle5``, ``grid3x3``, ``torus16x16``."""
    mt = _SPEC_RE.match(spec.strip().lower())
    if not mt:
        raise GraphError(f"unrecognised graph spec {spec!r}")
    kind, a, b = mt.groups()
    kind = "complete" if kind == "k" else kind
    two_d = kind in ("grid", "torus")
    if two_d != (b is not None):
        raise GraphError(f"bad size for {kind}: {spec!r}")
    sizes = (int(a), int(b)) if two_d else (int(a),)
    return generate(kind, *sizes)


# -- deterministic paths and cycles -----------------------------------------

def _bfs_dist(graph: Graph, source: int, allowed: EdgeSubset) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        for b in graph.adjacency[a]:
            if b not in dist and (allowed >> graph.edge_id(a, b)) & 1:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def shortest_path(
    graph: Graph, u: int, v: int, restricted_to: EdgeSubset | None = None
) -> list[int]:
    """Lexicographically smallest shortest path, written from ``min(u, v)``.

    Only edges in ``restricted_to`` (default: all of E) may be used.
    """
    allowed = full_subset(graph) if restricted_to is None else restricted_to
    start, end = min(u, v), max(u, v)
    dist = _bfs_dist(graph, end, allowed)
    if start not in dist:
        raise GraphError(f"{u} and {v} are disconnected in the restricted subgraph")
    path = [start]
    cur = start
    while cur != end:
        # smallest neighbour one step closer to the end keeps the prefix minimal
        cur = next(
            w for w in graph.adjacency[cur]
            if dist.get(w) == dist[cur] - 1 and (allowed >> graph.edge_id(cur, w)) & 1
        )
        path.append(cur)
    return path


def path_subset(graph: Graph, vertices) -> EdgeSubset:
    return edge_subset(graph, zip(vertices, vertices[1:]))


def _orient(cycle: list[int]) -> list[int]:
    i = cycle.index(min(cycle))
    rot = cycle[i:] + cycle[:i]
    if rot[-1] < rot[1]:
        rot = [rot[0]] + rot[:0:-1]
    return rot


def decompose_even_subgraph(graph: Graph, subset: EdgeSubset) -> list[list[int]]:
    """Split an even edge set into an ordered list of edge-disjoint cycles.

    Each cycle is a closed vertex list ``[c0, c1, ..., c0]`` starting at its
    lowest vertex and heading to the smaller of that vertex's two cycle
    neighbours.
    """
    if boundary(graph, subset):
        raise GraphError("edge set has odd-degree vertices")
    remaining = subset
    cycles = []
    while remaining:
        deg_mask = [(inc & remaining) for inc in graph.incidence_masks]
        start = next(v for v in graph.vertices if deg_mask[v])
        walk = [start]
        pos = {start: 0}
        used = 0
        cur = start
        while True:
            nxt = next(
                w for w in graph.adjacency[cur]
                if (remaining & ~used) >> graph.edge_id(cur, w) & 1
            )
            used |= 1 << graph.edge_id(cur, nxt)
            if nxt in pos:
                loop = walk[pos[nxt]:]
                break
            pos[nxt] = len(walk)
            walk.append(nxt)
            cur = nxt
        cyc = _orient(loop)
        remaining &= ~path_subset(graph, cyc + [cyc[0]])
        cycles.append(cyc + [cyc[0]])
    return cycles
