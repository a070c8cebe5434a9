"""Lazy Prokofiev-Svistunov worm chain on W = C0 u C2.

Every step consumes exactly three uniforms from a ``numpy.random.Generator``:
one to pick ``u``, one to pick the neighbour ``v``, one for the accept test.
The pure-Python ``step`` and the compiled ``run`` kernel follow the same
draw order, so a given seed yields the same trajectory through either.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .graph import (
    EdgeSubset,
    Graph,
    boundary,
    subset_from_array,
    subset_to_array,
)

GENERATOR_ID = "numpy.random.PCG64"
# dense per-pair counters cost n*n*8 bytes
PAIR_COUNT_MAX_N = 1024


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class ChainParams:
    x: float

    def __post_init__(self):
        if not (0.0 < self.x < 1.0) or math.isnan(self.x):
            raise ValueError(f"x must lie in (0, 1), got {self.x}")

    @classmethod
    def from_beta(cls, beta: float) -> ChainParams:
        if not beta > 0 or math.isinf(beta):
            raise ValueError(f"beta must be finite and positive, got {beta}")
        return cls(math.tanh(beta))

    @property
    def beta(self) -> float:
        return math.atanh(self.x)


@dataclass(frozen=True)
class WormState:
    """Edge subset ``A`` with its cached defect set ``∂A`` (empty or a sorted pair)."""

    edges: EdgeSubset = 0
    boundary: tuple[int, ...] = ()

    @classmethod
    def of(cls, graph: Graph, edges: EdgeSubset) -> WormState:
        bd = boundary(graph, edges)
        if len(bd) not in (0, 2):
            raise ValueError(f"|∂A| = {len(bd)}; state must lie in C0 or C2")
        return cls(edges, bd)

    @property
    def size(self) -> int:
        return self.edges.bit_count()

    @property
    def in_c0(self) -> bool:
        return not self.boundary

    def check(self, graph: Graph) -> None:
        if boundary(graph, self.edges) != self.boundary:
            raise AssertionError(
                f"cached boundary {self.boundary} != {boundary(graph, self.edges)}"
            )


def _pick(r: float, k: int) -> int:
    return min(int(r * k), k - 1)


def propose(graph: Graph, state: WormState, rng: np.random.Generator) -> tuple[int, int]:
    r1 = rng.random()
    if state.boundary:
        u = state.boundary[_pick(r1, 2)]
    else:
        u = _pick(r1, graph.n)
    nb = graph.adjacency[u]
    return u, nb[_pick(rng.random(), len(nb))]


def acceptance(graph: Graph, state: WormState, u: int, v: int, params: ChainParams) -> float:
    """Lazy Metropolis acceptance for the move ``A -> A △ uv``."""
    e = graph.edge_id(u, v)
    x = params.x
    ratio = 1.0 / x if (state.edges >> e) & 1 else x
    bd = state.boundary
    # C2 -> C2 exactly when u is a defect and v is not the other one
    if bd and u in bd and v not in bd:
        ratio *= graph.degree(u) / graph.degree(v)
    return 0.5 * min(1.0, ratio)


def _flip_boundary(bd: tuple[int, ...], u: int, v: int) -> tuple[int, ...]:
    s = set(bd)
    s ^= {u}
    s ^= {v}
    return tuple(sorted(s))


def step(
    graph: Graph, state: WormState, params: ChainParams, rng: np.random.Generator
) -> WormState:
    u, v = propose(graph, state, rng)
    a = acceptance(graph, state, u, v, params)
    if rng.random() < a:
        return WormState(state.edges ^ (1 << graph.edge_id(u, v)), _flip_boundary(state.boundary, u, v))
    return state


# -- compiled kernel ---------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _advance(ptr, nbr, eid, deg, x, occ, d0, d1, rng):
    """One lazy worm step on the occupancy array.

    Returns ``(d0, d1, e)`` with ``e`` the flipped edge id, or -1 on rejection.
    Defects are kept sorted; ``d0 == -1`` encodes a C0 state.
    """
    n = deg.shape[0]
    r1 = rng.random()
    r2 = rng.random()
    r3 = rng.random()
    if d0 < 0:
        u = int(r1 * n)
        if u >= n:
            u = n - 1
    else:
        u = d0 if int(r1 * 2) == 0 else d1
    k = deg[u]
    j = int(r2 * k)
    if j >= k:
        j = k - 1
    v = nbr[ptr[u] + j]
    e = eid[ptr[u] + j]
    q = x if occ[e] == 0 else 1.0 / x
    other = -1
    if d0 >= 0:
        other = d1 if u == d0 else d0
        if v != other:
            q *= deg[u] / deg[v]
    a = 0.5 * (q if q < 1.0 else 1.0)
    if r3 >= a:
        return d0, d1, -1
    occ[e] ^= 1
    if d0 < 0:
        if u < v:
            return u, v, e
        return v, u, e
    if v == other:
        return -1, -1, e
    if v < other:
        return v, other, e
    return other, v, e


@numba.njit(cache=True)
def _run_kernel(ptr, nbr, eid, deg, x, occ, d0, d1, steps, rng, stride,
                pair_counts, track_pairs, size_tr, d0_tr, d1_tr, mask_tr, track_mask):
    size = 0
    mask = np.int64(0)
    for i in range(occ.shape[0]):
        if occ[i]:
            size += 1
            if track_mask:
                mask |= np.int64(1) << np.int64(i)
    c0 = 0
    accepted = 0
    rec = 0
    for t in range(steps + 1):
        if t > 0:
            d0, d1, e = _advance(ptr, nbr, eid, deg, x, occ, d0, d1, rng)
            if e >= 0:
                accepted += 1
                size += 1 if occ[e] else -1
                if track_mask:
                    mask ^= np.int64(1) << np.int64(e)
        if d0 < 0:
            c0 += 1
        elif track_pairs:
            pair_counts[d0, d1] += 1
        if t % stride == 0:
            size_tr[rec] = size
            d0_tr[rec] = d0
            d1_tr[rec] = d1
            if track_mask:
                mask_tr[rec] = mask
            rec += 1
    return d0, d1, c0, accepted


@numba.njit(cache=True)
def _count_hits(ptr, nbr, eid, deg, x, m, steps, samples, rng, target_u, target_v):
    """Restart from the empty set ``samples`` times, run ``steps`` steps, count final hits.

    ``target_u < 0`` asks for C0; otherwise for C_{target_u, target_v}.
    """
    occ = np.zeros(m, dtype=np.uint8)
    hits = 0
    for _ in range(samples):
        occ[:] = 0
        d0 = -1
        d1 = -1
        for _t in range(steps):
            d0, d1, _e = _advance(ptr, nbr, eid, deg, x, occ, d0, d1, rng)
        if target_u < 0:
            if d0 < 0:
                hits += 1
        elif d0 == target_u and d1 == target_v:
            hits += 1
    return hits


@dataclass
class RunStats:
    """Accumulated observables over the visited states ``s_0 .. s_t``.

    Traces hold every ``stride``-th state, starting with ``s_0``. A defect
    entry of -1 marks a C0 state. ``mask_trace`` is only kept when m <= 63.
    """

    steps: int
    stride: int
    final: WormState
    time_in_c0: int
    accepted: int
    size_trace: np.ndarray
    defect_trace: np.ndarray
    mask_trace: np.ndarray | None = None
    pair_counts: np.ndarray | None = field(default=None, repr=False)

    @property
    def visits(self) -> int:
        return self.steps + 1

    @property
    def fraction_c0(self) -> float:
        return self.time_in_c0 / self.visits

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.steps if self.steps else 0.0


def run(
    graph: Graph,
    state: WormState | None,
    steps: int,
    params: ChainParams,
    rng: np.random.Generator,
    observers=(),
    stride: int = 1,
    check: bool = False,
) -> RunStats:
    """Apply ``steps`` worm steps from ``state`` (default: the empty set).

    Without observers the compiled kernel is used. Observers are callables
    ``f(t, state)`` fed every ``stride``-th state; they force the Python path,
    which draws identically and therefore returns identical statistics.
    ``check`` re-derives the boundary after every step (Python path only).
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    state = WormState() if state is None else state
    if observers or check:
        return _run_python(graph, state, steps, params, rng, observers, stride, check)

    ptr, nbr, eid = graph.csr
    deg = np.diff(ptr)
    occ = subset_to_array(graph, state.edges)
    d0, d1 = state.boundary if state.boundary else (-1, -1)
    n_rec = steps // stride + 1
    size_tr = np.empty(n_rec, dtype=np.int64)
    d0_tr = np.empty(n_rec, dtype=np.int64)
    d1_tr = np.empty(n_rec, dtype=np.int64)
    track_mask = graph.m <= 63
    mask_tr = np.empty(n_rec if track_mask else 0, dtype=np.int64)
    track_pairs = graph.n <= PAIR_COUNT_MAX_N
    pairs = np.zeros((graph.n, graph.n) if track_pairs else (0, 0), dtype=np.int64)
    d0, d1, c0, accepted = _run_kernel(
        ptr, nbr, eid, deg, params.x, occ, d0, d1, steps, rng, stride,
        pairs, track_pairs, size_tr, d0_tr, d1_tr, mask_tr, track_mask,
    )
    final = WormState(subset_from_array(occ), () if d0 < 0 else (int(d0), int(d1)))
    return RunStats(
        steps=steps,
        stride=stride,
        final=final,
        time_in_c0=int(c0),
        accepted=int(accepted),
        size_trace=size_tr,
        defect_trace=np.stack([d0_tr, d1_tr], axis=1),
        mask_trace=mask_tr if track_mask else None,
        pair_counts=pairs if track_pairs else None,
    )


def _run_python(graph, state, steps, params, rng, observers, stride, check):
    n_rec = steps // stride + 1
    size_tr = np.empty(n_rec, dtype=np.int64)
    defects = np.empty((n_rec, 2), dtype=np.int64)
    track_mask = graph.m <= 63
    mask_tr = np.empty(n_rec, dtype=np.int64) if track_mask else None
    track_pairs = graph.n <= PAIR_COUNT_MAX_N
    pairs = np.zeros((graph.n, graph.n), dtype=np.int64) if track_pairs else None
    c0 = accepted = rec = 0
    for t in range(steps + 1):
        if t > 0:
            nxt = step(graph, state, params, rng)
            if nxt is not state:
                accepted += 1
            state = nxt
            if check:
                state.check(graph)
        if state.in_c0:
            c0 += 1
        elif track_pairs:
            pairs[state.boundary] += 1
        if t % stride == 0:
            size_tr[rec] = state.size
            defects[rec] = state.boundary if state.boundary else (-1, -1)
            if track_mask:
                mask_tr[rec] = state.edges
            rec += 1
            for obs in observers:
                obs(t, state)
    return RunStats(steps, stride, state, c0, accepted, size_tr, defects, mask_tr, pairs)


def count_final_hits(
    graph: Graph,
    params: ChainParams,
    steps: int,
    samples: int,
    rng: np.random.Generator,
    pair: tuple[int, int] | None = None,
) -> int:
    """Number of ``samples`` fresh chains (from the empty set) ending in C0, or in C_pair."""
    if steps > np.iinfo(np.int64).max:
        raise OverflowError(f"run length {steps} does not fit the kernel's int64 counter")
    ptr, nbr, eid = graph.csr
    tu, tv = (-1, -1) if pair is None else (min(pair), max(pair))
    return int(_count_hits(ptr, nbr, eid, np.diff(ptr), params.x, graph.m,
                           steps, samples, rng, tu, tv))
