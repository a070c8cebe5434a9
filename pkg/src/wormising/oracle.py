"""Brute-force ground truth for small graphs.

Everything here enumerates: all 2^m edge subsets for the class weights, the
worm state space W for the transition matrix, and all 2^n spin
configurations for an expansion-free check of the correlations. The
acceptance rule is re-derived here from full boundary recomputation rather
than shared with :mod:`wormising.worm`, so stationarity tests compare two
independent routes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, boundary, iter_bits

ENUMERATION_CAP = 20
STATE_CAP = 4096


class CapExceeded(ValueError):
    """Graph too large for exact mode."""


def _vertex_set(vmask: int) -> tuple[int, ...]:
    return tuple(iter_bits(vmask))


@dataclass
class ExactDistribution:
    """Exact weights over all edge subsets grouped by boundary class.

    ``states`` lists the worm state space W = C0 u C2 as sorted edge
    bitmasks; ``pi`` is the normalised worm measure on it. ``class_weights``
    maps a sorted vertex tuple W (|W| in {0, 2, 4}) to lambda(C_W).
    """

    graph: Graph
    x: float
    states: np.ndarray
    state_boundary: np.ndarray
    weights: np.ndarray
    pi: np.ndarray
    Z: float
    class_weights: dict[tuple[int, ...], float]
    total_weight: float
    index: dict[int, int] = field(repr=False)

    @property
    def lambda_c0(self) -> float:
        return self.class_weights[()]

    def lambda_class(self, *W: int) -> float:
        return self.class_weights.get(tuple(sorted(W)), 0.0)

    @property
    def lambda_c4(self) -> float:
        return math.fsum(w for k, w in self.class_weights.items() if len(k) == 4)

    @property
    def pi_c0(self) -> float:
        return self.graph.n * self.lambda_c0 / self.Z

    @property
    def pi_c2(self) -> float:
        return 1.0 - self.pi_c0

    def pi_pair(self, u: int, v: int) -> float:
        return 2.0 * self.lambda_class(u, v) / self.Z

    def pi_of(self, subset: int) -> float:
        return float(self.pi[self.index[subset]])

    def big_lambda(self, subset: int) -> float:
        """Unnormalised weight on W u C4: x^|A| times n, 2 or 1 by class."""
        return big_lambda(self.graph, self.x, subset)

    @property
    def big_lambda_w_c4(self) -> float:
        return self.Z + self.lambda_c4

    @property
    def pi_min(self) -> float:
        return float(self.pi.min())

    def in_c0(self, idx: int) -> bool:
        return self.state_boundary[idx] == 0


def big_lambda(graph: Graph, x: float, subset: int) -> float:
    k = len(boundary(graph, subset))
    factor = {0: graph.n, 2: 2, 4: 1}.get(k)
    if factor is None:
        raise ValueError(f"subset has {k} odd vertices; outside W u C4")
    return factor * x ** subset.bit_count()


def enumerate_subsets(graph: Graph, x: float, cap: int = ENUMERATION_CAP) -> ExactDistribution:
    """Enumerate every edge subset, grouping weights x^|A| by boundary class."""
    m, n = graph.m, graph.n
    if m > cap:
        raise CapExceeded(f"exact mode cap exceeded: m={m} > {cap}")
    masks = np.arange(1 << m, dtype=np.int64)
    odd = np.zeros_like(masks)
    for e, (a, b) in enumerate(graph.edges):
        bit = (masks >> e) & 1
        odd ^= (bit << a) ^ (bit << b)
    sizes = np.bitwise_count(masks).astype(np.int64)
    wts = np.power(float(x), sizes)
    n_odd = np.bitwise_count(odd)

    keys, inverse = np.unique(odd, return_inverse=True)
    sums = np.bincount(inverse, weights=wts)
    class_weights = {
        _vertex_set(int(k)): float(s)
        for k, s in zip(keys, sums)
        if int(k).bit_count() <= 4
    }
    in_w = n_odd <= 2
    states = masks[in_w]
    sb = odd[in_w]
    weights = wts[in_w] * np.where(sb == 0, float(n), 2.0)
    Z = math.fsum(weights)
    return ExactDistribution(
        graph=graph,
        x=float(x),
        states=states,
        state_boundary=sb,
        weights=weights,
        pi=weights / Z,
        Z=Z,
        class_weights=class_weights,
        total_weight=math.fsum(wts),
        index={int(s): i for i, s in enumerate(states)},
    )


def exact_two_point(graph: Graph, x: float, u: int, v: int,
                    dist: ExactDistribution | None = None) -> float:
    """Correlation as lambda(C_uv) / lambda(C0)."""
    dist = dist or enumerate_subsets(graph, x)
    if u == v:
        return 1.0
    return dist.lambda_class(u, v) / dist.lambda_c0


def exact_two_point_from_pi(graph: Graph, x: float, u: int, v: int,
                            dist: ExactDistribution | None = None) -> float:
    """Correlation as (n/2) pi(C_uv) / pi(C0)."""
    dist = dist or enumerate_subsets(graph, x)
    return graph.n / 2 * dist.pi_pair(u, v) / dist.pi_c0


def exact_chi(graph: Graph, x: float, dist: ExactDistribution | None = None) -> float:
    """Susceptibility beta / pi(C0)."""
    dist = dist or enumerate_subsets(graph, x)
    return math.atanh(x) / dist.pi_c0


def exact_chi_from_correlations(graph: Graph, x: float,
                                dist: ExactDistribution | None = None) -> float:
    """(beta / n) * sum over ordered pairs of <s_u s_v>, from class weights."""
    dist = dist or enumerate_subsets(graph, x)
    n = graph.n
    pair_sum = math.fsum(
        dist.lambda_class(u, v) for u in range(n) for v in range(u + 1, n)
    )
    return math.atanh(x) / n * (n + 2 * pair_sum / dist.lambda_c0)


def spin_correlations(graph: Graph, beta: float, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Matrix of <s_u s_v> by direct summation over all 2^n spin configurations."""
    n = graph.n
    if n > cap:
        raise CapExceeded(f"exact mode cap exceeded: n={n} > {cap}")
    conf = np.arange(1 << n, dtype=np.int64)
    spins = 1 - 2 * ((conf[:, None] >> np.arange(n)) & 1)
    energy = np.zeros(len(conf))
    for a, b in graph.edges:
        energy += spins[:, a] * spins[:, b]
    # shift by the maximum for stability at large beta
    w = np.exp(beta * (energy - graph.m))
    return (spins.T * w) @ spins / w.sum()


# -- transition matrix and mixing -------------------------------------------

def _acceptance(graph: Graph, x: float, subset: int, u: int, v: int) -> float:
    e = graph.edge_id(u, v)
    after = subset ^ (1 << e)
    ratio = 1.0 / x if (subset >> e) & 1 else x
    bd_before = boundary(graph, subset)
    bd_after = boundary(graph, after)
    if len(bd_before) == 2 and len(bd_after) == 2 and u in bd_before:
        ratio *= graph.degree(u) / graph.degree(v)
    return 0.5 * min(1.0, ratio)


@dataclass
class TransitionMatrix:
    P: np.ndarray
    states: np.ndarray
    index: dict[int, int] = field(repr=False)


def transition_matrix(graph: Graph, x: float, dist: ExactDistribution | None = None,
                      cap: int = STATE_CAP) -> TransitionMatrix:
    """Exact one-step matrix over W, summing proposal probability times acceptance."""
    dist = dist or enumerate_subsets(graph, x)
    N = len(dist.states)
    if N > cap:
        raise CapExceeded(f"exact mode cap exceeded: |W|={N} > {cap}")
    P = np.zeros((N, N))
    for i, A in enumerate(dist.states):
        A = int(A)
        bd = boundary(graph, A)
        starts = [(u, 1.0 / graph.n) for u in graph.vertices] if not bd else [(u, 0.5) for u in bd]
        for u, pu in starts:
            for v in graph.adjacency[u]:
                prob = pu / graph.degree(u)
                a = _acceptance(graph, x, A, u, v)
                j = dist.index[A ^ (1 << graph.edge_id(u, v))]
                P[i, j] += prob * a
                P[i, i] += prob * (1.0 - a)
    return TransitionMatrix(P, dist.states, dist.index)


def tv_distance(mu: np.ndarray, nu: np.ndarray) -> float:
    return 0.5 * float(np.abs(mu - nu).sum())


@dataclass
class MixingReport:
    tv: np.ndarray
    mix: dict[float, int]
    slem: float
    spectral_gap: float
    relaxation_time: float


def worst_tv(Pt: np.ndarray, pi: np.ndarray) -> float:
    return float(0.5 * np.abs(Pt - pi[None, :]).sum(axis=1).max())


def mixing_report(P: np.ndarray, pi: np.ndarray, deltas, max_steps: int = 1_000_000) -> MixingReport:
    """Exact worst-case TV curve up to the smallest delta, plus spectral quantities."""
    deltas = sorted(float(d) for d in deltas)
    target = deltas[0]
    Pt = np.eye(len(pi))
    curve = [worst_tv(Pt, pi)]
    while curve[-1] > target:
        if len(curve) > max_steps:
            raise RuntimeError(
                f"TV distance {curve[-1]:.3g} still above {target} after {max_steps} steps; "
                "chain is not ergodic"
            )
        Pt = Pt @ P
        curve.append(worst_tv(Pt, pi))
    tv = np.array(curve)
    mix = {d: int(np.argmax(tv <= d)) for d in deltas}

    # reversible: D^1/2 P D^-1/2 is symmetric with the same spectrum
    s = np.sqrt(pi)
    S = (s[:, None] * P) / s[None, :]
    eig = np.linalg.eigvalsh(0.5 * (S + S.T))
    eig = np.sort(eig)[::-1]
    slem = float(np.max(np.abs(eig[1:]))) if len(eig) > 1 else 0.0
    gap = 1.0 - slem
    return MixingReport(tv, mix, slem, gap, 1.0 / gap if gap > 0 else math.inf)
