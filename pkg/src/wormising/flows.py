"""Canonical paths from C2 to C0 and their congestion under the worm chain.

A path from ``I`` to ``F`` flips each edge of ``I △ F`` exactly once: first
the shortest defect path ``A0`` from the lower defect, then the cycles of
``(I △ F) \\ A0`` in decomposition order.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, boundary, decompose_even_subgraph, path_subset, shortest_path
from .measure import ratio_bounds, theorem1_bound
from .oracle import (
    CapExceeded,
    ExactDistribution,
    enumerate_subsets,
    mixing_report,
    transition_matrix,
)

FLOW_CAP = 12


class InequalityViolation(AssertionError):
    pass


@dataclass
class CanonicalPath:
    start: int
    end: int
    defect_path: list[int]
    cycles: list[list[int]]
    states: list[int]

    @property
    def length(self) -> int:
        return len(self.states) - 1

    def transitions(self):
        return zip(self.states, self.states[1:])


def canonical_path(graph: Graph, initial: int, final: int) -> CanonicalPath:
    """State sequence from ``initial`` in C2 to ``final`` in C0."""
    bd = boundary(graph, initial)
    if len(bd) != 2:
        raise ValueError("initial state must lie in C2")
    if boundary(graph, final):
        raise ValueError("final state must lie in C0")
    diff = initial ^ final
    walk = shortest_path(graph, bd[0], bd[1], restricted_to=diff)
    cycles = decompose_even_subgraph(graph, diff & ~path_subset(graph, walk))
    states = [initial]
    cur = initial
    for seq in [walk, *cycles]:
        for a, b in zip(seq, seq[1:]):
            cur ^= 1 << graph.edge_id(a, b)
            states.append(cur)
    assert cur == final
    return CanonicalPath(initial, final, walk, cycles, states)


def eta(transition: tuple[int, int], initial: int, final: int) -> int:
    """I △ F △ A for the transition (A, A')."""
    return initial ^ final ^ transition[0]


def _fsum_add(acc: dict, key, value: float) -> None:
    acc[key].append(value)


@dataclass
class CongestionReport:
    x: float
    loads: dict[tuple[int, int], float] = field(repr=False)
    longest: int
    max_load: float
    argmax: tuple[int, int]
    phi: float
    bound: float
    n_pairs: int

    def top(self, k: int = 10) -> list[tuple[tuple[int, int], float]]:
        return sorted(self.loads.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def _check_cap(graph: Graph, cap: int) -> None:
    if graph.m > cap:
        raise CapExceeded(f"exact mode cap exceeded: m={graph.m} > {cap}")


def congestion_bound(graph: Graph, x: float) -> float:
    return graph.max_degree * graph.n**5 * graph.m / (4 * x)


def _pairs(dist: ExactDistribution):
    c2 = [int(s) for s, b in zip(dist.states, dist.state_boundary) if b != 0]
    c0 = [int(s) for s, b in zip(dist.states, dist.state_boundary) if b == 0]
    for I in c2:
        for F in c0:
            yield I, F


def congestion(graph: Graph, x: float, dist: ExactDistribution | None = None,
               P: np.ndarray | None = None, cap: int = FLOW_CAP) -> CongestionReport:
    """Route every (I, F) in C2 x C0 and accumulate pi(I)pi(F) / (pi(A)P(A, A')) per transition."""
    _check_cap(graph, cap)
    dist = dist or enumerate_subsets(graph, x)
    if P is None:
        P = transition_matrix(graph, x, dist).P
    idx = dist.index
    terms = defaultdict(list)
    longest = 0
    n_pairs = 0
    for I, F in _pairs(dist):
        path = canonical_path(graph, I, F)
        longest = max(longest, path.length)
        n_pairs += 1
        w = dist.pi[idx[I]] * dist.pi[idx[F]]
        for A, B in path.transitions():
            i, j = idx[A], idx[B]
            _fsum_add(terms, (A, B), w / (dist.pi[i] * P[i, j]))
    loads = {e: math.fsum(v) for e, v in terms.items()}
    argmax = min(loads, key=lambda e: (-loads[e], e))
    max_load = loads[argmax]
    return CongestionReport(
        x=x,
        loads=loads,
        longest=longest,
        max_load=max_load,
        argmax=argmax,
        phi=longest * max_load,
        bound=congestion_bound(graph, x),
        n_pairs=n_pairs,
    )


def flow_mix_bound(pi_min: float, delta: float, ratio: float, phi: float) -> float:
    """Mixing-time bound from congestion ``phi`` and the C2/C0 mass ``ratio``."""
    return math.log(1 / (pi_min * delta)) * (2 + 4 * (ratio + 1 / ratio)) * phi


def flow_mix_bound_explicit(graph: Graph, x: float, delta: float, phi: float) -> float:
    """Same bound with pi_min and the ratio replaced by their worst cases."""
    m, n = graph.m, graph.n
    return (math.log(8 / x) - math.log(delta) / m) * (6 + 2 / (m * x)) * m * n * phi


@dataclass
class ChainVerification:
    graph_digest: str
    x: float
    delta: float
    checks: dict[str, bool]
    values: dict[str, float]
    counterexamples: list[str]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def raise_if_failed(self) -> None:
        if not self.ok:
            failed = [k for k, v in self.checks.items() if not v]
            raise InequalityViolation(f"failed {failed}: {self.counterexamples[:5]}")


def verify_theorem_chain(graph: Graph, x: float, delta: float = 0.25,
                         cap: int = FLOW_CAP, rtol: float = 1e-12) -> ChainVerification:
    """Check the inequality chain behind the mixing bound with exact quantities.

    Each inequality ``lhs <= rhs`` is accepted up to a relative slack of
    ``rtol`` for floating-point rounding.
    """
    _check_cap(graph, cap)
    dist = enumerate_subsets(graph, x)
    P = transition_matrix(graph, x, dist).P
    idx = dist.index
    n = graph.n
    bad: list[str] = []

    def le(lhs, rhs):
        return lhs <= rhs * (1 + rtol)

    positive = True
    weights_ok = True
    images: dict[tuple[int, int], dict[int, tuple[int, int]]] = defaultdict(dict)
    injective = True
    in_w_c4 = True
    lengths_ok = True
    for I, F in _pairs(dist):
        path = canonical_path(graph, I, F)
        if path.length != (I ^ F).bit_count() or path.length > graph.m:
            lengths_ok = False
            bad.append(f"path length {path.length} for I={I:#x} F={F:#x}")
        lam_i, lam_f = dist.big_lambda(I), dist.big_lambda(F)
        for A, B in path.transitions():
            if A not in idx or B not in idx or P[idx[A], idx[B]] <= 0:
                positive = False
                bad.append(f"zero-probability step {A:#x}->{B:#x} on I={I:#x} F={F:#x}")
                continue
            img = eta((A, B), I, F)
            if len(boundary(graph, img)) not in (0, 2, 4):
                in_w_c4 = False
                bad.append(f"eta image {img:#x} outside W u C4")
                continue
            lhs = lam_i * lam_f / dist.big_lambda(A)
            rhs = n * dist.big_lambda(img)
            if not le(lhs, rhs):
                weights_ok = False
                bad.append(f"Lambda bound {lhs} > {rhs} at {A:#x}->{B:#x}, I={I:#x} F={F:#x}")
            seen = images[(A, B)]
            if img in seen and seen[img] != (I, F):
                injective = False
                bad.append(f"eta collision at {A:#x}->{B:#x}: {seen[img]} and {(I, F)}")
            seen[img] = (I, F)

    # minimum positive off-diagonal transition probability
    off = P[~np.eye(len(P), dtype=bool)]
    p_floor = x / (2 * n * graph.max_degree)
    p_min = float(off[off > 0].min())

    rep = congestion(graph, x, dist, P, cap=cap)
    mix = mixing_report(P, dist.pi, [delta]).mix[delta]
    ratio = dist.pi_c2 / dist.pi_c0
    lo, hi = ratio_bounds(graph, x)
    line1 = flow_mix_bound(dist.pi_min, delta, ratio, rep.phi)
    line2 = flow_mix_bound_explicit(graph, x, delta, rep.phi)
    t1 = theorem1_bound(graph, x, delta)

    checks = {
        "positive_steps": positive,
        "path_lengths": lengths_ok,
        "eta_in_W_C4": in_w_c4,
        "eta_injective": injective,
        "lambda_bound": weights_ok,
        "min_transition": le(p_floor, p_min),
        "ratio_bounds": le(lo, ratio) and le(ratio, hi),
        "congestion_bound": le(rep.phi, rep.bound),
        "flow_mix_bound": le(mix, line1),
        "flow_mix_bound_explicit": le(mix, line2),
        "flow_bounds_ordered": le(line1, line2),
        "mix_below_bound": mix <= t1,
    }
    for name, ok in checks.items():
        if not ok and name not in ("positive_steps", "path_lengths", "eta_in_W_C4",
                                   "eta_injective", "lambda_bound"):
            bad.append(f"{name} failed")
    values = {
        "mix": mix,
        "phi": rep.phi,
        "phi_bound": rep.bound,
        "longest_path": rep.longest,
        "max_load": rep.max_load,
        "flow_mix_bound": line1,
        "flow_mix_bound_explicit": line2,
        "theorem1_bound": t1,
        "ratio": ratio,
        "ratio_lower": lo,
        "ratio_upper": hi,
        "min_transition": p_min,
        "min_transition_floor": p_floor,
        "pi_min": dist.pi_min,
        "n_pairs": rep.n_pairs,
        "n_transitions_loaded": len(rep.loads),
    }
    return ChainVerification(graph.digest(), x, delta, checks, values, bad)
