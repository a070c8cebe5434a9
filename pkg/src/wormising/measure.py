"""Worm-measure weights, estimators and the median-of-means fpras.

All logarithms are natural. Non-integer counts and run lengths are rounded
up so the guarantees they feed are never weakened.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import numpy as np

from .graph import EdgeSubset, Graph
from .worm import ChainParams, count_final_hits

C0 = "C0"


def lambda_weight(subset: EdgeSubset | int, x: float, *, size: bool = False) -> float:
    """x^|A|. Pass ``size=True`` to give |A| directly instead of a bitmask."""
    k = subset if size else subset.bit_count()
    return x ** k


def class_factor(n: int, n_odd: int) -> int:
    """Multiplier of x^|A| in the worm weight: n on C0, 2 on C2, 1 on C4."""
    return {0: n, 2: 2, 4: 1}[n_odd]


def theorem1_bound(graph: Graph, x: float, delta: float) -> int:
    """Upper bound on mix(delta) for the lazy worm chain, as a step count."""
    if not (0 < x < 1 and 0 < delta < 1):
        raise ValueError("need x and delta in (0, 1)")
    n, m, D = graph.n, graph.m, graph.max_degree
    val = (
        (1 / (2 * x))
        * (math.log(8 / x) - math.log(delta) / m)
        * (3 + 1 / (m * x))
        * D * n**6 * m**2
    )
    return math.ceil(val)


def ratio_bounds(graph: Graph, x: float) -> tuple[float, float]:
    """(lower, upper) bounds on pi(C2) / pi(C0)."""
    n, m = graph.n, graph.m
    return (2 / n) * (m * x / (m * x + 1)), float(n - 1)


def susceptibility(pi_c0: float, beta: float) -> float:
    if not (0 < pi_c0 <= 1):
        raise ValueError(f"pi(C0) must lie in (0, 1], got {pi_c0}")
    return beta / pi_c0


def two_point(pi_cuv: float, pi_c0: float, n: int) -> float:
    if pi_c0 <= 0:
        raise ValueError("pi(C0) must be positive")
    return n / 2 * pi_cuv / pi_c0


def pair_lower_bound(graph: Graph, x: float, u: int, v: int) -> float:
    """Guaranteed lower bound 2 x^d(u,v) / (n (n + 1)) on pi(C_uv)."""
    n = graph.n
    return 2 * x ** graph.distance(u, v) / (n * (n + 1))


@dataclass(frozen=True)
class FprasPlan:
    """Sizes for the median-of-means scheme estimating pi(event).

    ``event`` is ``"C0"`` or a sorted vertex pair. ``run_length`` is the
    number of chain steps per sample; by default it is the mixing-time bound
    at ``delta``.
    """

    event: str | tuple[int, int]
    epsilon: float
    eta: float
    S: float
    delta: float
    run_length: int
    outer: int
    inner: int
    k: int | None = None

    @property
    def total_steps(self) -> int:
        return self.outer * self.inner * self.run_length

    def as_dict(self) -> dict:
        return {
            "event": self.event if self.event == C0 else list(self.event),
            "epsilon": self.epsilon,
            "eta": self.eta,
            "S": self.S,
            "delta": self.delta,
            "R": self.run_length,
            "J": self.outer,
            "I": self.inner,
            "k": self.k,
            "total_steps": self.total_steps,
        }


def outer_reps(eta: float) -> int:
    return 7 * math.ceil(math.log(1 / eta)) + 1


def inner_reps(S: float, epsilon: float) -> int:
    return 20 * math.ceil(S / epsilon**2 + 1)


def make_plan(
    graph: Graph,
    x: float,
    epsilon: float,
    eta: float,
    event=C0,
    k: int | None = None,
    run_length: int | None = None,
) -> FprasPlan:
    """Build the plan for ``event``; for a pair, ``k`` defaults to d(u, v).

    ``run_length`` overrides the mixing-time bound (any value at least the
    true mix(delta) keeps the guarantee).
    """
    if not (0 < epsilon < 0.25 and 0 < eta < 0.25):
        raise ValueError("epsilon and eta must lie in (0, 1/4)")
    n = graph.n
    if event == C0:
        S = 2 * n + 1
    else:
        u, v = sorted(event)
        if u == v:
            raise ValueError("pair event needs two distinct vertices")
        event = (u, v)
        d = graph.distance(u, v)
        k = d if k is None else k
        if d > k:
            raise ValueError(f"pair ({u}, {v}) is at distance {d} > k = {k}")
        S = n * (n + 1) * x ** (-k) / 2
    delta = epsilon / (16 * S)
    R = theorem1_bound(graph, x, delta) if run_length is None else int(run_length)
    if R < 1:
        raise ValueError("run length must be >= 1")
    return FprasPlan(event, epsilon, eta, S, delta, R, outer_reps(eta), inner_reps(S, epsilon),
                     k if event != C0 else None)


def _seeds(rng: np.random.Generator, count: int) -> list[np.random.Generator]:
    # one child stream per outer repetition, derived deterministically from rng
    ss = np.random.SeedSequence(rng.integers(0, 2**63))
    return [np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(count)]


def estimate_event_probability(
    graph: Graph,
    params: ChainParams,
    event,
    steps: int,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Fraction of ``samples`` independent runs from the empty set ending in ``event``."""
    if samples < 1:
        raise ValueError("need at least one sample")
    pair = None if event == C0 else tuple(sorted(event))
    hits = count_final_hits(graph, params, steps, samples, rng, pair)
    return hits / samples


@dataclass
class FprasResult:
    estimate: float
    means: list[float]
    plan: FprasPlan


def fpras(graph: Graph, params: ChainParams, plan: FprasPlan, rng: np.random.Generator) -> FprasResult:
    """Median over ``plan.outer`` sample means of ``plan.inner`` indicators each."""
    means = [
        estimate_event_probability(graph, params, plan.event, plan.run_length, plan.inner, sub)
        for sub in _seeds(rng, plan.outer)
    ]
    return FprasResult(statistics.median(means), means, plan)


def fpras_susceptibility(graph: Graph, params: ChainParams, epsilon: float, eta: float,
                         rng: np.random.Generator, run_length: int | None = None):
    """chi within relative error epsilon: pi(C0) is estimated at epsilon / (1 + epsilon).

    Relative error e on pi(C0) becomes at most e / (1 - e) on beta / pi(C0);
    e = epsilon / (1 + epsilon) makes that exactly epsilon.
    """
    eps0 = epsilon / (1 + epsilon)
    plan = make_plan(graph, params.x, eps0, eta, C0, run_length=run_length)
    res = fpras(graph, params, plan, rng)
    return susceptibility(res.estimate, params.beta), res


def fpras_two_point(graph: Graph, params: ChainParams, u: int, v: int, epsilon: float,
                    eta: float, rng: np.random.Generator, k: int | None = None,
                    run_length: int | None = None):
    """<s_u s_v> from separate estimates of pi(C_uv) and pi(C0), each at epsilon/3 and eta/2.

    With both within relative error e = epsilon/3, the ratio is within
    (1 + e)/(1 - e) - 1 <= epsilon for epsilon < 1/4, by a union bound over
    the two failure events.
    """
    e = epsilon / 3
    plan_uv = make_plan(graph, params.x, e, eta / 2, (u, v), k=k, run_length=run_length)
    plan_0 = make_plan(graph, params.x, e, eta / 2, C0, run_length=run_length)
    r_uv = fpras(graph, params, plan_uv, rng)
    r_0 = fpras(graph, params, plan_0, rng)
    return two_point(r_uv.estimate, r_0.estimate, graph.n), (r_uv, r_0)
