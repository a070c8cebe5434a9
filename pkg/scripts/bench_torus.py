"""Sampler throughput on square tori of growing side length.

    python scripts/bench_torus.py --sides 8 16 32 64 --steps 10000000
"""

import argparse
import time
from dataclasses import dataclass, field

from wormising.graph import torus_graph
from wormising.worm import ChainParams, make_rng, run


@dataclass
class Config:
    sides: list[int] = field(default_factory=lambda: [8, 16, 32, 64])
    x: float = 0.4
    steps: int = 10_000_000
    seed: int = 0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sides", nargs="+", type=int, default=Config().sides)
    ap.add_argument("--x", type=float, default=Config.x)
    ap.add_argument("--steps", type=int, default=Config.steps)
    ap.add_argument("--seed", type=int, default=Config.seed)
    cfg = Config(**vars(ap.parse_args(argv)))
    params = ChainParams(cfg.x)
    print("side,n,steps,seconds,steps_per_second,fraction_c0")
    for L in cfg.sides:
        g = torus_graph(L, L)
        rng = make_rng(cfg.seed)
        run(g, None, 1000, params, rng)
        t0 = time.perf_counter()
        stats = run(g, None, cfg.steps, params, rng, stride=max(1, cfg.steps // 1000))
        dt = time.perf_counter() - t0
        print(f"{L},{g.n},{cfg.steps},{dt:.3f},{cfg.steps / dt:.4g},{stats.fraction_c0:.5f}")


if __name__ == "__main__":
    main()
