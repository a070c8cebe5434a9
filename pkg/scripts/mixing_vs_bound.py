"""Exact mixing time against the analytic bound across small graphs and temperatures.

    python scripts/mixing_vs_bound.py --delta 0.25 --out mixing.csv
"""

import argparse
import csv
import sys
from dataclasses import dataclass, field

from wormising.flows import congestion
from wormising.graph import parse_graph_spec
from wormising.measure import theorem1_bound
from wormising.oracle import enumerate_subsets, mixing_report, transition_matrix


@dataclass
class Config:
    graphs: list[str] = field(default_factory=lambda: ["k2", "k3", "k4", "path4", "cycle5", "grid2x3"])
    xs: list[float] = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    delta: float = 0.25
    out: str | None = None


def rows(cfg: Config):
    for spec in cfg.graphs:
        g = parse_graph_spec(spec)
        for x in cfg.xs:
            d = enumerate_subsets(g, x)
            P = transition_matrix(g, x, d).P
            rep = mixing_report(P, d.pi, [cfg.delta])
            phi = congestion(g, x, d, P).phi if g.m <= 12 else float("nan")
            yield {
                "graph": spec, "n": g.n, "m": g.m, "x": x,
                "mix": rep.mix[cfg.delta],
                "relaxation_time": rep.relaxation_time,
                "phi": phi,
                "bound": theorem1_bound(g, x, cfg.delta),
            }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", nargs="+", default=Config().graphs)
    ap.add_argument("--xs", nargs="+", type=float, default=Config().xs)
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--out")
    cfg = Config(**vars(ap.parse_args(argv)))
    fh = open(cfg.out, "w", newline="") if cfg.out else sys.stdout
    w = None
    for r in rows(cfg):
        if w is None:
            w = csv.DictWriter(fh, fieldnames=list(r))
            w.writeheader()
        w.writerow(r)
    if cfg.out:
        fh.close()


if __name__ == "__main__":
    main()
