"""Compare the smoothed level density with truncated periodic-orbit sums."""

from __future__ import annotations

import argparse
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from spingraph.graph import star_graph, total_length
from spingraph.io import write_csv
from spingraph.orbits import enumerate_orbits, orbit_table, smoothed_comb, trace_formula_density
from spingraph.scattering import dirac_neumann_scattering, haar_rotations
from spingraph.spectrum import find_spectrum


@dataclass
class TraceConfig:
    lengths: list = field(default_factory=lambda: [1.0, 1.3247, 0.8713])
    seed: int = 3
    k_min: float = 5.0
    k_max: float = 60.0
    width_factor: float = 0.1     # smoothing width in units of pi/L
    n_max: tuple = (10, 15, 20)
    points: int = 6000
    out_dir: str = "out/trace"


def run(cfg: TraceConfig) -> list[float]:
    g = star_graph(cfg.lengths)
    L = total_length(g)
    bs = dirac_neumann_scattering(g, haar_rotations(g, np.random.default_rng(cfg.seed)))
    width = cfg.width_factor * np.pi / L
    k = np.linspace(cfg.k_min, cfg.k_max, cfg.points)
    s = find_spectrum(bs, 0.05, cfg.k_max + 15 * width)
    exact = smoothed_comb(k, s.k, s.multiplicity, width)
    orbits = enumerate_orbits(g, max(cfg.n_max), bs)
    w = orbit_table(orbits, bs)
    cols, errs = [exact], []
    for n in cfg.n_max:
        sel = [i for i, p in enumerate(orbits) if p.n <= n]
        d = trace_formula_density([orbits[i] for i in sel], [w[i] for i in sel], L, k, width)
        cols.append(d)
        errs.append(float(np.linalg.norm(d - exact) / np.linalg.norm(exact)))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "density.csv", ["k", "exact"] + [f"orbits_n{n}" for n in cfg.n_max], zip(k, *cols))
    return errs


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=TraceConfig.seed)
    p.add_argument("--out-dir", default=TraceConfig.out_dir)
    args = p.parse_args()
    cfg = TraceConfig(seed=args.seed, out_dir=args.out_dir)
    for n, e in zip(cfg.n_max, run(cfg)):
        print(f"n_max = {n:2d}: relative L2 error {e:.3e}")
    print(asdict(cfg))


if __name__ == "__main__":
    main()
