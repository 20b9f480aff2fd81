"""Command-line front end.

Every command writes one table (CSV or JSON) plus a sidecar
``<table>.manifest.json`` recording what produced it. ``spingraph replay``
reruns a manifest.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .graph import GraphError, total_length
from .io import (
    RunManifest, SpecError, Timer, build_operator, file_digest, load_graph, load_json,
    needs_seed, read_csv, write_csv,
)
from .lattice import (
    LatticeError, T3BandQuery, TransmissionError, build_diamond_chain,
    check_t3_regime, k_samples, localization_scan, perturb_lengths, t3_band_value,
    t3_in_spectrum,
)
from .operators import MatchingError
from .orbits import OrbitCapExceeded, enumerate_orbits, form_factor_orbit_sum, orbit_table
from .spectrum import Spectrum, SpectrumError, find_spectrum, lift_kramers, unfold
from .stats import (
    StatsError, form_factor_from_spectrum, ks_distance, nns_statistics, rmt_cdf, rmt_series,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("spingraph")


class ValidationError(ValueError):
    pass


def _emit(args, name: str, header, rows, manifest: RunManifest) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        path = out / f"{name}.json"
        data = [dict(zip(header, (_plain(x) for x in r))) for r in rows]
        path.write_text(json.dumps({"columns": list(header), "rows": data}, indent=1) + "\n")
    else:
        path = out / f"{name}.csv"
        write_csv(path, header, rows)
    manifest.outputs = [path.name]
    manifest.results["argv"] = args.argv
    manifest.write(out / f"{name}.manifest.json")
    return path


def _plain(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


def _operator_inputs(args):
    if not args.graph or not args.operator:
        raise ValidationError("--graph and --operator are required")
    g = load_graph(args.graph)
    spec = load_json(args.operator)
    if needs_seed(spec) and args.seed is None:
        raise ValidationError("operator uses Haar spin rotations: --seed is required")
    bs = build_operator(g, spec, args.seed)
    inputs = {"graph": file_digest(args.graph), "operator": file_digest(args.operator)}
    return g, spec, bs, inputs


def _load_levels(args) -> tuple[Spectrum, float, dict]:
    header, data = read_csv(args.spectrum)
    if header[:2] != ["k", "multiplicity"]:
        raise ValidationError("spectrum CSV must have columns k,multiplicity")
    s = Spectrum(data[:, 0], data[:, 1].astype(int))
    L = args.total_length
    side = Path(args.spectrum).with_suffix(".manifest.json")
    if L is None and side.exists():
        L = json.loads(side.read_text()).get("results", {}).get("total_length")
    if L is None:
        raise ValidationError("total graph length unknown: pass --total-length")
    lift = args.lift == "yes" or (args.lift == "auto" and len(s) and np.all(s.multiplicity % 2 == 0))
    if lift:
        s = lift_kramers(s)
    return s, float(L), {"spectrum": file_digest(args.spectrum)}


def cmd_spectrum(args) -> RunManifest:
    g, spec, bs, inputs = _operator_inputs(args)
    with Timer() as t:
        s = find_spectrum(bs, args.kmin, args.kmax, tol=args.tol, threads=args.threads)
    m = RunManifest("spectrum", inputs, spec, {"tol": args.tol, "merge_tol": s.meta["merge_tol"]},
                    args.seed, wall_time=t.elapsed,
                    results={"levels": s.total, "distinct": len(s), "variable": bs.variable,
                             "total_length": total_length(g)})
    _emit(args, "spectrum", ["k", "multiplicity"], zip(s.k, s.multiplicity), m)
    print(f"{len(s)} distinct roots ({s.total} with multiplicity) in ({args.kmin}, {args.kmax}]")
    return m


def cmd_stats(args) -> RunManifest:
    s, L, inputs = _load_levels(args)
    if s.total < 100:
        raise ValidationError(f"statistics need at least 100 levels, got {s.total}")
    with Timer() as t:
        u = unfold(s, L)
        nns = nns_statistics(u, bins=args.bins, s_max=args.s_max)
        ks = {e: ks_distance(nns, e) for e in ("GOE", "GSE")}
    c = nns.bin_centers
    res = {"ks_goe": ks["GOE"], "ks_gse": ks["GSE"], "closer": min(ks, key=ks.get),
           "levels": len(u), "kramers_lifted": bool(s.meta.get("kramers_lifted", False))}
    if args.ensemble:
        res["expected_closer"] = res["closer"] == args.ensemble
    m = RunManifest("stats", inputs, None, {"bins": args.bins, "s_max": args.s_max}, None,
                    wall_time=t.elapsed, results=res)
    _emit(args, "stats", ["s", "hist", "cdf_emp", "cdf_goe", "cdf_gse"],
          zip(c, nns.hist, nns.cdf(c), rmt_cdf("GOE", c), rmt_cdf("GSE", c)), m)
    print(f"KS(GOE) = {ks['GOE']:.4f}  KS(GSE) = {ks['GSE']:.4f}  closer: {res['closer']}")
    return m


def cmd_orbits(args) -> RunManifest:
    g, spec, bs, inputs = _operator_inputs(args)
    with Timer() as t:
        orbits = enumerate_orbits(g, args.nmax, bs, cap=args.cap)
        weights = orbit_table(orbits, bs)
    rows = [(p.n, p.length, p.repetitions, float(np.real(w.amplitude)), w.trace)
            for p, w in zip(orbits, weights)]
    m = RunManifest("orbits", inputs, spec, {"cap": args.cap}, args.seed, wall_time=t.elapsed,
                    results={"orbits": len(orbits), "n_max": args.nmax})
    _emit(args, "orbits", ["n", "l_p", "r_p", "A_p", "tr_d_re"], rows, m)
    print(f"{len(orbits)} periodic orbit classes with n <= {args.nmax}")
    return m


def cmd_formfactor(args) -> RunManifest:
    tau = np.linspace(args.tau_max / args.tau_points, args.tau_max, args.tau_points)
    if args.spectrum:
        s, L, inputs = _load_levels(args)
        with Timer() as t:
            u = unfold(s, L)
            est = form_factor_from_spectrum(u, tau, window_count=args.windows)
        m = RunManifest("formfactor", inputs, None, {"windows": args.windows}, None, wall_time=t.elapsed,
                        results={"levels": len(u), "levels_per_window": est.levels_per_window})
        _emit(args, "formfactor", ["tau", "K_emp", "K_gse_series", "K_goe_series"],
              zip(tau, est.K, rmt_series("GSE", tau), rmt_series("GOE", tau)), m)
        return m
    g, spec, bs, inputs = _operator_inputs(args)
    with Timer() as t:
        orbits = enumerate_orbits(g, args.nmax, bs, cap=args.cap)
        K = form_factor_orbit_sum(orbits, orbit_table(orbits, bs), total_length(g), tau)
    m = RunManifest("formfactor", inputs, spec, {"cap": args.cap}, args.seed, wall_time=t.elapsed,
                    results={"orbits": len(orbits), "n_max": args.nmax})
    _emit(args, "formfactor_orbits", ["tau", "K"], zip(tau, K), m)
    return m


def cmd_rashba_bands(args) -> RunManifest:
    regime = None if args.regime == "none" else args.regime
    if regime:
        check_t3_regime(args.kr, args.omega, regime)
    E = np.linspace(args.emin, args.emax, args.points + 1)[1:] if args.emin == 0 else \
        np.linspace(args.emin, args.emax, args.points)
    rows = []
    with Timer() as t:
        for e in E:
            q = T3BandQuery(float(e), args.lam, args.mu, args.kr, args.omega)
            v = t3_band_value(q, regime=None)
            rows.append((e, v, t3_in_spectrum(q, regime=None)))
    m = RunManifest("rashba-bands", {}, {"lam": args.lam, "mu": args.mu, "k_rashba": args.kr,
                                         "omega": args.omega, "regime": args.regime}, {}, None,
                    wall_time=t.elapsed, results={"points": len(rows),
                                                  "in_spectrum": int(sum(r[2] for r in rows))})
    _emit(args, "bands", ["E", "band_value", "in_spectrum"], rows, m)
    return m


def cmd_transmission(args) -> RunManifest:
    if args.seed is None:
        raise ValidationError("transmission draws its injection wavenumbers at random: --seed is required")
    rng = np.random.default_rng(args.seed)
    chain = build_diamond_chain(args.cells, args.length)
    if args.perturb:
        chain = perturb_lengths(chain, args.perturb, rng)
    ks = k_samples(args.length, args.samples, rng)
    x = np.linspace(args.kr_min, args.kr_max, args.kr_steps)
    kr = x * np.pi / (2 * args.length)
    with Timer() as t:
        scan = localization_scan(chain, kr, args.flux, ks)
    a, f, G = scan.minimum()
    rows = [(kr[i], scan.flux[j], scan.G_mean[i, j], scan.G_min[i, j])
            for i in range(len(kr)) for j in range(len(scan.flux))]
    m = RunManifest("transmission", {}, {"cells": args.cells, "length": args.length,
                                         "perturb": args.perturb, "samples": args.samples},
                    {}, args.seed, wall_time=t.elapsed,
                    results={"k_rashba_min": a, "flux_min": f, "G_mean_min": G})
    _emit(args, "sweep", ["k_R", "flux", "G_mean", "G_min"], rows, m)
    print(f"minimum mean conductance {G:.3e} at k_R = {a:.6g} (2 k_R L / pi = {2 * a * args.length / np.pi:.4g}),"
          f" flux = {f:.4g}")
    return m


def cmd_replay(args) -> RunManifest | None:
    man = load_json(args.manifest)
    argv = man.get("results", {}).get("argv")
    if not argv:
        raise ValidationError("manifest has no recorded command line")
    return main(argv)


COMMANDS = {
    "spectrum": cmd_spectrum, "stats": cmd_stats, "orbits": cmd_orbits, "formfactor": cmd_formfactor,
    "rashba-bands": cmd_rashba_bands, "transmission": cmd_transmission, "replay": cmd_replay,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spingraph", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")
    op = argparse.ArgumentParser(add_help=False)
    op.add_argument("--graph")
    op.add_argument("--operator")
    op.add_argument("--cap", type=int, default=2_000_000)
    lv = argparse.ArgumentParser(add_help=False)
    lv.add_argument("--total-length", type=float)
    lv.add_argument("--lift", choices=("auto", "yes", "no"), default="auto")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common, op], help="roots of the secular equation")
    s.add_argument("--kmin", type=float, default=1e-3)
    s.add_argument("--kmax", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-10)

    s = sub.add_parser("stats", parents=[common, lv], help="nearest-neighbour spacing statistics")
    s.add_argument("--spectrum", required=True)
    s.add_argument("--ensemble", choices=("GOE", "GSE"))
    s.add_argument("--bins", type=int, default=40)
    s.add_argument("--s-max", type=float, default=4.0)

    s = sub.add_parser("orbits", parents=[common, op], help="periodic orbit table")
    s.add_argument("--nmax", type=int, required=True)

    s = sub.add_parser("formfactor", parents=[common, op, lv], help="spectral form factor")
    s.add_argument("--spectrum")
    s.add_argument("--nmax", type=int, default=10)
    s.add_argument("--windows", type=int, default=16)
    s.add_argument("--tau-max", type=float, default=0.5)
    s.add_argument("--tau-points", type=int, default=100)

    s = sub.add_parser("rashba-bands", parents=[common], help="T3 lattice band conditions")
    s.add_argument("--lam", type=float, default=0.0)
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--kr", type=float, default=np.pi / 2)
    s.add_argument("--omega", type=float, default=-np.pi / 6)
    s.add_argument("--regime", choices=("bands", "flat", "none"), default="bands")
    s.add_argument("--emin", type=float, default=0.0)
    s.add_argument("--emax", type=float, default=40.0)
    s.add_argument("--points", type=int, default=4000)

    s = sub.add_parser("transmission", parents=[common], help="diamond chain conductance sweep")
    s.add_argument("--cells", type=int, default=50)
    s.add_argument("--length", type=float, default=1.0)
    s.add_argument("--kr-min", type=float, default=0.0, help="in units of pi/(2L)")
    s.add_argument("--kr-max", type=float, default=2.0)
    s.add_argument("--kr-steps", type=int, default=21)
    s.add_argument("--flux", type=float, nargs="+", default=[0.0])
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--perturb", type=float, default=0.0, help="relative length disorder")

    s = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    s.add_argument("manifest")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.argv = argv
        code = COMMANDS[args.command](args)
    except (SpectrumError, TransmissionError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, SpecError, GraphError, MatchingError, LatticeError, StatsError,
            OrbitCapExceeded, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return code if isinstance(code, int) else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
