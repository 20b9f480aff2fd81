import csv
import json
from pathlib import Path

import numpy as np
import pytest

from spingraph.cli import EXIT_NUMERICAL, EXIT_VALIDATION, main
from spingraph.orbits import enumerate_orbits
from spingraph.graph import single_loop
from spingraph.scattering import dirac_neumann_scattering

DATA = Path(__file__).resolve().parents[1] / "data"


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def run(*argv):
    return main([str(a) for a in argv])


def test_spectrum_dirichlet_edge(tmp_path):
    assert run("spectrum", "--graph", DATA / "edge.json", "--operator", DATA / "edge_dirichlet.json",
               "--kmin", 0.5, "--kmax", 5.5, "--out-dir", tmp_path) == 0
    r = rows(tmp_path / "spectrum.csv")
    assert r[0] == ["k", "multiplicity"]
    assert np.allclose([float(x[0]) for x in r[1:]], [1, 2, 3, 4, 5], atol=1e-8)
    assert {x[1] for x in r[1:]} == {"2"}
    man = json.loads((tmp_path / "spectrum.manifest.json").read_text())
    assert man["outputs"] == ["spectrum.csv"]
    assert set(man) >= {"command", "inputs", "operator", "tolerances", "seed", "version", "wall_time"}


def test_not_self_adjoint(tmp_path, capsys):
    code = run("spectrum", "--graph", DATA / "edge.json", "--operator", DATA / "edge_bad.json",
               "--kmax", 3, "--out-dir", tmp_path)
    assert code == EXIT_VALIDATION
    assert "self-adjointness violated at vertex 'a'" in capsys.readouterr().err


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("spectrum", "--graph", bad, "--operator", DATA / "edge_dirichlet.json",
               "--kmax", 3, "--out-dir", tmp_path) == EXIT_VALIDATION
    assert run("spectrum", "--kmax", 3) == EXIT_VALIDATION
    assert run("nonsense") == EXIT_VALIDATION


def test_haar_needs_seed(tmp_path):
    assert run("spectrum", "--graph", DATA / "k4.json", "--operator", DATA / "k4_haar.json",
               "--kmax", 10, "--out-dir", tmp_path) == EXIT_VALIDATION


def test_bit_identical_reruns(tmp_path):
    args = ["spectrum", "--graph", DATA / "k4.json", "--operator", DATA / "k4_haar.json",
            "--kmax", 120, "--seed", 17]
    assert run(*args, "--out-dir", tmp_path / "a") == 0
    assert run(*args, "--out-dir", tmp_path / "b", "--threads", 3) == 0
    a = (tmp_path / "a" / "spectrum.csv").read_bytes()
    assert a == (tmp_path / "b" / "spectrum.csv").read_bytes()
    assert run("replay", tmp_path / "a" / "spectrum.manifest.json") == 0
    assert a == (tmp_path / "a" / "spectrum.csv").read_bytes()


def test_stats_pipeline(tmp_path):
    assert run("spectrum", "--graph", DATA / "k4.json", "--operator", DATA / "k4_haar.json",
               "--kmax", 400, "--seed", 2, "--out-dir", tmp_path) == 0
    assert run("stats", "--spectrum", tmp_path / "spectrum.csv", "--ensemble", "GSE",
               "--out-dir", tmp_path) == 0
    r = rows(tmp_path / "stats.csv")
    assert r[0] == ["s", "hist", "cdf_emp", "cdf_goe", "cdf_gse"] and len(r) == 41
    res = json.loads((tmp_path / "stats.manifest.json").read_text())["results"]
    assert res["ks_gse"] < res["ks_goe"] and res["kramers_lifted"]


def test_stats_picket_fence_and_too_few(tmp_path):
    fence = tmp_path / "fence.csv"
    fence.write_text("k,multiplicity\n" + "".join(f"{n},1\n" for n in range(1, 400)))
    assert run("stats", "--spectrum", fence, "--total-length", np.pi, "--out-dir", tmp_path) == 0
    res = json.loads((tmp_path / "stats.manifest.json").read_text())["results"]
    assert res["ks_goe"] > 0.2 and res["ks_gse"] > 0.2
    short = tmp_path / "short.csv"
    short.write_text("k,multiplicity\n1,1\n2,1\n")
    assert run("stats", "--spectrum", short, "--total-length", 1, "--out-dir", tmp_path) == EXIT_VALIDATION


def test_orbits_loop(tmp_path):
    assert run("orbits", "--graph", DATA / "loop.json", "--operator", DATA / "k4_blind.json",
               "--nmax", 3, "--out-dir", tmp_path) == 0
    r = rows(tmp_path / "orbits.csv")
    assert r[0] == ["n", "l_p", "r_p", "A_p", "tr_d_re"]
    g = single_loop(2 * np.pi)
    assert len(r) - 1 == len(enumerate_orbits(g, 3, dirac_neumann_scattering(g))) == 6


def test_orbit_cap(tmp_path, capsys):
    assert run("orbits", "--graph", DATA / "k4.json", "--operator", DATA / "k4_blind.json",
               "--nmax", 40, "--cap", 1000, "--out-dir", tmp_path) == EXIT_VALIDATION
    assert "cap" in capsys.readouterr().err


def test_formfactor_from_orbits(tmp_path):
    assert run("formfactor", "--graph", DATA / "k4.json", "--operator", DATA / "k4_blind.json",
               "--nmax", 6, "--out-dir", tmp_path) == 0
    assert rows(tmp_path / "formfactor_orbits.csv")[0] == ["tau", "K"]


def test_rashba_bands_neumann(tmp_path):
    assert run("rashba-bands", "--emax", 40, "--points", 500, "--out-dir", tmp_path) == 0
    r = rows(tmp_path / "bands.csv")
    assert r[0] == ["E", "band_value", "in_spectrum"]
    for E, v, inside in r[1:]:
        c2 = np.cos(np.sqrt(float(E) + np.pi**2 / 4)) ** 2
        assert float(v) == pytest.approx(c2, abs=1e-15)
        assert (inside == "1") == ((c2 <= 1 / 6) or (0.5 <= c2 <= 2 / 3))
    assert run("rashba-bands", "--kr", 1.0, "--out-dir", tmp_path) == EXIT_VALIDATION


def test_transmission_sweep(tmp_path, capsys):
    assert run("transmission", "--cells", 8, "--kr-steps", 5, "--samples", 10,
               "--out-dir", tmp_path) == EXIT_VALIDATION          # no seed
    assert run("transmission", "--cells", 8, "--kr-steps", 5, "--samples", 10, "--seed", 1,
               "--out-dir", tmp_path) == 0
    assert "2 k_R L / pi = 1" in capsys.readouterr().out
    r = rows(tmp_path / "sweep.csv")
    assert r[0] == ["k_R", "flux", "G_mean", "G_min"] and len(r) == 6


def test_json_format(tmp_path):
    assert run("rashba-bands", "--points", 10, "--format", "json", "--out-dir", tmp_path) == 0
    data = json.loads((tmp_path / "bands.json").read_text())
    assert data["columns"] == ["E", "band_value", "in_spectrum"] and len(data["rows"]) == 10


def test_numerical_failure_exit(tmp_path):
    # integer levels with L = 2 pi unfold to mean spacing 2, which the unfolding check rejects
    odd = tmp_path / "s.csv"
    odd.write_text("k,multiplicity\n" + "".join(f"{n},1\n" for n in range(1, 1000)))
    assert run("stats", "--spectrum", odd, "--total-length", 2 * np.pi, "--out-dir", tmp_path) == EXIT_NUMERICAL
