"""JSON operator files, CSV tables and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .graph import MetricGraph, build_graph
from .operators import (
    DIRICHLET, MatchingError, RashbaParams, check_self_adjoint, dirac_neumann_pair,
)
from .scattering import (
    BondScattering, assemble_bond_scattering, dirac_transitions_from_pairs,
    pauli_bond_scattering, pauli_laplace_pairs, rashba_bond_scattering,
)
from .su2 import I2, from_quaternion, haar_su2, is_su2

OPERATORS = ("dirac", "pauli", "rashba")


class SpecError(ValueError):
    pass


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None


def load_graph(path) -> MetricGraph:
    return build_graph(load_json(path))


def _cmatrix(rows) -> np.ndarray:
    try:
        return np.array([[complex(x) if isinstance(x, str) else x for x in r] for r in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"bad matrix entry: {exc}") from None


def _rotations(entry, d: int, rng) -> list[np.ndarray]:
    rot = entry.get("spin_rotations")
    if rot is None:
        return [I2.copy() for _ in range(d)]
    if rot == "haar":
        if rng is None:
            raise SpecError("Haar spin rotations need --seed")
        return list(haar_su2(rng, d))
    if len(rot) != d:
        raise SpecError(f"vertex {entry.get('vertex')!r}: {len(rot)} spin rotations for valency {d}")
    out = []
    for q in rot:
        q = np.asarray(q, float)
        u = from_quaternion(q / np.linalg.norm(q))
        if not is_su2(u):
            raise SpecError("spin rotation is not in SU(2)")
        out.append(u)
    return out


def _by_vertex(g: MetricGraph, spec: Mapping) -> dict[int, dict]:
    out = {}
    for entry in spec.get("vertex_conditions", []):
        v = g.vertex_index(entry["vertex"])
        out[v] = entry
    return out


def needs_seed(spec: Mapping) -> bool:
    return any(e.get("spin_rotations") == "haar" for e in spec.get("vertex_conditions", []))


def build_operator(g: MetricGraph, spec: Mapping, seed: int | None = None) -> BondScattering:
    """Turn an operator description into a bond scattering evaluator.

    Unlisted vertices get Neumann-like conditions with trivial spin rotations.
    """
    op = spec.get("operator")
    if op not in OPERATORS:
        raise SpecError(f"operator must be one of {OPERATORS}, got {op!r}")
    rng = np.random.default_rng(seed) if seed is not None else None
    conds = _by_vertex(g, spec)
    if op == "dirac":
        mass = float(spec.get("mass", 0.0))
        pairs = {}
        for v in range(g.n_vertices):
            entry = conds.get(v, {"type": "neumann"})
            d = g.degree(v)
            kind = entry.get("type", "neumann")
            if kind == "neumann":
                pairs[v] = dirac_neumann_pair(_rotations(entry, d, rng))
            elif kind == "dirichlet":
                pairs[v] = (np.eye(2 * d), np.zeros((2 * d, 2 * d)))
            elif kind == "custom":
                pairs[v] = (_cmatrix(entry["A"]), _cmatrix(entry["B"]))
            else:
                raise SpecError(f"vertex type {kind!r} is not available for the Dirac operator")
            _check_pair(g, v, *pairs[v], 2 * d)
        return assemble_bond_scattering(g, dirac_transitions_from_pairs(g, pairs, mass), mass)
    if op == "pauli":
        fields = spec.get("edge_fields") or [[0.0, 0.0, 0.0]] * g.n_edges
        if len(fields) != g.n_edges:
            raise SpecError("edge_fields needs one 3-vector per edge")
        kinds = {v: e.get("type", "neumann") for v, e in conds.items()}
        eps = {v: float(e.get("epsilon", 0.0)) for v, e in conds.items()}
        pairs = pauli_laplace_pairs(g, {v: k for v, k in kinds.items() if k != "custom"}, eps)
        for v, e in conds.items():
            if kinds[v] == "custom":
                pairs[v] = (_cmatrix(e["A"]), _cmatrix(e["B"]))
            _check_pair(g, v, *pairs[v], 2 * g.degree(v))
        return pauli_bond_scattering(g, pairs, fields)
    eps: dict[int, float | str] = {}
    for v, e in conds.items():
        kind = e.get("type", "neumann")
        if kind == "dirichlet":
            eps[v] = DIRICHLET
        elif kind in ("neumann", "delta"):
            eps[v] = float(e.get("epsilon", 0.0)) if kind == "delta" else 0.0
        else:
            raise SpecError(f"vertex type {kind!r} is not available for the Rashba operator")
    params = RashbaParams(float(spec.get("k_rashba", 0.0)), spec.get("edge_potentials"), eps)
    return rashba_bond_scattering(g, params)


def _check_pair(g, v, A, B, dim):
    if A.shape != (dim, dim) or B.shape != (dim, dim):
        raise MatchingError(f"vertex {g.vertices[v].id!r}: matching matrices must be {dim}x{dim}")
    if not check_self_adjoint(A, B):
        raise MatchingError(f"self-adjointness violated at vertex {g.vertices[v].id!r}")


# tables

def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return repr(float(x))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SpecError(f"{path} is empty")
    return rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    inputs: dict = field(default_factory=dict)
    operator: Any = None
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None
    version: str = __version__
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
