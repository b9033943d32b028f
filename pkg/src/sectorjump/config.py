"""Run configuration: JSON schema, validation, and realization helpers.

Configs are single JSON documents.  Complex scalars are encoded as
[re, im] pairs and matrices as row-major nested arrays whose elements are
plain numbers or such pairs; both directions round-trip at full precision
(json emits shortest-repr floats).  Validation collects every problem with
its key path before raising, so a bad config is fixable in one pass.

Observables are named either by a matrix literal or by a Pauli-string
expression: '+'-separated terms, each an optional real coefficient,
a '*', and a string over {I, X, Y, Z} with one letter per qubit
(e.g. "0.5*XX + 0.5*YY", "ZI").
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SchemaError
from .models import (
    ChainSpec,
    SpinModelSpec,
    build_chain,
    build_spin_model,
    total_sz,
    translation_operator,
)
from .opcore import ID2, SIGMA_X, SIGMA_Y, SIGMA_Z, as_operator, is_hermitian
from .representation import LindbladRep
from .symmetry import (
    GENERATOR,
    UNITARY,
    AbelianGroupSpec,
    SymmetrySpec,
)

__all__ = [
    "TASKS",
    "REPRESENTATIONS",
    "RunConfig",
    "parse_config",
    "parse_config_data",
    "parse_scalar",
    "parse_matrix",
    "parse_vector",
    "encode_scalar",
    "encode_matrix",
    "encode_vector",
    "pauli_string_operator",
    "realize_model",
    "realize_symmetry",
    "realize_observables",
    "realize_initial_state",
]

TASKS = ("inspect", "repify", "liouvillian", "steadystate", "trajectories",
         "compare")
REPRESENTATIONS = ("original", "projected", "minimal")
_FORMATS = ("json", "csv", "png")

_PAULI = {"I": ID2, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


# ---- scalar / matrix codecs -----------------------------------------------------

def parse_scalar(value) -> complex:
    """A JSON number, or a [re, im] pair."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                for x in value)
    ):
        return complex(value[0], value[1])
    raise ValueError(f"not a number or [re, im] pair: {value!r}")


def parse_vector(value) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValueError("vector must be a nonempty array")
    return np.array([parse_scalar(x) for x in value], dtype=complex)


def parse_matrix(value) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValueError("matrix must be a nonempty array of rows")
    rows = []
    width = None
    for row in value:
        if not isinstance(row, list) or not row:
            raise ValueError("matrix rows must be nonempty arrays")
        parsed = [parse_scalar(x) for x in row]
        if width is None:
            width = len(parsed)
        elif len(parsed) != width:
            raise ValueError("matrix rows have unequal lengths")
        rows.append(parsed)
    return np.array(rows, dtype=complex)


def encode_scalar(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def encode_vector(v) -> list:
    return [encode_scalar(z) for z in np.asarray(v).ravel()]


def encode_matrix(a) -> list:
    a = np.asarray(a)
    return [[encode_scalar(z) for z in row] for row in a]


def pauli_string_operator(expr: str, dim: int) -> np.ndarray:
    """Operator for a '+'-separated sum of coefficient*PauliString terms."""
    n_qubits = int(dim).bit_length() - 1
    if 2 ** n_qubits != dim:
        raise DimensionMismatch(
            f"Pauli strings need a power-of-2 dimension, got {dim}"
        )
    total = np.zeros((dim, dim), dtype=complex)
    for raw in str(expr).split("+"):
        term = raw.strip()
        if not term:
            raise ValueError(f"empty term in {expr!r}")
        if "*" in term:
            coeff_text, letters = term.split("*", 1)
            coeff = float(coeff_text.strip())
            letters = letters.strip()
        else:
            coeff, letters = 1.0, term
        if len(letters) != n_qubits:
            raise ValueError(
                f"term {letters!r} has {len(letters)} letters, need {n_qubits}"
            )
        mat = np.eye(1, dtype=complex)
        for ch in letters:
            if ch not in _PAULI:
                raise ValueError(f"unknown Pauli letter {ch!r} in {expr!r}")
            mat = np.kron(mat, _PAULI[ch])
        total += coeff * mat
    return total


# ---- config record ------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    task: str
    model_kind: str
    model_params: dict
    symmetry_entries: tuple
    representation: str = "original"
    t_final: float = None
    sample_times: tuple = ()
    n_traj: int = None
    seed: int = None
    workers: int = 1
    observables: tuple = ()
    initial_state: object = None
    out_dir: str = "."
    formats: tuple = ("json", "csv")
    tol: float = 1e-8


# ---- validation ------------------------------------------------------------------------

class _Collector:
    def __init__(self):
        self.problems = []

    def add(self, path, message):
        self.problems.append(f"{path}: {message}")

    def matrix(self, data, path, hermitian=False, square=True):
        try:
            mat = parse_matrix(data)
        except ValueError as exc:
            self.add(path, str(exc))
            return None
        if square and mat.shape[0] != mat.shape[1]:
            self.add(path, f"matrix is {mat.shape[0]}x{mat.shape[1]}, not square")
            return None
        if hermitian and not is_hermitian(mat):
            self.add(path, "matrix is not Hermitian")
            return None
        return mat


def _validate_model(data, col: _Collector):
    if not isinstance(data, dict):
        col.add("model", "must be an object")
        return None, {}
    kind = data.get("builder")
    if kind not in ("chain", "spin", "explicit"):
        col.add("model.builder", "must be one of chain, spin, explicit")
        return None, {}
    params = {}
    if kind == "explicit":
        if "hamiltonian" not in data:
            col.add("model.hamiltonian", "required for explicit models")
        else:
            params["hamiltonian"] = col.matrix(
                data["hamiltonian"], "model.hamiltonian", hermitian=True
            )
        jumps = data.get("jumps", [])
        if not isinstance(jumps, list):
            col.add("model.jumps", "must be an array of matrices")
            jumps = []
        parsed = []
        for i, j in enumerate(jumps):
            mat = col.matrix(j, f"model.jumps[{i}]")
            if mat is not None:
                parsed.append(mat)
        params["jumps"] = tuple(parsed)
        dims = {m.shape[0] for m in parsed if m is not None}
        if params.get("hamiltonian") is not None:
            dims.add(params["hamiltonian"].shape[0])
        if len(dims) > 1:
            col.add("model.jumps", "operator dimensions disagree")
    elif kind == "chain":
        for key in ("n_sites", "local_dim"):
            value = data.get(key)
            if not isinstance(value, int) or value < 1:
                col.add(f"model.{key}", "must be a positive integer")
            else:
                params[key] = value
        terms = []
        for i, term in enumerate(data.get("hamiltonian_terms", [])):
            ops_data = term.get("ops") if isinstance(term, dict) else term
            if not isinstance(ops_data, list) or not ops_data:
                col.add(f"model.hamiltonian_terms[{i}]",
                        "must be a nonempty array of matrices")
                continue
            ops = []
            for s, op in enumerate(ops_data):
                mat = col.matrix(op, f"model.hamiltonian_terms[{i}][{s}]")
                if mat is not None:
                    ops.append(mat)
            terms.append(tuple(ops))
        params["hamiltonian_terms"] = tuple(terms)
        jumps = []
        for i, entry in enumerate(data.get("jumps", [])):
            if not isinstance(entry, dict) or "op" not in entry:
                col.add(f"model.jumps[{i}]", "must be an object with 'op'")
                continue
            mat = col.matrix(entry["op"], f"model.jumps[{i}].op")
            rate = entry.get("rate", 1.0)
            if not isinstance(rate, (int, float)) or rate < 0:
                col.add(f"model.jumps[{i}].rate", "must be a nonnegative number")
                rate = 0.0
            if mat is not None:
                jumps.append((mat, str(entry.get("label", f"jump{i}")),
                              float(rate)))
        params["jumps"] = tuple(jumps)
    else:  # spin
        n = data.get("n_spins")
        if not isinstance(n, int) or n < 1:
            col.add("model.n_spins", "must be a positive integer")
        else:
            params["n_spins"] = n
        if "couplings_v" in data:
            mat = col.matrix(data["couplings_v"], "model.couplings_v")
            if mat is not None:
                if np.abs(mat.imag).max() > 0.0:
                    col.add("model.couplings_v", "must be a real matrix")
                else:
                    params["couplings_v"] = mat.real
        w_terms = []
        for i, item in enumerate(data.get("couplings_w", [])):
            if (not isinstance(item, list) or len(item) != 5
                    or not all(isinstance(x, (int, float)) for x in item)):
                col.add(f"model.couplings_w[{i}]",
                        "must be [j, k, l, m, weight]")
                continue
            w_terms.append((int(item[0]), int(item[1]), int(item[2]),
                            int(item[3]), float(item[4])))
        params["couplings_w"] = tuple(w_terms)
        if "rates" in data:
            rates = data["rates"]
            if (not isinstance(rates, list)
                    or not all(isinstance(r, (int, float)) and r >= 0
                               for r in rates)):
                col.add("model.rates", "must be an array of nonnegative numbers")
            else:
                params["rates"] = tuple(float(r) for r in rates)
    return kind, params


def _validate_symmetry(data, col: _Collector):
    if data is None:
        return ()
    entries_data = data.get("members") if isinstance(data, dict) and \
        "members" in data else [data]
    if not isinstance(entries_data, list) or not entries_data:
        col.add("symmetry.members", "must be a nonempty array")
        return ()
    entries = []
    for i, entry in enumerate(entries_data):
        path = f"symmetry.members[{i}]" if len(entries_data) > 1 else "symmetry"
        if not isinstance(entry, dict):
            col.add(path, "must be an object")
            continue
        kind = entry.get("kind")
        if kind not in (UNITARY, GENERATOR):
            col.add(f"{path}.kind", f"must be '{UNITARY}' or '{GENERATOR}'")
            continue
        op = entry.get("op")
        if isinstance(op, str):
            if op not in ("translation", "total_sz"):
                col.add(f"{path}.op",
                        "named operators are 'translation' or 'total_sz'")
                continue
        else:
            op = col.matrix(op, f"{path}.op")
            if op is None:
                continue
        tol = entry.get("tol_cluster", 1e-8)
        if not isinstance(tol, (int, float)) or tol <= 0:
            col.add(f"{path}.tol_cluster", "must be a positive number")
            continue
        entries.append((kind, op, float(tol)))
    return tuple(entries)


def _validate_simulation(data, task, col: _Collector):
    out = {
        "t_final": None, "sample_times": (), "n_traj": None, "seed": None,
        "workers": 1, "observables": (), "initial_state": None,
    }
    needs_sim = task in ("trajectories", "compare")
    if data is None:
        if needs_sim:
            col.add("simulation", f"required for task '{task}'")
        return out
    if not isinstance(data, dict):
        col.add("simulation", "must be an object")
        return out

    times = data.get("sample_times")
    if times is not None:
        if (not isinstance(times, list) or not times
                or not all(isinstance(t, (int, float)) for t in times)):
            col.add("simulation.sample_times", "must be a nonempty number array")
        else:
            floats = [float(t) for t in times]
            if any(t < 0 for t in floats):
                col.add("simulation.sample_times", "times must be nonnegative")
            elif any(b <= a for a, b in zip(floats, floats[1:])):
                col.add("simulation.sample_times",
                        "times must be strictly increasing")
            else:
                out["sample_times"] = tuple(floats)
    elif needs_sim:
        col.add("simulation.sample_times", f"required for task '{task}'")

    t_final = data.get("t_final")
    if t_final is not None:
        if not isinstance(t_final, (int, float)) or t_final < 0:
            col.add("simulation.t_final", "must be a nonnegative number")
        else:
            out["t_final"] = float(t_final)
            if out["sample_times"] and out["sample_times"][-1] > float(t_final):
                col.add("simulation.sample_times", "times exceed t_final")

    n_traj = data.get("n_traj")
    if n_traj is not None:
        if not isinstance(n_traj, int) or n_traj < 1:
            col.add("simulation.n_traj", "must be a positive integer")
        else:
            out["n_traj"] = n_traj
    elif needs_sim:
        col.add("simulation.n_traj", f"required for task '{task}'")

    seed = data.get("seed")
    if seed is not None:
        if not isinstance(seed, int):
            col.add("simulation.seed", "must be an integer")
        else:
            out["seed"] = seed
    elif needs_sim:
        col.add("simulation.seed", f"required for task '{task}'")

    workers = data.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        col.add("simulation.workers", "must be a positive integer")
    else:
        out["workers"] = workers

    obs = data.get("observables")
    if obs is not None:
        if not isinstance(obs, dict) or not obs:
            col.add("simulation.observables", "must be a nonempty object")
        else:
            parsed = []
            for name, value in obs.items():
                if isinstance(value, str):
                    parsed.append((str(name), ("pauli", value)))
                else:
                    mat = col.matrix(value, f"simulation.observables.{name}",
                                     hermitian=True)
                    if mat is not None:
                        parsed.append((str(name), ("matrix", mat)))
            out["observables"] = tuple(parsed)
    elif needs_sim:
        col.add("simulation.observables", f"required for task '{task}'")

    init = data.get("initial_state")
    if init is not None:
        if isinstance(init, int) and not isinstance(init, bool):
            out["initial_state"] = init
        else:
            try:
                out["initial_state"] = parse_vector(init)
            except (ValueError, TypeError) as exc:
                col.add("simulation.initial_state", str(exc))
    elif needs_sim:
        col.add("simulation.initial_state", f"required for task '{task}'")
    return out


def parse_config_data(data) -> RunConfig:
    """Validate an already-loaded JSON document."""
    col = _Collector()
    if not isinstance(data, dict):
        raise SchemaError(["top level: must be an object"])

    task = data.get("task")
    if task not in TASKS:
        col.add("task", f"must be one of {', '.join(TASKS)}")
        task = None

    model_kind, model_params = _validate_model(data.get("model"), col)
    symmetry_entries = _validate_symmetry(data.get("symmetry"), col)
    if task in ("inspect", "repify", "liouvillian", "steadystate") \
            and not symmetry_entries and "symmetry" not in data:
        col.add("symmetry", f"required for task '{task}'")

    representation = data.get("representation", "original")
    if representation not in REPRESENTATIONS:
        col.add("representation",
                f"must be one of {', '.join(REPRESENTATIONS)}")
        representation = "original"
    if task == "repify" and representation == "original":
        col.add("representation",
                "task 'repify' needs 'projected' or 'minimal'")

    sim = _validate_simulation(data.get("simulation"), task, col)

    out_dir = "."
    formats = ("json", "csv")
    output = data.get("output")
    if output is not None:
        if not isinstance(output, dict):
            col.add("output", "must be an object")
        else:
            directory = output.get("directory", ".")
            if not isinstance(directory, str):
                col.add("output.directory", "must be a string")
            else:
                out_dir = directory
            fmts = output.get("formats")
            if fmts is not None:
                if (not isinstance(fmts, list)
                        or not all(isinstance(f, str) and f in _FORMATS
                                   for f in fmts)):
                    col.add("output.formats",
                            f"must be an array drawn from {_FORMATS}")
                else:
                    formats = tuple(fmts)

    tol = data.get("tol", 1e-8)
    if not isinstance(tol, (int, float)) or tol <= 0:
        col.add("tol", "must be a positive number")
        tol = 1e-8

    if col.problems:
        raise SchemaError(col.problems)
    return RunConfig(
        task=task,
        model_kind=model_kind,
        model_params=model_params,
        symmetry_entries=symmetry_entries,
        representation=representation,
        t_final=sim["t_final"],
        sample_times=sim["sample_times"],
        n_traj=sim["n_traj"],
        seed=sim["seed"],
        workers=sim["workers"],
        observables=sim["observables"],
        initial_state=sim["initial_state"],
        out_dir=out_dir,
        formats=formats,
        tol=float(tol),
    )


def parse_config(path) -> RunConfig:
    """Load and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SchemaError([f"config file: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise SchemaError([f"config file: invalid JSON ({exc})"]) from exc
    return parse_config_data(data)


# ---- realization -----------------------------------------------------------------------

def realize_model(cfg: RunConfig) -> LindbladRep:
    if cfg.model_kind == "explicit":
        return LindbladRep(hamiltonian=cfg.model_params["hamiltonian"],
                           jumps=cfg.model_params["jumps"])
    if cfg.model_kind == "chain":
        spec = ChainSpec(
            n_sites=cfg.model_params["n_sites"],
            local_dim=cfg.model_params["local_dim"],
            local_hamiltonian_terms=cfg.model_params.get("hamiltonian_terms",
                                                         ()),
            local_jumps=cfg.model_params.get("jumps", ()),
        )
        rep, _ = build_chain(spec)
        return rep
    spec = SpinModelSpec(
        n_spins=cfg.model_params["n_spins"],
        couplings_v=cfg.model_params.get("couplings_v"),
        couplings_w=cfg.model_params.get("couplings_w", ()),
        rates=cfg.model_params.get("rates"),
    )
    rep, _ = build_spin_model(spec)
    return rep


def _named_operator(name: str, cfg: RunConfig) -> np.ndarray:
    if name == "translation":
        if cfg.model_kind != "chain":
            raise DimensionMismatch(
                "'translation' symmetry needs a chain model"
            )
        return translation_operator(cfg.model_params["n_sites"],
                                    cfg.model_params["local_dim"])
    if cfg.model_kind == "spin":
        return total_sz(cfg.model_params["n_spins"])
    if cfg.model_kind == "chain" and cfg.model_params["local_dim"] == 2:
        return total_sz(cfg.model_params["n_sites"])
    raise DimensionMismatch("'total_sz' symmetry needs qubit sites")


def realize_symmetry(cfg: RunConfig):
    """Build the declared symmetry; None when no section was given."""
    if not cfg.symmetry_entries:
        return None
    specs = []
    for kind, op, tol in cfg.symmetry_entries:
        if isinstance(op, str):
            op = _named_operator(op, cfg)
        specs.append(SymmetrySpec(kind=kind, op=op, tol_cluster=tol))
    if len(specs) == 1:
        return specs[0]
    return AbelianGroupSpec(members=tuple(specs))


def realize_observables(cfg: RunConfig, dim: int):
    """Named observable matrices, in declaration order."""
    out = []
    for name, (form, value) in cfg.observables:
        if form == "pauli":
            mat = pauli_string_operator(value, dim)
        else:
            mat = as_operator(value)
            if mat.shape[0] != dim:
                raise DimensionMismatch(
                    f"observable '{name}' has dimension {mat.shape[0]}, "
                    f"model has {dim}"
                )
        out.append((name, mat))
    return out


def realize_initial_state(cfg: RunConfig, dim: int) -> np.ndarray:
    init = cfg.initial_state
    if init is None:
        raise SchemaError(["simulation.initial_state: missing"])
    if isinstance(init, int):
        if not (0 <= init < dim):
            raise DimensionMismatch(
                f"basis index {init} out of range for dimension {dim}"
            )
        vec = np.zeros(dim, dtype=complex)
        vec[init] = 1.0
        return vec
    vec = np.asarray(init, dtype=complex)
    if vec.size != dim:
        raise DimensionMismatch(
            f"initial state has {vec.size} entries, model has {dim}"
        )
    norm = np.linalg.norm(vec)
    if norm <= 0:
        raise DimensionMismatch("initial state has zero norm")
    return vec / norm
