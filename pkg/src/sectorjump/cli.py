"""Command-line interface.

Subcommands: inspect, repify, liouvillian, steadystate, trajectories,
compare.  Each takes --config PATH plus optional --out DIR, --workers N,
--seed S and --tol X overrides; the subcommand selects the task (the
config's own "task" key is overridden).

Exit codes: 0 success, 2 schema error, 3 certification failure,
4 numerical failure.

Artifacts are JSON (complex numbers as [re, im] pairs, matrices row-major)
and CSV time series (columns time, observable, mean, stderr, method); both
carry full-precision floats and no timestamps, so identical configs and
seeds reproduce byte-identical files.  Report-style tasks also render PNG
figures next to the delimited output when "png" is among the output
formats.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import (
    RunConfig,
    encode_matrix,
    encode_scalar,
    parse_config_data,
    realize_initial_state,
    realize_model,
    realize_observables,
    realize_symmetry,
)
from .errors import (
    CertificationError,
    NotCertified,
    NotWeaklySymmetric,
    NumericalError,
    SchemaError,
    SectorJumpError,
)
from .liouville import (
    _pair_flat,
    assemble_dense,
    build_blocks,
    build_dense,
    propagate,
    steady_state,
)
from .qjmc import SectorEngine, ensemble_average
from .representation import certify, minimal_weak_rep, projected_weak_rep
from .symmetry import (
    UNITARY,
    AbelianGroupSpec,
    decompose,
    joint_decompose,
    weak_symmetry_residual,
)

__all__ = ["main", "run", "build_parser"]

_COMMANDS = (
    ("inspect", "decompose the declared symmetry into sectors and SuperShifts"),
    ("repify", "construct a weakly symmetric representation and certify it"),
    ("liouvillian", "emit dense and block generator matrices with residuals"),
    ("steadystate", "solve the symmetric block for the stationary state"),
    ("trajectories", "run a quantum-jump ensemble and report observables"),
    ("compare", "cross-check dense, block and trajectory propagation"),
)

# matrices bigger than this are summarized instead of embedded in JSON
_JSON_MATRIX_SIDE = 64


def _f(x) -> str:
    return repr(float(x))


def _write_json(path: Path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _encode_label(label):
    if isinstance(label, tuple):
        return [encode_scalar(x) for x in label]
    return encode_scalar(label)


def _label_text(label, kinds) -> str:
    parts = label if isinstance(label, tuple) else (label,)
    texts = []
    for part, kind in zip(parts, kinds):
        if kind == UNITARY:
            texts.append(f"phase {np.angle(complex(part)):+.6f}")
        else:
            texts.append(f"{complex(part).real:+.6f}")
    return ", ".join(texts)


def _encode_sector_field(value):
    """Sector-before/after fields: None, an int, or a per-component map."""
    if value is None or isinstance(value, int):
        return value
    return {str(k): v for k, v in sorted(value.items())}


# ---- preparation shared by all tasks -------------------------------------------

class _Workspace:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.rep = realize_model(cfg)
        self.spec = realize_symmetry(cfg)
        self.dec = None
        self.residual = None
        self.wrep = None
        self.certificate = None
        if self.spec is not None:
            self.residual = weak_symmetry_residual(self.rep, self.spec)
            if isinstance(self.spec, AbelianGroupSpec):
                self.dec = joint_decompose(self.spec)
            else:
                self.dec = decompose(self.spec)
        if self.spec is not None and cfg.representation != "original":
            if cfg.representation == "projected":
                self.wrep = projected_weak_rep(self.rep, self.dec)
            else:
                self.wrep = minimal_weak_rep(self.rep, self.spec)
            self.certificate = certify(self.wrep, self.rep, self.spec,
                                       tol=cfg.tol)
            if not self.certificate.ok:
                bad = ", ".join(
                    f"{name}={value:.3e}"
                    for name, value in self.certificate.items.items()
                    if value > cfg.tol
                )
                raise NotCertified(
                    f"certification residuals above {cfg.tol}: {bad}"
                )


# ---- task handlers -----------------------------------------------------------------

def _task_inspect(ws: _Workspace, out: Path):
    cfg, dec = ws.cfg, ws.dec
    payload = {
        "dim": dec.dim,
        "kinds": list(dec.kinds),
        "weak_symmetry_residual": float(ws.residual),
        "sectors": [
            {
                "index": s.index,
                "label": _encode_label(s.label),
                "dim": s.dim,
            }
            for s in dec.sectors
        ],
        "super_shifts": [
            {
                "index": i,
                "value": _encode_label(shift.value),
                "pairs": [[k, l] for (k, l) in shift.pairs],
            }
            for i, shift in enumerate(dec.super_shifts)
        ],
    }
    artifacts = {}
    if "json" in cfg.formats:
        _write_json(out / "inspect.json", payload)
        artifacts["json"] = out / "inspect.json"
    print(f"dimension {dec.dim}, residual {ws.residual:.3e}")
    print(f"{'sector':>6}  {'dim':>4}  label")
    for s in dec.sectors:
        print(f"{s.index:>6}  {s.dim:>4}  {_label_text(s.label, dec.kinds)}")
    print(f"{len(dec.super_shifts)} SuperShifts:")
    for i, shift in enumerate(dec.super_shifts):
        print(f"{i:>6}  {_label_text(shift.value, dec.kinds):<24} "
              f"pairs {list(shift.pairs)}")
    if ws.residual > cfg.tol:
        raise NotWeaklySymmetric(
            f"declared symmetry has commutator residual {ws.residual:.3e} "
            f"above {cfg.tol}"
        )
    return artifacts


def _task_repify(ws: _Workspace, out: Path):
    cfg, wrep = ws.cfg, ws.wrep
    payload = {
        "provenance": wrep.provenance,
        "kinds": list(wrep.kinds),
        "dim": wrep.dim,
        "hamiltonian": encode_matrix(wrep.hamiltonian),
        "jumps": [
            {
                "matrix": encode_matrix(j),
                "shift": _encode_label(s),
                "rate": float(np.linalg.norm(j) ** 2),
            }
            for j, s in zip(wrep.jumps, wrep.shifts)
        ],
        "certificate": {k: float(v) for k, v in ws.certificate.items.items()},
        "weak_symmetry_residual": float(ws.residual),
    }
    artifacts = {}
    if "json" in cfg.formats:
        _write_json(out / "rep.json", payload)
        artifacts["json"] = out / "rep.json"
    print(f"{cfg.representation} representation: {len(wrep.jumps)} jumps, "
          f"dim {wrep.dim}")
    for name, value in ws.certificate.items.items():
        print(f"  {name:<20} {value:.3e}")
    return artifacts


def _task_liouvillian(ws: _Workspace, out: Path):
    cfg = ws.cfg
    dense = build_dense(ws.rep)
    payload = {
        "dim": ws.rep.dim,
        "superoperator_side": dense.shape[0],
    }
    if dense.shape[0] <= _JSON_MATRIX_SIDE:
        payload["dense"] = encode_matrix(dense)
    blocks = None
    if ws.wrep is not None:
        blocks = build_blocks(ws.wrep, ws.dec, tol=cfg.tol)
        equality = float(
            np.linalg.norm(assemble_dense(blocks) - dense)
            / max(np.linalg.norm(dense), 1e-300)
        )
        payload["equality_residual"] = equality
        payload["blocks"] = []
        for i, (shift, bmat) in enumerate(
            zip(ws.dec.super_shifts, blocks.blocks)
        ):
            entry = {
                "shift": _encode_label(shift.value),
                "pairs": [[k, l] for (k, l) in shift.pairs],
                "side": bmat.shape[0],
            }
            if bmat.shape[0] <= _JSON_MATRIX_SIDE:
                entry["matrix"] = encode_matrix(bmat)
            payload["blocks"].append(entry)
    artifacts = {}
    if "json" in cfg.formats:
        _write_json(out / "liouvillian.json", payload)
        artifacts["json"] = out / "liouvillian.json"
    if "png" in cfg.formats:
        from . import plots

        if ws.dec is not None:
            vmat = ws.dec.change_of_basis
            wmat = np.kron(vmat, vmat.conj())
            rotated = wmat.conj().T @ dense @ wmat
            order = np.concatenate(
                [
                    np.concatenate([_pair_flat(ws.dec, k, l)
                                    for (k, l) in shift.pairs])
                    for shift in ws.dec.super_shifts
                ]
            )
            shown = rotated[np.ix_(order, order)]
            sizes = [
                sum(ws.dec.sectors[k].dim * ws.dec.sectors[l].dim
                    for (k, l) in shift.pairs)
                for shift in ws.dec.super_shifts
            ]
            boundaries = list(np.cumsum(sizes)[:-1])
            title = (f"generator in the symmetry eigenbasis "
                     f"({len(sizes)} SuperShift blocks)")
        else:
            shown = dense
            boundaries = []
            title = "dense generator"
        plots.save_block_heatmap(out / "liouvillian.png", shown, boundaries,
                                 title)
        artifacts["png"] = out / "liouvillian.png"
    if blocks is not None:
        print(f"{len(blocks.blocks)} blocks, equality residual "
              f"{payload['equality_residual']:.3e}")
        if payload["equality_residual"] > 1e-6:
            raise NumericalError(
                "block and dense generators disagree: residual "
                f"{payload['equality_residual']:.3e}"
            )
    else:
        print(f"dense generator side {dense.shape[0]} (no block form for "
              "the original representation)")
    return artifacts


def _task_steadystate(ws: _Workspace, out: Path):
    cfg = ws.cfg
    wrep = ws.wrep
    if wrep is None:
        wrep = projected_weak_rep(ws.rep, ws.dec)
    blocks = build_blocks(wrep, ws.dec, tol=cfg.tol)
    report = steady_state(blocks)
    dec = ws.dec
    vmat = dec.change_of_basis
    rho_eig_vec = (vmat.conj().T @ report.state @ vmat).reshape(-1)
    sym_flat = blocks.flat_indices[dec.symmetric_index]
    sym_part = np.zeros_like(rho_eig_vec)
    sym_part[sym_flat] = rho_eig_vec[sym_flat]
    support_residual = float(
        np.linalg.norm(rho_eig_vec - sym_part)
        / max(np.linalg.norm(rho_eig_vec), 1e-300)
    )
    payload = {
        "state": encode_matrix(report.state),
        "residual": float(report.residual),
        "null_multiplicity": int(report.null_multiplicity),
        "symmetric_support_residual": support_residual,
        "trace": encode_scalar(np.trace(report.state)),
    }
    artifacts = {}
    if "json" in cfg.formats:
        _write_json(out / "steadystate.json", payload)
        artifacts["json"] = out / "steadystate.json"
    if "png" in cfg.formats:
        from . import plots

        plots.save_state_heatmap(out / "steadystate.png", report.state,
                                 "stationary state magnitude")
        artifacts["png"] = out / "steadystate.png"
    print(f"stationary state: residual {report.residual:.3e}, "
          f"multiplicity {report.null_multiplicity}, symmetric-class "
          f"leakage {support_residual:.3e}")
    return artifacts


def _engine_and_initial(ws: _Workspace, psi0):
    if ws.wrep is not None:
        engine = SectorEngine(ws.wrep, ws.dec, tol=ws.cfg.tol)
        return engine, engine.components_from_full(psi0)
    return ws.rep, psi0


def _sector_weight_table(records, dec):
    """Mean weight of each sector at each sample index, from snapshots."""
    n_times = len(records[0].samples)
    weights = np.zeros((dec.n_sectors, n_times))
    for record in records:
        for ti, snap in enumerate(record.samples):
            for l, sector in enumerate(dec.sectors):
                amp = sector.basis.conj().T @ snap.state
                weights[l, ti] += float(np.linalg.norm(amp) ** 2)
    return weights / len(records)


def _task_trajectories(ws: _Workspace, out: Path):
    cfg = ws.cfg
    dim = ws.rep.dim
    observables = realize_observables(cfg, dim)
    psi0 = realize_initial_state(cfg, dim)
    model, initial = _engine_and_initial(ws, psi0)
    estimate = ensemble_average(
        model, initial, cfg.sample_times, cfg.n_traj, cfg.seed,
        observables=observables, workers=cfg.workers, keep_records=True,
    )
    artifacts = {}
    if "csv" in cfg.formats:
        rows = []
        for o, name in enumerate(estimate.observable_names):
            for ti, t in enumerate(estimate.times):
                rows.append([_f(t), name, _f(estimate.means[ti, o]),
                             _f(estimate.stderrs[ti, o]), "qjmc"])
        _write_csv(out / "timeseries.csv",
                   ["time", "observable", "mean", "stderr", "method"], rows)
        artifacts["csv"] = out / "timeseries.csv"
    if "json" in cfg.formats:
        logs = []
        for i, record in enumerate(estimate.records):
            logs.append({
                "trajectory": i,
                "seed": list(record.seed) if isinstance(record.seed, tuple)
                else record.seed,
                "censored_at": float(record.censored_at),
                "events": [
                    {
                        "time": float(e.time),
                        "jump_index": e.jump_index,
                        "shift": _encode_label(e.shift) if e.shift is not None
                        else None,
                        "sector_before": _encode_sector_field(e.sector_before),
                        "sector_after": _encode_sector_field(e.sector_after),
                    }
                    for e in record.events
                ],
            })
        _write_json(out / "events.json", logs)
        artifacts["events"] = out / "events.json"
    weights = None
    if ws.dec is not None:
        weights = _sector_weight_table(estimate.records, ws.dec)
        if "csv" in cfg.formats:
            rows = []
            for ti, t in enumerate(estimate.times):
                for l in range(ws.dec.n_sectors):
                    rows.append([_f(t), str(l), _f(weights[l, ti])])
            _write_csv(out / "occupations.csv", ["time", "sector", "weight"],
                       rows)
            artifacts["occupations"] = out / "occupations.csv"
    if "png" in cfg.formats:
        from . import plots

        plots.save_timeseries_figure(
            out / "timeseries.png", estimate.times, estimate.observable_names,
            estimate.means, estimate.stderrs,
            f"quantum-jump ensemble, n_traj={estimate.n_traj}",
        )
        artifacts["png"] = out / "timeseries.png"
        if weights is not None:
            labels = [
                f"sector {l} ({_label_text(s.label, ws.dec.kinds)})"
                for l, s in enumerate(ws.dec.sectors)
            ]
            plots.save_sector_occupation_figure(
                out / "sectors.png", estimate.times, weights, labels,
                "mean sector occupation",
            )
            artifacts["sectors"] = out / "sectors.png"
    total_jumps = sum(len(r.events) for r in estimate.records)
    print(f"{estimate.n_traj} trajectories, {total_jumps} jumps total")
    for o, name in enumerate(estimate.observable_names):
        print(f"  <{name}>(t={estimate.times[-1]:g}) = "
              f"{estimate.means[-1, o]:+.6f} +- {estimate.stderrs[-1, o]:.6f}")
    return artifacts


def _task_compare(ws: _Workspace, out: Path):
    cfg = ws.cfg
    dim = ws.rep.dim
    observables = realize_observables(cfg, dim)
    psi0 = realize_initial_state(cfg, dim)
    rho0 = np.outer(psi0, psi0.conj())
    times = cfg.sample_times
    names = [name for name, _ in observables]
    mats = [mat for _, mat in observables]

    lmat = build_dense(ws.rep)
    dense_means = np.empty((len(times), len(mats)))
    for ti, t in enumerate(times):
        rho_t = propagate(lmat, rho0, t)
        for o, mat in enumerate(mats):
            dense_means[ti, o] = float(np.trace(mat @ rho_t).real)

    block_means = None
    if ws.wrep is not None:
        blocks = build_blocks(ws.wrep, ws.dec, tol=cfg.tol)
        block_means = np.empty_like(dense_means)
        for ti, t in enumerate(times):
            rho_t = propagate(blocks, rho0, t)
            for o, mat in enumerate(mats):
                block_means[ti, o] = float(np.trace(mat @ rho_t).real)

    model, initial = _engine_and_initial(ws, psi0)
    estimate = ensemble_average(
        model, initial, times, cfg.n_traj, cfg.seed,
        observables=observables, workers=cfg.workers,
    )

    rows = []
    for o, name in enumerate(names):
        for ti, t in enumerate(times):
            rows.append([_f(t), name, _f(dense_means[ti, o]), _f(0.0),
                         "dense"])
        if block_means is not None:
            for ti, t in enumerate(times):
                rows.append([_f(t), name, _f(block_means[ti, o]), _f(0.0),
                             "block"])
        for ti, t in enumerate(times):
            rows.append([_f(t), name, _f(estimate.means[ti, o]),
                         _f(estimate.stderrs[ti, o]), "qjmc"])

    scale = max(1.0, float(np.abs(dense_means).max()))
    sigma = np.maximum(estimate.stderrs, 1e-12)
    qjmc_sigmas = np.abs(estimate.means - dense_means) / sigma
    per_obs = {}
    for o, name in enumerate(names):
        entry = {"qjmc_max_sigma": float(qjmc_sigmas[:, o].max())}
        if block_means is not None:
            entry["block_vs_dense"] = float(
                np.abs(block_means[:, o] - dense_means[:, o]).max()
            )
        per_obs[name] = entry
    payload = {
        "times": [float(t) for t in times],
        "n_traj": estimate.n_traj,
        "per_observable": per_obs,
        "qjmc_max_sigma": float(qjmc_sigmas.max()),
    }
    if block_means is not None:
        payload["block_vs_dense_max"] = float(
            np.abs(block_means - dense_means).max()
        )

    artifacts = {}
    if "csv" in cfg.formats:
        _write_csv(out / "compare.csv",
                   ["time", "observable", "mean", "stderr", "method"], rows)
        artifacts["csv"] = out / "compare.csv"
    if "json" in cfg.formats:
        _write_json(out / "compare.json", payload)
        artifacts["json"] = out / "compare.json"
    if "png" in cfg.formats:
        from . import plots

        series = {"dense": dense_means, "qjmc": estimate.means}
        stderrs = {"dense": None, "qjmc": estimate.stderrs}
        if block_means is not None:
            series["block"] = block_means
            stderrs["block"] = None
        plots.save_compare_figure(
            out / "compare.png", times, names, series, stderrs,
            f"dense vs block vs qjmc, n_traj={estimate.n_traj}",
        )
        artifacts["png"] = out / "compare.png"

    print(f"max |qjmc - dense| = {qjmc_sigmas.max():.2f} sigma")
    if block_means is not None:
        print("max |block - dense| = "
              f"{payload['block_vs_dense_max']:.3e}")
    if block_means is not None and payload["block_vs_dense_max"] > 1e-9 * scale:
        raise NumericalError(
            "block propagation deviates from dense: "
            f"{payload['block_vs_dense_max']:.3e}"
        )
    if float(qjmc_sigmas.max()) > 4.0:
        raise NumericalError(
            f"trajectory ensemble deviates from dense propagation by "
            f"{qjmc_sigmas.max():.2f} standard errors"
        )
    return artifacts


_HANDLERS = {
    "inspect": _task_inspect,
    "repify": _task_repify,
    "liouvillian": _task_liouvillian,
    "steadystate": _task_steadystate,
    "trajectories": _task_trajectories,
    "compare": _task_compare,
}


def run(cfg: RunConfig) -> dict:
    """Execute a validated config; returns {artifact name: path}."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ws = _Workspace(cfg)
    return _HANDLERS[cfg.task](ws, out)


# ---- argument parsing ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sectorjump",
        description="simulate Markovian open quantum systems in symmetry "
                    "sectors",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in _COMMANDS:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="JSON config path")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--workers", type=int, default=None,
                         help="trajectory worker processes")
        cmd.add_argument("--seed", type=int, default=None,
                         help="master seed (overrides config)")
        cmd.add_argument("--tol", type=float, default=None,
                         help="certification tolerance (overrides config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise SchemaError([f"config file: {exc}"]) from exc
        except json.JSONDecodeError as exc:
            raise SchemaError([f"config file: invalid JSON ({exc})"]) from exc
        if not isinstance(data, dict):
            raise SchemaError(["top level: must be an object"])
        data["task"] = args.command
        if args.seed is not None:
            data.setdefault("simulation", {})["seed"] = args.seed
        if args.workers is not None:
            data.setdefault("simulation", {})["workers"] = args.workers
        if args.out is not None:
            data.setdefault("output", {})["directory"] = args.out
        if args.tol is not None:
            data["tol"] = args.tol
        cfg = parse_config_data(data)
        run(cfg)
        return 0
    except SchemaError as exc:
        for problem in exc.problems:
            print(f"schema: {problem}", file=sys.stderr)
        return 2
    except CertificationError as exc:
        print(f"certification: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except SectorJumpError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
