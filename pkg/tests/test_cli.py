"""End-to-end command line tests, run in process through main(argv)."""

import json

import numpy as np

from sectorjump.cli import main
from sectorjump.config import parse_matrix

SZ_HALF = [[0.5, 0], [0, -0.5]]
SM_LIST = [[0, 1], [0, 0]]
Z2_SYM = {"kind": "unitary", "op": [[1, 0], [0, -1]]}
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _damping_model():
    return {"builder": "explicit", "hamiltonian": SZ_HALF,
            "jumps": [SM_LIST]}


def _sim(**overrides):
    sim = {
        "sample_times": [0.25, 0.5, 1.0],
        "t_final": 1.0,
        "n_traj": 64,
        "seed": 3,
        "observables": {"pz": "Z"},
        "initial_state": 1,
    }
    sim.update(overrides)
    return sim


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _load(out_dir, name):
    return json.loads((out_dir / name).read_text())


# ---- inspect ---------------------------------------------------------------


def test_inspect_chain_sectors(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = {
        "model": {"builder": "chain", "n_sites": 2, "local_dim": 2,
                  "hamiltonian_terms": [[SZ_HALF]],
                  "jumps": [{"op": SM_LIST, "rate": 1.0, "label": "decay"}]},
        "symmetry": {"kind": "unitary", "op": "translation"},
        "output": {"directory": str(out), "formats": ["json"]},
    }
    rc = main(["inspect", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    assert "dimension 4" in capsys.readouterr().out
    payload = _load(out, "inspect.json")
    assert payload["dim"] == 4
    assert payload["kinds"] == ["unitary"]
    assert payload["weak_symmetry_residual"] <= 1e-12
    # swap symmetry: triplet (phase 0) and singlet (phase pi) sectors
    assert [s["dim"] for s in payload["sectors"]] == [3, 1]
    assert abs(payload["sectors"][0]["label"][0] - 1.0) < 1e-12
    assert abs(payload["sectors"][1]["label"][0] + 1.0) < 1e-12
    shifts = payload["super_shifts"]
    assert len(shifts) == 2
    assert shifts[0]["pairs"] == [[0, 0], [1, 1]]
    assert shifts[1]["pairs"] == [[0, 1], [1, 0]]


def test_inspect_broken_symmetry_exits_3(tmp_path, capsys):
    cfg = {
        "model": {"builder": "explicit", "hamiltonian": [[0, 1], [1, 0]],
                  "jumps": [SM_LIST]},
        "symmetry": Z2_SYM,
        "output": {"directory": str(tmp_path / "out"), "formats": ["json"]},
    }
    rc = main(["inspect", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 3
    assert "certification:" in capsys.readouterr().err


# ---- repify ----------------------------------------------------------------


def test_repify_minimal_artifact(tmp_path):
    out = tmp_path / "out"
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "representation": "minimal",
        "output": {"directory": str(out), "formats": ["json"]},
    }
    rc = main(["repify", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    payload = _load(out, "rep.json")
    assert payload["provenance"] == "minimal"
    assert payload["kinds"] == ["unitary"]
    assert payload["dim"] == 2
    assert len(payload["jumps"]) == 1
    jump = payload["jumps"][0]
    assert abs(complex(*jump["shift"]) + 1.0) < 1e-12
    assert abs(jump["rate"] - 1.0) < 1e-12
    mat = parse_matrix(jump["matrix"])
    assert np.allclose(mat, np.array(SM_LIST), atol=1e-12)
    assert all(v <= 1e-10 for v in payload["certificate"].values())


def test_repify_broken_symmetry_exits_3(tmp_path, capsys):
    cfg = {
        "model": {"builder": "explicit", "hamiltonian": [[0, 1], [1, 0]],
                  "jumps": [SM_LIST]},
        "symmetry": Z2_SYM,
        "representation": "minimal",
        "output": {"directory": str(tmp_path / "out"), "formats": ["json"]},
    }
    rc = main(["repify", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 3
    err = capsys.readouterr().err
    assert err.startswith("certification:")
    assert "NotWeaklySymmetric" in err


# ---- schema failures -------------------------------------------------------


def test_schema_error_reports_all_problems_and_exits_2(tmp_path, capsys):
    cfg = {
        "model": {"builder": "explicit", "hamiltonian": [[0, 1], [0, 0]],
                  "jumps": []},
        "symmetry": Z2_SYM,
        "simulation": {"seed": "abc"},
    }
    rc = main(["inspect", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "schema: model.hamiltonian" in err
    assert "schema: simulation.seed" in err


def test_missing_config_file_exits_2(tmp_path, capsys):
    rc = main(["inspect", "--config", str(tmp_path / "nope.json")])
    assert rc == 2
    assert "schema: config file" in capsys.readouterr().err


# ---- liouvillian -----------------------------------------------------------


def test_liouvillian_blocks_match_dense(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "representation": "minimal",
        "output": {"directory": str(out), "formats": ["json", "png"]},
    }
    rc = main(["liouvillian", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    assert "2 blocks" in capsys.readouterr().out
    payload = _load(out, "liouvillian.json")
    assert payload["superoperator_side"] == 4
    assert payload["equality_residual"] <= 1e-12
    assert [b["side"] for b in payload["blocks"]] == [2, 2]
    assert abs(complex(*payload["blocks"][0]["shift"]) - 1.0) < 1e-12
    assert abs(complex(*payload["blocks"][1]["shift"]) + 1.0) < 1e-12
    assert (out / "liouvillian.png").read_bytes()[:8] == PNG_MAGIC


def test_liouvillian_original_has_no_block_form(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "output": {"directory": str(out), "formats": ["json"]},
    }
    rc = main(["liouvillian", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    assert "no block form" in capsys.readouterr().out
    payload = _load(out, "liouvillian.json")
    assert "blocks" not in payload
    assert "equality_residual" not in payload


# ---- steadystate -----------------------------------------------------------


def test_steadystate_artifact(tmp_path):
    out = tmp_path / "out"
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "output": {"directory": str(out), "formats": ["json", "png"]},
    }
    rc = main(["steadystate", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    payload = _load(out, "steadystate.json")
    assert payload["residual"] <= 1e-10
    assert payload["null_multiplicity"] == 1
    assert payload["symmetric_support_residual"] <= 1e-10
    assert abs(complex(*payload["trace"]) - 1.0) < 1e-12
    state = parse_matrix(payload["state"])
    assert np.allclose(state, np.diag([1.0, 0.0]), atol=1e-10)
    assert (out / "steadystate.png").read_bytes()[:8] == PNG_MAGIC


def test_steadystate_degenerate_exits_4(tmp_path, capsys):
    cfg = {
        "model": {"builder": "explicit", "hamiltonian": [[0, 0], [0, 0]],
                  "jumps": [[[1, 0], [0, -1]]]},
        "symmetry": Z2_SYM,
        "output": {"directory": str(tmp_path / "out"), "formats": ["json"]},
    }
    rc = main(["steadystate", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 4
    err = capsys.readouterr().err
    assert err.startswith("numerical:")
    assert "DegenerateSteadyState" in err


# ---- trajectories ----------------------------------------------------------


def test_trajectories_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "representation": "minimal",
        "simulation": _sim(),
        "output": {"directory": str(out),
                   "formats": ["json", "csv", "png"]},
    }
    rc = main(["trajectories", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    assert "64 trajectories" in capsys.readouterr().out

    lines = (out / "timeseries.csv").read_text().splitlines()
    assert lines[0] == "time,observable,mean,stderr,method"
    assert len(lines) == 1 + 3  # three sample times, one observable
    assert all(line.endswith(",qjmc") for line in lines[1:])

    occ = (out / "occupations.csv").read_text().splitlines()
    assert occ[0] == "time,sector,weight"
    assert len(occ) == 1 + 3 * 2  # three times, two sectors

    events = _load(out, "events.json")
    assert len(events) == 64
    assert events[0]["seed"] == [3, 0]
    for record in events:
        for event in record["events"]:
            # damping only lowers: shift -1, singlet sector to triplet sector
            assert abs(complex(*event["shift"]) + 1.0) < 1e-12
            assert event["sector_before"] == 1
            assert event["sector_after"] == 0

    assert (out / "timeseries.png").read_bytes()[:8] == PNG_MAGIC
    assert (out / "sectors.png").read_bytes()[:8] == PNG_MAGIC


def test_worker_count_does_not_change_artifacts(tmp_path):
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "representation": "minimal",
        "simulation": _sim(),
        "output": {"directory": str(tmp_path / "w1"),
                   "formats": ["json", "csv"]},
    }
    path = _write(tmp_path, "run.json", cfg)
    assert main(["trajectories", "--config", path, "--workers", "1"]) == 0
    assert main(["trajectories", "--config", path, "--workers", "3",
                 "--out", str(tmp_path / "w3")]) == 0
    for name in ("timeseries.csv", "occupations.csv", "events.json"):
        assert (tmp_path / "w1" / name).read_bytes() == \
            (tmp_path / "w3" / name).read_bytes()


def test_seed_override_changes_ensemble(tmp_path):
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "representation": "minimal",
        "simulation": _sim(),
        "output": {"directory": str(tmp_path / "a"), "formats": ["json", "csv"]},
    }
    path = _write(tmp_path, "run.json", cfg)
    assert main(["trajectories", "--config", path]) == 0
    assert main(["trajectories", "--config", path, "--seed", "11",
                 "--out", str(tmp_path / "b")]) == 0
    events = _load(tmp_path / "b", "events.json")
    assert events[0]["seed"] == [11, 0]
    assert (tmp_path / "a" / "timeseries.csv").read_bytes() != \
        (tmp_path / "b" / "timeseries.csv").read_bytes()


def test_tol_override_reaches_validation(tmp_path, capsys):
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "output": {"directory": str(tmp_path / "out"), "formats": ["json"]},
    }
    path = _write(tmp_path, "run.json", cfg)
    rc = main(["steadystate", "--config", path, "--tol", "-1"])
    assert rc == 2
    assert "schema: tol" in capsys.readouterr().err


# ---- compare ---------------------------------------------------------------


def test_compare_blocks_and_trajectories_agree(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = {
        "model": _damping_model(),
        "symmetry": Z2_SYM,
        "representation": "minimal",
        "simulation": _sim(sample_times=[0.3, 0.8, 1.5], t_final=1.5,
                           n_traj=400, seed=12),
        "output": {"directory": str(out), "formats": ["json", "csv", "png"]},
    }
    rc = main(["compare", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    assert "max |block - dense|" in capsys.readouterr().out
    payload = _load(out, "compare.json")
    assert payload["n_traj"] == 400
    assert payload["block_vs_dense_max"] <= 1e-12
    assert payload["qjmc_max_sigma"] <= 4.0
    lines = (out / "compare.csv").read_text().splitlines()
    assert lines[0] == "time,observable,mean,stderr,method"
    methods = {line.split(",")[-1] for line in lines[1:]}
    assert methods == {"dense", "block", "qjmc"}
    assert (out / "compare.png").read_bytes()[:8] == PNG_MAGIC


def test_compare_without_symmetry_uses_full_space(tmp_path):
    out = tmp_path / "out"
    cfg = {
        "model": {"builder": "explicit", "hamiltonian": [[0, 2], [2, 0]],
                  "jumps": [SM_LIST]},
        "simulation": _sim(sample_times=[0.5, 1.0], n_traj=300, seed=5,
                           initial_state=0),
        "output": {"directory": str(out), "formats": ["json", "csv"]},
    }
    rc = main(["compare", "--config", _write(tmp_path, "run.json", cfg)])
    assert rc == 0
    payload = _load(out, "compare.json")
    assert "block_vs_dense_max" not in payload
    assert payload["qjmc_max_sigma"] <= 4.0
    lines = (out / "compare.csv").read_text().splitlines()
    methods = {line.split(",")[-1] for line in lines[1:]}
    assert methods == {"dense", "qjmc"}
