"""Command-line behavior, driven in-process through main()."""

from __future__ import annotations

import json

import pytest

from conformal_lab.cli import main


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_missing_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_mesh_build_prints_summary(capsys):
    assert main(["mesh", "build", "--level", "2"]) == 0
    out = capsys.readouterr().out
    assert "level 2:" in out
    assert "chi=-2" in out
    assert "sigma-area=12.56637" in out


def test_mesh_build_writes_json(tmp_path):
    out = tmp_path / "mesh.json"
    assert main(["mesh", "build", "--level", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["level"] == 1


def test_metric_make_descriptor_roundtrip(tmp_path, capsys):
    path = tmp_path / "shrinker.json"
    code = main([
        "metric", "make", "--family", "shrinker",
        "--eps", "0.2", "--delta", "0.1", "--out", str(path),
    ])
    assert code == 0
    doc = json.loads(path.read_text())
    assert doc["family"] == "shrinker"
    assert doc["version"] == 1
    assert doc["params"] == {"eps": 0.2, "delta": 0.1}
    # Writing again is byte-identical (no timestamps, stored constant).
    first = path.read_bytes()
    assert main([
        "metric", "make", "--family", "shrinker",
        "--eps", "0.2", "--delta", "0.1", "--out", str(path),
    ]) == 0
    assert path.read_bytes() == first


def test_metric_make_missing_flags_exit_two(capsys):
    assert main(["metric", "make", "--family", "shrinker"]) == 2
    assert "needs --eps and --delta" in capsys.readouterr().err


def test_metric_make_infeasible_exit_two(capsys):
    code = main([
        "metric", "make", "--family", "stretcher",
        "--eps", "0.2", "--delta", "0.5",
    ])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_spectrum_writes_csv(tmp_path):
    desc = tmp_path / "base.json"
    assert main(["metric", "make", "--family", "base", "--out", str(desc)]) == 0
    out = tmp_path / "spec.csv"
    assert main([
        "spectrum", "--metric", str(desc), "--k", "2",
        "--level", "2", "--out", str(out),
    ]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "k, lambda, residual, level"
    assert len(lines) == 4
    assert lines[1].startswith("0, ")


def test_spectrum_rejects_cylinder(tmp_path, capsys):
    desc = tmp_path / "cyl.json"
    assert main(["metric", "make", "--family", "cylinder", "--out", str(desc)]) == 0
    assert main(["spectrum", "--metric", str(desc), "--k", "2"]) == 2
    assert "no assembled spectrum" in capsys.readouterr().err


def test_spectrum_missing_descriptor_exit_two(tmp_path, capsys):
    missing = tmp_path / "nowhere.json"
    assert main(["spectrum", "--metric", str(missing), "--k", "1"]) == 2


def test_verify_base_passes(tmp_path, capsys):
    desc = tmp_path / "base.json"
    assert main(["metric", "make", "--family", "base", "--out", str(desc)]) == 0
    rep = tmp_path / "report.json"
    code = main([
        "verify", "--metric", str(desc), "--level", "3", "--report", str(rep),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "report PASS" in out
    doc = json.loads(rep.read_text())
    assert doc["passed"] is True
    assert doc["metadata"]["family"] == "base"
    assert {e["name"] for e in doc["entries"]} >= {
        "area_normalized", "eigen_sandwich_margin", "katok_factor_cap",
    }


def test_verify_cylinder_needs_no_mesh(tmp_path, capsys):
    desc = tmp_path / "cyl.json"
    assert main(["metric", "make", "--family", "cylinder", "--out", str(desc)]) == 0
    assert main(["verify", "--metric", str(desc)]) == 0
    assert "report PASS" in capsys.readouterr().out


def test_sweep_runs_small_grid(tmp_path, capsys):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({
        "version": 1,
        "level": 2,
        "grid": [
            {"family": "nonpositive_radial", "amplitude": 0.5},
            {"family": "shrinker", "eps": 0.2, "delta": 0.1},
        ],
    }))
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("family,eps,delta,amplitude,area")
    assert len(lines) == 3
    assert "2 rows written" in capsys.readouterr().out


def test_sweep_error_rows_exit_one(tmp_path, capsys):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({
        "version": 1,
        "level": 2,
        "grid": [{"family": "cylinder"}],
    }))
    assert main(["sweep", "--config", str(cfg)]) == 1
    assert "ERROR cylinder" in capsys.readouterr().out


def test_sweep_config_version_required(tmp_path, capsys):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({"level": 2, "grid": []}))
    assert main(["sweep", "--config", str(cfg)]) == 2
    assert "version" in capsys.readouterr().err


def test_sweep_config_bad_json(tmp_path):
    cfg = tmp_path / "grid.json"
    cfg.write_text("{not json")
    assert main(["sweep", "--config", str(cfg)]) == 2


def test_entropy_coding_output(capsys):
    code = main([
        "entropy", "coding", "--volume", "12.566370614359172",
        "--dim", "2", "--rho", "1.0",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "coding bound: ln(64) / 0.25" in out
    assert "16.63553" in out


def test_entropy_coding_guard_exit_two(capsys):
    assert main(["entropy", "coding", "--volume", "0.01", "--dim", "2", "--rho", "1.0"]) == 2


def test_threads_guard(capsys):
    assert main(["--threads", "0", "mesh", "build", "--level", "0"]) == 2
