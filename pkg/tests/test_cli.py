import json

import pytest

from coverlab import __version__
from coverlab.cli import load_config, main


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-thing"])
    assert exc.value.code == 2


def test_green_command(capsys):
    assert main(["green"]) == 0
    out = capsys.readouterr().out
    payload = json.loads(out[: out.index("[PASS")])
    assert payload["g0"] == pytest.approx(1.516386037, abs=1e-8)
    assert payload["digest"].startswith("a3c42b15")
    assert "[PASS]" in out


def test_capacity_command(capsys):
    assert main(["capacity", "--N", "5"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["cap_point"] == pytest.approx(1 / 1.516386037, rel=1e-6)
    assert payload["capacity"] == pytest.approx(5.849582, rel=1e-4)
    assert abs(payload["residual"]) < 1e-9


def test_config_type_error_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"N": "twelve"}')
    assert main(["cover", "--config", str(cfg)]) == 2
    assert "config.N" in capsys.readouterr().err


def test_config_unknown_field_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"walks": 3}')
    assert main(["cover", "--config", str(cfg)]) == 2
    assert "config.walks" in capsys.readouterr().err


def test_config_cross_constraint_K_vs_eps(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"K": 0.5, "eps": 0.1}))
    assert main(["surgery", "demo", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "config.K" in err and "6*eps" in err


def test_load_config_accepts_int_for_float(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"gamma": 1, "trials": 5}')
    out = load_config(cfg)
    assert out == {"gamma": 1.0, "trials": 5}
    assert isinstance(out["gamma"], float)


def test_surgery_demo_and_roundtrip(capsys):
    assert main(["surgery", "demo", "--N", "16", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] (hard) roundtrip recovered the path" in out

    assert main(["surgery", "roundtrip", "--N", "16", "--fixtures", "5", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "5/5 exact round trips on N=16" in out
    assert "[PASS] (hard) all round trips exact" in out


def test_surgery_certify_gamma_gate(capsys):
    assert main(["surgery", "certify", "--N", "16", "--gamma", "1.2", "--trials", "4"]) == 2
    assert "gamma" in capsys.readouterr().err
    assert main(["surgery", "certify", "--N", "16", "--gamma", "0.5", "--trials", "4"]) == 2
    capsys.readouterr()


def test_cover_small_run_exits_0(capsys):
    assert main(["cover", "--N", "8", "--trials", "60", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    summary = json.loads(out.split("\n[")[0])
    assert summary["trials"] == 60
    assert "ks_gumbel" in summary


def test_experiment_dispatch_ids(capsys):
    # toy scale: verdicts may fail (exit 1) but every id must resolve and report
    rc = main(["experiment", "late_points", "--N", "12", "--alpha", "0.5",
               "--trials", "10", "--seed", "5"])
    assert rc in (0, 1)
    s = json.loads(capsys.readouterr().out.split("\n[")[0])
    assert "per_alpha" in s

    rc = main(["experiment", "max_local_time", "--trials", "5", "--seed", "5",
               "--budget-steps", "50000"])
    assert rc in (0, 1)
    s = json.loads(capsys.readouterr().out.split("\n[")[0])
    assert "mean_ratio" in s

    with pytest.raises(SystemExit) as exc:
        main(["experiment", "not_an_id"])
    assert exc.value.code == 2


def test_out_dir_writes_manifest(tmp_path, capsys):
    out = tmp_path / "runs"
    assert main(["cover", "--N", "8", "--trials", "40", "--seed", "9",
                 "--out", str(out)]) == 0
    capsys.readouterr()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tool_version"] == __version__
    assert manifest["green_digest"].startswith("a3c42b15")
    assert manifest["master_seed"] == 9
    assert manifest["wall_clock_s"] > 0
    sha1 = manifest["config_sha256"]

    out2 = tmp_path / "runs2"
    assert main(["cover", "--N", "8", "--trials", "40", "--seed", "9",
                 "--out", str(out2)]) == 0
    capsys.readouterr()
    manifest2 = json.loads((out2 / "manifest.json").read_text())
    assert manifest2["config_sha256"] == sha1

    reports = sorted(p.name for p in out.glob("*.report.json"))
    trials = sorted(p.name for p in out.glob("*.trials.csv"))
    assert len(reports) == 1 and len(trials) == 1
    # replay reproduces per-trial rows byte for byte
    a = (out / trials[0]).read_bytes()
    b = (out2 / trials[0]).read_bytes()
    assert a == b


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "coverlab", "--version"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert __version__ in proc.stdout
