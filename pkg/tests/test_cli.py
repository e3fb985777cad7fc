import csv
import json

import pytest
import yaml

from circleskew.cli import SCHEMA_VERSION, main

FAMILY = [{"kind": "rotation", "angle": "(sqrt(5) - 1) / 2"},
          {"kind": "sine", "base_angle": "0", "amplitude": "1 / (4 * pi)"}]


def write_config(path, **over):
    d = {"family": FAMILY, "stages": 2, "seed_word": "2",
         "conjugacy": {"phi": {"kind": "rotation", "angle": "0.3"}}, **over}
    path.write_text(yaml.safe_dump(d))
    return str(path)


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    root = tmp_path_factory.mktemp("built")
    cfg = write_config(root / "run.yaml")
    out = root / "out"
    assert main(["build-sequence", "--config", cfg, "--out", str(out)]) == 0
    return cfg, out


def run(*args):
    return main([str(a) for a in args])


def test_check_hypotheses_demo(tmp_path):
    cfg = write_config(tmp_path / "c.yaml")
    assert run("check-hypotheses", "--config", cfg, "--out", tmp_path) == 0
    d = json.loads((tmp_path / "hypotheses.json").read_text())
    assert d["schema_version"] == SCHEMA_VERSION and d["certified"]
    assert d["results"]["expanding_cover"]["points_passed"] == 10_000


def test_check_hypotheses_two_rotations(tmp_path):
    cfg = write_config(tmp_path / "c.yaml", seed_word=None,
                       family=[{"kind": "rotation", "angle": "0.1"}, FAMILY[0]],
                       caps={"cover_word_len": 8, "seed_word_len": 3})
    assert run("check-hypotheses", "--config", cfg, "--out", tmp_path) == 1
    d = json.loads((tmp_path / "hypotheses.json").read_text())
    assert d["results"]["expanding_cover"]["error"] == "NoCoverFound"
    assert not d["certified"]


def test_zero_stages_is_a_configuration_error(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.yaml", stages=0)
    assert run("build-sequence", "--config", cfg, "--out", tmp_path) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and err["schema_version"] == SCHEMA_VERSION


def test_usage_errors(tmp_path, capsys, built):
    cfg, out = built
    assert run("build-sequence") == 2
    assert run("levitate", "--config", cfg) == 2
    assert run("verify-certificate", "--config", cfg, "--out", out) == 2
    assert run("verify-certificate", "--config", cfg, "--out", out, "--stage", 9) == 2
    assert run("density", "--config", cfg, "--out", out, "--stage", 1, "--eta", -1) == 2
    no_phi = write_config(tmp_path / "n.yaml", conjugacy=None)
    assert run("conjugacy-check", "--config", no_phi, "--out", tmp_path) == 2
    capsys.readouterr()


def test_build_outputs(built):
    cfg, out = built
    rep = json.loads((out / "sequence_report.json").read_text())
    assert rep["ok"] and rep["schema_version"] == SCHEMA_VERSION
    assert len(rep["orbits"]) == 2 and len(rep["stages"]) == 1 and len(rep["bootstrap"]) == 1
    with open(out / "orbits" / "X2.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["j", "symbol", "fiber_point", "log_deriv"]
    assert len(rows) - 1 == rep["orbits"][1]["period"]
    j, s, x, ld = rows[1]
    assert (j, s) == ("0", "2") and float(x) == rep["orbits"][1]["fiber_point"]
    # 17 significant digits round-trip the doubles exactly
    assert all(repr(float(r[2])) == repr(float(f"{float(r[2]):.17g}")) for r in rows[1:50])


def test_verify_certificate_round_trip(built):
    cfg, out = built
    assert run("verify-certificate", "--config", cfg, "--out", out, "--stage", 1) == 0
    assert run("verify-certificate", "--config", cfg, "--out", out, "--stage", -1) == 0
    v = json.loads((out / "certificates" / "verify_stage_1.json").read_text())
    assert v["ok"] and all(v["checks"].values())


def test_tampered_certificate_fails(built, tmp_path):
    cfg, out = built
    cert = json.loads((out / "certificates" / "stage_1.json").read_text())
    cert["certificate"]["params"]["r"] += 1
    (tmp_path / "certificates").mkdir()
    (tmp_path / "certificates" / "stage_1.json").write_text(json.dumps(cert))
    assert run("verify-certificate", "--config", cfg, "--out", tmp_path, "--stage", 1) == 1


def test_density_command(built):
    cfg, out = built
    assert run("density", "--config", cfg, "--out", out, "--stage", 2) == 0
    d = json.loads((out / "density_X2.json").read_text())
    assert d["report"]["eta_dense"] and d["report"]["eta"] == 0.5
    assert run("density", "--config", cfg, "--out", out, "--stage", 2, "--eta", 0.01) == 1


def test_conjugacy_command(built):
    cfg, out = built
    assert run("conjugacy-check", "--config", cfg, "--out", out) == 0
    assert run("conjugacy-check", "--config", cfg, "--out", out, "--stage", 2) == 0
    d = json.loads((out / "conjugacy.json").read_text())
    assert d["ok"] and d["difference"] <= 1e-9


def test_build_is_deterministic(built, tmp_path):
    cfg, out = built
    assert run("build-sequence", "--config", cfg, "--out", tmp_path) == 0
    for rel in ("sequence_report.json", "orbits/X2.csv", "certificates/stage_1.json"):
        assert (tmp_path / rel).read_bytes() == (out / rel).read_bytes()
