import json

import pytest
from click.testing import CliRunner

from app_config import Config
from cli import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, cli, run

PLACE_T = ["--q", "2", "--v", "0,1"]


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def _invoke(runner, *args):
    result = runner.invoke(cli, list(args), catch_exceptions=False)
    return result, (json.loads(result.stdout) if result.stdout.strip().startswith("{") else None)


def test_omega_valuations(runner):
    result, out = _invoke(runner, "omega", *PLACE_T, "--prec-t", "4")
    assert result.exit_code == EXIT_PASS
    rows = [row for row in out["valuations"]["rows"] if row["m"] == 0]
    assert [row["val"] for row in rows] == ["1", "1/2", "1/4", "1/8"]
    assert out["denominators"] == [1, 2, 4, 8]
    assert out["command"] == "omega"
    assert out["settings"]["p"] == 2


def test_omega_is_deterministic(runner):
    first, _ = _invoke(runner, "omega", *PLACE_T, "--prec-t", "3")
    second, _ = _invoke(runner, "omega", *PLACE_T, "--prec-t", "3")
    assert first.stdout == second.stdout


def test_verify_round_trip(runner, tmp_path):
    result, _ = _invoke(runner, "omega", *PLACE_T, "--prec-t", "3")
    artifact = tmp_path / "omega.json"
    artifact.write_text(result.stdout, encoding="utf-8")
    result, out = _invoke(runner, "verify", "fundamental", "--artifact", str(artifact))
    assert result.exit_code == EXIT_PASS
    assert out["passed"]
    assert out["worst_entry"] is None


def test_reducible_place_exits_with_error(runner):
    result, out = _invoke(runner, "omega", "--q", "2", "--v", "1,0,1")
    assert result.exit_code == EXIT_ERROR
    assert out is None
    assert "v not irreducible" in result.stderr


def test_run_returns_exit_status():
    assert run(["omega", "--q", "2", "--v", "1,0,1"]) == EXIT_ERROR
    assert run(["omega", "--q", "6", "--v", "0,1"]) == EXIT_ERROR


def test_polylog_valuation_table(runner):
    result, _ = _invoke(runner, "valuations", "--kind", "polylog", *PLACE_T, "--prec-t", "2",
                        "--format", "table")
    assert result.exit_code == EXIT_PASS
    assert "verdict" in result.stdout


def test_polylog_enumeration(runner):
    result, out = _invoke(runner, "polylog", *PLACE_T, "--prec-t", "2", "--branch", "enumerate")
    assert result.exit_code == EXIT_PASS
    assert len(out["branches"]) == 2
    assert all(d["passed"] for d in out["differences"])


def test_abp_check_default_omega(runner):
    result, out = _invoke(runner, "abp", "check", *PLACE_T, "--prec-t", "4")
    assert result.exit_code == EXIT_PASS
    assert [step["nu"] for step in out["steps"]] == [0, 1]


def test_relation_search_on_scalars(runner):
    result, out = _invoke(runner, "relations", "search", "--values", "1,theta", "--deg-theta", "1",
                          "--cutoff", "3", *PLACE_T)
    assert result.exit_code == EXIT_PASS
    assert out["certificate"]["kind"] == "relation"


def test_relation_search_on_artifact(runner, tmp_path):
    result, _ = _invoke(runner, "omega", *PLACE_T, "--prec-t", "4")
    artifact = tmp_path / "omega.json"
    artifact.write_text(result.stdout, encoding="utf-8")
    result, out = _invoke(runner, "relations", "search", "--values", f"1,{artifact}",
                          "--cutoff", "3/2", *PLACE_T)
    assert result.exit_code == EXIT_PASS
    assert out["certificate"]["kind"] == "independence"


def test_motive_polylog(runner):
    result, out = _invoke(runner, "motive", "polylog", "--alphas", "1", *PLACE_T, "--prec-t", "2")
    assert result.exit_code == EXIT_PASS
    assert out["n"] == 1
    assert len(out["psi"]) == 2


def test_galois_polys(runner, tmp_path):
    paths = {}
    for name, content in (("forms", {"c": [["1", "1"]]}), ("gamma", {"b": ["theta", "t", "1"]}),
                          ("xi", {"xi": ["t", "theta", "1"]})):
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(json.dumps(content), encoding="utf-8")
    result, out = _invoke(runner, "galois", "polys", "--forms", str(paths["forms"]),
                          "--gamma", str(paths["gamma"]), "--xi", str(paths["xi"]), *PLACE_T)
    assert result.exit_code == EXIT_PASS
    assert out["G_at_identity_zero"] and out["H_at_xi_zero"]


def test_pf_reduce(runner):
    result, out = _invoke(runner, "pf-reduce", *PLACE_T, "--e", "2", "--degrees", "2,2",
                          "--shape", "3,2", "--instances", "5", "--seed", "11")
    assert result.exit_code == EXIT_PASS
    assert out["failures"] == 0
    assert len(out["instances"]) == 5


def test_config_file_settings(runner, tmp_path):
    config = tmp_path / "session.conf"
    config.write_text("q = 2\nv = 0,1\nprec_t = 2\n", encoding="utf-8")
    result, out = _invoke(runner, "valuations", "--config", str(config))
    assert result.exit_code == EXIT_PASS
    assert out["settings"]["prec_t"] == 2


def _split_pair(runner, tmp_path):
    result, out = _invoke(runner, "omega", *PLACE_T, "--prec-t", "3")
    phi_file, psi_file = tmp_path / "phi.json", tmp_path / "psi.json"
    phi_file.write_text(json.dumps({"phi": out["phi"], "motive": out["motive"]}), encoding="utf-8")
    psi_file.write_text(json.dumps({key: out[key] for key in ("psi", "field", "place", "settings")}),
                        encoding="utf-8")
    return phi_file, psi_file


def test_verify_separate_phi_and_psi_files(runner, tmp_path):
    phi_file, psi_file = _split_pair(runner, tmp_path)
    result, out = _invoke(runner, "verify", "fundamental", "--phi", str(phi_file), "--psi", str(psi_file))
    assert result.exit_code == EXIT_PASS
    assert out["passed"]
    assert out["reason"] is None


def test_verify_bare_phi_matrix(runner, tmp_path):
    phi_file, psi_file = _split_pair(runner, tmp_path)
    bare = json.loads(phi_file.read_text(encoding="utf-8"))["phi"]
    phi_file.write_text(json.dumps(bare), encoding="utf-8")
    result, out = _invoke(runner, "verify", "fundamental", "--phi", str(phi_file), "--psi", str(psi_file))
    assert result.exit_code == EXIT_PASS
    assert out["passed"]


def test_verify_min_cap_reports_shortfall(runner, tmp_path):
    phi_file, psi_file = _split_pair(runner, tmp_path)
    result, out = _invoke(runner, "verify", "fundamental", "--phi", str(phi_file), "--psi", str(psi_file),
                          "--min-cap", "3")
    assert result.exit_code == EXIT_FAIL
    assert out["reason"] == "precision-shortfall"
    assert out["min_cap"] == "3"


def test_verify_needs_both_files(runner, tmp_path):
    phi_file, _ = _split_pair(runner, tmp_path)
    result, _ = _invoke(runner, "verify", "fundamental", "--phi", str(phi_file))
    assert result.exit_code == EXIT_ERROR
    assert "--psi" in result.stderr


def test_verify_accepts_q_override(runner, tmp_path):
    result, _ = _invoke(runner, "omega", *PLACE_T, "--prec-t", "3")
    artifact = tmp_path / "omega.json"
    artifact.write_text(result.stdout, encoding="utf-8")
    result, out = _invoke(runner, "verify", "fundamental", "--artifact", str(artifact), "--q", "2")
    assert result.exit_code == EXIT_PASS
    assert out["settings"]["p"] == 2


def test_invalid_environment_stops_startup(monkeypatch):
    monkeypatch.setattr(Config, "LOG_LEVEL", "LOUD")
    assert run(["omega", *PLACE_T, "--prec-t", "2"]) == EXIT_ERROR
