import json
import subprocess
import sys

import pytest

from workqp.cli import cli, main


@pytest.fixture
def run(capsys, fixtures_dir):
    def call(*argv):
        argv = [str(fixtures_dir / a) if a.endswith(".json") else a for a in argv]
        code = main(argv)
        out, err = capsys.readouterr()
        return code, out, err

    return call


def test_verify_incoherent(run):
    code, out, _ = run("verify", "--scenario", "qubit_incoherent.json", "--q", "0,0.5,1")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and len(doc["checks"]) == 9
    assert doc["data"]["incoherent"] is True


def test_verify_failure_exits_one(run):
    code, out, _ = run("verify", "--scenario", "qutrit_schedule.json", "--tol", "conditions=-1")
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_nogo_qubit(run):
    code, out, _ = run("nogo", "--scenario", "qubit_plus.json")
    assert code == 0
    data = json.loads(out)["data"]
    assert data["status"] == "confirmed"
    assert data["repeated_deviation"] == pytest.approx(1.0, abs=1e-12)


def test_nogo_inconclusive_warns(run):
    code, out, err = run("nogo", "--scenario", "aligned_bases.json")
    assert code == 0
    assert json.loads(out)["data"]["status"] == "inconclusive"
    assert "inconclusive" in err


def test_nogo_failure_exits_one(run):
    code, _, _ = run("nogo", "--scenario", "qubit_plus.json", "--tol", "nogo-deviation=10")
    assert code == 1


def test_wigner_demo(run, tmp_path):
    hist = tmp_path / "hist.csv"
    code, out, _ = run("wigner-demo", "--alpha", "1", "--beta", "1", "--a", "0.5", "--bins", "64",
                       "--hist-out", str(hist))
    assert code == 0
    doc = json.loads(out)
    assert doc["data"]["min_bin"] >= -1e-6
    assert doc["data"]["min_kirkwood_dirac"] < -1e-4 and doc["data"]["min_v"] < -1e-4
    assert len(hist.read_text().splitlines()) == 65


def test_wigner_demo_bad_gaussian(run):
    code, _, err = run("wigner-demo", "--a", "-1")
    assert code == 2
    assert "Re a" in err


@pytest.mark.parametrize(
    "name, needle",
    [
        ("bad_trace.json", "trace"),
        ("non_hermitian.json", "h0"),
        ("non_unitary.json", "evolution.matrix"),
        ("negative_state.json", "rho0"),
        ("bad_syntax.json", "line 4"),
    ],
)
def test_input_errors_exit_two(run, name, needle):
    code, out, err = run("tpm", "--scenario", name)
    assert code == 2
    assert out == ""
    assert needle in err


def test_flag_errors_exit_two(run, tmp_path):
    assert run("qdist", "--scenario", "qubit_plus.json", "--q", "zero")[0] == 2
    assert run("qdist", "--scenario", "qubit_plus.json", "--tol", "bogus=1")[0] == 2
    assert run("qdist", "--scenario", str(tmp_path / "missing.json"))[0] == 2
    assert run("tpm")[0] == 2
    assert run("mix", "--scenario", "qubit_plus.json", "--q", "0,1", "--weights", "2,-1")[0] == 2
    assert run("mix", "--scenario", "qubit_plus.json", "--q", "0,1", "--weights", "1")[0] == 2


def test_qdist_csv_needs_single_q(run):
    code, _, err = run("qdist", "--scenario", "qubit_plus.json", "--q", "0,1")
    assert code == 2 and "single" in err
    code, out, _ = run("qdist", "--scenario", "qubit_plus.json", "--q", "0")
    assert code == 0
    assert out == "w,weight\n-2,0\n-1,0\n0,0.5\n1,0.5\n"


def test_qdist_json_multiple(run):
    code, out, _ = run("qdist", "--scenario", "qubit_plus.json", "--format", "json")
    assert code == 0
    assert sorted(json.loads(out)["distributions"]) == ["q=0.0", "q=0.5", "q=1.0"]


def test_tpm_csv(run):
    code, out, _ = run("tpm", "--scenario", "qubit_incoherent.json")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "w,weight" and len(rows) == 5


def test_mix_negativity_gleason(run):
    assert run("mix", "--scenario", "qubit_plus.json", "--q", "0,1", "--weights", "0.5,0.5")[0] == 0
    code, out, _ = run("negativity", "--scenario", "qutrit_schedule.json")
    assert code == 0
    assert json.loads(out)["data"]["tpm_negativity"] == 0.0
    code, out, _ = run("gleason-check", "--scenario", "qutrit_schedule.json")
    assert code == 0
    assert json.loads(out)["data"]["family_sum"] == pytest.approx(1.0, abs=1e-10)


def test_out_flag(run, tmp_path):
    target = tmp_path / "v.json"
    code, out, _ = run("verify", "--scenario", "qubit_plus.json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["schema"] == 1


def test_cli_wrapper_catches_usage_errors(capsys):
    assert cli(["no-such-command"]) == 2
    capsys.readouterr()


def test_module_entry_point(fixtures_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "workqp", "verify", "--scenario", str(fixtures_dir / "qubit_incoherent.json")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["passed"] is True
