import json
import subprocess
import sys

import pytest

from rqas.cli import cli_main
from rqas.qubit import PauliSum


def run(capsys, *argv):
    code = cli_main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_pipeline_parametric(tmp_path, capsys):
    code, out, _ = run(capsys, "--out", str(tmp_path), "pipeline", "--mode", "parametric")
    assert code == 0
    summary = json.loads(out)
    assert summary["results"] == 8 and summary["errors"] == 0 and summary["rank_concordance"]
    for name in ("results.csv", "ranking.csv", "validation.json", "errors.json", "cliff.svg", "validation.csv"):
        assert (tmp_path / name).exists()
    assert json.loads((tmp_path / "errors.json").read_text()) == []


def test_pipeline_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "--out", str(a), "pipeline")
    run(capsys, "--out", str(b), "pipeline")
    for name in ("results.csv", "ranking.csv", "cliff.svg", "validation.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_validate_from_results(tmp_path, capsys):
    run(capsys, "--out", str(tmp_path), "pipeline")
    code, out, _ = run(capsys, "--out", str(tmp_path), "validate")
    assert code == 0 and json.loads(out)["n_points"] == 6
    code, out, _ = run(capsys, "validate", "--published")
    assert code == 0 and json.loads(out)["r2"] == pytest.approx(0.93, abs=0.01)


def test_validate_without_results(tmp_path, capsys):
    code, _, err = run(capsys, "--out", str(tmp_path / "empty"), "validate")
    assert code == 1 and json.loads(err)["error"] == "FileNotFoundError"


def test_variant_unknown(tmp_path, capsys):
    code, _, err = run(capsys, "--out", str(tmp_path), "variant", "NOSUCH")
    payload = json.loads(err)
    assert code != 0 and "NOSUCH" in payload["message"]


def test_variant_known(tmp_path, capsys):
    code, out, _ = run(capsys, "--out", str(tmp_path), "variant", "R91W")
    assert code == 0 and json.loads(out)["variant"] == "R91W"
    assert (tmp_path / "variant_R91W.json").exists()


def test_export_dataset(tmp_path, capsys):
    code, out, _ = run(capsys, "export-dataset")
    assert code == 0 and out.startswith("id,from,pos,to,shift_A,dOO_A,activity_pct,severity,source")
    path = tmp_path / "d.json"
    run(capsys, "export-dataset", "--format", "json", "--path", str(path))
    code, out, _ = run(capsys, "--dataset", str(path), "--out", str(tmp_path), "pipeline")
    assert code == 0 and json.loads(out)["results"] == 8


def test_hamiltonian_dump(capsys, oho_symmetric):
    code, out, _ = run(capsys, "hamiltonian", "--doo", "2.70", "--z", "1.35")
    assert code == 0
    h = PauliSum.from_text(out)
    assert h.terms.keys() == oho_symmetric.hamiltonian.terms.keys()


def test_hamiltonian_domain_error(capsys):
    code, _, err = run(capsys, "hamiltonian", "--doo", "2.70", "--z", "2.80")
    assert code == 1 and json.loads(err)["error"] == "GeometryError"


def test_scan_deterministic(tmp_path, capsys):
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        code, out, _ = run(capsys, "--out", str(d), "--seed", "7", "scan", "--doo", "2.70",
                           "--points", "3", "--margin", "1.0")
        assert code == 0
        outs.append((d / "scan_2.7000.csv").read_bytes())
    assert outs[0] == outs[1]


def test_usage_errors_exit_2(capsys):
    for argv in (["bogus"], ["pipeline", "--nope"], []):
        with pytest.raises(SystemExit) as info:
            cli_main(argv)
        assert info.value.code == 2
    capsys.readouterr()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rqas", "--out", str(tmp_path), "pipeline"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["results"] == 8
