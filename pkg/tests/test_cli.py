import json

import pytest

from wmstate.cli import load_record, main, parse_value


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_value():
    assert parse_value("0.1") == 0.1
    assert parse_value("1e-3") == 1e-3
    assert parse_value("7") == 7
    assert parse_value("1+2j") == 1 + 2j
    assert parse_value("[0.05, 0.1]") == [0.05, 0.1]
    assert parse_value("coherent") == "coherent"


def test_config_then_set(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("g: 0.2\nalpha: 0.02\nepsilon: 0.1\n")
    record = load_record(str(cfg), ["g=0.3"])
    assert record == {"g": 0.3, "alpha": 0.02, "epsilon": 0.1}


def test_config_rejects_nesting(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("grid:\n  nx: 3\n")
    with pytest.raises(ValueError):
        load_record(str(cfg), [])


def test_state_command(capsys):
    code, out, _ = run(capsys, "state", "spac", "--set", "beta=1", "--amplitudes", "3")
    assert code == 0
    data = json.loads(out)
    assert data["mean_n"] == pytest.approx(2.5, abs=1e-9)
    assert len(data["amplitudes"]) == 3


def test_protocol_run(capsys):
    code, out, _ = run(capsys, "protocol", "run", "--set", "beta=1")
    assert code == 0
    data = json.loads(out)
    assert data["p_zeroth"] == pytest.approx(1e-6)
    assert data["F2_photon_added"] >= 0.999
    code, out, _ = run(capsys, "protocol", "run", "--exact")
    assert code == 0 and json.loads(out)["model"] == "exact"


def test_metrics_commands(capsys):
    code, out, _ = run(capsys, "metrics", "weak-values")
    assert code == 0
    assert json.loads(out)["A_w"]["re"] == pytest.approx(-499.995)
    code, out, _ = run(capsys, "metrics", "photon-stats")
    assert json.loads(out)["g2"] == 0.0
    code, out, _ = run(capsys, "metrics", "squeezing", "--set", "eta=1")
    assert json.loads(out)["S_input"] == pytest.approx(-0.43233, abs=1e-5)


def test_figure_command(capsys, tmp_path):
    code, out, _ = run(capsys, "figure", "fig3a", "--out", str(tmp_path), "--set", "beta_points=5")
    assert code == 0
    assert (tmp_path / "fig3a.csv").exists() and (tmp_path / "fig3a.json").exists()


def test_sweep_command(capsys, tmp_path):
    target = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--var", "beta", "--range", "0:1:3", "--metric", "F2", "--out", str(target))
    assert code == 0
    lines = [ln for ln in target.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == "beta,F2,p_zeroth,p_model" and len(lines) == 4


def test_deviations_command(capsys):
    code, out, _ = run(capsys, "deviations")
    assert code == 0
    report = json.loads(out)
    assert all(e["agrees"] for e in report["entries"] if e["required"])


@pytest.mark.parametrize(
    "argv",
    [
        ["figure", "fig7"],
        ["sweep", "--var", "beta", "--range", "1:0:3", "--metric", "F1"],
        ["sweep", "--var", "beta", "--range", "0:1", "--metric", "F1"],
        ["protocol", "run", "--set", "alpha=2"],
        ["protocol", "run", "--set", "nonsense=1"],
        ["state", "fock", "--set", "n"],
    ],
)
def test_bad_arguments_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("wmstate:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["state", "thermal"])
    assert exc.value.code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["metrics", "snr", "--set", "g=0", "--set", "beta=1"],
        ["state", "coherent", "--set", "beta=2", "--set", "cutoff=10"],
        ["state", "squeezed", "--set", "eta=1", "--set", "cutoff=40"],
    ],
)
def test_numeric_guard_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3
    assert "numeric guard" in err
