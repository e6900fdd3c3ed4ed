import pytest

from tvgp import cli
from tvgp.analysis import parse_report
from tvgp.io import load_params, load_tensor
from tvgp.sampler import read_trace_csv


def _sim(tmp_path, *extra):
    args = ["simulate", "--output-dir", str(tmp_path), "--set", "n_r=2", "--set", "n_phi=2",
            "--set", "m2=3", "--set", "seed=5", *extra]
    assert cli.main(args) == 0
    return tmp_path


def _fit_args(tmp_path, *extra):
    return ["--output-dir", str(tmp_path),
            "--set", f"training_tensor={tmp_path / 'training.tensor'}",
            "--set", f"design={tmp_path / 'design.csv'}",
            "--set", f"test_slice={tmp_path / 'test_slice.tensor'}",
            "--set", "iterations=300", "--set", "burn_in=100", "--set", "seed=3",
            "--set", "init_q11=5", "--set", "init_q22=5", *extra]


class TestSimulate:
    def test_default_dims(self, tmp_path):
        assert cli.main(["simulate", "--output-dir", str(tmp_path)]) == 0
        first = (tmp_path / "augmented.tensor").read_text().splitlines()
        assert "dims: 217 50 2" in first[:3]
        assert load_tensor(tmp_path / "training.tensor").dims == (216, 50, 2)

    def test_minimal(self, tmp_path):
        cli.main(["simulate", "--output-dir", str(tmp_path), "--set", "n_r=1", "--set", "n_phi=1",
                  "--set", "m2=2", "--set", "m3=2"])
        assert load_tensor(tmp_path / "augmented.tensor").dims == (2, 2, 2)

    def test_byte_identical_rerun(self, tmp_path):
        a, b = _sim(tmp_path / "a"), _sim(tmp_path / "b")
        for name in ("augmented.tensor", "design.csv", "truth.txt", "test_slice.tensor"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_truth_manifest(self, tmp_path):
        _sim(tmp_path, "--set", "s_test=2.0, 0.5")
        truth = load_params(tmp_path / "truth.txt")
        assert truth["s1"] == 2.0 and truth["s2"] == 0.5 and truth["q11"] == 30.0

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TVGP_OUTPUT_DIR", str(tmp_path / "env"))
        cli.main(["simulate", "--set", "n_r=1", "--set", "n_phi=1", "--set", "m2=2"])
        assert (tmp_path / "env" / "augmented.tensor").exists()


class TestFit:
    def test_train_only(self, tmp_path):
        _sim(tmp_path)
        assert cli.main(["fit", "--scheme", "train-only", *_fit_args(tmp_path)]) == 0
        trace = read_trace_csv(tmp_path / "trace_train-only.csv")
        assert len(trace) == 200
        assert trace.names == ("q11", "q22", "sigma11", "sigma22", "rho")
        _, cols = parse_report((tmp_path / "report_train-only.txt").read_text())
        assert set(cols["train-only"]) == set(trace.names)
        assert set(load_params(tmp_path / "modal_params.txt")) == set(trace.names)
        assert (tmp_path / "hist_train-only_rho.csv").exists()

    def test_joint_has_seven(self, tmp_path):
        _sim(tmp_path)
        assert cli.main(["fit", "--scheme", "joint", *_fit_args(tmp_path)]) == 0
        trace = read_trace_csv(tmp_path / "trace_joint.csv")
        assert len(trace.names) == 7
        _, cols = parse_report((tmp_path / "report_joint.txt").read_text())
        assert {"omega_bar", "bar_angle_deg"} <= set(cols["joint"])

    def test_deterministic(self, tmp_path):
        for sub in ("a", "b"):
            _sim(tmp_path / sub)
            cli.main(["fit", "--scheme", "joint", *_fit_args(tmp_path / sub, "--set", "pilot_iterations=200")])
        assert (tmp_path / "a" / "trace_joint.csv").read_bytes() == (tmp_path / "b" / "trace_joint.csv").read_bytes()

    def test_extra_chains_do_not_perturb_first(self, tmp_path):
        _sim(tmp_path)
        cli.main(["fit", "--scheme", "train-only", *_fit_args(tmp_path)])
        single = (tmp_path / "trace_train-only.csv").read_bytes()
        cli.main(["fit", "--scheme", "train-only", *_fit_args(tmp_path, "--set", "chains=3")])
        assert (tmp_path / "trace_train-only_chain0.csv").read_bytes() == single
        assert (tmp_path / "trace_train-only_chain1.csv").read_bytes() != single

    def test_missing_data(self, tmp_path, capsys):
        assert cli.main(["fit", "--output-dir", str(tmp_path)]) == 1
        assert "training_tensor" in capsys.readouterr().err

    def test_bad_init_reports_point(self, tmp_path, capsys):
        _sim(tmp_path)
        assert cli.main(["fit", *_fit_args(tmp_path, "--set", "init_rho=3")]) == 1
        assert "initial point" in capsys.readouterr().err


class TestPredict:
    def test_needs_modal_file(self, tmp_path, capsys):
        _sim(tmp_path)
        assert cli.main(["predict", *_fit_args(tmp_path, "--set", f"modal_params={tmp_path / 'nope'}")]) == 1
        assert "modal parameter file" in capsys.readouterr().err

    def test_two_parameter_trace(self, tmp_path):
        _sim(tmp_path)
        cli.main(["fit", "--scheme", "train-only", *_fit_args(tmp_path)])
        modal = tmp_path / "modal_params.txt"
        assert cli.main(["predict", *_fit_args(tmp_path, "--set", f"modal_params={modal}")]) == 0
        trace = read_trace_csv(tmp_path / "trace_predictive.csv")
        assert trace.names == ("s1", "s2")
        _, cols = parse_report((tmp_path / "report_predictive.txt").read_text())
        iv_s1, iv_om = cols["predictive"]["s1"], cols["predictive"]["omega_bar"]
        assert iv_om.lower == pytest.approx(220 * iv_s1.lower / 8, abs=0.01)


def test_analyze_and_convert(tmp_path, capsys):
    _sim(tmp_path)
    cli.main(["fit", "--scheme", "joint", *_fit_args(tmp_path)])
    assert cli.main(["analyze", str(tmp_path / "trace_joint.csv"), "--bins", "10",
                     "--output-dir", str(tmp_path / "an")]) == 0
    report = tmp_path / "an" / "trace_joint_report.txt"
    _, cols = parse_report(report.read_text())
    assert len(cols["trace_joint"]) == 7
    rows = (tmp_path / "an" / "hist_trace_joint_s1.csv").read_text().splitlines()
    assert rows[0] == "bin_center,count" and len(rows) == 11
    capsys.readouterr()
    assert cli.main(["convert-units", str(report)]) == 0
    out = capsys.readouterr().out
    _, conv = parse_report(out)
    s1 = cols["trace_joint"]["s1"]
    assert conv["trace_joint"]["omega_bar"].lower == pytest.approx(220 * s1.lower / 8, abs=0.01)


def test_chain_seed_independent_of_count():
    assert cli.chain_seed(1, 0) != cli.chain_seed(1, 1)
    assert cli.chain_seed(1, 0, 0) != cli.chain_seed(1, 0, 1)
    assert cli.chain_seed(1, 2) == cli.chain_seed(1, 2)
