import json
import subprocess
import sys

import pytest

from circlekit import __version__
from circlekit.cli import InstanceConfig, build_parser, main, predict_report

PRODUCT = ["--form", "x1*x2", "--s", "2", "--m", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestExitCodes:
    def test_no_arguments(self, capsys):
        code, _, err = run(capsys)
        assert code == 1 and "usage" in err

    def test_unknown_command(self, capsys):
        assert run(capsys, "frobnicate")[0] == 1

    def test_missing_form(self, capsys):
        code, _, err = run(capsys, "expand")
        assert code == 1 and "--form" in err

    def test_malformed_form(self, capsys):
        assert run(capsys, "expand", "--form", "x1 +", "--s", "2")[0] == 1

    def test_budget_refusal(self, capsys):
        code, _, err = run(capsys, "count", *PRODUCT, "--P", "40", "--max-evals", "100")
        assert code == 2 and "budget" in err

    def test_bad_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"nonsense": 1}')
        assert run(capsys, "expand", *PRODUCT, "--config", str(cfg))[0] == 1

    def test_console_script_module(self):
        proc = subprocess.run([sys.executable, "-m", "circlekit.cli"], capture_output=True, text=True)
        assert proc.returncode == 1


class TestCommands:
    def test_expand(self, capsys):
        code, out, _ = run(capsys, "expand", *PRODUCT)
        assert code == 0
        assert out.splitlines() == [
            "Phi[1,1] = x1*x2",
            "Phi[1,2] = x1*x4 + x2*x3",
            "Phi[2,2] = x3*x4",
            "D = x1^2*x4^2 - 2*x1*x2*x3*x4 + x2^2*x3^2",
        ]

    def test_expand_json(self, capsys, tmp_path):
        out = tmp_path / "e.json"
        assert run(capsys, "expand", *PRODUCT, "--out", str(out))[0] == 0
        assert json.loads(out.read_text())["r"] == 3

    def test_count(self, capsys):
        code, out, err = run(capsys, "count", *PRODUCT, "--P", "1", "--b", "0", "--filter-b")
        lines = out.splitlines()
        assert code == 0 and len(lines) == 18 and "17 solutions" in err

    def test_sums(self, capsys, tmp_path):
        pts = tmp_path / "p.json"
        pts.write_text(json.dumps([[0, 0, 0, 0], {"q": 1, "a": [0, 0, 0, 0]}]))
        code, out, _ = run(capsys, "sums", *PRODUCT, "--P", "1", "--points", str(pts))
        rows = [line.split(";") for line in out.splitlines()]
        assert code == 0 and rows[0] == ["point", "re", "im", "abs"]
        assert float(rows[1][1]) == pytest.approx(81) and float(rows[2][1]) == pytest.approx(1)

    def test_sums_rejects_bad_points(self, capsys, tmp_path):
        pts = tmp_path / "p.json"
        pts.write_text("[[0, 0]]")
        assert run(capsys, "sums", *PRODUCT, "--points", str(pts))[0] == 1

    def test_check(self, capsys):
        code, out, _ = run(capsys, "check", "--s", "205", "--d", "2", "--m", "2")
        assert code == 0 and json.loads(out)["verdicts"]["main"] is True

    def test_chi_p(self, capsys):
        code, out, _ = run(capsys, "chi-p", *PRODUCT, "--prime", "3", "--depth", "2")
        assert code == 0 and out.splitlines() == ["i;chi", "0;1.0", "1;17.0", "2;225.0"]

    def test_series(self, capsys):
        code, out, _ = run(capsys, "series", *PRODUCT, "--qmax", "4")
        assert out.splitlines() == ["q;value", "1;1.0", "2;7.0", "3;23.0", "4;56.0"]

    def test_chi_inf(self, capsys):
        code, out, _ = run(capsys, "chi-inf", *PRODUCT, "--R", "0.1")
        rows = out.splitlines()
        assert code == 0 and rows[0] == "R;value;imag;error;method;converged" and len(rows) == 5

    def test_arcs_volume(self, capsys):
        code, out, _ = run(capsys, "arcs", "--form", "x1^3 + x2^3 + x3^3", "--s", "3", "--m", "2", "--P", "50")
        rows = out.splitlines()
        assert code == 0 and rows[0].startswith("family;P;estimate")
        assert {r.split(";")[0] for r in rows[1:]} == {"M0", "M_theta_eta", "N", "Md", "Md_dagger"}

    def test_arcs_weyl(self, capsys):
        code, out, _ = run(capsys, "arcs", *PRODUCT, "--P", "2", "--harness", "weyl", "--grid", "4")
        assert code == 0 and len(out.splitlines()) == 3

    def test_excluded_case_warning(self, capsys):
        _, _, err = run(capsys, "expand", "--form", "x1^4 + x2^4", "--s", "2", "--m", "2")
        assert "excluded case" in err


class TestPredict:
    def test_report_contents(self):
        cfg = InstanceConfig(form="x1*x2", s=2, m=2, P=1)
        rep = predict_report(cfg)
        assert rep["exact_count"] == 17 and rep["dft_count"] == 17
        assert rep["toolkit_version"] == __version__
        assert rep["config_hash"] == cfg.digest()
        assert rep["hypotheses"]["verdicts"]["main"] is False
        assert rep["prediction"] is not None and "caveat" in rep["hypotheses"]

    def test_zero_box(self):
        rep = predict_report(InstanceConfig(form="x1*x2", s=2, m=2, P=0))
        assert rep["exact_count"] == 1 and rep["prediction"] is None

    def test_budget_marks_missing(self):
        rep = predict_report(InstanceConfig(form="x1^3 + x2^3 + x3^3", s=3, m=2, P=2, max_evals=10**6))
        assert rep["exact_count"] is not None
        assert rep["dft_count"] is None and rep["dft_count_error"].startswith("budget")

    def test_config_overrides_flags(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"P": 2, "seed": 5}))
        ns = build_parser().parse_args(["predict", *PRODUCT, "--P", "1", "--config", str(cfg)])
        resolved = InstanceConfig.from_namespace(ns)
        assert resolved.P == 2 and resolved.seed == 5 and resolved.form == "x1*x2"

    def test_hash_tracks_config(self):
        a = InstanceConfig(form="x1*x2", s=2, P=1)
        assert a.digest() == InstanceConfig(form="x1*x2", s=2, P=1).digest()
        assert a.digest() != InstanceConfig(form="x1*x2", s=2, P=2).digest()

    def test_files_written(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        assert run(capsys, "predict", *PRODUCT, "--P", "1", "--out", str(out))[0] == 0
        assert json.loads(out.read_text())["exact_count"] == 17
        assert "exact_count;17" in (tmp_path / "report.csv").read_text().splitlines()
