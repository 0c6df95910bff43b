import json

import numpy as np
import pytest

from raptorlab.cli import main
from raptorlab.degree_design import DesignResult, design_practical


@pytest.fixture(scope="module")
def dist_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("dist") / "design.json"
    result = design_practical(60, 40.0, 0.05, 0.85, point_count=250)
    path.write_text(result.to_json())
    return str(path)


class TestBounds:
    def test_reference_values(self, capsys):
        assert main(["bounds", "--mu-o", "40", "--epsilon", "0.05"]) == 0
        out = capsys.readouterr().out
        assert "14.445,0.982286,800" in out

    def test_epsilon_zero_unbounded(self, capsys):
        assert main(["bounds", "--mu-o", "40", "--epsilon", "0"]) == 0
        out = capsys.readouterr().out
        assert "unbounded" in out
        assert ",1," in out

    def test_hand_formula(self, capsys):
        assert main(["bounds", "--mu-o", "20", "--epsilon", "0.1",
                     "--eta", "0.9"]) == 0
        out = capsys.readouterr().out.strip().splitlines()[-1]
        lo, hi, iters = out.split(",")
        assert float(lo) == pytest.approx(0.9 * 20.1 / (4 * np.log(2)), rel=1e-4)
        assert float(hi) == pytest.approx(4 * np.log(2) / (4 * np.log(2) + 0.1),
                                          rel=1e-4)
        assert float(iters) == pytest.approx(200.0)


class TestDesign:
    def test_fixed_point_solve(self, tmp_path, capsys):
        out = tmp_path / "d.json"
        code = main(["design", "--D", "60", "--mu-o", "20", "--epsilon", "0.05",
                     "--eta", "0.8", "--N", "200", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["D"] == 60
        back = DesignResult.from_json(out.read_text())
        assert back.distribution.beta == pytest.approx(doc["beta"])

    def test_infeasible_exits_three(self, capsys):
        code = main(["design", "--D", "2", "--mu-o", "100", "--epsilon", "0",
                     "--eta", "1", "--N", "150"])
        assert code == 3
        assert "binding" in capsys.readouterr().err

    def test_usage_error_exits_two(self, capsys):
        assert main(["design", "--D", "10"]) == 2
        assert main(["design", "--D", "10", "--search-eta"]) == 2

    def test_search_eta(self, tmp_path, capsys):
        out = tmp_path / "e.json"
        code = main(["design", "--D", "50", "--mu-o", "40", "--epsilon", "0.05",
                     "--search-eta", "--N", "250", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["eta"] == pytest.approx(0.8612, abs=0.01)

    def test_search_mu_o(self, tmp_path, capsys):
        out = tmp_path / "m.json"
        code = main(["design", "--D", "50", "--epsilon", "0", "--search-mu-o",
                     "--N", "300", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["mu_o"] == pytest.approx(16.22, abs=0.3)


class TestAsymptotic:
    def test_small_degrees_rows(self, capsys):
        assert main(["asymptotic", "--mode", "small-degrees"]) == 0
        out = capsys.readouterr().out
        assert "2,0.360674" in out
        assert "3,0.240449" in out
        assert "4,0.0601123" in out
        assert "5,0.14427" in out

    def test_closed_form_zero(self, capsys):
        assert main(["asymptotic", "--mode", "closed-form", "--x", "0"]) == 0
        assert capsys.readouterr().out.strip().splitlines()[-1] == "0,0"

    def test_hilbert_cross_method(self, capsys):
        assert main(["asymptotic", "--mode", "hilbert", "--order", "5"]) == 0
        rows = dict(line.split(",") for line
                    in capsys.readouterr().out.strip().splitlines()[1:])
        assert float(rows["2"]) == pytest.approx(0.3607, abs=0.05)

    def test_hilbert_order_cap_exits_four(self, capsys):
        assert main(["asymptotic", "--mode", "hilbert", "--order", "9"]) == 4


class TestEnvironment:
    def test_raptor_seed_env_default(self, monkeypatch):
        monkeypatch.setenv("RAPTOR_SEED", "777")
        from raptorlab.cli import build_parser
        args = build_parser().parse_args(
            ["simulate", "--dist-file", "d.json", "--k", "10",
             "--snr-db", "0", "--trials", "1"])
        assert args.seed == 777


class TestCapacity:
    def test_table(self, capsys):
        assert main(["capacity", "--snr-db=-20,0"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "snr_db,gamma,capacity"
        db, gamma, cap = lines[1].split(",")
        assert float(gamma) == pytest.approx(0.01)
        assert float(cap) == pytest.approx(0.007178, rel=1e-3)


class TestSimulate:
    def test_zero_trials_usage_error(self, dist_file):
        assert main(["simulate", "--dist-file", dist_file, "--k", "100",
                     "--snr-db", "0", "--trials", "0"]) == 2

    def test_malformed_dist_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["simulate", "--dist-file", str(bad), "--k", "100",
                     "--snr-db", "0", "--trials", "30"]) == 2

    def test_missing_field(self, tmp_path):
        bad = tmp_path / "incomplete.json"
        bad.write_text(json.dumps({"D": 10}))
        assert main(["simulate", "--dist-file", str(bad), "--k", "100",
                     "--snr-db", "0", "--trials", "30"]) == 2

    def test_deterministic_outputs(self, tmp_path, dist_file, capsys):
        args = ["simulate", "--dist-file", dist_file, "--k", "120",
                "--snr-db", "3", "--trials", "30", "--T", "80", "--seed", "9"]
        code = main(args + ["--out", str(tmp_path / "a")])
        assert code == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        doc = json.loads((tmp_path / "a.json").read_text())
        assert 0 < doc["summary"]["eta_hat"] < 1.05


class TestBer:
    def test_curve_output(self, tmp_path, dist_file, capsys):
        out = tmp_path / "ber.csv"
        code = main(["ber", "--dist-file", dist_file, "--k", "150",
                     "--snr-db", "-3", "--overheads", "0.6,0.8",
                     "--trials", "2", "--T", "60", "--seed", "4",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "overhead,ber"
        assert len(lines) == 3
