import csv
import json

import pytest

from rdbsim.cli import main
from rdbsim.presets import PRESETS, get_preset


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


class TestRun:
    ARGS = ["run", "--scheme", "single-beam", "--M", "1000", "--q", "0.8", "--trials", "300", "--seed", "7"]

    def test_single_row_and_summary(self, tmp_path, capsys):
        prefix = str(tmp_path / "r")
        code, _, _ = run(self.ARGS + ["-o", prefix], capsys)
        assert code == 0
        rows = read_rows(prefix + ".csv")
        assert len(rows) == 1 and rows[0]["K"] == "251" and rows[0]["status"] == "ok"
        summary = json.loads((tmp_path / "r.json").read_text())
        for key in ("version", "config", "master_seed", "workers", "points"):
            assert key in summary
        assert summary["master_seed"] == 7
        assert summary["points"][0]["n_trials"] == 300

    def test_repeat_is_byte_identical(self, tmp_path, capsys):
        run(self.ARGS + ["-o", str(tmp_path / "a")], capsys)
        run(self.ARGS + ["-o", str(tmp_path / "b"), "--workers", "2"], capsys)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_stdout_when_no_prefix(self, capsys):
        code, out, err = run(self.ARGS, capsys)
        assert code == 0 and out.startswith("scheme,M,")
        assert json.loads(err)["command"] == "run"

    def test_q_out_of_range(self, tmp_path, capsys):
        code, _, err = run(["run", "--q", "1.5", "-o", str(tmp_path / "x")], capsys)
        assert code != 0 and "q must lie" in err
        assert not list(tmp_path.iterdir())

    def test_invalid_point_leaves_no_files(self, tmp_path, capsys):
        code, _, _ = run(["run", "--scheme", "rbf", "--M", "4", "--K", "3", "--S", "9",
                          "-o", str(tmp_path / "x")], capsys)
        assert code != 0 and not list(tmp_path.iterdir())

    def test_missing_config_file(self, capsys):
        code, _, _ = run(["run", "--config", "/nonexistent.json"], capsys)
        assert code == 2

    def test_bits(self, tmp_path, capsys):
        run(self.ARGS + ["-o", str(tmp_path / "n")], capsys)
        run(self.ARGS + ["--bits", "-o", str(tmp_path / "b")], capsys)
        n, b = read_rows(tmp_path / "n.csv")[0], read_rows(tmp_path / "b.csv")[0]
        assert float(b["mean"]) == pytest.approx(float(n["mean"]) / 0.6931471805599453)
        assert b["ratio"] == n["ratio"]
        assert b["log_base"] == "2"


class TestConfigPrecedence:
    def test_file_then_flags(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"M": 200, "q": 0.6, "trials": 20, "gain": "unit"}))
        run(["run", "--config", str(cfg), "--M", "300", "-o", str(tmp_path / "o")], capsys)
        row = read_rows(tmp_path / "o.csv")[0]
        assert (row["M"], row["q"], row["gain"], row["n_trials"]) == ("300", "0.6", "unit", "20")

    def test_summary_round_trips(self, tmp_path, capsys):
        run(["run", "--M", "150", "--q", "0.7", "--trials", "15", "-o", str(tmp_path / "a")], capsys)
        run(["run", "--config", str(tmp_path / "a.json"), "-o", str(tmp_path / "b")], capsys)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_env_seed(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("RDBSIM_SEED", "7")
        run(TestRun.ARGS[:-2] + ["-o", str(tmp_path / "e")], capsys)
        monkeypatch.delenv("RDBSIM_SEED")
        run(TestRun.ARGS + ["-o", str(tmp_path / "f")], capsys)
        assert (tmp_path / "e.csv").read_bytes() == (tmp_path / "f.csv").read_bytes()

    def test_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"antennas": 3}))
        assert run(["run", "--config", str(cfg)], capsys)[0] == 2


class TestFigure:
    def test_fig3a_cardinality(self, tmp_path, capsys):
        code, _, _ = run(["figure", "fig3a", "--trials", "20", "--M", "100,1000", "-o", str(tmp_path / "f")], capsys)
        assert code == 0
        rows = read_rows(tmp_path / "f.csv")
        assert len(rows) == len(get_preset("fig3a")["q"]) * 2
        assert all(r["ratio"] for r in rows)

    def test_fig4a_low_q_decreases(self, tmp_path, capsys):
        run(["figure", "fig4a", "--trials", "500", "--q", "0.1", "--M", "100,10000", "-o", str(tmp_path / "f")], capsys)
        lo, hi = read_rows(tmp_path / "f.csv")
        assert float(hi["mean"]) < float(lo["mean"])

    def test_all_presets_known(self):
        assert set(PRESETS) == {"fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b"}

    def test_unknown_preset(self, capsys):
        with pytest.raises(SystemExit):
            main(["figure", "fig9"])


class TestTheory:
    def test_fro(self, capsys):
        code, out, _ = run(["theory", "fro", "--q", "0.25,0.5,0.75", "--json"], capsys)
        rows = json.loads(out)
        assert [r["gamma_single"] for r in rows] == [-0.5, 0.0, 0.0]
        assert [r["gamma_multibeam_su"] for r in rows] == [0.0, 0.0, 0.0]
        assert [r["gamma_multibeam_mu"] for r in rows] == [-0.5, 0.0, 0.5]

    def test_lemma1(self, capsys):
        _, out, _ = run(["theory", "lemma1", "--M", "10000", "--p", "0", "--json"], capsys)
        row = json.loads(out)[0]
        assert row["lower"] == pytest.approx(1.5915e-3, rel=1e-4)

    def test_cone(self, capsys):
        _, out, _ = run(["theory", "cone", "--M", "30", "--eta2", "0.2", "--K", "400", "--json"], capsys)
        row = json.loads(out)[0]
        assert row["single"] == pytest.approx(2.4787521766663585e-3)
        assert row["nonempty"] == pytest.approx(1 - (1 - 2.4787521766663585e-3) ** 400)

    def test_range_error(self, capsys):
        assert run(["theory", "thm2", "--q", "1.5"], capsys)[0] == 2


class TestValidate:
    def test_kernel_suite_passes(self, capsys):
        code, out, _ = run(["validate", "kernel", "--budget", "0.05"], capsys)
        report = json.loads(out)
        assert code == 0 and report["passed"]
        assert all(c["verdict"] == "pass" for c in report["suites"]["kernel"])

    def test_appendix_a(self, tmp_path, capsys):
        code, _, _ = run(["validate", "appendixA", "-o", str(tmp_path / "v.json")], capsys)
        assert code == 0
        assert json.loads((tmp_path / "v.json").read_text())["suites"]["appendixA"][0]["verdict"] == "pass"
