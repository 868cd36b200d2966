import re
from pathlib import Path

import pytest

from mlwb.cli import main
from mlwb.pipeline import parse_scenario, render_report, run_pipeline

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

BARCAN = (SCENARIOS / "barcan-two-chain.scn").read_text()


class TestScenarioParsing:
    def test_barcan_scenario(self):
        s = parse_scenario(BARCAN, "barcan")
        assert s.name == "barcan"
        assert s.sigma2
        assert s.gamma is None or s.gamma.sentences is not None

    def test_missing_section(self):
        with pytest.raises(ValueError, match="missing"):
            parse_scenario("[frame]\nworlds u\nroot u\n")

    def test_duplicate_section(self):
        with pytest.raises(ValueError, match="duplicate"):
            parse_scenario("[frame]\n[frame]\n")

    def test_two_formulas_rejected(self):
        text = BARCAN.replace("[formula]", "[formula]\nfalse")
        with pytest.raises(ValueError, match="exactly one"):
            parse_scenario(text)

    def test_unknown_bound_rejected(self):
        text = BARCAN.replace("[bounds]", "[bounds]\nwibble = 3")
        with pytest.raises(ValueError, match="unknown key"):
            parse_scenario(text)


def _strip_times(text: str) -> str:
    return re.sub(r"# time .*", "", text)


class TestPipeline:
    @pytest.mark.parametrize("name", ["barcan-two-chain",
                                      "transitive-three-chain",
                                      "degenerate-point"])
    def test_scenario_runs_clean(self, name):
        s = parse_scenario((SCENARIOS / f"{name}.scn").read_text(), name)
        report = run_pipeline(s)
        assert report.ok, render_report(report)
        assert all(stage.ok for stage in report.stages)
        assert report.dense_certified
        assert report.dense_value == report.kripke_value

    def test_barcan_refuted(self):
        report = run_pipeline(parse_scenario(BARCAN, "barcan"))
        assert report.dense_value is False
        assert report.kripke_value is False

    def test_deterministic(self):
        r1 = run_pipeline(parse_scenario(BARCAN, "barcan"))
        r2 = run_pipeline(parse_scenario(BARCAN, "barcan"))
        assert _strip_times(render_report(r1)) == _strip_times(render_report(r2))


class TestCli:
    def test_pipeline_command(self, capsys):
        rc = main(["pipeline", str(SCENARIOS / "barcan-two-chain.scn")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "refutation_reproduced" in out or "ok" in out

    def test_parse_formula_file(self, tmp_path, capsys):
        f = tmp_path / "a.txt"
        f.write_text("box (p -> q)\n")
        assert main(["parse", "--kind", "formula", str(f)]) == 0
        assert "box" in capsys.readouterr().out

    def test_parse_frame_file(self, tmp_path, capsys):
        f = tmp_path / "frame.txt"
        f.write_text("worlds u v\nroot u\nedges u->v\n")
        assert main(["parse", "--kind", "frame", str(f)]) == 0
        assert "u" in capsys.readouterr().out

    def test_eval_exit_codes(self, tmp_path, capsys):
        m = tmp_path / "model.txt"
        m.write_text("[frame]\nworlds u v\nroot u\nedges u->v\n"
                     "[valuation]\nval p = {v}\n")
        assert main(["eval", "--model", str(m), "--at", "u",
                     "--formula", "box p"]) == 0
        assert main(["eval", "--model", str(m), "--at", "u",
                     "--formula", "p"]) == 1

    def test_close_command(self, tmp_path, capsys):
        f = tmp_path / "frame.txt"
        f.write_text("worlds u v w\nroot u\nedges u->v v->w\n")
        h = tmp_path / "horn.txt"
        h.write_text("x R y & y R z => x R z\n")
        assert main(["close", "--frame", str(f), "--horn", str(h)]) == 0
        out = capsys.readouterr().out
        assert "# added" in out

    def test_unravel_command(self, tmp_path, capsys):
        f = tmp_path / "frame.txt"
        f.write_text("worlds u v\nroot u\nedges u->v\n")
        assert main(["unravel", "--frame", str(f), "--depth", "3"]) == 0

    def test_dense_counterexample(self, capsys):
        assert main(["dense", "counterexample", "--kmax", "4"]) == 0
        out = capsys.readouterr().out
        assert "box" in out or "witness" in out.lower()

    def test_bad_input_exits_2(self, tmp_path, capsys):
        f = tmp_path / "frame.txt"
        f.write_text("this is not a frame\n")
        assert main(["parse", "--kind", "frame", str(f)]) == 2

    def test_missing_file_exits_2(self):
        assert main(["parse", "--kind", "frame", "/nonexistent/frame"]) == 2
