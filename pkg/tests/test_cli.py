"""CLI contracts: exit codes, formats, schemas, config precedence."""

import csv
import io
import json
import math
from importlib import resources

import jsonschema
import pytest

from pbrlab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def load_schema(name: str) -> dict:
    text = resources.files("pbrlab").joinpath(f"schemas/{name}").read_text()
    return json.loads(text)


def validate(instance: dict, schema_name: str) -> None:
    jsonschema.validate(instance=instance, schema=load_schema(schema_name))


class TestExitCodes:
    def test_success_is_zero(self, capsys):
        code, out, _ = run_cli(capsys, "solve", "--theta", "0.7", "--d", "1", "--split", "2")
        assert code == 0

    def test_degeneracy_is_three(self, capsys):
        code, _, err = run_cli(capsys, "spectrum", "--variant", "xyz", "--a", "1", "--b", "1", "--c", "0")
        assert code == 3
        assert "degenerate" in err

    def test_missing_field_is_two(self, capsys):
        code, _, err = run_cli(capsys, "solve", "--d", "1", "--split", "2")
        assert code == 2
        assert "theta" in err

    def test_bad_domain_is_two(self, capsys):
        code, _, err = run_cli(capsys, "states", "--variant", "xyz", "--theta", "3.0")
        assert code == 2
        assert "theta" in err

    def test_unknown_flag_is_two(self, capsys):
        assert main(["solve", "--nope", "1"]) == 2

    def test_no_subcommand_is_two(self, capsys):
        assert main([]) == 2

    def test_violated_constraint_is_three(self, capsys):
        code, _, err = run_cli(
            capsys, "run", "--variant", "soc", "--theta", "1.0471975512",
            "--a", "1", "--b", "0.5", "--c", "-1", "--d", "1",
            "--runs", "10", "--seed", "1",
        )
        assert code == 3
        assert "cos(alpha + theta)" in err


class TestSolve:
    def test_emits_schema_valid_json(self, capsys):
        code, out, _ = run_cli(
            capsys, "solve", "--theta", "0.7853981634", "--d", "1", "--split", "2", "--b", "0.5"
        )
        assert code == 0
        doc = json.loads(out)
        validate(doc, "solver_result.schema.json")
        assert abs(doc["sum_ac"]) < 1e-9
        assert doc["method"] == "closed-form"

    def test_bisection_method(self, capsys):
        code, out, _ = run_cli(
            capsys, "solve", "--theta", "1.0", "--d", "1", "--split", "2",
            "--method", "bisection",
        )
        assert code == 0
        doc = json.loads(out)
        validate(doc, "solver_result.schema.json")
        assert doc["method"] == "bisection"

    def test_degrees_flag(self, capsys):
        _, out_rad, _ = run_cli(capsys, "solve", "--theta", str(math.pi / 3), "--d", "1", "--split", "2")
        _, out_deg, _ = run_cli(capsys, "solve", "--theta", "60", "--deg", "--d", "1", "--split", "2")
        a = json.loads(out_rad)["sum_ac"]
        b = json.loads(out_deg)["sum_ac"]
        assert a == pytest.approx(b, abs=1e-9)


class TestStatesAndSpectrum:
    def test_states_json(self, capsys):
        code, out, _ = run_cli(capsys, "states", "--variant", "soc", "--theta", "0.5")
        assert code == 0
        doc = json.loads(out)
        assert set(doc["states"]) == {"u", "v", "w"}
        assert doc["overlaps"]["u|v"][0] == pytest.approx(math.cos(0.5), abs=1e-12)

    def test_states_csv(self, capsys):
        code, out, _ = run_cli(capsys, "states", "--variant", "xyz", "--theta", "0.5", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["state", "amp_plus_re", "amp_plus_im", "amp_minus_re", "amp_minus_im"]
        assert [r[0] for r in rows[1:]] == ["u", "v", "vbar"]

    def test_spectrum_csv_columns(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--variant", "xyz", "--a", "1", "--b", "2", "--c", "3")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["label", "analytic_E", "numeric_E", "abs_diff"]
        table = {r[0]: r for r in rows[1:]}
        assert float(table["e1"][1]) == 2.0
        assert float(table["e4"][1]) == -6.0
        assert all(abs(float(r[3])) <= 1e-10 for r in rows[1:])

    def test_spectrum_json_soc_has_alpha(self, capsys):
        code, out, _ = run_cli(
            capsys, "spectrum", "--variant", "soc",
            "--a", "1", "--b", "0.5", "--c", "-1", "--d", "1", "--format", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["alpha"] == pytest.approx(math.pi / 4, abs=1e-12)


class TestRun:
    ARGS = [
        "run", "--variant", "xyz", "--theta", "1.0471975512",
        "--a", "1", "--b", "2", "--c", "3",
        "--runs", "20000", "--seed", "42", "--policy", "roundrobin",
    ]

    def test_csv_table_with_summary_on_stderr(self, capsys):
        code, out, err = run_cli(capsys, *self.ARGS)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["preparation", "outcome", "count", "frequency", "is_forbidden"]
        assert len(rows) == 17
        forbidden_rows = [r for r in rows[1:] if r[4] == "True"]
        assert len(forbidden_rows) == 4
        assert all(int(r[2]) == 0 for r in forbidden_rows)  # no noise
        summary = json.loads(err)
        validate(summary, "run_summary.schema.json")
        assert summary["eps_hat"] == 0.0

    def test_json_summary_validates_schema(self, capsys):
        code, out, _ = run_cli(capsys, *self.ARGS, "--format", "json", "--noise", "0.04")
        assert code == 0
        doc = json.loads(out)
        validate(doc, "run_summary.schema.json")
        assert doc["overlap_bound"] == pytest.approx(4 * doc["eps_hat"], abs=1e-12)
        assert sum(sum(row) for row in doc["counts"]) == 20000

    def test_byte_identical_output(self, capsys):
        _, out1, err1 = run_cli(capsys, *self.ARGS)
        _, out2, err2 = run_cli(capsys, *self.ARGS)
        assert out1 == out2 and err1 == err2

    def test_workers_do_not_change_output(self, capsys):
        _, out1, _ = run_cli(capsys, *self.ARGS)
        _, out2, _ = run_cli(capsys, *self.ARGS, "--workers", "3")
        assert out1 == out2

    def test_default_couplings_for_soc(self, capsys):
        code, out, _ = run_cli(
            capsys, "run", "--variant", "soc", "--theta", "0.9",
            "--runs", "1000", "--seed", "7", "--format", "json",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["instance"]["constraint_residual"] <= 1e-10


class TestFeasibility:
    def test_both_overlap_report(self, capsys):
        code, out, _ = run_cli(
            capsys, "feasibility", "--variant", "xyz", "--theta", "1.0", "--overlap", "both"
        )
        assert code == 0
        doc = json.loads(out)
        validate(doc, "feasibility.schema.json")
        assert doc["feasible"] is False
        assert doc["problems"][0]["certificate"]
        assert doc["verdicts"][0]["relation"] == "at-least-one-disjoint"

    def test_single_overlap_lists_branches(self, capsys):
        code, out, _ = run_cli(
            capsys, "feasibility", "--variant", "xyz", "--theta", "1.0", "--overlap", "a"
        )
        assert code == 0
        doc = json.loads(out)
        validate(doc, "feasibility.schema.json")
        assert doc["feasible"] is True
        assert sorted(p["branch"] for p in doc["problems"]) == ["u", "vbar"]

    def test_soc_special_case_verdict(self, capsys):
        code, out, _ = run_cli(
            capsys, "feasibility", "--variant", "soc",
            "--theta", str(math.pi / 4), "--overlap", "both",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["verdicts"][0]["relation"] == "disjoint"
        assert doc["verdicts"][0]["pairs"] == [["u", "v"]]


class TestBound:
    def test_bound_json(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--eps", "0.01")
        assert code == 0
        assert json.loads(out) == {"bound": 0.04, "eps_hat": 0.01}

    def test_out_of_range_eps(self, capsys):
        code, _, err = run_cli(capsys, "bound", "--eps", "1.5")
        assert code == 2


class TestConfigFile:
    def test_config_supplies_missing_fields(self, tmp_path, capsys):
        cfg = tmp_path / "settings.cfg"
        cfg.write_text("theta = 0.7\nd = 1.0\nsplit = 2\n# a comment\n\nb = 0.4\n")
        code, out, _ = run_cli(capsys, "solve", "--config", str(cfg))
        assert code == 0
        assert json.loads(out)["b"] == 0.4

    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "settings.cfg"
        cfg.write_text("theta = 0.7\nd = 1.0\nsplit = 2\n")
        _, out_cfg, _ = run_cli(capsys, "solve", "--config", str(cfg))
        _, out_flag, _ = run_cli(capsys, "solve", "--config", str(cfg), "--theta", "0.9")
        assert json.loads(out_cfg)["theta"] == 0.7
        assert json.loads(out_flag)["theta"] == 0.9

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "settings.cfg"
        cfg.write_text("thetta = 0.7\n")
        code, _, err = run_cli(capsys, "solve", "--config", str(cfg), "--d", "1", "--split", "2")
        assert code == 2
        assert "thetta" in err

    def test_unparseable_value_names_the_field(self, tmp_path, capsys):
        cfg = tmp_path / "settings.cfg"
        cfg.write_text("theta = fast\n")
        code, _, err = run_cli(capsys, "solve", "--config", str(cfg), "--d", "1", "--split", "2")
        assert code == 2
        assert "theta" in err and "fast" in err

    def test_missing_config_file(self, capsys):
        code, _, err = run_cli(capsys, "solve", "--config", "/nonexistent.cfg", "--theta", "1", "--d", "1", "--split", "2")
        assert code == 2


class TestVerifyAll:
    def test_small_sweep_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify-all", "--seed", "11", "--runs", "20000")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "verification sweep (seed 11)"
        assert all(line.startswith("PASS") for line in lines[1:-1])
        assert lines[-1].endswith("checks passed")

    def test_report_is_reproducible(self, capsys):
        _, out1, _ = run_cli(capsys, "verify-all", "--seed", "11", "--runs", "20000")
        _, out2, _ = run_cli(capsys, "verify-all", "--seed", "11", "--runs", "20000")
        assert out1 == out2
