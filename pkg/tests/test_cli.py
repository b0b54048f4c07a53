"""Command-line front end: parsing, formats, exit codes."""

import json

import pytest

from twostate.cli import main

MZ_DOC = {
    "name": "mz-file",
    "dim": 2,
    "pre": [1, 0],
    "timeline": [
        {"unitary": [[[0.7071067811865476, 0], [0, 0.7071067811865476]],
                     [[0, 0.7071067811865476], [0.7071067811865476, 0]]]},
    ],
    "post": {"observable": {"pauli": "z"}, "select": 1},
    "trials": 2000,
    "seed": 3,
}


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAbl:
    def test_orthogonal_post_kills_branch(self, capsys):
        code, out, _ = run(capsys, "abl", "--pre", "up-z", "--post", "up-x", "--obs", "pauli-z")
        assert code == 0
        lines = {l.split()[0]: l.split()[1] for l in out.strip().splitlines()[1:]}
        assert lines["1"] == "1" and lines["-1"] == "0"

    def test_equal_selections_tilted(self, capsys):
        code, out, _ = run(
            capsys, "abl", "--pre", "up-z", "--post", "up-z", "--obs", "spin:1.0471975511965976"
        )
        assert code == 0
        assert "0.9" in out

    def test_zero_denominator_exit_code(self, capsys):
        code, _, err = run(capsys, "abl", "--pre", "up-z", "--post", "down-z", "--obs", "pauli-z")
        assert code == 3
        assert "unreachable" in err

    def test_parse_error_exit_code(self, capsys):
        code, _, err = run(capsys, "abl", "--pre", "sideways", "--post", "up-z", "--obs", "pauli-z")
        assert code == 2
        assert "unknown state" in err

    def test_json_format(self, capsys):
        code, out, _ = run(
            capsys, "abl", "--pre", "up-z", "--post", "up-x", "--obs", "pauli-z",
            "--format", "json",
        )
        assert code == 0
        rows = json.loads(out)
        assert {row["eigenvalue"]: row["probability"] for row in rows} == {1.0: 1.0, -1.0: 0.0}


class TestWeak:
    def test_imaginary_weak_value(self, capsys):
        code, out, _ = run(capsys, "weak", "--pre", "up-z", "--post", "up-x", "--obs", "pauli-y")
        assert code == 0
        assert "0 + 1i" in out

    def test_zero_overlap_exit_code(self, capsys):
        code, _, _ = run(capsys, "weak", "--pre", "up-z", "--post", "down-z", "--obs", "pauli-y")
        assert code == 3


class TestBorn:
    def test_distribution(self, capsys):
        code, out, _ = run(
            capsys, "born", "--state", "up-z", "--obs", "spin:1.0471975511965976",
            "--format", "json",
        )
        assert code == 0
        rows = {r["eigenvalue"]: r["probability"] for r in json.loads(out)}
        assert rows[1.0] == pytest.approx(0.75)


class TestSimulate:
    def test_conditional_frequency(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--pre", "up-z", "--measure", "spin:1.5707963267948966",
            "--post", "pauli-z", "--select", "1", "--trials", "20000", "--seed", "2",
            "--format", "json",
        )
        assert code == 0
        rows = json.loads(out)
        probe = [r for r in rows if r["stage"] == "m0" and r["eigenvalue"] == 1.0]
        assert abs(probe[0]["frequency"] - 0.5) < 0.02

    def test_all_rejected_exit_code(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--pre", "up-z", "--post", "pauli-z", "--select", "-1",
            "--trials", "100",
        )
        assert code == 4
        assert "zero accepted" in err

    def test_bad_select_exit_code(self, capsys):
        code, _, _ = run(
            capsys, "simulate", "--pre", "up-z", "--post", "pauli-z", "--select", "0.3",
            "--trials", "100",
        )
        assert code == 2


class TestScenario:
    def test_builtin_with_params(self, capsys):
        code, out, _ = run(
            capsys, "scenario", "--builtin", "sharp-shanks",
            "--theta-ab", "1.0471975511965976", "--theta-bc", "1.5707963267948966",
            "--mode", "both", "--trials", "30000", "--seed", "3",
        )
        assert code == 0
        assert "analytic 0.75" in out
        assert "verdict: pass" in out

    def test_unknown_builtin_lists_catalog(self, capsys):
        code, _, err = run(capsys, "scenario", "--builtin", "nope")
        assert code == 2
        assert "sharp-shanks" in err

    def test_file_scenario(self, capsys, tmp_path):
        path = tmp_path / "mz.json"
        path.write_text(json.dumps(MZ_DOC))
        code, out, _ = run(capsys, "scenario", "--file", str(path), "--mode", "analytic")
        assert code == 0
        assert "acceptance probability: 0.5" in out

    def test_csv_output(self, capsys):
        code, out, _ = run(
            capsys, "scenario", "--builtin", "spin-zz-xi", "--mode", "both",
            "--trials", "20000", "--seed", "4", "--format", "csv",
        )
        assert code == 0
        header = out.splitlines()[0]
        assert header == "scenario,stage,eigenvalue,analytic,frequency,se,z,pass"

    def test_requires_exactly_one_source(self, capsys):
        code, _, err = run(capsys, "scenario", "--mode", "analytic")
        assert code == 2
        assert "exactly one" in err


class TestPaperChecks:
    def test_small_run_passes_and_is_deterministic(self, capsys, tmp_path):
        out1 = tmp_path / "a.txt"
        out2 = tmp_path / "b.txt"
        # modest trial count keeps this fast; statistical rows may warn but not fail
        code1 = main(["paper-checks", "--trials", "20000", "--seed", "7", "--out", str(out1)])
        code2 = main(["paper-checks", "--trials", "20000", "--seed", "7", "--out", str(out2)])
        capsys.readouterr()
        assert code1 == code2 == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_json_format(self, capsys):
        code, out, _ = run(
            capsys, "paper-checks", "--trials", "20000", "--seed", "9", "--format", "json"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["passed"] is True
        assert any(r["name"] == "product-rule-failure" for r in payload["results"])


class TestPointerSweep:
    def test_csv_schema_and_convergence(self, capsys):
        code, out, _ = run(
            capsys, "pointer-sweep", "--pre", "up-z", "--post", "up-x", "--obs", "pauli-z",
            "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "coupling,shift,shift_per_coupling,weak_value_re,abs_error"
        assert len(lines) == 4
        last = lines[-1].split(",")
        assert float(last[4]) < 1e-3
