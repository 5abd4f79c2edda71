import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from hyperclock.cli import main

GOLDEN = Path(__file__).parent / "golden"

ONE_STATE = {
    "propositions": ["run"], "states": ["v"], "initial": ["v"], "labels": {"v": ["run"]}, "clocks": [],
    "edges": [], "final": ["v"],
}

POINT = {
    "propositions": ["p"], "states": ["s", "t"], "start": "s", "clocks": ["x"],
    "edges": [{"from": "s", "events": ["p"], "guards": ["(>= x 1)", "(<= x 1)"], "resets": [], "to": "t"}],
    "final": ["t"],
}


@pytest.fixture
def files(tmp_path):
    def write(name, data):
        p = tmp_path / name
        p.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(p)

    return write


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestParse:
    def test_echo(self, capsys):
        code, out, _ = run(["parse", "exists a.  F[0,1] p@a"], capsys)
        assert code == 0
        assert out.strip() == "exists a. F[0,1] p@a"

    def test_error_has_position(self, capsys):
        code, _, err = run(["parse", "exists a. F[0,1 p@a"], capsys)
        assert code == 2
        assert "error" in err and re_position(err)

    def test_open_temporal_needs_flag(self, capsys):
        assert run(["parse", "F[0,1] p@a"], capsys)[0] == 2
        assert run(["parse", "--open", "F[0,1] p@a"], capsys)[0] == 0

    def test_negate(self, capsys):
        code, out, _ = run(["negate", "--open", "p@a & G[0,2] q@b"], capsys)
        assert code == 0
        assert out.strip() == "(!p@a | F[0,2] !q@b)"

    def test_formula_from_file(self, files, capsys):
        path = files("f.hcm", "forall a. p@a\n")
        assert run(["parse", "@" + path], capsys)[1].strip() == "forall a. p@a"


def re_position(text: str) -> bool:
    return re.search(r"(position|column|col) ?\d+", text) is not None


class TestCheckTrace:
    def env(self, end="[0,2)"):
        return {"mode": "interval", "horizon": "3", "automaton": ONE_STATE,
                "paths": {"a": {"segments": [{"state": "v", "interval": end}], "transitions": []}}}

    def test_true(self, files, capsys):
        code, out, _ = run(["check-trace", files("e.json", self.env()), "G[0,1] run@a", "--at", "0", "--anchor", "a"],
                           capsys)
        assert (code, out.strip()) == (0, "true")

    def test_false_after_run_ends(self, files, capsys):
        code, out, _ = run(["check-trace", files("e.json", self.env("[0,1)")), "G[0,1] run@a", "--at", "0"], capsys)
        assert (code, out.strip()) == (1, "false")

    def test_quantified(self, files, capsys):
        code, out, _ = run(["check-trace", files("e.json", self.env()), "exists p. G[0,1] run@p", "--at", "0"],
                           capsys)
        assert (code, out.strip()) == (0, "true")

    def test_unknown_anchor(self, files, capsys):
        assert run(["check-trace", files("e.json", self.env()), "run@a", "--anchor", "zz"], capsys)[0] == 2

    def test_unbound_variable(self, files, capsys):
        assert run(["check-trace", files("e.json", self.env()), "run@b"], capsys)[0] == 2


class TestVerify:
    def test_holds(self, files, capsys):
        code, out, _ = run(["verify", files("a.json", ONE_STATE), "exists a. G[0,1] run@a", "-N", "2"], capsys)
        assert code == 0
        assert json.loads(out)["verdict"] == "holds-on-grid"

    def test_fails_with_witness(self, files, capsys):
        code, out, _ = run(["verify", files("a.json", ONE_STATE), "forall a. G[0,1] run@a", "-N", "2"], capsys)
        data = json.loads(out)
        assert code == 1
        assert data["verdict"] == "fails-with-witness"
        assert data["witness"]["replayed"]

    def test_deterministic_output(self, files, capsys):
        args = ["verify", files("a.json", ONE_STATE), "forall a. F[0,1] run@a", "-k", "2", "-N", "3"]
        first = run(args, capsys)[1]
        assert run(args + ["--jobs", "2"], capsys)[1] == first
        assert "seconds" not in first

    def test_timing_opt_in(self, files, capsys):
        out = run(["verify", files("a.json", ONE_STATE), "exists a. run@a", "-N", "2", "--timing"], capsys)[1]
        assert "seconds" in json.loads(out)["stats"]

    def test_open_formula_rejected(self, files, capsys):
        assert run(["verify", files("a.json", ONE_STATE), "run@a"], capsys)[0] == 2

    def test_malformed_json(self, files, capsys):
        code, _, err = run(["verify", files("a.json", '{"states": ['), "exists a. run@a"], capsys)
        assert code == 2
        assert "line 1 column" in err

    def test_missing_field(self, files, capsys):
        code, _, err = run(["verify", files("a.json", {"states": ["v"]}), "exists a. run@a"], capsys)
        assert code == 2
        assert "automaton" in err

    def test_missing_file(self, capsys):
        assert run(["verify", "/nonexistent/a.json", "exists a. run@a"], capsys)[0] == 2

    def test_bad_budget(self, files, capsys):
        assert run(["verify", files("a.json", ONE_STATE), "exists a. run@a", "-k", "0"], capsys)[0] == 2

    def test_point(self, files, capsys):
        code, out, _ = run(["verify-point", files("b.json", POINT), "exists a. F[0,2] p@a", "-N", "3", "-d", "1"],
                           capsys)
        assert code == 0
        assert json.loads(out)["stats"]["routes"] == ["direct", "reduce"]


class TestToMso:
    def test_golden(self, capsys):
        code, out, _ = run(["to-mso", "--automaton", str(GOLDEN / "two_state.json"), "-N", "5"], capsys)
        assert code == 0
        assert out == (GOLDEN / "two_state.mso").read_text()

    def test_stable_across_processes(self):
        cmd = [sys.executable, "-m", "hyperclock.cli", "to-mso", "--automaton", str(GOLDEN / "two_state.json"), "-N", "5"]
        outs = {subprocess.run(cmd, capture_output=True, text=True, check=True).stdout for _ in range(2)}
        assert outs == {(GOLDEN / "two_state.mso").read_text()}

    def test_formula_scaled(self, files, capsys):
        code, out, _ = run(["to-mso", "--automaton", files("a.json", ONE_STATE), "--formula", "exists a. F[0,1/2] run@a",
                            "-N", "2"], capsys)
        assert code == 0
        assert "; scale-factor 2" in out and "; scaled-horizon 4" in out
        assert "; formula exists a. F[0,1] run@a" in out

    def test_index_out_of_range(self, files, capsys):
        args = ["to-mso", "--automaton", files("a.json", ONE_STATE), "--formula", "run@a", "--index", "5"]
        assert run(args, capsys)[0] == 2

    def test_output_file(self, files, tmp_path, capsys):
        target = tmp_path / "out.mso"
        assert run(["to-mso", "--automaton", str(GOLDEN / "two_state.json"), "-N", "5", "-o", str(target)], capsys)[0] == 0
        assert target.read_text() == (GOLDEN / "two_state.mso").read_text()


class TestPointToInterval:
    def test_emits_both(self, files, capsys):
        code, out, _ = run(["point2interval", files("b.json", POINT), "--formula", "exists a. p@a"], capsys)
        data = json.loads(out)
        assert code == 0
        assert "#" in data["automaton"]["propositions"]
        assert "#@a" in data["formula"]


class TestCorpus:
    def test_list(self, capsys):
        code, out, _ = run(["corpus", "list"], capsys)
        assert code == 0
        names = [line.split("\t")[0] for line in out.splitlines()]
        assert len(names) == 14
        assert {n.split("/")[1] for n in names} == {"compliant", "mutant"}

    def test_unknown_entry(self, capsys):
        assert run(["corpus", "run", "--only", "nope"], capsys)[0] == 2

    def test_run_one(self, capsys):
        code, out, _ = run(["corpus", "run", "--only", "timing-attack/mutant", "--json"], capsys)
        data = json.loads(out)
        assert code == 0
        assert data[0]["ok"] and data[0]["verdict"] == "fails-with-witness"


def test_usage_error(capsys):
    assert run(["frobnicate"], capsys)[0] == 2
    assert run([], capsys)[0] == 2
