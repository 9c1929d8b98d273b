"""Tests for the command-line tool: dispatch, output and exit codes."""

import json

import pytest
from openpyxl import load_workbook

from strand.cli.exit_codes import OK, USAGE_ERROR, VALIDATION_FAILURE
from strand.main import main
from strand.services.parsing import parse_signature, parse_term
from strand.services.serialization import parse_diagram_json
from strand.services.term_builder import to_diagram_slow

SIGNATURE = """\
object A
op f : A -> A
op g : A A -> A
op h : A -> A
"""

RUNNING_EXAMPLE = """\
(seq (par (split A) (par (id A) (split A)))
     (par (par (gen f) (gen g)) (par (gen h) (id A)))
     (par (counit A) (par (id A) (join A))))
"""


def _write(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _build(tmp_path, term: str, name: str = "d.json") -> str:
    """Elaborate *term* over :data:`SIGNATURE` into a diagram file and return its path."""
    sig = _write(tmp_path, "sig.txt", SIGNATURE)
    src = _write(tmp_path, f"{name}.term", term)
    out = str(tmp_path / name)
    assert main(["build", "--sig", sig, "--term", src, "--out", out]) == OK
    return out


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_diagram_json(fh.read())


class TestBuild:
    """Tests for ``strand build``."""

    def test_running_example(self, tmp_path):
        d, sig = _load(_build(tmp_path, RUNNING_EXAMPLE))
        assert d.G.X == 3
        assert sig == parse_signature(SIGNATURE)
        assert d.source_type.table.tolist() == [0, 0, 0]

    def test_to_stdout(self, tmp_path, capsys):
        sig = _write(tmp_path, "sig.txt", SIGNATURE)
        src = _write(tmp_path, "t.term", "(seq (gen f) (gen h))")
        assert main(["build", "--sig", sig, "--term", src]) == OK
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["G"]["xn"]["table"]) == 2

    def test_slow_matches_fast(self, tmp_path):
        sig = _write(tmp_path, "sig.txt", SIGNATURE)
        src = _write(tmp_path, "t.term", "(par (gen g) (seq (gen f) (gen h)))")
        fast, slow = str(tmp_path / "fast.json"), str(tmp_path / "slow.json")
        assert main(["build", "--sig", sig, "--term", src, "--out", fast]) == OK
        assert main(["build", "--sig", sig, "--term", src, "--slow", "--out", slow]) == OK
        assert _load(fast)[0].G.shape == _load(slow)[0].G.shape

    def test_parse_error_exits_2(self, tmp_path, capsys):
        sig = _write(tmp_path, "sig.txt", SIGNATURE)
        src = _write(tmp_path, "t.term", "(seq (gen f)")
        assert main(["build", "--sig", sig, "--term", src]) == USAGE_ERROR
        assert capsys.readouterr().err.startswith("error: 1:1: unclosed")

    def test_ill_typed_term_exits_1(self, tmp_path, capsys):
        sig = _write(tmp_path, "sig.txt", SIGNATURE)
        src = _write(tmp_path, "t.term", "(seq (gen f) (gen g))")
        assert main(["build", "--sig", sig, "--term", src]) == VALIDATION_FAILURE
        assert "error:" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert main(["build", "--sig", str(tmp_path / "nope.txt"), "--term", "x"]) == USAGE_ERROR
        assert capsys.readouterr().err.startswith("error:")


class TestCheck:
    """Tests for ``strand check``."""

    def test_running_example_is_not_monogamous(self, tmp_path, capsys):
        path = _build(tmp_path, RUNNING_EXAMPLE)
        assert main(["check", path]) == VALIDATION_FAILURE
        assert capsys.readouterr().out.splitlines() == ["monogamous=false", "acyclic=false", "well_formed=true"]

    def test_selected_property(self, tmp_path, capsys):
        path = _build(tmp_path, RUNNING_EXAMPLE)
        assert main(["check", path, "--well-formed"]) == OK
        assert capsys.readouterr().out == "well_formed=true\n"

    def test_selected_failing_property(self, tmp_path, capsys):
        path = _build(tmp_path, RUNNING_EXAMPLE)
        assert main(["check", path, "--acyclic"]) == VALIDATION_FAILURE
        assert capsys.readouterr().out == "acyclic=false\n"

    def test_frobenius_free_term(self, tmp_path, capsys):
        path = _build(tmp_path, "(seq (gen g) (gen f))")
        assert main(["check", path, "--monogamous", "--well-formed"]) == OK
        assert capsys.readouterr().out.splitlines() == ["monogamous=true", "well_formed=true"]

    def test_ill_formed_graph_reports_reason(self, tmp_path, capsys):
        path = _build(tmp_path, "(gen g)")
        doc = json.loads(open(path, encoding="utf-8").read())
        doc["G"]["pi"]["table"] = [0, 0]
        _write(tmp_path, "bad.json", json.dumps(doc))
        assert main(["check", str(tmp_path / "bad.json"), "--well-formed"]) == VALIDATION_FAILURE
        assert capsys.readouterr().out.startswith("well_formed=false  # operation 0 (g):")

    def test_malformed_document_exits_2(self, tmp_path, capsys):
        path = _write(tmp_path, "bad.json", '{"sig": {}}')
        assert main(["check", path]) == USAGE_ERROR
        assert capsys.readouterr().err.startswith("error:")


class TestCombinators:
    """Tests for ``compose``, ``tensor`` and ``dagger``."""

    def test_compose(self, tmp_path):
        left = _build(tmp_path, "(gen g)", "left.json")
        right = _build(tmp_path, "(gen f)", "right.json")
        out = str(tmp_path / "out.json")
        assert main(["compose", left, right, "--out", out]) == OK
        d, _ = _load(out)
        assert (d.G.W, d.G.X) == (4, 2)

    def test_compose_boundary_mismatch(self, tmp_path, capsys):
        path = _build(tmp_path, "(gen g)")
        assert main(["compose", path, path]) == VALIDATION_FAILURE
        assert capsys.readouterr().err.startswith("error:")

    def test_tensor(self, tmp_path):
        left = _build(tmp_path, "(gen g)", "left.json")
        right = _build(tmp_path, "(gen f)", "right.json")
        out = str(tmp_path / "out.json")
        assert main(["tensor", left, right, "--out", out]) == OK
        d, _ = _load(out)
        assert d.source_type.table.tolist() == [0, 0, 0]
        assert d.G.X == 2

    def test_dagger(self, tmp_path):
        out = str(tmp_path / "out.json")
        assert main(["dagger", _build(tmp_path, "(gen g)"), "--out", out]) == OK
        d, _ = _load(out)
        assert (len(d.source_type), len(d.target_type)) == (1, 2)


class TestMap:
    """Tests for ``strand map``."""

    def test_doubling_functor(self, tmp_path):
        sig_in = _write(tmp_path, "in.txt", "object A\nop f : A -> A\n")
        sig_out = _write(tmp_path, "out.txt", "object x\nop e : x -> x\n")
        functor = _write(tmp_path, "fun.txt", "object A -> x x\narrow f = (par (gen e)\n               (gen e))\n")
        term = _write(tmp_path, "t.term", "(seq (gen f) (gen f))")
        diagram = str(tmp_path / "d.json")
        assert main(["build", "--sig", sig_in, "--term", term, "--out", diagram]) == OK

        out = str(tmp_path / "mapped.json")
        assert main(["map", diagram, "--functor", functor, "--sig-in", sig_in, "--sig-out", sig_out,
                     "--out", out]) == OK
        d, sig = _load(out)
        assert sig.object_names == ("x",)
        assert d.G.X == 4
        assert d.source_type.table.tolist() == [0, 0]

    def test_signature_mismatch(self, tmp_path, capsys):
        sig_in = _write(tmp_path, "in.txt", "object B\nop k : B -> B\n")
        functor = _write(tmp_path, "fun.txt", "object B -> B\narrow k = (gen k)\n")
        path = _build(tmp_path, "(gen f)")
        assert main(["map", path, "--functor", functor, "--sig-in", sig_in, "--sig-out", sig_in]) == VALIDATION_FAILURE
        assert "different signatures" in capsys.readouterr().err


class TestArithmetic:
    """Tests for ``rdiff`` and ``eval``."""

    def _rdiff(self, tmp_path, term: str) -> str:
        src = _write(tmp_path, "t.term", term)
        out = str(tmp_path / "rdiff.json")
        assert main(["rdiff", "--term", src, "--out", out]) == OK
        return out

    def test_square(self, tmp_path, capsys):
        path = self._rdiff(tmp_path, "(seq (gen dup) (gen mul))")
        assert main(["eval", path, "--inputs", "3,1"]) == OK
        assert capsys.readouterr().out == "9.0,6.0\n"

    def test_exact_ring(self, tmp_path, capsys):
        path = self._rdiff(tmp_path, "(gen mul)")
        assert main(["eval", path, "--inputs", "1/2,3,2", "--ring", "fraction"]) == OK
        assert capsys.readouterr().out == "3/2,6,1\n"

    def test_rdiff_is_monogamous_acyclic(self, tmp_path, capsys):
        path = self._rdiff(tmp_path, "(seq (gen dup) (gen mul))")
        assert main(["check", path]) == OK
        assert "monogamous=true" in capsys.readouterr().out

    def test_wrong_input_count(self, tmp_path, capsys):
        path = self._rdiff(tmp_path, "(gen add)")
        assert main(["eval", path, "--inputs", "1"]) == VALIDATION_FAILURE
        assert "inputs" in capsys.readouterr().err

    def test_eval_rejects_non_ma(self, tmp_path, capsys):
        src = _write(tmp_path, "t.term", "(split R)")
        sig = _write(tmp_path, "sig.txt", "object R\nop add : R R -> R\n")
        out = str(tmp_path / "d.json")
        assert main(["build", "--sig", sig, "--term", src, "--out", out]) == OK
        assert main(["eval", out, "--inputs", "1"]) == VALIDATION_FAILURE
        assert capsys.readouterr().err.startswith("error:")


class TestExport:
    """Tests for ``dot`` and ``readback``."""

    def test_dot(self, tmp_path, capsys):
        assert main(["dot", _build(tmp_path, "(gen g)")]) == OK
        out = capsys.readouterr().out
        assert out.startswith("digraph diagram {")
        assert "rankdir=LR;" in out

    def test_readback_parses_back(self, tmp_path, capsys):
        path = _build(tmp_path, "(seq (gen g) (gen f))")
        assert main(["readback", path, "--pure"]) == OK
        text = capsys.readouterr().out
        term = parse_term(text, parse_signature(SIGNATURE))
        assert term is not None

    def test_readback_running_example(self, tmp_path, capsys):
        path = _build(tmp_path, RUNNING_EXAMPLE)
        assert main(["readback", path]) == OK
        text = capsys.readouterr().out
        assert text.startswith("(seq ")
        d, sig = _load(path)
        back = to_diagram_slow(parse_term(text, sig), sig)
        assert back.G.shape == d.G.shape


class TestBench:
    """Tests for ``strand bench``."""

    def test_table_and_report(self, tmp_path, capsys):
        report = str(tmp_path / "bench.xlsx")
        assert main(["bench", "--leaves", "32", "--shape", "chain", "--repeat", "1", "--report", report]) == OK
        out = capsys.readouterr().out
        assert out.startswith("chain terms, 32 leaves, median of 1")
        assert "total" in out
        ws = load_workbook(report).active
        assert ws.cell(row=4, column=1).value == "chain"
        assert "ratio" not in out

    def test_several_sizes(self, tmp_path, capsys):
        report = str(tmp_path / "bench.xlsx")
        assert main(["bench", "--leaves", "16", "32", "--repeat", "1", "--report", report]) == OK
        out = capsys.readouterr().out
        assert out.startswith("balanced terms, 16, 32 leaves, median of 1")
        assert "next N" in out
        assert load_workbook(report).sheetnames == ["Phases", "Scaling"]

    def test_bad_size_exits_2(self, capsys):
        assert main(["bench", "--leaves", "0"]) == USAGE_ERROR
        assert "at least one leaf" in capsys.readouterr().err


class TestUsage:
    """Tests for argument errors."""

    def test_no_command(self):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == USAGE_ERROR

    def test_unknown_ring(self, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["eval", "d.json", "--ring", "complex"])
        assert exc_info.value.code == USAGE_ERROR

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert capsys.readouterr().out.startswith("strand ")
