from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snaketile.cli import main
from snaketile.errors import InstanceError
from snaketile.instance import (InstanceParseError, format_value, load_instance, parse_instance,
                                parse_value, serialize)

INST = Path(__file__).parent.parent / "instances"
ALL = sorted(INST.glob("*.inst"))


def run(capsys, *argv):
    code = main(["--no-timing", *map(str, argv)])
    out = capsys.readouterr()
    rows = dict(line.split("\t", 1) for line in out.out.splitlines()
                if "\t" in line and not line.startswith(("begin", "end")))
    return code, rows, out


class TestParsing:
    @pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
    def test_round_trip(self, path):
        inst = parse_instance(path)
        again = load_instance(serialize(inst))
        assert again == inst
        assert serialize(again) == serialize(inst)

    def test_unknown_colour_names_section_and_key(self):
        text = "[group]\nkind = free\ngenerators = [a, t]\n\n[tileset]\nsteps = [\"a\"]\n" \
               "colors = [c:0]\ndominoes = [(c:0, 0, d:0)]\n"
        with pytest.raises(InstanceParseError) as exc:
            load_instance(text)
        assert exc.value.section == "tileset" and exc.value.key == "dominoes"
        assert "[tileset].dominoes" in str(exc.value)

    def test_syntax_error_anchored(self):
        text = "[group]\nkind = free\ngenerators = [a, t\n"
        with pytest.raises(InstanceParseError) as exc:
            load_instance(text)
        assert exc.value.line == 3 and exc.value.column is not None

    def test_bad_value_column(self):
        with pytest.raises(InstanceParseError) as exc:
            load_instance("[budget]\nmax_length = (1, 2\n")
        assert exc.value.line == 2 and exc.value.key == "max_length"

    def test_key_outside_section(self):
        with pytest.raises(InstanceParseError) as exc:
            load_instance("kind = free\n")
        assert exc.value.line == 1

    def test_unknown_section(self):
        with pytest.raises(InstanceParseError):
            load_instance("[graph]\n")

    def test_unknown_group_kind(self):
        with pytest.raises(InstanceParseError) as exc:
            load_instance("[group]\nkind = torus\n")
        assert exc.value.key == "kind"

    def test_missing_file(self, tmp_path):
        with pytest.raises(InstanceError):
            parse_instance(tmp_path / "nope.inst")

    def test_multiline_lists_and_comments(self):
        inst = load_instance("[group]  # the group\nkind = free\ngenerators = [a,\n  t]  # two\n")
        assert inst.group.letters == ("a", "A", "t", "T")

    def test_hnn_instance(self):
        inst = parse_instance(INST / "g1_hnn.inst")
        G = inst.group
        assert G.eval_canon(("T", "a", "t")) == G.eval_canon(("b",))
        assert inst.budget.max_length == 8

    @settings(max_examples=200)
    @given(st.recursive(
        st.one_of(st.integers(-50, 50), st.booleans(),
                  st.text("abcxyz:_ 01", min_size=1).map(str.strip).filter(bool)),
        lambda inner: st.one_of(st.lists(inner, max_size=3),
                                st.lists(inner, max_size=3).map(tuple)),
        max_leaves=8))
    def test_value_round_trip(self, v):
        assert parse_value(format_value(v)) == v


class TestCommands:
    def test_classify_translation(self, capsys):
        code, rows, _ = run(capsys, "classify", INST / "lamplighter_translation.inst")
        assert code == 0 and rows["case"] == "Case1"

    def test_classify_free_power(self, capsys):
        code, rows, _ = run(capsys, "classify", INST / "free_a_power.inst")
        assert rows["case"] == "Case2" and rows["R"] == "0"

    def test_classify_lamp(self, capsys):
        code, rows, _ = run(capsys, "classify", INST / "lamplighter_a.inst")
        assert rows["case"] == "Case3"

    @pytest.mark.parametrize("variant,outcome", [("weak", "Yes"), ("strong", "No")])
    def test_discriminator(self, capsys, variant, outcome):
        code, rows, _ = run(capsys, "solve", INST / "discriminator.inst", "--variant", variant,
                            "--shape", "path")
        assert code == 0 and rows["outcome"] == outcome

    def test_minimal_ouroboros(self, capsys):
        code, rows, _ = run(capsys, "solve", INST / "minimal.inst", "--shape", "ouroboros")
        assert code == 0 and rows["outcome"] == "No" and rows["cert_bound"] == "1"

    def test_infinite_unknown_exit(self, capsys, tmp_path):
        # every segment of a-powers in the free group exists, yet no snake is
        # periodic within a zero period budget
        f = tmp_path / "u.inst"
        f.write_text((INST / "free_a_power.inst").read_text()
                     + "\n[budget]\nmax_period = 1\nmax_length = 2\nmax_states = 3\n")
        code, rows, _ = run(capsys, "solve", f, "--shape", "infinite")
        assert code in (0, 2)
        assert (code == 2) == (rows["outcome"] == "Unknown")

    def test_reach(self, capsys):
        code, rows, _ = run(capsys, "reach", INST / "lamplighter_translation.inst", "--to-fiber", 3)
        assert code == 0 and rows["outcome"] == "Yes"
        code, rows, _ = run(capsys, "reach", INST / "lamplighter_a.inst", "--to-fiber", 1)
        assert rows["outcome"] == "No"

    def test_reduce(self, capsys):
        code, rows, _ = run(capsys, "reduce", INST / "discriminator.inst", "--from", "weak")
        assert code == 0 and rows["colors"] == "4"
        assert rows["encoding"].startswith("directed;")

    def test_tower_verify(self, capsys):
        code, rows, _ = run(capsys, "tower", "verify", "--family", "lamplighter", "--level", 3,
                            "--radius", 1)
        assert code == 0
        assert rows["ball_agreement_limit"] == "true"
        assert rows["fiber_0_0_within_bound"] == "true"

    def test_tower_build(self, capsys):
        code, rows, _ = run(capsys, "tower", "build", "--family", "permutations", "--level", 2)
        assert code == 0 and rows["order"] == "24"

    def test_tower_over_budget_is_unknown(self, capsys):
        code, rows, _ = run(capsys, "tower", "build", "--level", 20)
        assert code == 2 and rows["outcome"] == "Unknown"

    def test_supervise(self, capsys, tmp_path):
        code, rows, out = run(capsys, "--report", tmp_path, "tower", "supervise", "--steps", 6)
        assert code == 0 and rows["stages"] == "6"
        assert (tmp_path / "report.tsv").exists() and (tmp_path / "supervisor.png").exists()

    def test_automaton(self, capsys):
        code, rows, out = run(capsys, "automaton", "emptiness", INST / "constant_tree.inst")
        assert code == 0 and rows["verdict"] == "NonEmpty"
        assert "begin\tregular_tree" in out.out
        code, rows, _ = run(capsys, "automaton", "emptiness", INST / "forbidden_tree.inst")
        assert rows["verdict"] == "Empty"

    def test_automaton_combine(self, capsys):
        code, rows, _ = run(capsys, "automaton", "combine", INST / "constant_tree.inst",
                            INST / "forbidden_tree.inst", "--op", "union")
        assert code == 0 and rows["verdict"] == "NonEmpty"
        code, rows, _ = run(capsys, "automaton", "combine", INST / "constant_tree.inst",
                            INST / "forbidden_tree.inst", "--op", "intersection")
        assert rows["verdict"] == "Empty"

    def test_ball_dot_and_figure(self, capsys, tmp_path):
        code, rows, out = run(capsys, "--report", tmp_path, "ball", INST / "lamplighter_a.inst",
                              "--radius", 1, "--dot")
        assert code == 0 and rows["vertices"] == "4"
        assert "digraph" in out.out
        assert (tmp_path / "ball.png").stat().st_size > 0

    def test_error_exit(self, capsys, tmp_path):
        f = tmp_path / "bad.inst"
        f.write_text("[group]\nkind = torus\n")
        code = main(["classify", str(f)])
        assert code == 1
        assert "torus" in capsys.readouterr().err

    def test_missing_section_is_error(self, capsys):
        assert main(["classify", str(INST / "constant_tree.inst")]) == 1

    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code != 0

    @pytest.mark.parametrize("argv", [
        ["classify", INST / "free_a_power.inst"],
        ["solve", INST / "discriminator.inst", "--variant", "weak"],
        ["ball", INST / "lamplighter_a.inst", "--radius", 2, "--dot"],
        ["tower", "supervise", "--steps", 5],
    ], ids=["classify", "solve", "ball", "supervise"])
    def test_report_body_deterministic(self, capsys, argv):
        main(["--no-timing", *map(str, argv)])
        first = capsys.readouterr().out
        main(["--no-timing", *map(str, argv)])
        assert capsys.readouterr().out == first

    def test_timing_line(self, capsys):
        main(["tower", "build"])
        assert capsys.readouterr().out.rstrip().split("\n")[-1].startswith("elapsed_s\t")
