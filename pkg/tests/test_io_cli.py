import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest

from spflow.cli import INPUT_ERROR, NEGATIVE, OK, SCOPE_NOTE, main
from spflow.core import Instance
from spflow.generate import bad_k4, even_spindle, make_eulerian, path_instance, random_instance, random_pair, spindle
from spflow.io import (
    DocumentError,
    format_fraction,
    parse_fraction,
    read_instance,
    read_solution,
    write_instance,
    write_solution,
)
from spflow.lp.multiflow import min_congestion, verify_multiflow


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def save(tmp_path, inst, name="inst.txt"):
    path = tmp_path / name
    path.write_text(write_instance(inst), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# documents


def test_fraction_format():
    assert format_fraction(Fraction(6, 4)) == "3/2"
    assert format_fraction(2) == "2/1"
    assert parse_fraction("3/6") == Fraction(1, 2)
    assert parse_fraction("7") == 7
    for bad in ("1.5", "1/0", "x", "1/-2", ""):
        with pytest.raises(DocumentError):
            parse_fraction(bad)


def test_round_trip_fixtures():
    rng = random.Random(71)
    fixtures = [spindle(3), spindle(5), bad_k4(), even_spindle(), path_instance(3)]
    fixtures += [random_instance(rng, random_pair(rng)) for _ in range(20)]
    fixtures.append(spindle(3).scaled(Fraction(2, 3), Fraction(5, 7)))
    for inst in fixtures:
        text = write_instance(inst)
        assert read_instance(text) == inst
        assert write_instance(read_instance(text)) == text


def test_emitted_rationals_in_lowest_terms():
    text = write_instance(spindle(3).scaled(Fraction(4, 6), 1))
    for line in text.splitlines()[2:]:
        x = Fraction(line.split()[-1])
        assert line.split()[-1] == f"{x.numerator}/{x.denominator}"


def test_read_errors_carry_line_numbers():
    cases = {
        "": "header",
        "spflow-instance 1\nsupply 0 1 1\n": "line 2",
        "spflow-instance 1\nvertices 2\nsupply 0 2 1\n": "line 3",
        "spflow-instance 1\nvertices 2\nsupply 0 1 -1\n": "line 3",
        "spflow-instance 1\nvertices 2\nroad 0 1 1\n": "line 3",
        "spflow-instance 1\nvertices 2\nvertices 3\n": "line 3",
        "spflow-instance 1\n": "vertices",
    }
    for text, fragment in cases.items():
        with pytest.raises(DocumentError) as info:
            read_instance(text)
        assert fragment in str(info.value)


def test_comments_and_blank_lines():
    text = "# a comment\nspflow-instance 1\n\nvertices 2  # two\nsupply 0 1 3/2\n"
    inst = read_instance(text)
    assert inst.capacities == (Fraction(3, 2),) and inst.demand.m == 0


def test_solution_document_round_trip():
    inst = spindle(3)
    sol = min_congestion(inst)
    doc = read_solution(write_solution(inst, sol.paths, sol.congestion, "fractional"))
    assert doc["mode"] == "fractional" and doc["congestion"] == Fraction(4, 3)
    assert verify_multiflow(inst, doc["paths"], doc["congestion"]) == []
    for e, load, cap in doc["loads"]:
        assert load <= cap * doc["congestion"]


# ---------------------------------------------------------------------------
# commands


def test_check_examples(tmp_path, capsys):
    code, out, _ = run(capsys, "check", save(tmp_path, bad_k4()))
    assert code == OK and "cut condition: ok" in out and "eulerian: yes" in out
    code, out, _ = run(capsys, "check", save(tmp_path, spindle(3)))
    assert code == OK and "min surplus: 0/1" in out
    code, out, _ = run(capsys, "check", save(tmp_path, path_instance(1, capacity=1, demand=3)))
    assert code == NEGATIVE and "violated" in out and "min surplus: -2/1" in out


def test_check_emits_certificates(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "check", save(tmp_path, spindle(3)), "--emit-certificates", str(cert))
    data = json.loads(cert.read_text())
    assert code == OK and data["satisfied"] and data["min_surplus"] == "0/1"
    assert [2] in data["tight_cuts"]


def test_solve_fractional_spindle(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", save(tmp_path, spindle(3)))
    assert code == OK and "congestion 4/3" in out
    assert sum(1 for line in out.splitlines() if line.startswith("path ")) == 9


def test_solve_integral_path(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", save(tmp_path, path_instance(3, capacity=1, demand=1)), "--mode", "integral")
    doc = read_solution(out)
    assert code == OK and doc["mode"] == "integral"
    assert [(p.vertices, p.amount) for p in doc["paths"]] == [((0, 1, 2, 3), 1)]


def test_solve_integral_refuses_spindle(tmp_path, capsys):
    cert = tmp_path / "w.json"
    code, out, _ = run(capsys, "solve", save(tmp_path, spindle(3)), "--mode", "integral", "--emit-certificates", str(cert))
    assert code == NEGATIVE and "refused: spindle" in out and "witness: odd 3-spindle" in out
    assert json.loads(cert.read_text())["witness"]["p"] == 3


def test_solve_half_non_eulerian(tmp_path, capsys):
    inst = even_spindle(hub_demand=1)
    code, out, _ = run(capsys, "solve", save(tmp_path, inst), "--mode", "half")
    doc = read_solution(out)
    assert code == OK and verify_multiflow(inst, doc["paths"], 1, integral=True, scale=2) == []


def test_solve_integral_refuses_odd_parity(tmp_path, capsys):
    inst = Instance.build(2, [(0, 1, 2)], [(0, 1, 1)])
    code, out, _ = run(capsys, "solve", save(tmp_path, inst), "--mode", "integral")
    assert code == NEGATIVE and "odd vertices: 0 1" in out


def test_sufficiency_examples(tmp_path, capsys):
    code, out, _ = run(capsys, "sufficiency", save(tmp_path, spindle(5)))
    assert code == NEGATIVE and "cut-sufficient: no" in out and "odd 5-spindle" in out
    code, out, _ = run(capsys, "sufficiency", save(tmp_path, even_spindle()))
    assert code == OK and "cut-sufficient: yes" in out
    code, out, _ = run(capsys, "sufficiency", save(tmp_path, bad_k4()))
    assert code == NEGATIVE and SCOPE_NOTE in out and "k4 branch sets" in out


def test_generate_fixtures(capsys):
    code, out, _ = run(capsys, "generate", "spindle", "3")
    inst = read_instance(out)
    assert code == OK and (inst.n, inst.supply.m, inst.demand.m) == (5, 6, 4)
    code, out, _ = run(capsys, "generate", "badk4")
    inst = read_instance(out)
    assert (inst.n, inst.supply.m, inst.demand.m) == (6, 8, 3) and max(inst.demands) == 2
    assert read_instance(run(capsys, "generate", "even-spindle")[1]) == even_spindle()


def test_generate_random_is_deterministic(capsys):
    first = run(capsys, "generate", "random-sp", "7", "10")[1]
    second = run(capsys, "generate", "random-sp", "7", "10")[1]
    assert first == second
    inst = read_instance(first)
    assert inst.n == 10 and make_eulerian(inst) == inst


def test_generate_errors(capsys):
    assert run(capsys, "generate", "spindle", "2")[0] == INPUT_ERROR
    assert run(capsys, "generate", "spindle")[0] == INPUT_ERROR
    assert run(capsys, "generate", "random-sp", "1")[0] == INPUT_ERROR


def test_gap_command(tmp_path, capsys):
    cert = tmp_path / "gap.json"
    code, out, _ = run(capsys, "gap", save(tmp_path, bad_k4()), "--emit-certificates", str(cert))
    assert code == OK and "gap: 5/4" in out and "complementary slackness: ok" in out
    assert json.loads(cert.read_text())["gap"] == "5/4"
    code, out, _ = run(capsys, "gap", save(tmp_path, spindle(3)), "--seed", "3", "--rounds", "5")
    assert code == OK


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("spflow-instance 1\nvertices 2\nsupply 0 1 x\n")
    code, _, err = run(capsys, "check", str(bad))
    assert code == INPUT_ERROR and "line 3" in err
    code, _, err = run(capsys, "check", str(tmp_path / "missing.txt"))
    assert code == INPUT_ERROR and "cannot read" in err


def test_module_entry_point(tmp_path):
    path = save(tmp_path, spindle(3))
    proc = subprocess.run([sys.executable, "-m", "spflow", "check", path], capture_output=True, text=True)
    assert proc.returncode == 0 and "cut condition: ok" in proc.stdout
