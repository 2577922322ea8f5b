import json
import subprocess
import sys

import pytest

from finprin import catalog
from finprin.cli import run
from finprin.partial import structure_to_json
from finprin.reductions import _random_total


def _capture(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_principle_list(capsys):
    code, out, _ = _capture(capsys, ["principle", "list"])
    assert code == 0
    assert "PHP" in out and "WPHP" in out


def test_principle_show_round_trips(capsys):
    code, out, _ = _capture(capsys, ["principle", "show", "PHP"])
    assert code == 0
    assert out.startswith("principle PHP")


def test_determinacy_table_wphp(capsys):
    code, out, _ = _capture(capsys, ["determinacy", "WPHP", "--n", "2..3"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[1].startswith("2\t3\t4")
    assert lines[2].startswith("3\t4\t9")


def test_determinacy_json(capsys):
    code, out, _ = _capture(capsys, ["determinacy", "PHP", "--n", "2", "--format", "json"])
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["d"] == 3


def test_determinacy_cap_exit_code(capsys):
    code, _, err = _capture(capsys, ["determinacy", "HOP", "--n", "3", "--cap", "50"])
    assert code == 4
    assert "cap" in err


def test_largeness(capsys):
    code, out, _ = _capture(capsys, ["largeness", "IND", "--n", "2,10,64"])
    assert code == 0
    for line in out.strip().splitlines():
        assert "ok" in line


def test_largeness_without_model(capsys):
    code, _, err = _capture(capsys, ["largeness", "WPHP", "--n", "4"])
    assert code == 2


def test_translate_metrics(capsys):
    code, out, _ = _capture(capsys, ["translate", "PHP", "--n", "2", "--binary",
                                     "--check-tautology"])
    assert code == 0
    assert "tautology: True" in out


def test_translate_cnf_deterministic(capsys):
    args = ["translate", "WPHP", "--n", "2", "--unary", "--simplify", "--cnf", "direct"]
    code1, out1, _ = _capture(capsys, args)
    code2, out2, _ = _capture(capsys, args)
    assert code1 == code2 == 0
    assert out1 == out2
    assert "p cnf" in out1


def test_unknown_principle_usage_error(capsys):
    code, _, err = _capture(capsys, ["determinacy", "NOPE", "--n", "2"])
    assert code == 2


def test_solve_verifying_structure(tmp_path, capsys):
    import random

    lang = catalog.builtin("PAR").sentence.language
    b = _random_total(lang, 5, random.Random(0))
    path = tmp_path / "b.json"
    path.write_text(structure_to_json(b))
    code, out, _ = _capture(capsys, ["solve", "PAR", str(path)])
    assert code == 0
    assert json.loads(out)["verifies"] is True


def test_solve_non_verifying_structure(tmp_path, capsys):
    from finprin.partial import empty_structure

    lang = catalog.builtin("PAR").sentence.language
    path = tmp_path / "e.json"
    path.write_text(structure_to_json(empty_structure(lang, 3)))
    code, out, _ = _capture(capsys, ["solve", "PAR", str(path)])
    assert code == 0
    obj = json.loads(out)
    assert obj["verifies"] is False and obj["value"] == "1/2"


def test_reduce_pullback(tmp_path, capsys):
    import random

    interp_src = catalog.builtin("IND").sentence.language
    b = _random_total(interp_src, 4, random.Random(1))
    path = tmp_path / "ind.json"
    path.write_text(structure_to_json(b))
    code, out, _ = _capture(capsys, ["reduce", "pullback", "IND->PHP", str(path)])
    assert code == 0
    obj = json.loads(out)
    assert "source_witness" in obj


def test_demo_core_lemma_small(capsys):
    code, out, _ = _capture(capsys, [
        "demo", "core-lemma", "--runs", "2", "--seed", "7",
    ])
    assert code == 0
    last = json.loads(out.strip().splitlines()[-1])
    assert last == {"runs": 2, "verified": 2}


def test_adversary_protocol_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "finprin.cli", "adversary", "serve", "PHP",
         "--n", "64", "--budget", "20"],
        input="Q f(1)#0\nCLAIM 0 0 1 2\n",
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    lines = proc.stdout.splitlines()
    assert lines[0].startswith("A ")
    assert lines[1].startswith("REFUTED")


def test_user_principle_file(tmp_path, capsys):
    path = tmp_path / "p.fp"
    path.write_text(
        "principle SWAP { language { f/1 fun } exists x y . (f(x) = y & f(y) = x & x != y) | f(x) = x }"
    )
    code, out, _ = _capture(capsys, ["principle", "show", str(path)])
    assert code == 0
    assert "SWAP" in out
