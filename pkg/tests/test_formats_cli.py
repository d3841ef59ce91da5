import random
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from freerigid.cli import main
from freerigid.dynamics import GraphMap, rose_map
from freerigid.errors import InputError
from freerigid.formats import (
    dump_certificate,
    dump_graph,
    dump_map,
    dump_tree,
    fixture_names,
    load_certificate,
    load_fixture,
    load_graph,
    load_map,
    load_tree,
    parse_tree_arg,
)
from freerigid.metric import random_marked_rose, rose
from freerigid.rigidity import CosetSpec, propw_certificate
from freerigid.stallings import fold, with_basepoint
from freerigid.words import Word, parse_word, parse_words

gen_lists = st.lists(
    st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), min_size=1, max_size=5).map(lambda t: Word(tuple(t))),
    max_size=3)


@given(gen_lists)
def test_graph_round_trip(gens):
    g = fold(gens, 3)
    assert load_graph(dump_graph(g)) == g
    bg = with_basepoint(g, Word((2, 1)))
    assert load_graph(dump_graph(bg.graph)) == bg.graph


@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=4))
@settings(max_examples=50)
def test_tree_round_trip(seed, rank):
    t = random_marked_rose(rank, random.Random(seed))
    assert load_tree(dump_tree(t)) == t


def test_tree_file_with_two_vertices():
    text = """
    # theta graph
    rank 2
    vertices 2
    base 0
    edge left 0 1 1
    edge mid 0 1 2/3
    edge right 0 1 0.5
    marking x1 = left -mid
    marking x2 = left -right
    """
    t = load_tree(text)
    assert t.names == ("left", "mid", "right")
    assert t.marking == ((1, -2), (1, -3))
    assert load_tree(dump_tree(t)) == t
    assert load_tree("rose 1 2") == rose([1, 2]) == parse_tree_arg("rose:1,2")


@pytest.mark.parametrize("text", [
    "rank 2\nvertices 1\nedge e1 0 0 1\nmarking x1 = e1\n",
    "rank 1\nvertices 1\nedge e1 0 0 1\nmarking x1 = e2\n",
    "rank 1\nvertices 1\nedge e1 0 0 -1\nmarking x1 = e1\n",
    "rank 1\nvertices 1\nedge e1 0 0 x\nmarking x1 = e1\n",
    "rank 1\nvertices 1\nbogus\n",
])
def test_bad_tree_files(text):
    with pytest.raises(InputError):
        load_tree(text)


@pytest.mark.parametrize("text", ["rank 2\nvertices 1\nedge c 0 0\n", "vertices 1\nedge a 0 0\n",
                                  "rank 2\nvertices 1\nedge a 0 0\nedge a 0 0\n", "rank 2\nvertices x\n"])
def test_bad_graph_files(text):
    with pytest.raises(InputError):
        load_graph(text)


def test_map_round_trip():
    for f in (rose_map(["ab", "a"]), rose_map(["ab", "ac", "a"]),
              GraphMap(((3, 1), (2, 3), (1, 2)), ends=((0, 1), (1, 0), (0, 0)), num_vertices=2)):
        assert load_map(dump_map(f)) == f
    with pytest.raises(InputError):
        load_map("rank 2\nimage x1 = ab\n")
    with pytest.raises(InputError):
        load_map("rank 2\nimage x1 = abB\nimage x2 = a\n")


def test_fixtures():
    assert fixture_names() == ["fibonacci", "tribonacci"]
    assert load_fixture("fibonacci") == rose_map(["ab", "a"])
    with pytest.raises(InputError):
        load_fixture("nope")


def test_certificate_round_trip():
    cosets = [CosetSpec(Word(), tuple(parse_words("a,baB"))), CosetSpec(parse_word("b"), (parse_word("a"),))]
    cert = propw_certificate(cosets, rose_map(["ab", "a"]))
    back = load_certificate(dump_certificate(cert))
    assert back == cert
    assert back.provenance["escape"] == "e1:3 e2:4"
    assert dump_certificate(back) == dump_certificate(cert)
    with pytest.raises(InputError):
        load_certificate("z a\nM 1\n")


# ---------------------------------------------------------------- CLI


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv, expected", [
    (("reduce", "abB"), "a"),
    (("cyclic", "babAB"), "b ba"),
    (("count", "abab", "ab"), "2"),
    (("length", "abA", "--tree", "rose:1,2"), "2"),
    (("length", "a", "--tree", "rose:1/3,2"), "0.333333333333"),
    (("length", "a", "--tree", "rose:1/3,2", "--exact"), "1/3"),
    (("spectra", "a", "--tree", "rose:1,1", "--tree", "rose:1,2"), "true"),
    (("spectra", "b", "--tree", "rose:1,1", "--tree", "rose:1,2"), "false"),
    (("iterate", "--map", "fibonacci", "-n", "3"), "abaab"),
    (("iterate", "--map", "fibonacci", "-e", "b", "-n", "4"), "abaab"),
    (("buildz", "--map", "fibonacci", "-m", "3", "--letter", "b", "-e", "a"), "abaab 4"),
    (("rebase", "ab", "--phi", "ab,a"), "rank 2\nvertices 1\nbase 0\nedge a 0 0"),
])
def test_cli_simple(capsys, argv, expected):
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.strip() == expected


def test_cli_fold_then_index(capsys, tmp_path):
    path = tmp_path / "h.graph"
    assert run(capsys, "fold", "-r", "2", "a,baB", "-o", str(path))[0] == 0
    assert run(capsys, "index", str(path))[1].strip() == "infinite"
    assert run(capsys, "member", str(path), "baBa")[1].strip() == "true"
    assert run(capsys, "member", str(path), "ab")[1].strip() == "false"
    assert run(capsys, "reads", str(path), "abaab", "--tail", "B")[1].strip() == "false"
    assert run(capsys, "powbound", str(path), "-z", "b")[1].strip() == "1"
    assert run(capsys, "powbound", str(path), "-z", "a")[1].strip() == "unbounded"
    assert run(capsys, "powbound", str(path), "-z", "b", "--tail", "B")[1].strip() == "4"
    run(capsys, "fold", "-r", "2", "a,bb,baB", "-o", str(path))
    assert run(capsys, "index", str(path))[1].strip() == "2"


def test_cli_converge_example(capsys, tmp_path):
    csv_path = tmp_path / "out.csv"
    code, out, _ = run(capsys, "converge", "-u", "a", "-r", "b", "-L", "1", "-i", "9", "--tree", "rose:1,2",
                       "--csv", str(csv_path))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines == ["# seed=0", "i,d_i_num,d_i_den,lambda_i,tree_id,gap_i", "9,1,10,1/40,T0,1/10"]
    assert csv_path.read_text().strip().splitlines() == lines


def test_cli_converge_random_trees_is_deterministic(capsys):
    argv = ("converge", "-u", "ab", "-r", "b", "-i", "1..4", "--random-trees", "3", "--seed", "11")
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    assert first.startswith("# seed=11\n")
    assert len(first.strip().splitlines()) == 2 + 4 * 3


def test_cli_escape_certify_checkw(capsys, tmp_path):
    code, out, _ = run(capsys, "escape", "--map", "fibonacci", "a,baB")
    assert code == 0 and out.strip().splitlines()[-1] == "overall 4"
    cert = tmp_path / "cert.txt"
    assert run(capsys, "certify", "--map", "fibonacci", "a,baB", "b:a", "-o", str(cert))[0] == 0
    assert "M 2" in cert.read_text()
    code, out, _ = run(capsys, "checkw", "--cert", str(cert), "a,baB", "b:a", "--samples", "200", "--seed", "5")
    assert code == 0 and out.splitlines()[0] == "# seed=5" and out.strip().endswith("ok")
    cert.write_text(cert.read_text().replace("M 2", "M 0"))
    code, out, err = run(capsys, "checkw", "--cert", str(cert), "a,baB", "b:a", "--samples", "200")
    assert code == 1 and "error: property_w_violated" in err and "violation coset" in out


def test_cli_witness_and_distinguish(capsys):
    code, out, _ = run(capsys, "witness", "-u", "a", "-r", "b", "-i", "1,9")
    assert out.splitlines() == ["connectors 1 1 b 1", "1 abAbabAB 8",
                                "9 " + "a" * 9 + "b" + "A" * 9 + "b" + "a" * 9 + "b" + "A" * 9 + "B 40"]
    out = run(capsys, "witness", "-u", "a", "-r", "b", "-g", "b")[1]
    assert out.splitlines()[1] == "1 babABabAb 9"
    out = run(capsys, "distinguish", "--tree", "rose:1,1", "--tree", "rose:1,2", "-r", "a")[1]
    assert "word baBabaBA" in out and "lengths 8 12" in out
    out = run(capsys, "distinguish", "--tree", "rose:1,1", "--tree", "rose:1,1", "-r", "a", "--i-max", "2",
              "--u-len", "2")[1]
    assert out.strip() == "agree i_max 2 u_search_length 2"


def test_cli_errors(capsys, tmp_path):
    code, _, err = run(capsys, "certify", "--map", "fibonacci", "a,b")
    assert code == 1 and err.splitlines()[0] == "error: finite_index"
    code, _, err = run(capsys, "reduce", "a1")
    assert code == 1 and err.splitlines()[0] == "error: input"
    code, _, err = run(capsys, "index", str(tmp_path / "missing"))
    assert code == 1 and err.splitlines()[0] == "error: io"
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["fold", "a,b"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["converge", "-u", "a", "-r", "b", "-i", "3..1"])
    assert exc.value.code == 2


def test_console_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "freerigid", "reduce", "abBA"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "1"
