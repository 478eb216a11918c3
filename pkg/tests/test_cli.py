import hashlib
import json
import shutil
import subprocess
import sys

import pytest

from datagrid.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def blob(tmp_path):
    p = tmp_path / "f.bin"
    p.write_bytes(bytes(range(256)) * 7 + b"tail")
    return p


def test_split_then_combine_any_pair(capsys, blob, tmp_path):
    code, out, _ = run(capsys, "split", "--k", 2, "--n", 3, "--seed", 7, blob, "--out-dir", tmp_path / "s", "--json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["shares"]) == 3
    for a, b in [(0, 1), (0, 2), (1, 2)]:
        dest = tmp_path / f"out{a}{b}"
        code, _, _ = run(capsys, "combine", doc["shares"][a], doc["shares"][b], "--out", dest)
        assert code == 0 and sha(dest) == sha(blob)


def test_combine_via_manifest(capsys, blob, tmp_path):
    run(capsys, "split", "--k", 3, "--n", 5, "--seed", 1, blob, "--out-dir", tmp_path)
    code, _, _ = run(capsys, "combine", "--manifest", tmp_path / "f.bin.manifest.json", "--out", tmp_path / "o")
    assert code == 0 and sha(tmp_path / "o") == sha(blob)


def test_split_is_seed_deterministic(capsys, blob, tmp_path):
    run(capsys, "split", "--k", 2, "--n", 2, "--seed", 5, blob, "--out-dir", tmp_path / "a")
    run(capsys, "split", "--k", 2, "--n", 2, "--seed", 5, blob, "--out-dir", tmp_path / "b")
    assert sha(tmp_path / "a" / "f.bin.1.dgsh") == sha(tmp_path / "b" / "f.bin.1.dgsh")


@pytest.mark.parametrize("argv", [
    ["split", "--k", "4", "--n", "3", "--seed", "1"],
    ["split", "--k", "2", "--n", "3"],
    ["encode", "--k", "2", "--n", "3", "--sealed"],
])
def test_usage_errors_exit_2(capsys, blob, argv):
    code, _, err = run(capsys, *argv, blob)
    assert code == 2 and err


def test_unknown_flag_exits_2(blob):
    with pytest.raises(SystemExit) as info:
        main(["split", "--k", "2", "--n", "3", "--bogus", str(blob)])
    assert info.value.code == 2


def test_missing_input_file_exit_2(capsys, tmp_path):
    code, _, _ = run(capsys, "encode", "--k", 2, "--n", 3, tmp_path / "nope")
    assert code == 2


@pytest.mark.parametrize("sealed", [False, True])
def test_encode_decode(capsys, blob, tmp_path, sealed):
    extra = ["--sealed", "--seed", 3] if sealed else []
    run(capsys, "encode", "--k", 3, "--n", 5, *extra, blob, "--out-dir", tmp_path)
    shares = [tmp_path / f"f.bin.{i}.dgsh" for i in (2, 4, 5)]
    code, _, _ = run(capsys, "decode", *shares, "--out", tmp_path / "o")
    assert code == 0 and sha(tmp_path / "o") == sha(blob)


def test_insufficient_shares_exit_1(capsys, blob, tmp_path):
    run(capsys, "encode", "--k", 3, "--n", 5, blob, "--out-dir", tmp_path)
    code, _, _ = run(capsys, "decode", tmp_path / "f.bin.1.dgsh", tmp_path / "f.bin.2.dgsh", "--out", tmp_path / "o")
    assert code == 1


def test_malformed_share_exit_3(capsys, blob, tmp_path):
    run(capsys, "encode", "--k", 2, "--n", 3, blob, "--out-dir", tmp_path)
    bad = tmp_path / "f.bin.1.dgsh"
    bad.write_bytes(b"XXXX" + bad.read_bytes()[4:])
    code, _, err = run(capsys, "decode", bad, tmp_path / "f.bin.2.dgsh", "--out", tmp_path / "o")
    assert code == 3 and "magic" in err


def test_fragment_reassemble(capsys, blob, tmp_path):
    run(capsys, "fragment", "--ranges", "0:100,100:1000,1000:1796", blob, "--out-dir", tmp_path)
    shares = sorted(tmp_path.glob("f.bin.*.dgsh"))
    code, _, _ = run(capsys, "reassemble", *shares, "--out", tmp_path / "o")
    assert code == 0 and sha(tmp_path / "o") == sha(blob)
    code, _, _ = run(capsys, "reassemble", *shares[:2], "--out", tmp_path / "o2")
    assert code == 1


def test_combine_rejects_coded_shares(capsys, blob, tmp_path):
    run(capsys, "encode", "--k", 1, "--n", 1, blob, "--out-dir", tmp_path)
    code, _, _ = run(capsys, "combine", tmp_path / "f.bin.1.dgsh", "--out", tmp_path / "o")
    assert code == 2


def test_plan_toy_single_node(capsys, fixtures):
    code, out, _ = run(capsys, "plan", fixtures / "toy.topo", "--size", 100, "--k", 2, "--n", 3,
                       "--limit", 3, "--json")
    doc = json.loads(out)
    assert code == 0
    assert all(v == ["only"] for v in doc["placements"].values())
    assert doc["cost"]["access"] == 0


def test_plan_exact_not_worse_than_greedy(capsys, fixtures):
    base = [fixtures / "campus.topo", "--size", 10, "--k", 2, "--n", 2, "--budget", 3, "--alpha", 0.5, "--json"]
    _, greedy, _ = run(capsys, "plan", *base)
    code, exact, _ = run(capsys, "plan", *base, "--exact")
    assert code == 0
    assert json.loads(exact)["cost"]["total"] <= json.loads(greedy)["cost"]["total"] + 1e-9


def test_plan_budget_below_k_exit_1(capsys, fixtures):
    code, _, err = run(capsys, "plan", fixtures / "campus.topo", "--size", 10, "--k", 3, "--n", 3, "--budget", 2)
    assert code == 1 and "budget" in err


def test_plan_bad_topology_exit_3(capsys, tmp_path):
    bad = tmp_path / "bad.topo"
    bad.write_text("cluster c\nnode a c 0 0\n")
    code, _, err = run(capsys, "plan", bad, "--size", 1, "--k", 1, "--n", 1)
    assert code == 3 and "line 2" in err


def test_simulate_survives_single_failure(capsys, fixtures):
    args = ["simulate", fixtures / "campus.topo", fixtures / "survive.script", "--seed", 3]
    code, first, _ = run(capsys, *args)
    assert code == 0
    assert run(capsys, *args)[1] == first


def test_simulate_blackout_assertion_holds(capsys, fixtures):
    code, _, _ = run(capsys, "simulate", fixtures / "campus.topo", fixtures / "blackout.script", "--seed", 0)
    assert code == 0


def test_simulate_failed_assertion_exit_1(capsys, fixtures):
    code, out, _ = run(capsys, "simulate", fixtures / "campus.topo", fixtures / "failing.script", "--seed", 0, "--json")
    assert code == 1 and json.loads(out)["failed_assertions"] == 1


def test_simulate_script_error_exit_3(capsys, fixtures):
    code, _, err = run(capsys, "simulate", fixtures / "campus.topo", fixtures / "broken.script", "--seed", 0)
    assert code == 3 and "line 2" in err


def test_simulate_needs_seed(capsys, fixtures):
    code, _, _ = run(capsys, "simulate", fixtures / "campus.topo", fixtures / "survive.script")
    assert code == 2


def test_analyze_exact(capsys, fixtures):
    code, out, _ = run(capsys, "analyze", fixtures / "campus.topo", fixtures / "east3.plan.json", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["breach_prob"] == pytest.approx(0.5)
    assert doc["availability"] == pytest.approx(0.5)
    assert doc["access_cost"] == 16


def test_analyze_zero_probabilities(capsys, fixtures, tmp_path):
    plan = tmp_path / "p.json"
    plan.write_text(json.dumps({"object": "obj", "k": 1, "n": 1, "shares": [{"index": 1, "nodes": ["only"]}]}))
    code, out, _ = run(capsys, "analyze", fixtures / "toy.topo", plan, "--json")
    doc = json.loads(out)
    assert code == 0 and doc["breach_prob"] == 0 and doc["availability"] == 1


def test_analyze_monte_carlo_repeatable(capsys, fixtures):
    args = ["analyze", fixtures / "campus.topo", fixtures / "east3.plan.json", "--trials", 100000, "--seed", 1]
    code, first, _ = run(capsys, *args)
    assert code == 0 and run(capsys, *args)[1] == first


def test_analyze_exact_bound_exit_2(capsys, tmp_path):
    nodes = [f"n{i}" for i in range(22)]
    topo = tmp_path / "big.topo"
    topo.write_text("cluster c\n" + "".join(f"node {n} c 0.1 0.1 10\n" for n in nodes))
    plan = tmp_path / "p.json"
    plan.write_text(json.dumps({"object": "o", "k": 1, "n": 1, "shares": [{"index": 1, "nodes": nodes}]}))
    code, _, err = run(capsys, "analyze", topo, plan, "--exact")
    assert code == 2 and "--trials" in err


def test_console_script_help():
    exe = shutil.which("dgrid")
    cmd = [exe] if exe else [sys.executable, "-m", "datagrid"]
    out = subprocess.run(cmd + ["simulate", "--help"], capture_output=True, text=True, check=True).stdout
    assert "--seed" in out and "--json" in out
