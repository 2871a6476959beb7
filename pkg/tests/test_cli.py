import csv
import json
import subprocess
import sys

import pytest

from nols.cli import BENCH_COLUMNS, main
from nols.instances import generate_instance, load_instance
from nols.matroids import rank


def _gen(tmp_path, family="coverage", n=12, r=3, seed=7):
    path = tmp_path / f"{family}.json"
    assert main(["gen", "--family", family, "--n", str(n), "--r", str(r),
                 "--seed", str(seed), "--out", str(path)]) == 0
    return path


def test_gen_is_byte_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        assert main(["gen", "--family", "partition", "--n", "10", "--r", "3",
                     "--seed", "5", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("family", ["coverage", "partition", "graphic", "modular"])
def test_generated_instances_have_requested_rank(tmp_path, family):
    path = _gen(tmp_path, family=family, n=10, r=3, seed=2)
    inst = load_instance(path)
    assert inst.n == 10 and inst.r == 3
    m = inst.build_matroid()
    assert rank(m) == 3
    f = inst.build_objective()
    assert f.ground_size == 10


def test_instance_round_trip(tmp_path):
    path = _gen(tmp_path, family="modular", n=8, r=2, seed=3)
    inst = load_instance(path)
    assert inst.format_version == 1
    doc = json.loads(path.read_text())
    assert doc["format_version"] == 1
    assert set(doc) >= {"name", "n", "r", "objective", "matroid"}


def test_solve_writes_report_and_verify_accepts(tmp_path, capsys):
    inst = _gen(tmp_path)
    rep = tmp_path / "report.json"
    assert main(["solve", "--instance", str(inst), "--eps", "0.25",
                 "--out", str(rep)]) == 0
    doc = json.loads(rep.read_text())
    assert doc["format_version"] == 1
    assert doc["variant"] == "deterministic"
    assert not doc["failed"]
    assert sorted(doc["output_set"]) == doc["output_set"]
    assert main(["verify", "--instance", str(inst), "--report", str(rep)]) == 0
    out = capsys.readouterr().out
    assert "verified" in out


def test_solve_replay_is_byte_identical(tmp_path):
    inst = _gen(tmp_path)
    reps = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        assert main(["solve", "--instance", str(inst), "--eps", "0.5",
                     "--variant", "randomized", "--seed", "11",
                     "--out", str(out)]) == 0
        reps.append(out.read_bytes())
    assert reps[0] == reps[1]


def test_verify_rejects_tampered_output(tmp_path, capsys):
    inst = _gen(tmp_path)
    rep = tmp_path / "report.json"
    main(["solve", "--instance", str(inst), "--eps", "0.25", "--out", str(rep)])
    doc = json.loads(rep.read_text())
    doc["output_set"] = doc["output_set"][:-1]  # drop one element
    rep.write_text(json.dumps(doc))
    assert main(["verify", "--instance", str(inst), "--report", str(rep)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_rejects_forged_certificate(tmp_path, capsys):
    inst = _gen(tmp_path)
    rep = tmp_path / "report.json"
    main(["solve", "--instance", str(inst), "--eps", "0.25", "--out", str(rep)])
    doc = json.loads(rep.read_text())
    doc["certificate"]["gap"] = -1.0
    rep.write_text(json.dumps(doc))
    assert main(["verify", "--instance", str(inst), "--report", str(rep)]) == 1


def test_verify_certificate_only_skips_brute_force(tmp_path, capsys):
    inst = _gen(tmp_path, n=30, r=4, seed=1)
    rep = tmp_path / "report.json"
    assert main(["solve", "--instance", str(inst), "--eps", "0.5",
                 "--out", str(rep)]) == 0
    # n=30 is beyond brute force: the full check refuses, the
    # certificate-only path passes
    assert main(["verify", "--instance", str(inst), "--report", str(rep)]) == 1
    assert "certificate-only" in capsys.readouterr().out
    assert main(["verify", "--instance", str(inst), "--report", str(rep),
                 "--certificate-only"]) == 0


def test_forced_randomized_failure_exits_two(tmp_path):
    inst = _gen(tmp_path)
    rep = tmp_path / "report.json"
    code = main(["solve", "--instance", str(inst), "--eps", "0.5",
                 "--variant", "randomized", "--seed", "0",
                 "--retry-budget", "0", "--out", str(rep)])
    assert code == 2
    doc = json.loads(rep.read_text())
    assert doc["failed"] and doc["output_set"] == []
    assert doc["certificate"] is None
    # a failed report that is internally consistent still verifies
    assert main(["verify", "--instance", str(inst), "--report", str(rep)]) == 0


def test_bench_tiny_grid(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--family", "coverage", "--n", "8,12", "--r", "2,3",
                 "--eps", "0.5", "--seeds", "0,1", "--variants",
                 "deterministic,randomized", "--out", str(out)]) == 0
    with open(out) as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == BENCH_COLUMNS
    assert len(rows) == 1 + 2 * 1 * 2 * 2  # cells * eps * variants * seeds
    stdout = capsys.readouterr().out
    assert "summary variant=deterministic" in stdout
    assert "summary variant=randomized" in stdout
    # brute-forceable sizes fill the optimum columns
    by_col = dict(zip(rows[0], rows[1]))
    assert by_col["f_opt"] != ""
    assert float(by_col["ratio"]) > 0


def test_bench_empty_grid_writes_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    assert main(["bench", "--family", "coverage", "--n", "", "--eps", "",
                 "--seeds", "", "--variants", "", "--out", str(out)]) == 0
    with open(out) as handle:
        rows = list(csv.reader(handle))
    assert rows == [BENCH_COLUMNS]


def test_bench_rejects_mismatched_rank_list(tmp_path, capsys):
    out = tmp_path / "bad.csv"
    assert main(["bench", "--family", "coverage", "--n", "8,12,16", "--r", "2,3",
                 "--out", str(out)]) == 1


def test_console_module_entry_point(tmp_path):
    inst = tmp_path / "inst.json"
    proc = subprocess.run(
        [sys.executable, "-m", "nols.cli", "gen", "--family", "coverage",
         "--n", "8", "--r", "2", "--seed", "0", "--out", str(inst)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert inst.exists()
    proc = subprocess.run(
        [sys.executable, "-m", "nols.cli", "solve", "--instance", str(inst),
         "--eps", "0.5"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(proc.stdout)
    assert doc["instance"] == "coverage-n8-r2-s0"


def test_gen_rejects_bad_shapes(tmp_path):
    out = tmp_path / "x.json"
    with pytest.raises(SystemExit):
        main(["gen", "--family", "nosuch", "--n", "8", "--r", "2",
              "--out", str(out)])
    with pytest.raises(ValueError):
        main(["gen", "--family", "coverage", "--n", "4", "--r", "9",
              "--out", str(out)])
