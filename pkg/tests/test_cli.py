import json
import subprocess
import sys
from pathlib import Path

import pytest

from ergocap.cli import main
from ergocap.instances import loads_instance
from ergocap.records import parse_record

DATA = Path(__file__).resolve().parent.parent / "data"


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def records(out):
    return [parse_record(line) for line in (out / "records.txt").read_text().splitlines()]


def test_two_cycle_pointwise(tmp_path):
    code, out = run(tmp_path, "ergodic", "--instance", str(DATA / "two-cycle.txt"))
    assert code == 0
    recs = records(out)
    assert recs[0]["run"] == "ergodic"
    bounds = next(r for r in recs if r.get("clause") == "ergodic-theorem/bounds")
    assert (bounds["lower"], bounds["upper"], bounds["measure"]) == ("0", "1/2", "1")
    assert bounds["values"] == "[1/2,1/2,0,0]"


def test_transient_corollary(tmp_path):
    code, out = run(tmp_path, "ergodic", "--theorem", "corollary", "--instance",
                    str(DATA / "transient.txt"))
    assert code == 0
    rec = next(r for r in records(out) if r.get("clause") == "convex-corollary/2")
    assert (rec["lower_f"], rec["upper_f"]) == ("0", "1")


def test_hypothesis_failure_exit_code(tmp_path):
    code, out = run(tmp_path, "ergodic", "--theorem", "lemma", "--instance", str(DATA / "two-cycle.txt"))
    assert code == 3


def test_inconsistent_presentation_is_hypothesis_failure(tmp_path):
    text = (DATA / "two-cycle.txt").read_text().replace("1010 1/2", "1010 1/3")
    path = tmp_path / "forged.txt"
    path.write_text(text)
    code, out = run(tmp_path, "ergodic", "--instance", str(path))
    assert code == 3


def test_conclusion_failure_writes_bundle(tmp_path, monkeypatch):
    import ergocap.cli as cli
    from ergocap.ergodic import Certificate, Clause

    def broken(*args, **kwargs):
        return Certificate("ergodic-theorem", [Clause("ergodic-theorem/bounds", True, False)],
                           {"fstar": (0, 0, 0, 0)})

    monkeypatch.setattr(cli, "verify_pointwise_ergodic", broken)
    code, out = run(tmp_path, "ergodic", "--instance", str(DATA / "two-cycle.txt"))
    assert code == 1
    bundle = (out / "counterexample.txt").read_text()
    assert loads_instance(bundle) == loads_instance((DATA / "two-cycle.txt").read_text())


def test_invalid_inputs(tmp_path, capsys):
    assert main(["ergodic", "--instance", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("version 1\n[map]\n0 -> 4\n")
    assert main(["core", "--instance", str(bad)]) == 2
    assert main(["core", "--kind", "convex", "--n", "9"]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_gen_round_trip(tmp_path):
    code, out = run(tmp_path, "gen", "--kind", "ergodic-envelope", "--n", "4", "--seed", "5")
    assert code == 0
    inst = loads_instance((out / "instance.txt").read_text())
    from ergocap.generate import generate

    expected = generate("ergodic-envelope", 5, 4)
    assert (inst.capacity, inst.tau, inst.function) == (expected.capacity, expected.tau, expected.function)
    assert set(inst.credal) == set(expected.credal)


def test_kingman_csv(tmp_path):
    code, out = run(tmp_path, "kingman", "--instance", str(DATA / "transient.txt"), "--N", "100",
                    "--horizon", "4")
    assert code == 0
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert rows[0] == "n,point,value"
    assert rows[1:4] == ["1,0,1", "1,1,0", "1,2,5"]


def test_slln_small_run(tmp_path):
    code, out = run(tmp_path, "slln", "--model", str(DATA / "distorted-bernoulli.json"),
                    "--paths", "200", "--horizon", "500")
    assert code == 0
    rec = records(out)[1]
    assert (rec["L"], rec["U"], rec["verdict"]) == ("1/4", "3/4", "pass")
    code, out = run(tmp_path, "slln", "--model", str(DATA / "credal-bernoulli.json"),
                    "--paths", "200", "--horizon", "500", name="credal")
    assert code == 3
    assert "hypothesis-incomplete" in records(out)[1]["labels"]


def test_core_choquet_cesaro(tmp_path):
    for cmd in ("core", "choquet", "cesaro"):
        code, _ = run(tmp_path, cmd, "--instance", str(DATA / "two-cycle.txt"), name=cmd)
        assert code == 0


def test_audit_batch(tmp_path):
    code, out = run(tmp_path, "audit", "--kind", "contamination", "--count", "10")
    assert code == 0
    assert not any(r.get("verdict") == "violated" for r in records(out))


@pytest.mark.parametrize("scenario", sorted((DATA / "scenarios").glob("*.json")), ids=lambda p: p.stem)
def test_scenarios_are_deterministic(tmp_path, scenario):
    a = main(["run", "--scenario", str(scenario), "--out", str(tmp_path / "a")])
    b = main(["run", "--scenario", str(scenario), "--out", str(tmp_path / "b")])
    assert a == b and a in (0, 3)
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_scenario_errors(tmp_path):
    cases = [
        {"version": 2, "kind": "core"},
        {"version": 1, "kind": "core", "extra": 1},
        {"version": 1, "kind": "nonsense"},
        {"version": 1, "kind": "core", "params": {"bogus": 1}},
    ]
    for i, data in enumerate(cases):
        path = tmp_path / f"s{i}.json"
        path.write_text(json.dumps(data))
        assert main(["run", "--scenario", str(path)]) == 2
    path = tmp_path / "broken.json"
    path.write_text("{")
    assert main(["run", "--scenario", str(path)]) == 2


def test_stdout_records(capsys):
    assert main(["choquet", "--instance", str(DATA / "transient.txt")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("run=choquet ")
    assert all("=" in line for line in out)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ergocap", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "kingman" in proc.stdout
