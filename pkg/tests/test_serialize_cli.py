import json
import os
import subprocess
import sys

import pytest

from decalage.complexes import FreeComplex
from decalage.instances import generate_instance
from decalage.rings import IntegerRing
from decalage.rmatrix import Matrix
from decalage.serialize import (
    SerializeError,
    complex_from_json,
    complex_to_json,
    load_instance,
    sheaf_from_json,
    sheaf_to_json,
)
from decalage.sites import PosetSite, SheafComplex


def run_cli(*args, env=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run([sys.executable, "-m", "decalage", *args],
                          capture_output=True, text=True, env=full_env)


def test_complex_roundtrip(z5):
    K = FreeComplex(z5, 0, [1, 2, 1],
                    [Matrix.zeros(z5, 2, 1), Matrix.zeros(z5, 1, 2)], twist=3)
    data = json.loads(json.dumps(complex_to_json(K)))
    assert complex_from_json(data) == K


def test_sheaf_roundtrip(z2):
    F = generate_instance("free", 17, ring=z2)
    data = json.loads(json.dumps(sheaf_to_json(F)))
    G = sheaf_from_json(data)
    G.validate()
    assert sheaf_to_json(G) == sheaf_to_json(F)


def test_load_instance_wraps_bare_complex(z3):
    K = FreeComplex(z3, 0, [1, 1], [Matrix(z3, [[3]])])
    F = load_instance(complex_to_json(K))
    assert list(F.site.elements) == ["pt"]
    assert F.stalk("pt") == K


def test_serialize_errors(z3):
    with pytest.raises(SerializeError):
        complex_from_json({"ring": {"kind": "z", "xi": "3"}, "lo": 0,
                           "ranks": [1, 1], "differentials": []})
    with pytest.raises(SerializeError):
        complex_from_json({"ring": {"kind": "nope"}, "lo": 0, "ranks": [1],
                           "differentials": []})


def test_cli_validate_exit_codes(tmp_path, z3):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1, 1], [Matrix(z3, [[3]])]))))
    assert run_cli("validate", str(good)).returncode == 0

    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert run_cli("validate", str(bad)).returncode == 2

    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1, 1, 1],
                    [Matrix(z3, [[1]]), Matrix(z3, [[1]])]))))
    r = run_cli("validate", str(invalid))
    assert r.returncode == 1
    assert "DifferentialSquareNonzero" in r.stdout


def test_cli_check_lemmas(tmp_path, z3):
    path = tmp_path / "shell.json"
    path.write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1, 1], [Matrix(z3, [[3]])]))))
    r = run_cli("check-lemmas", str(path))
    assert r.returncode == 0
    assert "all-passed" in r.stdout

    # corrupted differential: d*d != 0 is a violation, exit 1
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1, 1, 1],
                    [Matrix(z3, [[1]]), Matrix(z3, [[1]])]))))
    assert run_cli("check-lemmas", str(broken)).returncode == 1


def test_cli_check_theorem_exit_codes(tmp_path, z3):
    torsion = tmp_path / "torsion.json"
    torsion.write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1, 1], [Matrix(z3, [[3]])]))))
    r = run_cli("check-theorem", str(torsion))
    assert r.returncode == 3
    assert "hypotheses-not-met" in r.stdout

    r = run_cli("check-theorem", "--generate", "h1", "--count", "2",
                "--seed", "5")
    assert r.returncode == 0, r.stdout + r.stderr


def test_cli_check_theorem_reports_injected_bug(tmp_path, z3):
    # harness regression: a hypothesis-satisfying instance with a corrupted
    # comparison must exit 1 and print the full report
    path = tmp_path / "zero_diff.json"
    path.write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1, 1], [Matrix.zeros(z3, 1, 1)]))))
    clean = run_cli("check-theorem", str(path))
    assert clean.returncode == 0
    r = run_cli("check-theorem", str(path),
                env={"DECALAGE_INJECT_FLAG_BUG": "1"})
    assert r.returncode == 1
    assert "FAIL" in r.stdout


def test_cli_ss_renders_pages(tmp_path, z3):
    path = tmp_path / "shell.json"
    path.write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1, 1], [Matrix(z3, [[3]])]))))
    r = run_cli("ss", str(path), "--filtration", "hodge")
    assert r.returncode == 0
    assert "nonzero" in r.stdout
    r2 = run_cli("ss", str(path), "--filtration", "tau", "--format", "json")
    assert r2.returncode == 0
    payload = json.loads(r2.stdout)
    assert payload["pages"][0]["r"] == 2


def test_cli_fixture_dir_env(tmp_path, z3):
    fdir = tmp_path / "fx"
    fdir.mkdir()
    (fdir / "inst.json").write_text(json.dumps(complex_to_json(
        FreeComplex(z3, 0, [1], []))))
    r = run_cli("validate", "inst.json", env={"DECALAGE_FIXTURES": str(fdir)})
    assert r.returncode == 0


def test_cli_reports_byte_identical(tmp_path):
    args = ("check-lemmas", "--generate", "h1", "--count", "2", "--seed", "9",
            "--format", "json")
    a = run_cli(*args)
    b = run_cli(*args)
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout

    args2 = ("check-theorem", "--generate", "h1", "--count", "1", "--seed", "4",
             "--format", "json")
    c = run_cli(*args2)
    d = run_cli(*args2)
    assert c.stdout == d.stdout and c.returncode == d.returncode


def test_golden_instance_regenerates(z2):
    fx = os.path.join(os.path.dirname(__file__), "..", "src", "decalage",
                      "fixtures", "golden_free_z2_seed42.json")
    with open(fx) as fh:
        frozen = json.load(fh)
    F = generate_instance("free", 42, ring=z2)
    assert sheaf_to_json(F) == frozen["instance"]
    from decalage.suites import sheaf_lemma_report

    assert sheaf_lemma_report(F, "free-42") == frozen["lemma_report"]
