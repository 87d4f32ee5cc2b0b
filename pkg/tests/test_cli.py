import csv
import io
import json
import math
from pathlib import Path

import pytest

from hierarchia.cli import main
from hierarchia.config import parse_config
from hierarchia.errors import ConfigError, DomainError
from hierarchia.results import ResultTable

ROOT = Path(__file__).resolve().parents[1]
SMOKE = ROOT / "configs" / "smoke.yaml"
GOLDEN = ROOT / "configs" / "smoke.golden.csv"

MINIMAL = b"""model:
  d: 2
  n_max: 2
  h: [[1, 0], [0, -1]]
  phi: {random: 0.3}
seed: 3
times: [0.5]
suites: [roundtrip]
"""


def write(tmp_path, text: bytes) -> str:
    p = tmp_path / "cfg.yaml"
    p.write_bytes(text)
    return str(p)


# ---------------------------------------------------------------- config


def test_smoke_config_parses():
    cfg = parse_config(SMOKE.read_bytes())
    assert cfg.model.d == 2 and cfg.model.n_max == 3
    assert len(cfg.suites) == 7
    assert cfg.meanfield.epsilons == (1.0, 0.5, 0.25, 0.125)


def test_complex_entries():
    doc = MINIMAL.replace(b"h: [[1, 0], [0, -1]]", b"h: [[1, [0, 0.5]], [[0, -0.5], -1]]")
    cfg = parse_config(doc)
    assert cfg.model.h[0, 1] == 0.5j


def test_asymmetric_phi_is_rejected():
    rows = ["[" + ", ".join("1" if (i, j) in ((0, 1), (1, 0)) else "0" for j in range(4)) + "]" for i in range(4)]
    doc = MINIMAL.replace(b"phi: {random: 0.3}", ("phi: [" + ", ".join(rows) + "]").encode())
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.path == "model.phi"
    assert info.value.line == 5
    assert "model.phi (line 5)" in str(info.value)


def test_missing_suites():
    doc = MINIMAL.replace(b"suites: [roundtrip]\n", b"")
    with pytest.raises(ConfigError, match="suites must be nonempty"):
        parse_config(doc)
    with pytest.raises(ConfigError, match="suites must be nonempty"):
        parse_config(MINIMAL.replace(b"[roundtrip]", b"[]"))


@pytest.mark.parametrize("old,new,path", [
    (b"n_max: 2", b"n_max: 20", "model.n_max"),
    (b"[roundtrip]", b"[nope]", "suites[0]"),
    (b"seed: 3", b"seed: 3\ncolour: red", "colour"),
    (b"h: [[1, 0], [0, -1]]", b"h: [[1, 1], [0, -1]]", "model.h"),
    (b"times: [0.5]", b"times: [0.5]\nmeanfield: {epsilons: [0.5, 1.0]}", "meanfield.epsilons"),
])
def test_invalid_fields_name_their_path(old, new, path):
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL.replace(old, new))
    assert info.value.path == path
    assert info.value.line is not None


def test_malformed_yaml():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(b"model: [1, 2\n")


# ---------------------------------------------------------------- tables


def test_result_table_emission():
    t = ResultTable(("a", "b", "c"))
    t.append(1, 0.1, True)
    t.append(2, float("nan"), False)
    assert t.to_csv() == "a,b,c\r\n1,0.1,true\r\n2,nan,false\r\n"
    doc = json.loads(t.to_json())
    assert doc["schema"] == ["a", "b", "c"]
    with pytest.raises(DomainError):
        t.append(1, 2)


# ---------------------------------------------------------------- commands


def test_run_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", str(SMOKE), "--out", str(a)]) == 0
    assert main(["run", "--config", str(SMOKE), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    j1, j2 = tmp_path / "a.json", tmp_path / "b.json"
    main(["run", "--config", str(SMOKE), "--out", str(j1), "--format", "json"])
    main(["run", "--config", str(SMOKE), "--out", str(j2), "--format", "json"])
    assert j1.read_bytes() == j2.read_bytes()


def test_run_matches_golden(tmp_path):
    out = tmp_path / "smoke.csv"
    assert main(["run", "--config", str(SMOKE), "--out", str(out)]) == 0
    got = list(csv.reader(io.StringIO(out.read_text())))
    ref = list(csv.reader(io.StringIO(GOLDEN.read_text())))
    assert len(got) == len(ref) and got[0] == ref[0]
    for g, r in zip(got[1:], ref[1:]):
        assert g[:5] == r[:5] and g[6:] == r[6:]
        # values are compared loosely so a different BLAS does not break the check
        gv, rv = float(g[5]), float(r[5])
        assert (math.isnan(gv) and math.isnan(rv)) or math.isclose(gv, rv, rel_tol=1e-6, abs_tol=1e-12)


def test_exit_codes(tmp_path):
    assert main(["run", "--config", write(tmp_path, MINIMAL), "--out", str(tmp_path / "o.csv")]) == 0
    strict = MINIMAL + b"tolerances: {roundtrip: 1.0e-300}\n"
    assert main(["run", "--config", write(tmp_path, strict), "--out", str(tmp_path / "o.csv")]) == 1
    assert main(["run", "--config", write(tmp_path, b"model: [1, 2\n")]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert main(["partitions", "dump", "--n", "0"]) == 2


def test_config_errors_are_reported(tmp_path, capsys):
    main(["run", "--config", write(tmp_path, MINIMAL.replace(b"[roundtrip]", b"[]"))])
    err = capsys.readouterr().err
    assert "suites must be nonempty" in err and "line 8" in err


def test_partitions_dump(capsys):
    assert main(["partitions", "dump", "--n", "3"]) == 0
    assert capsys.readouterr().out.split() == ["000", "001", "010", "011", "012"]
    main(["partitions", "dump", "--n", "5"])
    assert len(capsys.readouterr().out.split()) == 52


def test_meanfield_command(capsys):
    assert main(["meanfield", "--config", str(SMOKE), "--epsilons", "1,0.5,0.25,0.125"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split(",")[0] == "epsilon"
    assert len(lines) == 5
    assert main(["meanfield", "--config", str(SMOKE), "--epsilons", "0.5,1"]) == 2
    assert main(["meanfield", "--config", str(SMOKE), "--epsilons", "a,b"]) == 2
