import csv
import io
import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from succinct_rmq import cli, fileio
from succinct_rmq.catalan import catalan_number, log2_int
from succinct_rmq.cartesian import rmq_scan


def schema(name):
    return json.loads(resources.files("succinct_rmq").joinpath("schemas").joinpath(name).read_text())


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def array_file(tmp_path, capsys):
    path = tmp_path / "a.bin"
    assert run(capsys, "gen", "--n", 64, "--seed", 3, "--max-value", 20, "--out", path)[0] == 0
    return path


def test_array_formats(tmp_path):
    A = [5, -3, 2 ** 40, 0]
    for fmt in ("bin", "text"):
        p = tmp_path / ("x." + fmt)
        fileio.write_array(p, A, fmt)
        assert fileio.read_array(p) == A
    assert fileio.decode_array(b"1, 2,3\n4") == [1, 2, 3, 4]
    with pytest.raises(fileio.FormatError):
        fileio.decode_array(b"RMQA" + b"\x01\0\0\0" + b"\x05" + b"\0" * 7)
    with pytest.raises(fileio.FormatError):
        fileio.decode_array(b"1 2 x")


@pytest.mark.parametrize("kind", ["onebit", "tradeoff", "sparse"])
def test_build_query_space(tmp_path, capsys, array_file, kind):
    A = fileio.read_array(array_file)
    out = tmp_path / (kind + ".srmq")
    code, text, _ = run(capsys, "build", "--input", array_file, "--kind", kind, "--t", 2, "--out", out, "--json")
    assert code == 0
    rep = json.loads(text)
    jsonschema.validate(rep, schema("space_report.json"))
    if kind == "onebit":
        assert rep["total_bits"] <= log2_int(catalan_number(64)) + 1
        assert math.isclose(rep["redundancy_bits"], rep["total_bits"] - rep["benchmark_bits"])
    if kind == "tradeoff":
        assert rep["redundancy_bits"] == rep["total_bits"] - 128
    first = out.read_bytes()
    assert run(capsys, "build", "--input", array_file, "--kind", kind, "--t", 2, "--out", out)[0] == 0
    assert out.read_bytes() == first
    for a, b in ((1, 64), (7, 7), (10, 40)):
        code, text, _ = run(capsys, "query", "--structure", out, "--a", a, "--b", b, "--probes", "--json")
        res = json.loads(text)
        jsonschema.validate(res, schema("query_result.json"))
        assert code == 0 and res["answer"] == rmq_scan(A, a, b)
        if a < b:
            assert res["probes"] > 0
    code, text, _ = run(capsys, "query", "--structure", out, "--a", 5, "--b", 9)
    assert code == 0 and text.splitlines()[0] == str(rmq_scan(A, 5, 9))
    code, text, _ = run(capsys, "space", "--structure", out)
    assert code == 0
    jsonschema.validate(json.loads(text), schema("space_report.json"))


def test_exit_codes(tmp_path, capsys, array_file):
    out = tmp_path / "s.srmq"
    assert run(capsys, "build", "--input", array_file, "--kind", "onebit", "--out", out)[0] == 0
    # usage
    with pytest.raises(SystemExit) as exc:
        cli.main(["build", "--kind", "nope"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "--lemma", "no-such-lemma"])
    assert exc.value.code == 1
    capsys.readouterr()
    # I/O
    assert run(capsys, "build", "--input", tmp_path / "missing", "--kind", "sparse", "--out", out)[0] == 2
    assert run(capsys, "query", "--structure", tmp_path / "missing", "--a", 1, "--b", 1)[0] == 2
    # format / range
    assert run(capsys, "query", "--structure", out, "--a", 5, "--b", 2)[0] == 3
    assert run(capsys, "query", "--structure", out, "--a", 1, "--b", 65)[0] == 3
    junk = tmp_path / "junk"
    junk.write_bytes(b"SRMQ\x09\0\0\0\x01")
    assert run(capsys, "space", "--structure", junk)[0] == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 three")
    assert run(capsys, "build", "--input", bad, "--kind", "sparse", "--out", out)[0] == 3
    assert run(capsys, "build", "--input", array_file, "--kind", "onebit", "--max-n", 10, "--out", out)[0] == 3
    # integrity: a consistent-looking file whose auxiliary data disagrees with the dfuds
    tr = tmp_path / "t.srmq"
    assert run(capsys, "build", "--input", array_file, "--kind", "tradeoff", "--out", tr)[0] == 0
    data = bytearray(tr.read_bytes())
    data[-9] ^= 0x01
    tr.write_bytes(bytes(data))
    assert run(capsys, "space", "--structure", tr)[0] in (3, 4)


def test_integrity_exit_code(tmp_path, capsys, array_file):
    from succinct_rmq.tradeoff import TradeoffRMQ
    A = fileio.read_array(array_file)
    ds = TradeoffRMQ.build(A, 1)
    buf = bytearray(ds.to_bytes())
    # header (33 bytes), params section (16), dfuds bit vector, then the first
    # auxiliary array behind its u64 length and 12-byte header
    off = 33 + 16 + ds.dfuds.core.serialized_size() + 8 + 12
    buf[off] ^= 0x01
    p = tmp_path / "t.srmq"
    p.write_bytes(bytes(buf))
    assert run(capsys, "space", "--structure", p)[0] == 4


def test_max_n_env(tmp_path, capsys, array_file, monkeypatch):
    out = tmp_path / "s.srmq"
    monkeypatch.setenv("RMQ_MAX_N", "32")
    assert run(capsys, "build", "--input", array_file, "--kind", "onebit", "--out", out)[0] == 3
    assert run(capsys, "build", "--input", array_file, "--kind", "tradeoff", "--out", out)[0] == 0
    monkeypatch.setenv("RMQ_MAX_N", "many")
    assert run(capsys, "build", "--input", array_file, "--kind", "onebit", "--out", out)[0] == 1


def test_catalan_command(capsys):
    code, text, _ = run(capsys, "catalan", "--n", 4, "--json")
    assert code == 0 and json.loads(text)["catalan"] == "14"
    code, text, _ = run(capsys, "catalan", "--check", "--json")
    rep = json.loads(text)
    assert code == 0 and rep["pass"]
    jsonschema.validate(rep, schema("verify_report.json"))


def test_bench_csv_and_json(capsys, tmp_path):
    code, text, _ = run(capsys, "bench", "--kind", "onebit", "tradeoff", "--n", 256, 512, "--t", 1, 2,
                        "--queries", 50, "--seed", 1)
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "kind,n,param,total_bits,redundancy_bits,benchmark_bits,mean_probes,max_probes,mean_ns,seed"
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2 + 4
    trade = {(int(r["n"]), int(r["param"])): float(r["redundancy_bits"]) for r in rows if r["kind"] == "tradeoff"}
    assert trade[(512, 1)] > trade[(512, 2)]
    out = tmp_path / "b.json"
    assert run(capsys, "bench", "--kind", "sparse", "--n", 100, "--queries", 20, "--json", "--out", out)[0] == 0
    recs = json.loads(out.read_text())
    jsonschema.validate(recs, schema("bench_records.json"))
    again = cli.bench_records(["sparse"], [100], [1], 20, 0)
    assert [r["max_probes"] for r in recs] == [r["max_probes"] for r in again]


@pytest.mark.parametrize("lemma", ["mfold", "ext-roundtrip", "reduction"])
def test_verify_command(capsys, lemma):
    code, text, _ = run(capsys, "verify", "--lemma", lemma, "--seed", 0, "--trials", 200, "--json")
    rep = json.loads(text)
    jsonschema.validate(rep, schema("verify_report.json"))
    assert code == 0 and rep["pass"] and rep["lemma"] == lemma


def test_verify_threshold_failure(capsys, monkeypatch):
    from succinct_rmq import verify
    monkeypatch.setattr(verify, "GOOD_BLOCK_MIN", 0.99)
    code, text, _ = run(capsys, "hardgen", "verify", "--lemma", "good-blocks", "--trials", 500, "--json")
    assert code == 5 and not json.loads(text)["pass"]


def test_hardgen_sample_and_reduce(tmp_path, capsys):
    sets = tmp_path / "sets.json"
    code, _, _ = run(capsys, "hardgen", "sample", "--B", 9, "--u", 3, "--d", 4, "--Z", 400, "--seed", 2, "--out", sets)
    assert code == 0
    obj = json.loads(sets.read_text())
    jsonschema.validate(obj, schema("sets.json"))
    first = sets.read_bytes()
    run(capsys, "hardgen", "sample", "--B", 9, "--u", 3, "--d", 4, "--Z", 400, "--seed", 2, "--out", sets)
    assert sets.read_bytes() == first
    assert run(capsys, "hardgen", "sample", "--B", 3, "--u", 4, "--d", 1, "--out", sets)[0] == 3
    # a reducible instance: n=40, r=2 gives d=4, B=9, u=3, Z=20^2
    run(capsys, "hardgen", "sample", "--B", 9, "--u", 3, "--d", 4, "--Z", 400, "--seed", 2, "--out", sets)
    arr = tmp_path / "arr.bin"
    assert run(capsys, "hardgen", "reduce", "--sets", sets, "--n", 40, "--r", 2, "--out", arr)[0] == 0
    A = fileio.read_array(arr)
    assert len(A) == 40
    assert run(capsys, "hardgen", "reduce", "--sets", sets, "--n", 80, "--r", 2, "--out", arr)[0] == 3
    assert run(capsys, "hardgen", "reduce", "--sets", tmp_path / "nope.json", "--n", 40, "--r", 2,
               "--out", arr)[0] == 2


def test_console_script_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "succinct_rmq.cli", "catalan", "--n", "5", "--json"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["catalan"] == "42"
