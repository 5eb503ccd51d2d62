import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from sievelab.cli import main
from sievelab.report import ReportRow, emit, parse, read_report, render
from sievelab.suites import RunConfig, run_suite


def sample_rows(n: int):
    return [ReportRow("s", f"inst {i:05d}", i, i * 0.1 + 1 / 3, (i * 0.1 + 1 / 3) / (i + 1), i % 3 != 0,
                      {"i": i, "tag": "x,y"} if i % 2 else None) for i in range(n)]


def test_one_row_csv(tmp_path):
    path = tmp_path / "r.csv"
    text = emit(sample_rows(1), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "suite,instance,lhs,rhs,ratio,pass,witness"
    assert len(lines) == 2 and text == path.read_text()


def test_same_rows_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(sample_rows(50), a)
    emit(sample_rows(50), b)
    assert a.read_bytes() == b.read_bytes()


def test_float_and_int_formatting():
    row = ReportRow("s", "i", 123456789012345678, 1 / 3, math.inf, True)
    out = list(csv.reader(io.StringIO(render([row]))))[1]
    assert out[2] == "123456789012345678"
    assert out[3] == "0.333333333333"
    assert out[4] == "inf"


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_10k(tmp_path, fmt):
    rows = sample_rows(10_000)
    path = tmp_path / f"r.{fmt}"
    emit(rows, path, fmt)
    back = read_report(path, fmt)
    assert len(back) == len(rows)
    for r, b in zip(rows, back):
        assert (b.suite, b.instance, b.lhs, b.passed, b.witness) == (r.suite, r.instance, r.lhs, r.passed, r.witness)
        assert b.rhs == pytest.approx(r.rhs, rel=1e-11)
        assert b.ratio == pytest.approx(r.ratio, rel=1e-11)
    # a second pass through the text is exact
    assert render(back, fmt) == path.read_text()


def test_json_keys():
    objs = json.loads(render(sample_rows(3), "json"))
    assert all(list(o) == ["suite", "instance", "lhs", "rhs", "ratio", "pass", "witness"] for o in objs)


@given(st.lists(st.tuples(st.text(st.characters(blacklist_categories=("Cc", "Cs")), max_size=8), st.integers(-10**20, 10**20),
                          st.floats(allow_nan=False, allow_infinity=False), st.booleans()), max_size=20))
def test_csv_round_trip_property(items):
    rows = [ReportRow("s", name, i, x, None, ok) for name, i, x, ok in items]
    back = parse(render(rows))
    assert [(r.instance, r.lhs, r.passed) for r in back] == [(r.instance, r.lhs, r.passed) for r in rows]
    assert all(b.rhs == pytest.approx(r.rhs, rel=1e-11, abs=1e-300) for b, r in zip(back, rows))


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        emit(sample_rows(1), tmp_path / "missing" / "r.csv")


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "density"])  # randomized suite without a seed
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "verify-lemmas", "--seed", "1", "--alpha", "1.5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "nope"])
    assert exc.value.code == 2


def test_bad_thread_env(monkeypatch):
    monkeypatch.setenv("SIEVELAB_THREADS", "0")
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "goldbach-scan", "--N", "1000"])
    assert exc.value.code == 2


def test_verify_lemmas_pcap7(tmp_path):
    out = tmp_path / "v.csv"
    code = main(["--suite", "verify-lemmas", "--seed", "3", "--p-cap", "7", "--trials", "30", "--out", str(out)])
    rows = read_report(out)
    cdc = [r for r in rows if r.instance.startswith("cdc-exhaustive")]
    assert [r.instance for r in cdc] == [f"cdc-exhaustive p={p}" for p in (2, 3, 5, 7)]
    assert all(r.passed and r.lhs == 0 for r in cdc)
    assert cdc[-1].witness["pairs"] == 127 * 127
    assert code == 0


def test_unwritable_out_exit_code(tmp_path):
    assert main(["--suite", "goldbach-scan", "--N", "1000", "--out", str(tmp_path / "no" / "x.csv")]) == 2


def test_density_rows_present_and_exit_reflects_failure(tmp_path):
    out = tmp_path / "d.csv"
    code = main(["--suite", "density", "--seed", "0", "--Q", "1000", "--out", str(out)])
    rows = {r.instance: r for r in read_report(out)}
    assert rows["density x^3 Q=1000"].rhs == pytest.approx(2 / 3)
    cube = rows["cube-sum Q=1000"]
    assert cube.rhs == pytest.approx(math.log(1000))
    assert code == (0 if all(r.passed for r in rows.values()) else 1)


def test_rows_sorted():
    rows = run_suite(RunConfig("goldbach-scan", N=2000))
    assert rows == sorted(rows, key=ReportRow.sort_key)


@pytest.mark.parametrize("args", [
    ["--suite", "goldbach-scan", "--N", "20000"],
    ["--suite", "ap-regime", "--seed", "5"],
    ["--suite", "lsv-sweep", "--seed", "5", "--N", "256", "--trials", "20"],
])
def test_cli_subprocess_deterministic(tmp_path, args):
    paths = []
    for i, threads in enumerate(("1", "3")):
        p = tmp_path / f"{i}.json"
        env = {"SIEVELAB_THREADS": threads, "PATH": "/usr/bin:/bin"}
        subprocess.run([sys.executable, "-m", "sievelab", *args, "--format", "json", "--out", str(p)],
                       check=True, env=env)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
