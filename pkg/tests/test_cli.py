import csv
import struct
import subprocess
import sys

import pytest

from incrlearn.cli import main

FAST = ["--epochs", "6", "--hidden", "16", "--feature-dim", "8"]


@pytest.fixture(scope="module")
def data_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "toy.csv"
    assert main(["gen-data", "--out", str(path), "--num-classes", "4", "--dim", "6",
                 "--n-train", "30", "--n-test", "10", "--seed", "5"]) == 0
    return path


def _run(tmp_path, data_file, name, *extra):
    out = tmp_path / name
    code = main(["run", "--dataset", str(data_file), "--out-dir", str(out), *FAST, *extra])
    return code, out


def test_gen_data_rows(data_file):
    rows = list(csv.reader(open(data_file)))
    assert len(rows) == 4 * 40
    assert {r[0] for r in rows} == {"train", "test"} and len(rows[0]) == 2 + 6


def test_run_writes_one_row_per_step(tmp_path, data_file):
    code, out = _run(tmp_path, data_file, "r", "--repeats", "2", "--batch-size", "2", "--plot")
    assert code == 0
    rows = list(csv.DictReader(open(out / "accuracy.csv")))
    assert len(rows) == 2 * 2
    assert [int(r["t"]) for r in rows] == [2, 4, 2, 4]
    assert all(0.0 <= float(r["accuracy"]) <= 1.0 for r in rows)
    for name in ("timing.csv", "summary.json", "confusion.csv", "accuracy.svg", "confusion.svg", "config.txt"):
        assert (out / name).exists()


def test_rerun_is_byte_identical(tmp_path, data_file):
    _, a = _run(tmp_path, data_file, "a", "--repeats", "2")
    _, b = _run(tmp_path, data_file, "b", "--repeats", "2")
    assert (a / "accuracy.csv").read_bytes() == (b / "accuracy.csv").read_bytes()
    assert (a / "confusion.csv").read_bytes() == (b / "confusion.csv").read_bytes()


def test_config_echo_reproduces_run(tmp_path, data_file):
    _, a = _run(tmp_path, data_file, "a", "--seed", "3", "--strategy", "hybrid1")
    b = tmp_path / "b"
    assert main(["run", "--config", str(a / "config.txt"), "--out-dir", str(b)]) == 0
    assert (a / "accuracy.csv").read_bytes() == (b / "accuracy.csv").read_bytes()
    assert "strategy = hybrid1" in (b / "config.txt").read_text()


def test_unknown_strategy(tmp_path, data_file, capsys):
    code, _ = _run(tmp_path, data_file, "x", "--strategy", "bogus")
    assert code != 0
    err = capsys.readouterr().err
    assert "icarl" in err and "lwf-mc" in err


def _parse_counts(data):
    """Independent reader for the documented byte layout."""
    magic, version, bom, length = struct.unpack_from("<8sIIQ", data)
    assert (magic, version, bom) == (b"ICRLCKPT", 1, 0x01020304)
    p = data[24:24 + length]
    pos = 4 + struct.unpack_from("<I", p)[0] + 24
    input_dim, n_hidden = struct.unpack_from("<QQ", p, pos)
    pos += 16
    dims = [input_dim, *struct.unpack_from(f"<{n_hidden}Q", p, pos)]
    pos += 8 * n_hidden
    feature_dim, t = struct.unpack_from("<QQ", p, pos)
    pos += 16 + 8 * t
    dims.append(feature_dim)
    pos += 8 * sum(a * b + b for a, b in zip(dims, dims[1:])) + 8 * t * feature_dim
    K, n = struct.unpack_from("<QQ", p, pos)
    pos += 16
    counts = {}
    for _ in range(n):
        y, m = struct.unpack_from("<QQ", p, pos)
        counts[y] = m
        pos += 16 + 8 * m + 8 * m * input_dim
    assert pos == len(p)
    return t, K, counts


def test_inspect_checkpoint(tmp_path, data_file, capsys):
    ckpt = tmp_path / "s.ckpt"
    assert main(["learn", "--dataset", str(data_file), "--checkpoint", str(ckpt), "--classes", "0,1",
                 "--memory-k", "10", *FAST]) == 0
    capsys.readouterr()
    assert main(["inspect", str(ckpt)]) == 0
    out = capsys.readouterr().out
    assert "t: 2" in out and "class 0 (label 0): 5" in out and "class 1 (label 1): 5" in out
    assert _parse_counts(ckpt.read_bytes()) == (2, 10, {0: 5, 1: 5})

    assert main(["learn", "--dataset", str(data_file), "--checkpoint", str(ckpt), "--classes", "2,3",
                 "--memory-k", "10", *FAST]) == 0
    t, K, counts = _parse_counts(ckpt.read_bytes())
    assert t == 4 and counts == {y: 2 for y in range(4)}


def test_inspect_corrupted(tmp_path, data_file, capsys):
    ckpt = tmp_path / "s.ckpt"
    main(["learn", "--dataset", str(data_file), "--checkpoint", str(ckpt), "--classes", "0", *FAST])
    data = bytearray(ckpt.read_bytes())
    data[-10] ^= 0x55
    ckpt.write_bytes(bytes(data))
    assert main(["inspect", str(ckpt)]) != 0
    assert "checksum" in capsys.readouterr().err


def test_run_saves_checkpoint(tmp_path, data_file, capsys):
    ckpt = tmp_path / "r.ckpt"
    code, _ = _run(tmp_path, data_file, "c", "--save-checkpoint", str(ckpt))
    assert code == 0 and main(["inspect", str(ckpt)]) == 0
    assert "t: 4" in capsys.readouterr().out


def test_sweep(tmp_path, data_file):
    out = tmp_path / "sw"
    assert main(["sweep", "--dataset", str(data_file), "--out-dir", str(out), "--budgets", "4,8,160",
                 "--strategies", "icarl,ncm", *FAST]) == 0
    rows = list(csv.DictReader(open(out / "sweep_icarl.csv")))
    assert [int(r["memory_k"]) for r in rows] == [4, 8, 160]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "incrlearn", "inspect", str(tmp_path / "missing.ckpt")],
                         capture_output=True, text=True)
    assert res.returncode == 1
