import io
import json
import subprocess
import sys

import pytest

from robust_l0 import DataError, noisy_dataset
from robust_l0.cli import main
from robust_l0.io import read_stream, with_index_timestamps, write_stream

FIELDS = ["config", "hits", "trials", "stdDevNm", "maxDevNm", "pTimeMs", "pSpaceWords", "errors"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sample_json_layout(capsys):
    code, out, _ = run(capsys, "sample", "--gen", "rand", "--gen-n", "8", "--gen-dim", "2", "--gen-max-dups", "3",
                       "--runs", "20")
    assert code == 0
    obj = json.loads(out)
    assert list(obj) == FIELDS
    assert obj["trials"] == 20 and sum(obj["hits"].values()) == 20
    assert obj["config"]["mode"] == "iw"


def test_bench_sw(capsys):
    code, out, _ = run(capsys, "bench", "--gen", "powerlaw", "--gen-n", "10", "--gen-dim", "3", "--mode", "sw",
                       "--window", "30", "--runs", "5")
    assert code == 0
    obj = json.loads(out)
    assert obj["config"]["window"] == 30 and obj["pSpaceWords"] > 0


def test_time_window_from_cli(capsys):
    code, out, _ = run(capsys, "sample", "--gen", "rand", "--gen-n", "5", "--gen-dim", "2", "--mode", "sw",
                       "--wmode", "time", "--window", "10", "--runs", "3")
    assert code == 0 and json.loads(out)["config"]["windowMode"] == "time"


def test_f0_commands(capsys):
    code, out, _ = run(capsys, "f0", "--gen", "rand", "--gen-n", "40", "--gen-dim", "2", "--gen-max-dups", "3")
    obj = json.loads(out)
    assert code == 0 and obj["estimate"] == 40 and obj["groups"] == 40
    code, out, _ = run(capsys, "f0", "--gen", "rand", "--gen-n", "20", "--gen-dim", "2", "--mode", "sw",
                       "--window", "50", "--copies", "3")
    obj = json.loads(out)
    assert code == 0 and obj["estimate"] > 0


def test_gen_round_trip(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "gen", "--gen-n", "12", "--gen-dim", "3", "--data-seed", "4", "--header",
                     "--output", str(path))
    assert code == 0
    back = read_stream(path, 3, groups=True, header=True)
    orig = noisy_dataset(12, 3, 4, "uniform", 100)
    assert back.labels == orig.labels
    assert [p.coords for p in back.points] == [p.coords for p in orig.points]
    code, out, _ = run(capsys, "sample", "--input", str(path), "--dim", "3", "--alpha", str(orig.alpha_truth),
                       "--header", "--with-groups", "--runs", "4")
    assert code == 0 and json.loads(out)["config"]["points"] == len(orig)


def test_input_needs_alpha(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("1.0,2.0\n")
    with pytest.raises(SystemExit):
        main(["sample", "--input", str(path), "--dim", "2"])


def test_bad_input_exits_with_two(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0\n3.0\n")
    code, _, err = run(capsys, "sample", "--input", str(path), "--dim", "2", "--alpha", "0.5")
    assert code == 2 and "expected 2 fields" in err
    code, _, err = run(capsys, "sample", "--gen", "rand", "--gen-n", "5", "--gen-dim", "2", "--runs", "0")
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "robust_l0.cli", "gen", "--gen-n", "3", "--gen-dim", "2",
                          "--gen-max-dups", "1"], capture_output=True, text=True, check=True)
    assert len(res.stdout.strip().splitlines()) == 6


# ------------------------------------------------------------------- csv io
def test_csv_round_trip_with_timestamps():
    st_ = with_index_timestamps(noisy_dataset(6, 2, 1, "uniform", 3))
    buf = io.StringIO()
    write_stream(buf, st_, groups=True, timestamps=True)
    back = read_stream(io.StringIO(buf.getvalue()), 2, groups=True, timestamps=True)
    assert back.points == st_.points and back.labels == st_.labels


def test_csv_without_groups_uses_greedy_labels():
    text = "0.0,0.0\n0.1,0.0\n5.0,5.0\n"
    st_ = read_stream(io.StringIO(text), 2, alpha=0.5)
    assert st_.labels == (0, 0, 1) and st_.n_groups == 2
    with pytest.raises(DataError):
        read_stream(io.StringIO(text), 2)


@pytest.mark.parametrize("text,kw", [("", {}), ("1.0,x\n", {}), ("1.0,nan\n", {}),
                                     ("0,0,5\n1,1,3\n", dict(timestamps=True)), ("1,2\n", dict(groups=True))])
def test_csv_errors(text, kw):
    with pytest.raises(DataError):
        read_stream(io.StringIO(text), 2, alpha=1.0, **kw)


def test_csv_skips_blank_lines():
    st_ = read_stream(io.StringIO("1,2,0\n\n3,4,1\n"), 2, groups=True)
    assert len(st_) == 2 and st_.points[1].index == 1
