import csv
import json
import subprocess
import sys

from tcamhist.cli import main


def test_decompose_reference_examples(capsys):
    assert main(["decompose", "--lo", "4", "--hi", "7", "--width", "4"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("0100/1100 (01**)")
    assert out[-1] == "1 entries"

    main(["decompose", "--lo", "3", "--hi", "8", "--width", "4"])
    lines = capsys.readouterr().out.splitlines()
    assert [l.split()[0] for l in lines[:-1]] == ["0011/1111", "0100/1100", "1000/1111"]
    assert lines[-1] == "3 entries"

    main(["decompose", "--lo", "0", "--hi", "255", "--width", "8"])
    assert capsys.readouterr().out.startswith("00000000/00000000")


def test_decompose_invalid(capsys):
    assert main(["decompose", "--lo", "9", "--hi", "3", "--width", "4"]) == 2
    assert "invalid range" in capsys.readouterr().err


def test_expected_count(capsys):
    main(["expected-count", "--rate", "20e9", "--frame", "1518", "--duration", "2100"])
    assert int(capsys.readouterr().out) == 3_458_498_024


def test_entries(capsys):
    main(["entries"])
    out = capsys.readouterr().out
    assert "3484 entries" in out and "4611 entries" in out and "7476 entries" in out


def test_run_csv_and_summary(tmp_path, capsys):
    out, summ = tmp_path / "h.csv", tmp_path / "s.json"
    rc = main(["run", "--samples", "100000", "--seed", "1", "--out", str(out), "--summary", str(summ)])
    assert rc == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads(summ.read_text())
    assert printed["total_packets"] == 100_000
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 500


def test_run_empty_and_capacity(tmp_path, capsys):
    assert main(["run", "--samples", "0", "--out", str(tmp_path / "e.csv")]) == 0
    assert json.loads(capsys.readouterr().out)["mean_ns"] is None
    assert main(["run", "--samples", "10", "--capacity", "10", "--out", str(tmp_path / "c.csv")]) != 0


def test_run_cbr_triple(tmp_path, capsys):
    main(["run", "--rate", "1e9", "--frame", "125", "--duration", "0.01", "--dist", "constant",
          "--value", "50000000", "--format", "json", "--out", str(tmp_path / "c.json")])
    summary = json.loads(capsys.readouterr().out)
    assert summary["total_packets"] == 10_000
    doc = json.loads((tmp_path / "c.json").read_text())
    assert doc["bins"][250]["count"] == 10_000


def test_console_module_entry():
    r = subprocess.run([sys.executable, "-m", "tcamhist", "decompose", "--lo", "4", "--hi", "7", "--width", "4"],
                       capture_output=True, text=True, check=True)
    assert "01**" in r.stdout
