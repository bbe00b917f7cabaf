import csv
import json

import pytest

from relulip.cli import REPORT_KEYS, Report, parse_box, run_cli
from relulip.network import random_network


@pytest.fixture
def write_net(tmp_path):
    def write(net, name="net.json"):
        path = tmp_path / name
        path.write_text(net.to_json())
        return str(path)
    return write


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_linear_report(capsys, write_net, linear_net):
    code, out, _ = run(capsys, "--network", write_net(linear_net), "--box", "[[0,1],[0,1]]",
                       "--p", "1", "--k", "1")
    assert code == 0
    doc = json.loads(out)
    assert (doc["gub"], doc["glb"], doc["status"]) == (6.0, 6.0, "exact")
    assert tuple(doc) == REPORT_KEYS
    assert doc["trace"] is None and doc["eps_strict"] == 1e-7


def test_global_relu(capsys, write_net, relu_net):
    code, out, _ = run(capsys, "--network", write_net(relu_net), "--mode", "global", "--p", "inf")
    doc = json.loads(out)
    assert code == 0 and doc["gub"] == 1.0 and doc["status"] == "exact"
    assert doc["output_bounds"] is None and doc["mode"] == "global"


@pytest.mark.parametrize("argv,message", [
    (["--p", "3"], "unsupported norm"),
    (["--k", "0.5"], "k must be"),
    (["--box", "[[0,1"], "malformed box"),
    (["--box", "[[1,0]]"], "malformed box"),
    (["--box", "[[0,1],[0,1]]"], "box has 2 intervals"),
    (["--box", "{\"a\": 1}"], "malformed box"),
    ([], "--box is required"),
])
def test_input_errors(capsys, write_net, relu_net, argv, message):
    code, out, err = run(capsys, "--network", write_net(relu_net), *argv)
    assert code == 2 and message in err and out == ""


def test_unreadable_network(capsys, tmp_path):
    code, _, err = run(capsys, "--network", str(tmp_path / "missing.json"), "--box", "[[0,1]]")
    assert code == 2 and "cannot read network" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "--network", str(bad), "--box", "[[0,1]]")
    assert code == 2 and "invalid network" in err


def test_box_file_and_out(capsys, write_net, relu_net, tmp_path):
    box = tmp_path / "box.json"
    box.write_text('{"box": [[-1, 1]]}')
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "--network", write_net(relu_net), "--box", str(box),
                       "--out", str(out_path))
    assert code == 0 and out == ""
    report = Report.from_json(out_path.read_text())
    assert report.gub == pytest.approx(1.0) and report.output_bounds == [[0.0, 1.0]]


def test_trace_and_round_trip(capsys, write_net, tmp_path):
    net = random_network((3, 6, 6, 2), 0)
    csv_path = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "--network", write_net(net), "--box", "[[0,1],[0,1],[0,1]]",
                       "--trace", "--trace-csv", str(csv_path))
    assert code == 0
    report = Report.from_json(out)
    assert Report.from_json(report.to_json()) == report
    gubs = [row[1] for row in report.trace]
    assert len(report.trace) == report.iterations
    assert all(a >= b for a, b in zip(gubs, gubs[1:]))
    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iteration", "gub", "glb", "queue_size"]
    assert [float(r[1]) for r in rows[1:]] == gubs


def test_identical_runs(capsys, write_net):
    path = write_net(random_network((2, 8, 8, 2), 1))
    argv = ["--network", path, "--box", "[[0,1],[0,1]]", "--trace", "--seed", "3"]
    docs = []
    for _ in range(2):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        doc = json.loads(out)
        doc.pop("elapsed_s")
        docs.append(json.dumps(doc))
    assert docs[0] == docs[1]


def test_report_rejects_wrong_keys():
    with pytest.raises(ValueError, match="keys"):
        Report.from_dict({"gub": 1.0})


def test_parse_box_inline():
    assert [tuple(iv) for iv in parse_box("[[0, 1], [-2, 3.5]]")] == [(0.0, 1.0), (-2.0, 3.5)]
    with pytest.raises(ValueError):
        parse_box("[]")
