import json

import pytest

from floorseq.cli import main
from floorseq.metrics import EvalReport


@pytest.fixture(scope="module")
def synth_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    rc = main(["synth", "--output", str(d / "s.jsonl"), "--gt", str(d / "gt.json"), "--rooms", "2",
               "--seed", "4", "--scale", "1.5", "--columns", "256"])
    assert rc == 0
    return d


def test_run_and_eval(synth_files):
    d = synth_files
    assert main(["run", "--input", str(d / "s.jsonl"), "--output", str(d / "plan.json"), "--seed", "3"]) == 0
    plan = json.loads((d / "plan.json").read_text())
    assert len(plan["rooms"]) == 2 and abs(plan["scale_used"] - 1.5) <= 0.05
    assert len(plan["provenance"]["input_sha256"]) == 64
    assert main(["eval", "--prediction", str(d / "plan.json"), "--gt", str(d / "gt.json"),
                 "--output", str(d / "report.txt")]) == 0
    report = EvalReport.parse((d / "report.txt").read_text())
    assert report["room_recall@0.5"] == 1.0


def test_empty_stream_is_input_error(tmp_path):
    (tmp_path / "empty.jsonl").write_text("")
    out = tmp_path / "plan.json"
    assert main(["run", "--input", str(tmp_path / "empty.jsonl"), "--output", str(out)]) == 1
    assert not out.exists()


def test_bad_record_and_config_are_input_errors(tmp_path, synth_files, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"index": 0, "quaternion": [0.9, 0, 0, 0]}\n')
    assert main(["run", "--input", str(bad)]) == 1
    assert "quaternion" in capsys.readouterr().err
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"nope": 1}')
    assert main(["run", "--input", str(synth_files / "s.jsonl"), "--config", str(cfg)]) == 1
    assert "nope" in capsys.readouterr().err
    assert main(["run", "--input", str(tmp_path / "missing.jsonl")]) == 1


def test_debug_maps_requires_dir():
    with pytest.raises(SystemExit):
        main(["debug-maps", "--input", "x"])


def test_debug_maps_writes_images(tmp_path, synth_files):
    pytest.importorskip("PIL")
    out = tmp_path / "dbg"
    assert main(["debug-maps", "--input", str(synth_files / "s.jsonl"), "--dump-debug", str(out),
                 "--output", str(tmp_path / "p.json")]) == 0
    assert (out / "rounds.json").exists() and list(out.glob("room*_MP.png"))
