import json
import os

import jsonschema
import numpy as np
import pytest

from bracewatch.cli import REPORT_SCHEMA, main
from bracewatch.coco import serialize_coco
from bracewatch.imaging import decode_image, write_image
from bracewatch.monitor import read_log
from bracewatch.synth import ScaffoldSpec, render_frame


@pytest.fixture
def scene(tmp_path):
    """Write a 3x1 frame with every brace installed plus its COCO file."""

    def make(presence=(True, True, True), name="frame.png", seed=1):
        img, ann, truth = render_frame(ScaffoldSpec(), len(presence), 1, [list(presence)], seed=seed, file_name=name)
        image_path = tmp_path / name
        write_image(image_path, img)
        coco_path = tmp_path / "coco.json"
        coco_path.write_text(serialize_coco(ann))
        return image_path, coco_path, truth

    return make


def _detect(image, coco, *extra):
    return main(["detect", "--image", str(image), "--coco", str(coco), *extra])


def test_detect_all_present(scene, tmp_path):
    image, coco, truth = scene()
    report = tmp_path / "r.json"
    assert _detect(image, coco, "--report", str(report)) == 0
    doc = json.loads(report.read_text())
    jsonschema.validate(doc, REPORT_SCHEMA)
    units = doc["images"][0]["units"]
    assert [u["unit_id"] for u in units] == [u.unit_id for u in truth.units]
    assert all(u["brace_present"] for u in units)
    assert doc["images"][0]["elapsed_ms"] >= 0


def test_detect_one_missing(scene, tmp_path, capsys):
    image, coco, _ = scene((True, False, True))
    assert _detect(image, coco, "--no-timing") == 2
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, REPORT_SCHEMA)
    assert [u["brace_present"] for u in doc["images"][0]["units"]] == [True, False, True]
    assert doc["images"][0]["elapsed_ms"] is None


def test_detect_overlay(scene, tmp_path):
    image, coco, _ = scene((True, False, True))
    overlay = tmp_path / "o.png"
    _detect(image, coco, "--overlay", str(overlay), "--report", str(tmp_path / "r.json"))
    rgb = decode_image(overlay.read_bytes())
    assert rgb.ndim == 3
    assert np.all(rgb == (255, 0, 0), axis=2).any() and np.all(rgb == (0, 255, 0), axis=2).any()


def test_detect_reports_are_byte_identical(scene, tmp_path):
    image, coco, _ = scene((True, False, True))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    _detect(image, coco, "--no-timing", "--seed", "5", "--report", str(a))
    _detect(image, coco, "--no-timing", "--seed", "5", "--report", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_detect_errors(scene, tmp_path):
    image, coco, _ = scene()
    assert _detect(image, tmp_path / "missing.json") == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert _detect(image, bad) == 1
    cfg = tmp_path / "c.toml"
    cfg.write_text("[hough]\nwhatever = 1\n")
    assert _detect(image, coco, "--config", str(cfg)) == 1


def test_usage_errors_exit_64(capsys):
    with pytest.raises(SystemExit) as info:
        main(["detect", "--image", "x.png"])
    assert info.value.code == 64
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 64


def test_config_file_and_flag_precedence(scene, tmp_path):
    image, coco, _ = scene()
    cfg = tmp_path / "c.toml"
    cfg.write_text("seed = 11\n[brace]\ncentral_frac = 0.5\n")
    report = tmp_path / "r.json"
    _detect(image, coco, "--config", str(cfg), "--seed", "12", "--report", str(report))
    config = json.loads(report.read_text())["config"]
    assert config["seed"] == 12 and config["brace"]["central_frac"] == 0.5


# --- synth and eval --------------------------------------------------------------


def _synth(out, *extra):
    return main(["synth", "--out", str(out), *extra])


def test_synth_zero_frames(tmp_path):
    assert _synth(tmp_path / "c", "--frames", "0", "--presence-rate", "0.5") == 0
    assert json.loads((tmp_path / "c" / "manifest.json").read_text())["frames"] == []


def test_synth_is_deterministic(tmp_path):
    args = ("--frames", "3", "--presence-rate", "0.5", "--seed", "9", "--clutter-max", "3", "--noise-max", "6")
    _synth(tmp_path / "a", *args)
    _synth(tmp_path / "b", *args)
    tree = lambda root: {p.relative_to(root).as_posix(): p.read_bytes() for p in root.rglob("*") if p.is_file()}
    assert tree(tmp_path / "a") == tree(tmp_path / "b")


def test_synth_presence_band(tmp_path):
    _synth(tmp_path / "c", "--frames", "20", "--cols", "5", "--presence-rate", "0.5", "--seed", "3")
    truth = json.loads((tmp_path / "c" / "truth.json").read_text())
    present = sum(u["brace_present"] for f in truth["frames"] for u in f["units"])
    assert 45 <= present <= 55


def test_eval_clean_corpus_is_perfect(tmp_path, capsys):
    corpus = tmp_path / "c"
    _synth(corpus, "--frames", "4", "--cols", "2", "--presence-rate", "0.5", "--seed", "4")
    capsys.readouterr()
    assert main(["eval", "--corpus", str(corpus)]) == 0
    metrics = json.loads((corpus / "eval.json").read_text())
    assert metrics["tp"] + metrics["fn"] == 4 and metrics["fp"] + metrics["tn"] == 4
    assert metrics["precision"] == metrics["recall"] == metrics["accuracy"] == 1.0
    assert json.loads(capsys.readouterr().out) == metrics


def test_eval_empty_corpus_has_null_metrics(tmp_path):
    corpus = tmp_path / "c"
    _synth(corpus, "--frames", "0", "--presence-rate", "0.5")
    assert main(["eval", "--corpus", str(corpus)]) == 0
    metrics = json.loads((corpus / "eval.json").read_text())
    assert metrics == {"tp": 0, "fp": 0, "fn": 0, "tn": 0, "precision": None, "recall": None, "accuracy": None}


def test_eval_missing_truth(tmp_path):
    corpus = tmp_path / "c"
    _synth(corpus, "--frames", "1", "--presence-rate", "0.5")
    (corpus / "truth.json").unlink()
    assert main(["eval", "--corpus", str(corpus)]) == 1


# --- monitor ---------------------------------------------------------------------


def _frames(tmp_path, *presences):
    frames = tmp_path / "frames"
    frames.mkdir()
    coco = tmp_path / "coco.json"
    for i, presence in enumerate(presences):
        img, ann, _ = render_frame(ScaffoldSpec(), len(presence), 1, [list(presence)], seed=1)
        write_image(frames / f"f{i:02d}.png", img)
        os.utime(frames / f"f{i:02d}.png", (1000 + i, 1000 + i))
        coco.write_text(serialize_coco(ann))
    return frames, coco


def _monitor(frames, coco, log):
    return main(["monitor", "--frames", str(frames), "--coco", str(coco), "--log", str(log)])


def test_monitor_identical_frames(tmp_path):
    frames, coco = _frames(tmp_path, (True, True), (True, True))
    log = tmp_path / "alarms.jsonl"
    assert _monitor(frames, coco, log) == 0
    assert not log.exists()


def test_monitor_brace_removed(tmp_path):
    frames, coco = _frames(tmp_path, (True, True), (True, False))
    log = tmp_path / "alarms.jsonl"
    assert _monitor(frames, coco, log) == 3
    (entry,) = read_log(log)
    assert entry["kind"] == "BRACE_REMOVED" and entry["unit_id"] == 2
    assert (entry["prev_frame"], entry["curr_frame"]) == ("f00.png", "f01.png")


def test_monitor_single_frame_and_out_of_order_mtimes(tmp_path):
    frames, coco = _frames(tmp_path, (True,))
    assert _monitor(frames, coco, tmp_path / "log.jsonl") == 0
    other = tmp_path / "second"
    other.mkdir()
    first, _ = sorted(_frames(other, (True,), (True,))[0].glob("*.png"))
    os.utime(first, (5000, 5000))  # newer than the frame named after it
    assert _monitor(other / "frames", coco, tmp_path / "log2.jsonl") == 0


def test_monitor_without_frames(tmp_path):
    (tmp_path / "empty").mkdir()
    coco = tmp_path / "c.json"
    coco.write_text('{"images":[],"annotations":[],"categories":[]}')
    assert _monitor(tmp_path / "empty", coco, tmp_path / "log.jsonl") == 1
