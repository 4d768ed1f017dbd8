import json
import shutil
from pathlib import Path

import pytest

from fixmine import corpus
from fixmine.cli import main

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_learn_predict_lint(tmp_path, capsys):
    pats = tmp_path / "patterns.json"
    code, out, _ = run(capsys, "learn", "--corpus", CORPUS / "nullcheck", "--out", pats)
    assert code == 0
    summary = json.loads(out)
    assert summary["pairs"] == 4 and summary["patterns"] > 0 and summary["concreteEdits"] >= 4
    assert json.loads(pats.read_text())["trainingSetSize"] == 4
    assert not list(tmp_path.glob(".*tmp*"))

    t = CORPUS / "target"
    code, out, _ = run(capsys, "predict", "--patterns", pats, "--file", t / "FeedFragment.mj",
                       "--bug", t / "bug.json", "--top", 1, "--validate", "--config", t / "lint.json")
    assert code == 0
    (cand,) = json.loads(out)
    assert cand["rank"] == 1 and cand["validated"] is True
    assert "+        if (mListView == null)" in cand["patch"]

    code, out, _ = run(capsys, "lint", "--file", t / "FeedFragment.mj", "--config", t / "lint.json")
    assert code == 0
    assert [r["line"] for r in json.loads(out)] == [3]


def test_predict_without_applicable_pattern(tmp_path, capsys):
    pats = tmp_path / "p.json"
    run(capsys, "learn", "--corpus", CORPUS / "nullcheck", "--out", pats)
    src = tmp_path / "E.mj"
    src.write_text("class E {\n}\n")
    bug = tmp_path / "bug.json"
    bug.write_text(json.dumps({"file": "E.mj", "line": 1, "variable": "x"}))
    code, out, err = run(capsys, "predict", "--patterns", pats, "--file", src, "--bug", bug)
    assert code == 3
    assert json.loads(out) == []
    assert err


def test_evaluate(capsys):
    code, out, _ = run(capsys, "evaluate", "--corpus", CORPUS / "nullcheck", "--folds", 4, "--top", 2)
    assert code == 0
    rep = json.loads(out)
    assert len(rep["perFold"]) == 4
    assert rep["aggregate"]["top2"] >= rep["aggregate"]["top1"]
    for fold in rep["perFold"]:
        assert fold["top2"] >= fold["top1"]


def test_evaluate_single_pattern_corpus(tmp_path, capsys):
    items = [(p.name, p.before.text, p.after.text, p.bug.line, p.bug.variable)
             for p in corpus.generate_synthetic(10, 0.0, seed=5) if p.kind == "ternary"]
    write = tmp_path / "c"
    corpus.write_corpus(write, items)
    code, out, _ = run(capsys, "evaluate", "--corpus", write, "--folds", 3, "--seed", 1)
    assert code == 0
    assert json.loads(out)["aggregate"]["top1"] == 1.0


@pytest.mark.parametrize("folds", [0, 5])
def test_evaluate_bad_folds(capsys, folds):
    code, _, err = run(capsys, "evaluate", "--corpus", CORPUS / "nullcheck", "--folds", folds)
    assert code == 1 and "folds" in err


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "learn", "--corpus", tmp_path, "--out", tmp_path / "x.json")[0] == 1
    for argv in (["bogus"], ["learn"], ["predict", "--top", "0"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 1
    capsys.readouterr()


def test_missing_pair_member(tmp_path, capsys):
    d = tmp_path / "c"
    shutil.copytree(CORPUS / "nullcheck", d)
    (d / "camera.after.mj").unlink()
    code, _, err = run(capsys, "learn", "--corpus", d, "--out", tmp_path / "x.json")
    assert code == 1 and "camera" in err


def test_parse_error_exit_code(tmp_path, capsys):
    d = tmp_path / "c"
    shutil.copytree(CORPUS / "nullcheck", d)
    (d / "camera.after.mj").write_text("class {")
    code, _, err = run(capsys, "learn", "--corpus", d, "--out", tmp_path / "x.json")
    assert code == 2 and "parse error" in err
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"nullableNames": []}')
    assert run(capsys, "lint", "--file", d / "camera.after.mj", "--config", cfg)[0] == 2


def test_demo_corpus_command(tmp_path, capsys):
    code, out, _ = run(capsys, "demo-corpus", "--kind", "demo", "--out", tmp_path / "d")
    assert code == 0 and json.loads(out)["pairs"] == len(corpus.DEMO_PAIRS)
    assert len(list((tmp_path / "d").glob("*.bug.json"))) == len(corpus.DEMO_PAIRS)
