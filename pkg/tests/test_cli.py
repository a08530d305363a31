import json
import time

import numpy as np
import pytest

from cnnloh.cli import build_parser, main
from cnnloh.model import MixtureModel, sample


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def baf_file(workdir):
    # sample tBAF from the reference model, then fold back to BAF on a random side
    rng = np.random.default_rng(0)
    y = sample(MixtureModel.from_params(1 / 3, 0.1, 8, 0.2, 8), 1800, rng)
    side = rng.integers(0, 2, y.size) * 2 - 1
    baf = np.clip(0.5 + side * y / 2, 0, 1)
    path = workdir / "train.txt"
    path.write_text("".join(f"{float(v)!r}\n" for v in baf))
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_defaults():
    args = build_parser().parse_args(["calibrate", "--model", "m.json"])
    assert (args.delta, args.alpha, args.nsim, args.min_len) == (0.01, 0.05, 10_000, 25)


def test_fit_writes_model_schema(baf_file, workdir):
    assert run("fit", baf_file, "-o", "model.json", "--report", "fit.json") == 0
    doc = json.loads((workdir / "model.json").read_text())
    assert set(doc) == {"hetWeight", "lower", "upper"}
    assert set(doc["lower"]) == {"theta0", "shapeB"} and set(doc["upper"]) == {"theta1", "shapeA"}
    rep = json.loads((workdir / "fit.json").read_text())
    assert rep["n_obs"] == 1800 and rep["converged"]
    manifest = json.loads((workdir / "model.json.manifest.json").read_text())
    assert manifest["command"] == "fit"
    assert str(baf_file) in manifest["inputs"]


def test_fit_training_range(baf_file, workdir):
    assert run("fit", baf_file, "--train-start", 100, "--train-end", 599, "-o", "m.json", "--report", "r.json") == 0
    assert json.loads((workdir / "r.json").read_text())["n_obs"] == 500
    assert run("fit", baf_file, "--train-start", 0, "--train-end", 5000) == 2


def test_parse_error_names_line(workdir, capsys):
    (workdir / "bad.txt").write_text("0.5\n0.1\n1.2\n")
    assert run("fit", "bad.txt") == 2
    err = capsys.readouterr().err
    assert "bad.txt:3" in err


def test_missing_file(capsys):
    assert run("fit", "does-not-exist.txt") == 2


def test_degenerate_training_is_computation_error(workdir):
    (workdir / "hom.txt").write_text("0.0\n" * 40)
    assert run("fit", "hom.txt") == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["calibrate", "--model", "m.json", "--delta", "1.0"],
        ["calibrate", "--model", "m.json", "--delta", "-0.5"],
        ["calibrate", "--model", "m.json", "--alpha", "0"],
        ["calibrate", "--model", "m.json", "--nsim", "5"],
        ["study", "--loh-len"],
        ["study", "--purity", "1.5"],
        ["segment", "x.txt", "--model", "m.json", "--initial-state", "maybe"],
    ],
)
def test_bad_arguments_exit_2(argv, workdir):
    assert main(argv) == 2


def test_segment_and_rerun(baf_file, workdir, capsys):
    assert run("fit", baf_file, "-o", "model.json") == 0
    assert run("simulate", "--loh-len", 100, "--seed", 3, "-o", "sim.tsv") == 0
    argv = ["segment", "sim.tsv", "--model", "model.json", "--min-len", 10, "--nsim", 500, "-o", "seg.tsv"]
    assert run(*argv, "--track", "track.tsv") == 0
    first = (workdir / "seg.tsv").read_bytes()
    assert first.decode().splitlines()[0] == "start\tend\tlabel\tn_obs"
    assert run(*argv, "--track", "track.tsv") == 0
    assert (workdir / "seg.tsv").read_bytes() == first
    assert run("rerun", "seg.tsv.manifest.json") == 0
    assert "byte-identically" in capsys.readouterr().err

    assert run("evaluate", "--gold", "sim.tsv", "--pred", "seg.tsv", "-o", "eval.json") == 0
    doc = json.loads((workdir / "eval.json").read_text())
    assert doc["pooled"]["sensitivity"] > 0.8
    assert doc["pooled"]["specificity"] > 0.9


def test_rerun_detects_tampering(baf_file, workdir):
    assert run("fit", baf_file, "-o", "model.json") == 0
    manifest = json.loads((workdir / "model.json.manifest.json").read_text())
    manifest["outputs"]["model.json"] = "0" * 64
    (workdir / "tampered.json").write_text(json.dumps(manifest))
    assert run("rerun", "tampered.json") == 1


def test_chromosome_wise_segmentation(baf_file, workdir):
    assert run("fit", baf_file, "-o", "model.json") == 0
    rng = np.random.default_rng(1)
    rows = ["chrom\tpos\tbaf"]
    for chrom in ("1", "2"):
        for i in range(300):
            v = 0.5 + rng.normal(0, 0.03) if rng.random() < 0.33 else float(rng.integers(0, 2))
            rows.append(f"{chrom}\t{(i + 1) * 100}\t{float(min(max(v, 0.0), 1.0))!r}")
    (workdir / "chr.tsv").write_text("\n".join(rows) + "\n")
    assert run("segment", "chr.tsv", "--model", "model.json", "--nsim", 500, "-o", "seg.tsv") == 0
    lines = (workdir / "seg.tsv").read_text().splitlines()
    assert lines[0] == "chrom\tstart\tend\tlabel\tn_obs"
    chroms = [ln.split("\t")[0] for ln in lines[1:]]
    assert chroms[0] == "1" and chroms[-1] == "2"
    # segments never cross the chromosome boundary at row 300
    for ln in lines[1:]:
        _, s, e, _, _ = ln.split("\t")
        assert int(e) < 300 or int(s) >= 300


def test_unsorted_positions_rejected(workdir):
    (workdir / "bad.tsv").write_text("chrom\tpos\tbaf\n1\t200\t0.5\n1\t100\t0.5\n")
    (workdir / "m.json").write_text(MixtureModel.from_params(0.3, 0.1, 8, 0.2, 8).to_json())
    assert run("segment", "bad.tsv", "--model", "m.json") == 2


def test_study_smoke(workdir):
    t0 = time.perf_counter()
    status = run(
        "study", "--replicates", 5, "--nsim", 500, "--seed", 2, "-o", "study.tsv", "--json", "study.json"
    )
    assert status == 0
    assert time.perf_counter() - t0 < 10
    lines = (workdir / "study.tsv").read_text().splitlines()
    assert len(lines) == 1 + 27
    tables = json.loads((workdir / "study.json").read_text())["tables"]
    assert tables["sensitivity"].splitlines()[0] == "purity\tl\tm=10\tm=25\tm=50"


def test_calibrate_outputs_thresholds(workdir, capsys):
    (workdir / "m.json").write_text(MixtureModel.from_params(0.3, 0.1, 8, 0.2, 8).to_json())
    assert run("calibrate", "--model", "m.json", "--nsim", 500, "-o", "thr.json") == 0
    doc = json.loads((workdir / "thr.json").read_text())
    assert doc["l0"] >= 0 and doc["l1"] >= 0
    assert doc["config"]["n_sim"] == 500
