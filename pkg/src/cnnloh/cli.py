"""Command-line interface: ``cnnloh {fit,calibrate,segment,simulate,study,evaluate,rerun}``.

Input BAF must come from regions already known to be copy-number two; the
tool performs no copy-number check of its own.

Every command writes a JSON run manifest next to its output (``OUT.manifest.json``,
or stderr when writing to stdout).  ``cnnloh rerun MANIFEST`` replays the
recorded arguments and checks that the outputs are byte-identical.

Exit status is 0 on success, 2 on usage or validation errors and 1 on
computation errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .cusum import Label, SegmenterConfig, calibrate, segment
from .estimation import EmConfig, EstimationError, fit_em
from .evaluate import summarize
from .io import (
    InputError,
    format_labeled,
    format_segments,
    format_track,
    read_baf,
    read_gold,
    read_model,
    read_pool,
    read_segment_labels,
    sha256_file,
    write_model,
)
from .model import ModelError, tbaf_transform
from .simulate import STUDY_COLUMNS, ScenarioConfig, generate, run_study, study_table

_log = logging.getLogger("cnnloh")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- argument types ---------------------------------------------------------


def _ranged(lo: float, hi: float, lo_open: bool, hi_open: bool, name: str) -> Callable[[str], float]:
    def parse(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        ok_lo = v > lo if lo_open else v >= lo
        ok_hi = v < hi if hi_open else v <= hi
        if not (ok_lo and ok_hi):
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            raise argparse.ArgumentTypeError(f"{name} must lie in {lb}{lo:g}, {hi:g}{rb}, got {v:g}")
        return v

    return parse


def _count(minimum: int, name: str) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"{name} must be >= {minimum}, got {v}")
        return v

    return parse


def _label(text: str) -> Label:
    try:
        return Label.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


delta_type = _ranged(0.0, 1.0, False, True, "delta")
alpha_type = _ranged(0.0, 1.0, True, True, "alpha")
purity_type = _ranged(0.0, 1.0, True, False, "purity")
prob_type = _ranged(0.0, 1.0, False, False, "probability")
nonneg_type = _ranged(0.0, float("inf"), False, True, "value")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--out", help="output file (default: stdout)")
    p.add_argument("--manifest", help="run manifest path (default: OUT.manifest.json)")


def _add_segmenter(p: argparse.ArgumentParser, with_min_len: bool = True) -> None:
    g = p.add_argument_group("segmenter")
    g.add_argument("--delta", type=delta_type, default=0.01, help="LOH lower-band weight factor, in [0, 1)")
    g.add_argument("--alpha", type=alpha_type, default=0.05, help="tolerance level for early alarms")
    if with_min_len:
        g.add_argument("--min-len", type=_count(1, "min-len"), default=25, help="minimum segment length m")
    g.add_argument("--nsim", type=_count(100, "nsim"), default=10_000, help="Monte-Carlo replicates per threshold")
    g.add_argument("--seed", type=int, default=0)


def _add_scenario(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--total-len", type=_count(1, "total-len"), default=1000)
    g.add_argument("--loh-start", type=_count(0, "loh-start"), default=500)
    g.add_argument("--noise-sd", type=nonneg_type, default=0.03)
    g.add_argument("--het-rate", type=prob_type, default=0.33)
    g.add_argument("--resample", metavar="FILE", help="TSV pool (population, baf) to resample instead of simulating")


def _seg_cfg(args: argparse.Namespace, min_len: int | None = None) -> SegmenterConfig:
    return SegmenterConfig(
        delta=args.delta,
        tol_a=args.alpha,
        min_len=min_len if min_len is not None else args.min_len,
        n_sim=args.nsim,
        seed=args.seed,
        initial_state=getattr(args, "initial_state", Label.NON_LOH),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cnnloh", description="Detect copy-neutral LOH in B-allele frequency data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the non-LOH mixture model by EM")
    p.add_argument("input", help="BAF file")
    p.add_argument("--train-start", type=_count(0, "train-start"), help="first training row (0-based)")
    p.add_argument("--train-end", type=_count(0, "train-end"), help="last training row (inclusive)")
    p.add_argument("--max-iter", type=_count(1, "max-iter"), default=500)
    p.add_argument("--ll-tol", type=_ranged(0.0, float("inf"), True, True, "ll-tol"), default=1e-8)
    p.add_argument("--report", help="write the fit report JSON here")
    _add_output(p)

    p = sub.add_parser("calibrate", help="estimate the two alarm thresholds")
    p.add_argument("--model", required=True, help="model JSON from `fit`")
    _add_segmenter(p)
    _add_output(p)

    p = sub.add_parser("segment", help="call non-LOH / LOH segments")
    p.add_argument("input", help="BAF file")
    p.add_argument("--model", required=True, help="model JSON from `fit`")
    _add_segmenter(p)
    p.add_argument("--initial-state", type=_label, default=Label.NON_LOH, help="NonLOH or LOH")
    p.add_argument("--track", help="also write a per-observation BAF/tBAF/label table here")
    _add_output(p)

    p = sub.add_parser("simulate", help="emit one labeled synthetic BAF sequence")
    _add_scenario(p)
    p.add_argument("--loh-len", type=_count(0, "loh-len"), default=50)
    p.add_argument("--purity", type=purity_type, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("study", help="sensitivity/specificity grid over l, purity and m")
    _add_scenario(p)
    p.add_argument("--loh-len", type=_count(0, "loh-len"), nargs="+", default=[25, 50, 100])
    p.add_argument("--purity", type=purity_type, nargs="+", default=[1.0, 0.79, 0.5])
    p.add_argument("--min-len", type=_count(1, "min-len"), nargs="+", default=[10, 25, 50])
    p.add_argument("--replicates", type=_count(1, "replicates"), default=100)
    p.add_argument("--train-len", type=_count(10, "train-len"), default=2000)
    _add_segmenter(p, with_min_len=False)
    p.add_argument("--json", help="also write cells (with per-replicate counts) as JSON here")
    _add_output(p)

    p = sub.add_parser("evaluate", help="score predicted segmentations against gold labels")
    p.add_argument("--gold", action="append", required=True, help="gold label TSV (index, label); repeatable")
    p.add_argument("--pred", action="append", required=True, help="segmentation TSV; repeatable, paired with --gold")
    _add_output(p)

    p = sub.add_parser("rerun", help="replay a run manifest and verify outputs are byte-identical")
    p.add_argument("manifest")
    return parser


# -- commands ---------------------------------------------------------------
# Each returns (main output text, {extra path: text}, report dict).


def cmd_fit(args: argparse.Namespace) -> tuple[str, dict[str, str], dict]:
    data = read_baf(args.input)
    n = data.baf.size
    start = args.train_start if args.train_start is not None else 0
    end = args.train_end if args.train_end is not None else n - 1
    if not (0 <= start <= end < n):
        raise UsageError(f"training range [{start}, {end}] is outside the {n} input rows")
    y = tbaf_transform(data.baf[start : end + 1])
    rep = fit_em(y, EmConfig(max_iter=args.max_iter, ll_tol=args.ll_tol))
    report = {
        "train_range": [start, end],
        "n_obs": int(y.size),
        "iterations": rep.iterations,
        "converged": rep.converged,
        "final_log_lik": rep.final_log_lik,
        "model": rep.model.to_dict(),
    }
    extra = {args.report: json.dumps(report, indent=2) + "\n"} if args.report else {}
    return write_model(rep.model), extra, report


def cmd_calibrate(args: argparse.Namespace) -> tuple[str, dict[str, str], dict]:
    model = read_model(args.model)
    cfg = _seg_cfg(args)
    thr = calibrate(model, cfg)
    doc = {"l0": thr.l0, "l1": thr.l1, "config": _cfg_dict(cfg)}
    return json.dumps(doc, indent=2) + "\n", {}, doc


def _cfg_dict(cfg: SegmenterConfig) -> dict:
    d = asdict(cfg)
    d["initial_state"] = str(cfg.initial_state)
    return d


def cmd_segment(args: argparse.Namespace) -> tuple[str, dict[str, str], dict]:
    data = read_baf(args.input)
    model = read_model(args.model)
    cfg = _seg_cfg(args)
    y = tbaf_transform(data.baf)
    thr = calibrate(model, cfg)
    parts = []
    labels = np.zeros(y.size, dtype=np.int8)
    for chrom, sl in data.chromosome_slices():
        seg = segment(y[sl], model, cfg, thr)
        parts.append((chrom, sl.start, seg))
        labels[sl] = seg.labels()
    extra = {args.track: format_track(data, y, labels)} if args.track else {}
    report = {
        "thresholds": {"l0": thr.l0, "l1": thr.l1},
        "config": _cfg_dict(cfg),
        "n_obs": int(y.size),
        "n_segments": sum(len(s.segments) for _, _, s in parts),
        "n_loh_obs": int(labels.sum()),
    }
    return format_segments(parts), extra, report


def _scenario(args: argparse.Namespace, loh_len: int, purity: float) -> ScenarioConfig:
    try:
        return ScenarioConfig(
            total_len=args.total_len,
            loh_start=args.loh_start,
            loh_len=loh_len,
            purity=purity,
            noise_sd=args.noise_sd,
            het_rate=args.het_rate,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_simulate(args: argparse.Namespace) -> tuple[str, dict[str, str], dict]:
    cfg = _scenario(args, args.loh_len, args.purity)
    seq = read_pool(args.resample).generate(cfg) if args.resample else generate(cfg)
    return format_labeled(seq), {}, {"scenario": asdict(cfg)}


def cmd_study(args: argparse.Namespace) -> tuple[str, dict[str, str], dict]:
    for ll in args.loh_len:
        _scenario(args, ll, 1.0)
    pool = read_pool(args.resample) if args.resample else None
    base = _scenario(args, 0, 1.0)
    results = run_study(
        args.loh_len,
        args.purity,
        args.min_len,
        args.replicates,
        base=base,
        segmenter=_seg_cfg(args, min_len=1),
        train_len=args.train_len,
        pool=pool,
    )
    lines = ["\t".join(STUDY_COLUMNS)]
    for r in results:
        d = r.to_dict(with_counts=False)
        lines.append("\t".join("NA" if d[c] is None else str(d[c]) for c in STUDY_COLUMNS))
    tsv = "\n".join(lines) + "\n"
    tables = {
        "sensitivity": study_table(results, "mean_sensitivity"),
        "specificity": study_table(results, "mean_specificity"),
    }
    extra = {}
    if args.json:
        doc = {"cells": [r.to_dict() for r in results], "tables": tables}
        extra[args.json] = json.dumps(doc, indent=2) + "\n"
    return tsv, extra, {"tables": tables}


def cmd_evaluate(args: argparse.Namespace) -> tuple[str, dict[str, str], dict]:
    if len(args.gold) != len(args.pred):
        raise UsageError("--gold and --pred must be given the same number of times")
    pairs = [(read_gold(g), read_segment_labels(p)) for g, p in zip(args.gold, args.pred)]
    for (g, p), gp, pp in zip(pairs, args.gold, args.pred):
        if g.size != p.size:
            raise UsageError(f"{gp} has {g.size} observations but {pp} covers {p.size}")
    doc = summarize(pairs)
    doc["inputs"] = [{"gold": g, "pred": p} for g, p in zip(args.gold, args.pred)]
    return json.dumps(doc, indent=2) + "\n", {}, {}


COMMANDS = {
    "fit": cmd_fit,
    "calibrate": cmd_calibrate,
    "segment": cmd_segment,
    "simulate": cmd_simulate,
    "study": cmd_study,
    "evaluate": cmd_evaluate,
}

_INPUT_ATTRS = ("input", "model", "resample", "gold", "pred")


def _input_digests(args: argparse.Namespace) -> dict[str, str]:
    out = {}
    for attr in _INPUT_ATTRS:
        val = getattr(args, attr, None)
        for path in val if isinstance(val, list) else [val]:
            if path:
                out[path] = sha256_file(path)
    return out


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _run(args: argparse.Namespace, argv: Sequence[str]) -> int:
    t0 = time.perf_counter()
    inputs = _input_digests(args)
    main_text, extra, report = COMMANDS[args.command](args)

    outputs = {}
    if args.out:
        _write(args.out, main_text)
        outputs[args.out] = sha256_file(args.out)
    else:
        sys.stdout.write(main_text)
    for path, text in extra.items():
        _write(path, text)
        outputs[path] = sha256_file(path)

    config = {k: (str(v) if isinstance(v, Label) else v) for k, v in vars(args).items()}
    manifest = {
        "tool": "cnnloh",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "cwd": os.getcwd(),
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": inputs,
        "outputs": outputs,
        "report": report,
        "runtime_s": round(time.perf_counter() - t0, 6),
    }
    text = json.dumps(manifest, indent=2, default=str) + "\n"
    manifest_path = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if manifest_path:
        _write(manifest_path, text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def _rerun(path: str) -> int:
    try:
        manifest = json.loads(Path(path).read_text(encoding="utf-8"))
        argv, cwd, expected = manifest["argv"], manifest["cwd"], manifest["outputs"]
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"{path}: not a run manifest ({exc})") from exc
    if not expected:
        raise UsageError("manifest records no output files to verify (the run wrote to stdout)")
    here = os.getcwd()
    os.chdir(cwd)
    try:
        # keep the original manifest untouched while replaying
        argv = [a for a in argv]
        if "--manifest" in argv:
            i = argv.index("--manifest")
            argv[i + 1] = os.devnull
        else:
            argv += ["--manifest", os.devnull]
        status = main(argv)
        if status != EXIT_OK:
            return status
        bad = [p for p, digest in expected.items() if sha256_file(p) != digest]
    finally:
        os.chdir(here)
    for p in bad:
        sys.stderr.write(f"cnnloh: output differs from manifest: {p}\n")
    if not bad:
        sys.stderr.write(f"cnnloh: {len(expected)} output(s) reproduced byte-identically\n")
    return EXIT_COMPUTE if bad else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        if args.command == "rerun":
            return _rerun(args.manifest)
        return _run(args, argv)
    except (UsageError, InputError, ModelError, OSError) as exc:
        sys.stderr.write(f"cnnloh: error: {exc}\n")
        return EXIT_USAGE
    except (EstimationError, RuntimeError, ValueError) as exc:
        sys.stderr.write(f"cnnloh: computation failed: {exc}\n")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
