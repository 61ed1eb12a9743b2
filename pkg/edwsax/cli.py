#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Script: cli.py

Main purpose:
- Command-line front end for edwSAX:
  - train   : fit a model on a UCR split (or plain series file) and write it
  - encode  : series -> symbol words, one per input line
  - decode  : words -> reconstructed series of length n
  - dist    : MINDIST / Euclidean / TLB for a pair of series or words
  - bench   : run the TLB and/or reconstruction experiments over datasets

How to run:
  python cli.py train --input data/CBF/CBF_TRAIN.tsv -a 10 --output cbf.model
  python cli.py encode --model cbf.model --input series.txt
  python cli.py decode --model cbf.model --input words.txt -n 128
  python cli.py dist --model cbf.model --input pair.txt --measure all
  python cli.py bench --input data/ --output out/ --experiment both --alphabets 5,10

Config (optional, --config config.json):
- `logging`: `enabled` / `file` / `append`
- `defaults`: `kernel`, `bandwidth`, `segment_size`, `estimate_on`, `normalize`,
  `seed`, `alphabets`, `max_pairs`, `workers`

Precedence: command-line flag > config `defaults` > built-in defaults.
Relative paths in config are resolved relative to the config file location.

Exit codes: 0 ok, 1 error (message names the file/line/flag), 2 usage error
or a bench run with skipped datasets.
"""

import argparse
import json
import os
import sys
from typing import List, Optional

from bench import (
    ExperimentConfig,
    emit_report,
    discover_datasets,
    load_ucr,
    parse_series_text,
    read_series_lines,
    run_reconstruction_experiment,
    run_tlb_experiment,
    validate_against_manifest,
)
from density import parse_bandwidth_rule, select_kernel
from distance import euclidean, mindist
from edwsax_common import (
    EdwsaxError,
    InvalidAlphabet,
    InvalidParameter,
    ensure_parent,
    get_active_logger,
    log_error,
    log_info,
    log_warning,
    read_json,
    resolve_defaults,
    setup_script_logging,
    write_bytes,
    write_json,
)
from symbolizer import (
    MAX_ALPHABET,
    MIN_ALPHABET,
    WordLengthPolicy,
    encode,
    gaussian_model,
    load_model,
    parse_word,
    reconstruct,
    render_word,
    save_model,
    train,
)
from timeseries import as_series, paa, znormalize

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2


def _alphabet_list(text: str) -> List[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None
    if not vals:
        raise argparse.ArgumentTypeError("alphabet list is empty")
    return vals


def _flag_or_default(value, default):
    return default if value is None else value


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _check_alphabet_flag(flag: str, values: List[int]) -> None:
    for a in values:
        if not MIN_ALPHABET <= a <= MAX_ALPHABET:
            raise InvalidAlphabet(f"{flag}: alphabet size must be in [{MIN_ALPHABET}, {MAX_ALPHABET}], got {a}")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _write_text(path: Optional[str], text: str) -> None:
    if not path or path == "-":
        sys.stdout.write(text)
        return
    ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _word_policy(args, defaults: dict, model=None) -> WordLengthPolicy:
    if getattr(args, "word_length", None) is not None:
        return WordLengthPolicy(word_length=args.word_length)
    if getattr(args, "segment_size", None) is not None:
        return WordLengthPolicy(segment_size=args.segment_size)
    if model is not None and model.word_policy:
        return WordLengthPolicy.parse(model.word_policy)
    return WordLengthPolicy(segment_size=defaults["segment_size"])


def _load_series(path: str, input_format: str):
    if input_format == "ucr":
        return load_ucr(path).train_series
    if path == "-":
        return parse_series_text(sys.stdin.read(), path="<stdin>")
    return read_series_lines(path)


def cmd_train(args, defaults: dict) -> int:
    kernel = args.kernel or defaults["kernel"]
    bandwidth = args.bandwidth or defaults["bandwidth"]
    estimate_on = args.estimate_on or defaults["estimate_on"]
    _check_alphabet_flag("-a/--alphabet", [args.alphabet])
    policy = _word_policy(args, defaults)
    select_kernel(kernel)
    parse_bandwidth_rule(bandwidth)

    if args.method == "sax":
        model = gaussian_model(args.alphabet, word_policy=policy.name)
    else:
        series = _load_series(args.input, args.input_format)
        log_info(f"[train] {len(series)} series from {args.input}")
        model = train(series, args.alphabet, policy, kernel, bandwidth, estimate_on)

    save_model(args.output, model)
    lines = [
        f"method: {model.method}",
        f"alphabet_size: {model.alphabet_size}",
        f"breakpoints: {' '.join(_fmt(v) for v in model.breakpoints.interior)}",
        f"centroids: {' '.join(_fmt(v) for v in model.centroids.gammas)}",
    ]
    if model.method == "edwsax":
        lines.append(f"kernel: {model.kernel} bandwidth: {_fmt(model.bandwidth)} rule: {model.bandwidth_rule}")
    sys.stdout.write("\n".join(lines) + "\n")
    log_info(f"[train] model written: {args.output}")
    return EXIT_OK


def cmd_encode(args, defaults: dict) -> int:
    model = load_model(args.model)
    policy = _word_policy(args, defaults, model)
    series = _load_series(args.input, args.input_format)
    normalize = args.normalize != "none"
    words = [render_word(encode(model, s, policy, normalize=normalize)) for s in series]
    _write_text(args.output, "".join(w + "\n" for w in words))
    return EXIT_OK


def cmd_decode(args, defaults: dict) -> int:
    model = load_model(args.model)
    text = _read_text(args.input)
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        word = parse_word(line, model.alphabet_size, line=lineno, path=args.input)
        rec = reconstruct(model, word, args.length)
        out.append(" ".join(_fmt(v) for v in rec.values) + "\n")
    _write_text(args.output, "".join(out))
    return EXIT_OK


def cmd_dist(args, defaults: dict) -> int:
    model = load_model(args.model)
    lines = [ln for ln in _read_text(args.input).splitlines() if ln.strip()]
    if len(lines) != 2:
        raise InvalidParameter(f"--input {args.input}: expected exactly two non-empty lines, got {len(lines)}")

    results = []
    if args.kind == "words":
        if args.measure in ("ed", "tlb"):
            raise InvalidParameter(f"--measure {args.measure} needs --kind series")
        if not args.length:
            raise InvalidParameter("--kind words needs -n/--length")
        q = parse_word(lines[0], model.alphabet_size, line=1, path=args.input)
        c = parse_word(lines[1], model.alphabet_size, line=2, path=args.input)
        results.append(("mindist", mindist(q, c, model.lookup, args.length)))
    else:
        pair = parse_series_text("\n".join(lines), path=args.input)
        normalize = args.normalize != "none"
        q, c = [znormalize(s) if normalize else as_series(s) for s in pair]
        policy = _word_policy(args, defaults, model)
        w = policy.resolve(len(q))
        ed = euclidean(q, c)
        md = mindist(model.symbolize(paa(q, w)), model.symbolize(paa(c, w)), model.lookup, len(q))
        if args.measure in ("mindist", "all"):
            results.append(("mindist", md))
        if args.measure in ("ed", "all"):
            results.append(("ed", ed))
        if args.measure in ("tlb", "all"):
            results.append(("tlb", None if ed == 0.0 else md / ed))

    _write_text(None, "".join(f"{k} {'undefined' if v is None else _fmt(v)}\n" for k, v in results))
    return EXIT_OK


def cmd_bench(args, defaults: dict) -> int:
    cfg = ExperimentConfig(
        kernel=args.kernel or defaults["kernel"],
        bandwidth=args.bandwidth or defaults["bandwidth"],
        segment_size=_flag_or_default(args.segment_size, defaults["segment_size"]),
        estimate_on=args.estimate_on or defaults["estimate_on"],
        normalize=args.normalize or defaults["normalize"],
        seed=_flag_or_default(args.seed, defaults["seed"]),
        max_pairs=_flag_or_default(args.max_pairs, defaults["max_pairs"]),
        workers=_flag_or_default(args.workers, defaults["workers"]),
        progress=args.progress,
    )
    select_kernel(cfg.kernel)
    parse_bandwidth_rule(cfg.bandwidth)
    alphabets = args.alphabets or defaults["alphabets"]
    _check_alphabet_flag("--alphabets", alphabets)
    logger = get_active_logger()
    if logger:
        logger.info(f"[bench] config: {json.dumps(dict(cfg.echo(), alphabet_sizes=alphabets), sort_keys=True)}")

    datasets = []
    load_failures = []
    for path in discover_datasets(args.input):
        try:
            ds = load_ucr(path)
        except (EdwsaxError, OSError) as exc:
            log_warning(f"[bench] {path}: cannot load ({exc})")
            load_failures.append({"dataset": os.path.basename(os.path.normpath(path)), "error": str(exc)})
            continue
        validate_against_manifest(ds)
        datasets.append(ds)
    if not datasets:
        log_error(f"[bench] no loadable datasets under {args.input}")
        return EXIT_ERROR

    experiments = ["tlb", "reconstruction"] if args.experiment == "both" else [args.experiment]
    suffix = "csv" if args.format == "csv" else "dat"
    partial = False
    for name in experiments:
        runner = run_tlb_experiment if name == "tlb" else run_reconstruction_experiment
        report = runner(datasets, alphabets, cfg)
        report.skipped_datasets = load_failures + report.skipped_datasets
        out_path = os.path.join(args.output, f"{name}_report.{suffix}")
        write_bytes(out_path, emit_report(report, args.format))
        write_json(os.path.join(args.output, f"{name}_report.json"), report.echo())
        log_info(f"[bench] {name}: {len(report.rows)} rows -> {out_path}")
        partial = partial or report.partial
    return EXIT_PARTIAL if partial else EXIT_OK


def _add_policy_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("-w", "--word-length", type=int, default=None, help="Fixed word length w")
    g.add_argument("--segment-size", type=int, default=None, help="PAA segment size s (w = n // s)")


def _add_density_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", default=None, help="uniform|triangular|epanechnikov|biweight|cosine|normal|laplace")
    p.add_argument("--bandwidth", default=None, help="silverman|scott|isj|fixed:<h>")
    p.add_argument("--estimate-on", choices=["raw", "paa"], default=None, help="Fit the KDE on raw points or PAA segments")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edwsax", description="KDE-driven symbolic time series representation")
    ap.add_argument("--config", default=None, help="Optional config.json")
    ap.add_argument("--log-file", default=None, help="Optional log file path (overrides config logging.file)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="Train a model")
    p.add_argument("--input", default=None, help="Training data (UCR split file/directory or plain series file)")
    p.add_argument("--input-format", choices=["ucr", "plain"], default="ucr")
    p.add_argument("--output", required=True, help="Model output path")
    p.add_argument("-a", "--alphabet", type=int, required=True, help="Alphabet size (2..256)")
    p.add_argument("--method", choices=["edwsax", "sax"], default="edwsax")
    _add_policy_flags(p)
    _add_density_flags(p)

    p = sub.add_parser("encode", help="Encode series into symbol words")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="Series file, '-' for stdin")
    p.add_argument("--input-format", choices=["ucr", "plain"], default="plain")
    p.add_argument("--output", default=None, help="Output path (default stdout)")
    p.add_argument("--normalize", choices=["series", "none"], default="series")
    _add_policy_flags(p)

    p = sub.add_parser("decode", help="Reconstruct series from symbol words")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="Word file, '-' for stdin")
    p.add_argument("-n", "--length", type=int, required=True, help="Target series length")
    p.add_argument("--output", default=None, help="Output path (default stdout)")

    p = sub.add_parser("dist", help="MINDIST / Euclidean / TLB of a pair")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="File with two lines: two series or two words")
    p.add_argument("--kind", choices=["series", "words"], default="series")
    p.add_argument("--measure", choices=["mindist", "ed", "tlb", "all"], default="all")
    p.add_argument("-n", "--length", type=int, default=None, help="Series length behind two words")
    p.add_argument("--normalize", choices=["series", "none"], default="series")
    _add_policy_flags(p)

    p = sub.add_parser("bench", help="Run the evaluation experiments")
    p.add_argument("--input", required=True, help="Dataset root (or one dataset directory)")
    p.add_argument("--output", required=True, help="Report output directory")
    p.add_argument("--experiment", choices=["tlb", "reconstruction", "both"], default="both")
    p.add_argument("--alphabets", type=_alphabet_list, default=None, help="e.g. 5,10,20")
    p.add_argument("--format", choices=["csv", "plot"], default="csv")
    p.add_argument("--segment-size", type=int, default=None)
    p.add_argument("--normalize", choices=["series", "dataset"], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-pairs", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--progress", action="store_true", help="Show a progress bar on stderr")
    _add_density_flags(p)
    return ap


COMMANDS = {
    "train": cmd_train,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "dist": cmd_dist,
    "bench": cmd_bench,
}


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)

    if args.command == "train" and args.method == "edwsax" and not args.input:
        ap.error("train: --input is required for --method edwsax")

    config = {}
    if args.config:
        try:
            config = read_json(args.config)
        except (OSError, ValueError) as exc:
            print(f"ERROR: --config {args.config}: {exc}", file=sys.stderr)
            return EXIT_ERROR
    setup_script_logging(config, args.config, args.command, override_file=args.log_file)
    defaults = resolve_defaults(config)

    try:
        return COMMANDS[args.command](args, defaults)
    except EdwsaxError as exc:
        log_error(f"[{args.command}] {type(exc).__name__}: {exc}")
        return EXIT_ERROR
    except OSError as exc:
        name = getattr(exc, "filename", None)
        log_error(f"[{args.command}] {exc.strerror or exc}{f': {name}' if name else ''}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
