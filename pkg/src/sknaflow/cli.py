"""Command-line entry point.

Subcommands: ``run`` (full batch analysis), ``synth`` (synthetic
fixture generation), ``psd`` (band-power report only), ``decompose``
(time-frequency amplitude dump), and ``evaluate`` (metrics from an
existing segment-index CSV). Exit codes: 0 success, 1 computation
error, 2 usage or config error. ``SKNAFLOW_LOG`` selects error, info,
or debug logging.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from .config import load_config
from .errors import ConfigError, SknaflowError, SynthSpecError
from .ingest import write_table
from .pipeline import (
    EVALUATION_COLUMNS,
    EVALUATION_FILE,
    evaluate_segment_rows,
    run_pipeline,
    run_psd_report,
    run_tfs_dump,
)
from .synth import load_synth_spec, write_synth

log = logging.getLogger(__name__)

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
DEFAULT_OUT_DIR = "sknaflow_out"


def _setup_logging():
    raw = os.environ.get("SKNAFLOW_LOG", "info").lower()
    level = LOG_LEVELS.get(raw)
    if level is None:
        level = logging.INFO
    logging.basicConfig(
        stream=sys.stderr,
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if raw not in LOG_LEVELS:
        log.warning("SKNAFLOW_LOG=%r not one of %s; using info",
                    raw, sorted(LOG_LEVELS))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sknaflow",
        description="Skin nerve activity indices from high-sample-rate ECG",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full batch analysis from a config or manifest")
    p_run.add_argument("--config", required=True, help="run config JSON (or a run manifest)")
    p_run.add_argument("--workers", type=int, default=None,
                       help="thread count for the decomposition stage")
    p_run.add_argument("--out", default=DEFAULT_OUT_DIR, help="output directory")

    p_synth = sub.add_parser("synth", help="generate a synthetic recording")
    p_synth.add_argument("--spec", required=True, help="synthetic spec JSON")
    p_synth.add_argument("--out", required=True, help="output directory")

    p_psd = sub.add_parser("psd", help="band-power report only")
    p_psd.add_argument("--config", required=True)
    p_psd.add_argument("--out", default=DEFAULT_OUT_DIR)

    p_dec = sub.add_parser("decompose", help="time-frequency amplitude dump")
    p_dec.add_argument("--config", required=True)
    p_dec.add_argument("--out", default=DEFAULT_OUT_DIR)
    p_dec.add_argument("--channel", default=None, help="channel id (default: first)")

    p_eval = sub.add_parser("evaluate", help="metrics from a segment-index CSV")
    p_eval.add_argument("--indices", required=True, help="segment-index CSV path")
    p_eval.add_argument("--out", default=DEFAULT_OUT_DIR)
    p_eval.add_argument("--icc-form", default="two_way_random_single",
                        choices=["two_way_random_single", "two_way_mixed_single"])
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.workers is not None and args.workers < 1:
        raise ConfigError("cli.run", f"--workers must be >= 1, got {args.workers}")
    paths = run_pipeline(config, args.out, workers=args.workers)
    for name in sorted(paths):
        print(paths[name])
    return 0


def _cmd_synth(args) -> int:
    spec = load_synth_spec(args.spec)
    wav_path, ann_path = write_synth(spec, args.out)
    print(wav_path)
    print(ann_path)
    return 0


def _cmd_psd(args) -> int:
    config = load_config(args.config)
    paths = run_psd_report(config, args.out)
    print(paths["band_power"])
    return 0


def _cmd_decompose(args) -> int:
    config = load_config(args.config)
    paths = run_tfs_dump(config, args.out, channel=args.channel)
    print(paths["tfs"])
    return 0


def _cmd_evaluate(args) -> int:
    if not os.path.exists(args.indices):
        raise ConfigError("cli.evaluate", f"segment-index CSV not found: {args.indices}")
    with open(args.indices, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ConfigError("cli.evaluate", f"{args.indices} has no data rows")
    out_rows = evaluate_segment_rows(rows, args.icc_form)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, EVALUATION_FILE)
    write_table(out_rows, path, columns=EVALUATION_COLUMNS)
    print(path)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "synth": _cmd_synth,
    "psd": _cmd_psd,
    "decompose": _cmd_decompose,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, SynthSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SknaflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
