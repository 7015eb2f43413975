"""Command-line entry points.

Subcommands:
  run           simulate the configured concatenation case and write outputs
  concat-study  run every concatenation case on shared cluster realizations
  detect        tabulate false-alarm and detection probabilities over SNR
  rcs-fit       fit a dB-domain normal model to measured RCS samples

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 unsupported feature.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .errors import ConfigError, NumericError, UnsupportedFeatureError
from .metrics import detection_table
from .rcs import fit_lognormal_db


def _add_common(parser: argparse.ArgumentParser, need_config: bool) -> None:
    parser.add_argument(
        "--config", required=need_config, help="path to the run configuration file"
    )
    parser.add_argument("--seed", type=int, help="override master_seed")
    parser.add_argument("--drops", type=int, help="override drop count")
    parser.add_argument("--out", help="output directory (created if missing)")
    parser.add_argument(
        "--workers", type=int, default=1, help="parallel drop workers (default 1)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isacsim",
        description="Geometry-based stochastic sensing channel simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate the configured case")
    _add_common(p_run, need_config=True)

    p_study = sub.add_parser(
        "concat-study", help="compare all concatenation cases drop by drop"
    )
    _add_common(p_study, need_config=True)

    p_det = sub.add_parser(
        "detect", help="threshold detection table over an SNR sweep"
    )
    p_det.add_argument(
        "--pfa", default="1e-2,1e-3,1e-4",
        help="comma-separated false-alarm probabilities (default 1e-2,1e-3,1e-4)",
    )
    p_det.add_argument("--snr-min", type=float, default=-5.0, help="sweep start, dB")
    p_det.add_argument("--snr-max", type=float, default=20.0, help="sweep end, dB")
    p_det.add_argument("--snr-step", type=float, default=1.0, help="sweep step, dB")
    p_det.add_argument(
        "--sigma", type=float, default=1.0, help="noise standard deviation"
    )
    p_det.add_argument("--out", help="write detection.txt here instead of stdout")

    p_fit = sub.add_parser(
        "rcs-fit", help="fit dB-domain mean/std to RCS samples (square meters)"
    )
    p_fit.add_argument(
        "samples", help="text file with one RCS sample per line, in square meters"
    )
    p_fit.add_argument("--out", help="write rcs_fit.txt here instead of stdout")

    return parser


def _load_run_config(args):
    from .config import load_config

    try:
        cfg = load_config(args.config)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc}") from None
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be >= 0, got {args.seed}")
        cfg.master_seed = args.seed
    if args.drops is not None:
        if args.drops < 1:
            raise ConfigError(f"--drops must be >= 1, got {args.drops}")
        cfg.drops = args.drops
    return cfg


def _cmd_run(args) -> int:
    from .runner import run

    manifest = run(_load_run_config(args), out_dir=args.out, workers=args.workers)
    print(f"wrote {len(manifest.file_checksums) + 1} files to {manifest.out_dir}")
    return 0


def _cmd_study(args) -> int:
    from .runner import concat_study

    manifest = concat_study(
        _load_run_config(args), out_dir=args.out, workers=args.workers
    )
    print(f"wrote {len(manifest.file_checksums) + 1} files to {manifest.out_dir}")
    return 0


def _parse_pfa_list(text: str):
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            v = float(part)
        except ValueError:
            raise ConfigError(f"--pfa entry {part!r} is not a number") from None
        values.append(v)
    if not values:
        raise ConfigError("--pfa needs at least one value")
    return values


def _cmd_detect(args) -> int:
    pfa_values = _parse_pfa_list(args.pfa)
    if args.snr_step <= 0:
        raise ConfigError(f"--snr-step must be positive, got {args.snr_step}")
    if args.snr_max < args.snr_min:
        raise ConfigError("--snr-max must be >= --snr-min")
    n = int(round((args.snr_max - args.snr_min) / args.snr_step)) + 1
    snr_values = [args.snr_min + i * args.snr_step for i in range(n)]
    rows = detection_table(pfa_values, snr_values, noise_std=args.sigma)
    lines = ["# snr_db pfa pd"]
    lines += ["%.6f %.6e %.12e" % row for row in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "detection.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_rcs_fit(args) -> int:
    try:
        with open(args.samples, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.samples}: {exc}") from None
    samples = []
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            samples.append(float(line))
        except ValueError:
            raise ConfigError(
                f"{args.samples}:{ln}: expected a number, got {line!r}"
            ) from None
    mean_db, std_db = fit_lognormal_db(samples)
    text = "mean_db = %.6f\nstd_db = %.6f\nsamples = %d\n" % (
        mean_db, std_db, len(samples)
    )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "rcs_fit.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "concat-study": _cmd_study,
    "detect": _cmd_detect,
    "rcs-fit": _cmd_rcs_fit,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except UnsupportedFeatureError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
