"""Command-line entry point: ``tfwarp <subcommand> [--config ...]``.

Exit status is 0 when every checked claim holds, 1 when a claim is
violated and 2 for configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiments import RUNNERS, assert_preset_fidelity, load_config
from .warping import ConfigurationError

EXIT_PASS, EXIT_VIOLATED, EXIT_CONFIG = 0, 1, 2

# --trials is routed to the count that dominates each runner's statistics
_TRIALS_FIELD = {
    "oobe": "oobe_symbols",
    "ser": "ser_symbols",
    "papr": "papr_frames",
    "validate": "validate_frames",
}

log = logging.getLogger("tfwarp")


def _snr_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad SNR list {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty SNR list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tfwarp", description="Warped multicarrier waveform experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "oobe": "PSD and integrated out-of-band emission, warped vs baseline (--trials: symbols per stream)",
        "ser": "SER vs Es/N0 under adjacent-channel interference (--trials: symbols per SNR point)",
        "papr": "PAPR CCDF of both arms (--trials: frames per arm)",
        "solve-alphas": "solve per-subcarrier roll-off and write (n, alpha_n, achieved_ratio)",
        "grid-export": "write the discrete warp grid as (q, w_of_q, wdot_of_q)",
        "validate": "run the invariant suite (--trials: random frames per check)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", help="INI experiment file")
        p.add_argument("--seed", type=int, help="base seed (trial seeds are derived from it)")
        p.add_argument("--out", help="output directory for CSV files")
        p.add_argument("--trials", type=int, help="statistics count, see the subcommand help")
        p.add_argument("--snr", type=_snr_list, help="comma-separated Es/N0 list in dB (ser only)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"seed": args.seed, "out_dir": args.out, "snr_db": args.snr}
    if args.trials is not None:
        field = _TRIALS_FIELD.get(args.command)
        if field is None:
            log.warning("--trials has no effect on %s", args.command)
        else:
            overrides[field] = args.trials
    try:
        assert_preset_fidelity()
        config = load_config(args.config, **overrides)
        log.info("running %s with preset %s against %s", args.command, config.preset.name,
                 config.baseline.name)
        report = RUNNERS[args.command](config)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(report.summary())
    return EXIT_PASS if report.passed else EXIT_VIOLATED


if __name__ == "__main__":
    sys.exit(main())
