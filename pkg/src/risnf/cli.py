"""Command-line front end: ``risnf <experiment> --config <path> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

import argparse
import logging
import os
import sys

from .config import Experiment, load_config
from .errors import ConfigError, RisnfError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

_FILE_STEM = {Experiment.EIGEN_SPECTRUM: "eigen_spectrum",
              Experiment.RANK_VS_SPACING: "rank_vs_spacing",
              Experiment.NMSE_VS_SNR: "nmse_vs_snr",
              Experiment.NMSE_VS_SPACING: "nmse_vs_spacing"}


def build_parser():
    p = argparse.ArgumentParser(
        prog="risnf",
        description="Reproduce RIS near-field channel estimation experiments.")
    p.add_argument("experiment",
                   help="EigenSpectrum, RankVsSpacing, NmseVsSnr or NmseVsSpacing "
                        "(dashed aliases such as nmse-vs-snr also work)")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--plot", action="store_true", help="also write an SVG chart")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per cluster seed")
    p.add_argument("--seed", type=int, help="first cluster seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="risnf: %(levelname)s: %(message)s", stream=sys.stderr)
    log = logging.getLogger("risnf")

    try:
        config = load_config(args.config, args.experiment)
        config = config.with_overrides(trials=args.trials, seed=args.seed,
                                       output_dir=args.out)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
    except ConfigError as exc:
        print(f"risnf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"risnf: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    # imported late so that config errors do not pay for numpy/scipy start-up
    from .experiments import MatrixStore, run_experiment

    out = config.output_dir
    cache_dir = config.cache_dir or os.path.join(out, "cache")
    try:
        os.makedirs(out, exist_ok=True)
        store = MatrixStore(cache_dir)
        table = run_experiment(config, threads=args.threads, store=store)
        stem = _FILE_STEM[config.experiment]
        csv_path = os.path.join(out, f"{stem}.csv")
        table.write_csv(csv_path)
        log.info("wrote %s", csv_path)
        if args.plot:
            from .plotting import plot_csv
            svg = plot_csv(csv_path, os.path.join(out, f"{stem}.svg"))
            log.info("wrote %s", svg)
    except OSError as exc:
        print(f"risnf: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"risnf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RisnfError, ArithmeticError, ValueError) as exc:
        print(f"risnf: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
