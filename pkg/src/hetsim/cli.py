"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 config error, 3 runtime or
convergence failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .access_game import ConvergenceError
from .channel_alloc import ChannelPool, read_events, replay, write_trace
from .config import ConfigError, ScenarioConfig, load_config_file
from .output import OutputError, cdf_csv, grid_csv, heatmap_svg, sweep_csv, write_text
from .scenario import GridSpec, coverage_map

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("hetsim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _grid_size(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be positive")
    return nx, ny


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hetsim", description="Femtocell/macrocell HetNet simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed=False, workers=False):
        p.add_argument("--config", type=Path, help="key = value scenario file")
        if seed:
            p.add_argument("--seed", type=int, help="overrides the config seed")
        if workers:
            p.add_argument("--workers", type=_positive_int, default=1,
                           help="worker processes; output does not depend on it")

    p = sub.add_parser("map", help="coverage map around the FBS")
    common(p)
    femto = p.add_mutually_exclusive_group()
    femto.add_argument("--with-femtocell", dest="femtocell", action="store_true", default=None)
    femto.add_argument("--without-femtocell", dest="femtocell", action="store_false")
    p.add_argument("--grid", type=_grid_size, default=(100, 100), metavar="NxM")
    p.add_argument("--out", type=Path, required=True,
                   help="grid CSV; heatmaps go next to it as <stem>_loss.svg and <stem>_rp.svg")

    p = sub.add_parser("sweep", help="Monte Carlo sweep of one parameter")
    common(p, seed=True, workers=True)
    p.add_argument("--variable", choices=ex.SWEEP_VARIABLES, required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=_positive_int, default=10)
    p.add_argument("--trials", type=_positive_int, default=ex.DEFAULT_TRIALS)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("cdf", help="capacity CDFs at equilibrium")
    common(p, seed=True, workers=True)
    p.add_argument("--trials", type=_positive_int, default=ex.DEFAULT_TRIALS)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("ne-check", help="compare the solver with brute force on random games")
    common(p)
    p.add_argument("--max-players", type=_positive_int, default=12)
    p.add_argument("--games", type=_positive_int, default=1000)

    p = sub.add_parser("alloc-trace", help="replay channel requests and releases")
    common(p)
    p.add_argument("--events", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _load(args) -> ScenarioConfig:
    config = load_config_file(args.config) if args.config else ScenarioConfig()
    if getattr(args, "seed", None) is not None:
        config = config.replace(seed=args.seed)
    return config


def cmd_map(args, config: ScenarioConfig) -> int:
    with_femto = config.with_femtocell if args.femtocell is None else args.femtocell
    nx, ny = args.grid
    loss, rp = coverage_map(config, GridSpec.around_fbs(config, nx, ny), with_femto)
    write_text(args.out, grid_csv(loss, rp))
    stem = args.out.with_suffix("")
    write_text(f"{stem}_loss.svg", heatmap_svg(loss))
    write_text(f"{stem}_rp.svg", heatmap_svg(rp))
    return EXIT_OK


def cmd_sweep(args, config: ScenarioConfig) -> int:
    grid = ex.sweep_grid(args.start, args.stop, args.steps)
    records = ex.run_sweep(config, args.variable, grid, args.trials, args.workers)
    write_text(args.out, sweep_csv(records))
    return EXIT_OK


def cmd_cdf(args, config: ScenarioConfig) -> int:
    write_text(args.out, cdf_csv(ex.capacity_cdf(config, args.trials, args.workers)))
    return EXIT_OK


def cmd_ne_check(args, config: ScenarioConfig) -> int:
    if args.max_players > 20:
        raise UsageError("--max-players is limited to 20 (brute force is exponential)")
    games, failures = ex.ne_oracle_check(config, args.games, args.max_players)
    status = "PASS" if not failures else "FAIL"
    print(f"{status}: {games - len(failures)}/{games} equilibria confirmed by brute force "
          f"(P <= {args.max_players})")
    return EXIT_OK if not failures else EXIT_RUNTIME


def cmd_alloc_trace(args, config: ScenarioConfig) -> int:
    try:
        with open(args.events, encoding="utf-8") as fh:
            events = read_events(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {args.events}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise UsageError(f"{args.events}: {exc}") from None
    pool = ChannelPool(config.voice_channels, config.data_channels)
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_trace(replay(pool, events), fh)
    except OSError as exc:
        raise OutputError(f"cannot write {args.out}: {exc.strerror or exc}") from exc
    return EXIT_OK


COMMANDS = {"map": cmd_map, "sweep": cmd_sweep, "cdf": cmd_cdf,
            "ne-check": cmd_ne_check, "alloc-trace": cmd_alloc_trace}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, OutputError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
