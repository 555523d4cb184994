"""Command line interface.

Subcommands:

  simulate     run the configured sweep and write the results CSV
  channel      synthesize one channel trace and dump index,re,im,envelope
  turbo-bench  turbo codec BER versus BSC crossover probability
  report       scheme-comparison table from one or more results CSVs

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channel import doppler_bounds, draw_components, envelope, synthesize_trace
from .config import ConfigError, load_config, merge_options
from .harness import (
    emit_comparison,
    experiment_config_from_options,
    read_results_csv,
    run_sweep,
)
from .rng import substream
from .turbo import RscSpec, TurboConfig, bits_to_llr, bsc_flip, turbo_decode, turbo_encode

__all__ = ["main", "build_parser"]


class _CliParser(argparse.ArgumentParser):
    """argparse that reports usage problems as configuration errors."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _CliParser(prog="v2vkeygen",
                        description="V2V physical-layer secret key generation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run sessions over the configured grid")
    sim.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    sim.add_argument("--seed", type=int, default=None, help="master seed override")
    sim.add_argument("--trials", type=int, default=None, help="trials per grid point")
    sim.add_argument("--scheme", choices=["indexing", "turbo", "both"], default=None)
    sim.add_argument("--out", type=Path, default=Path("results.csv"), help="output CSV path")
    sim.add_argument("--plot", type=Path, default=None, metavar="PATH.svg",
                     help="optional BMR/KGR plot (best effort)")

    chan = sub.add_parser("channel", help="emit one synthetic channel trace as CSV")
    chan.add_argument("--config", type=Path, default=None)
    chan.add_argument("--seed", type=int, default=None)
    chan.add_argument("--samples", type=int, default=None, help="trace length override")
    chan.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")

    bench = sub.add_parser("turbo-bench", help="BER vs BSC crossover for the turbo codec")
    bench.add_argument("--p-grid", type=str, default="0.01,0.02,0.05,0.08,0.1",
                       help="comma separated crossover probabilities")
    bench.add_argument("--block-len", type=int, default=512)
    bench.add_argument("--iterations", type=int, default=8)
    bench.add_argument("--blocks", type=int, default=50, help="blocks per grid point")
    bench.add_argument("--seed", type=int, default=1)
    bench.add_argument("--out", type=Path, default=None, help="CSV path (default stdout)")

    rep = sub.add_parser("report", help="scheme comparison table from results CSVs")
    rep.add_argument("csv", type=Path, nargs="+", help="results CSV file(s)")
    rep.add_argument("--out", type=Path, default=None, help="write the table as CSV here")
    return parser


def _cmd_simulate(args) -> int:
    options = load_config(args.config)
    options = merge_options(options, **{
        "run.master_seed": args.seed,
        "run.trials": args.trials,
        "run.scheme": args.scheme,
    })
    cfg = experiment_config_from_options(options)
    run_sweep(cfg, options["sweep.sigma2"], options["sweep.key_len"],
              args.out, plot_path=args.plot)
    print(f"wrote {args.out}")
    return 0


def _cmd_channel(args) -> int:
    options = load_config(args.config)
    if args.seed is not None:
        options["run.master_seed"] = args.seed
    if args.samples is not None:
        options["channel.n_samples"] = args.samples
    cfg = experiment_config_from_options(options)
    params = cfg.channel
    bounds = doppler_bounds(params)
    comps = draw_components(params, substream(cfg.master_seed, 0, "channel"))
    trace = synthesize_trace(comps, bounds.f_p, params.n_samples,
                             params=params, seed=cfg.master_seed)
    env = envelope(trace)
    lines = ["index,re,im,envelope"]
    for i, (g, e) in enumerate(zip(trace.samples, env)):
        lines.append(f"{i},{g.real:.10g},{g.imag:.10g},{e:.10g}")
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def _cmd_turbo_bench(args) -> int:
    try:
        p_grid = [float(p) for p in args.p_grid.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad --p-grid: {exc}") from exc
    if not p_grid or not all(0 < p < 0.5 for p in p_grid):
        raise ConfigError("--p-grid values must lie in (0, 0.5)")
    if args.block_len < 3 or args.iterations < 1 or args.blocks < 1:
        raise ConfigError("--block-len, --iterations and --blocks must be positive")

    cfg = TurboConfig(rsc=RscSpec(), block_len=args.block_len, iterations=args.iterations)
    lines = ["p,blocks,bit_errors,ber,block_failures,converged_fraction"]
    for p in p_grid:
        rng = substream(args.seed, "turbo-bench", f"{p:.6g}")
        bit_errors = 0
        block_failures = 0
        converged = 0
        total = 0
        for _ in range(args.blocks):
            bits = rng.integers(0, 2, cfg.block_len, dtype=np.uint8)
            cw = turbo_encode(cfg, bits)
            result = turbo_decode(
                cfg,
                bits_to_llr(bsc_flip(cw.systematic, p, rng), p),
                bits_to_llr(bsc_flip(cw.parity1, p, rng), p),
                bits_to_llr(bsc_flip(cw.parity2, p, rng), p),
                tail_sys_llr=bits_to_llr(bsc_flip(cw.tail[:cfg.rsc.memory], p, rng), p),
                tail_parity_llr=bits_to_llr(bsc_flip(cw.tail[cfg.rsc.memory:], p, rng), p),
            )
            errors = int(np.sum(result.bits != bits))
            bit_errors += errors
            block_failures += errors > 0
            converged += result.converged
            total += cfg.block_len
        lines.append(f"{p:.6g},{args.blocks},{bit_errors},{bit_errors / total:.8g},"
                     f"{block_failures},{converged / args.blocks:.4g}")
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def _cmd_report(args) -> int:
    rows = []
    for path in args.csv:
        rows.extend(read_results_csv(path))
    try:
        comparison = emit_comparison(rows)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(comparison.text)
    if args.out is not None:
        header = list(comparison.rows[0].keys())
        lines = [",".join(header)]
        for row in comparison.rows:
            lines.append(",".join(f"{row[c]:.8g}" if isinstance(row[c], float) else str(row[c])
                                  for c in header))
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "channel": _cmd_channel,
    "turbo-bench": _cmd_turbo_bench,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
