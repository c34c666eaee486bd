"""``cordon`` command line: generate, solve, verify, sweep, render, network.

Exit codes: 0 ok, 1 I/O or unreadable input, 2 usage or contract error,
3 infeasible placement, 4 verification found a leak.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ContractViolation, GenerationFailedError, InvalidSpecError, MapFormatError
from .experiments import ConfigError, load_config, records_to_csv, run_experiment, summarize, trend_checks
from .flownet import attach_merged_sink, attach_single_sink, build_base_network, dump_network
from .grid import GenSpec, generate_environment
from .mapio import format_map, read_map, write_map
from .oracle import find_leak
from .planner import (
    parallel_individual_time_bound,
    parallel_individual_time_estimate,
    solve_holistic,
    solve_individual,
)
from .render import render_ascii, render_svg

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_LEAK = 0, 1, 2, 3, 4


class CommandError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _targets(text: str):
    lo, sep, hi = text.partition("-")
    try:
        return (int(lo), int(hi)) if sep else int(lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {text!r}") from None


def _read(path):
    try:
        return read_map(path)
    except (OSError, MapFormatError) as exc:
        raise CommandError(f"cannot read {path}: {exc}", EXIT_IO) from None


def _read_grid(path):
    doc = _read(path)
    if doc.grid is None:
        raise CommandError(f"{path} contains no map", EXIT_IO)
    return doc.grid


def _read_placement(path, grid):
    doc = _read(path)
    if doc.grid is not None and doc.grid.shape != grid.shape:
        raise CommandError(
            f"placement map is {doc.grid.width}x{doc.grid.height}, map is {grid.width}x{grid.height}",
            EXIT_USAGE)
    for cell in doc.robots:
        if not grid.in_bounds(cell):
            raise CommandError(f"robot {cell} outside {grid.width}x{grid.height} map", EXIT_USAGE)
    return doc.robots


def _write(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc}", EXIT_IO) from None


def cmd_generate(args):
    try:
        spec = GenSpec(kind=args.kind, width=args.width, height=args.height, obstacles=args.obstacles,
                       targets=args.targets, block_size=args.block_size, seed=args.seed,
                       margin=args.margin)
        grid = generate_environment(spec)
    except (InvalidSpecError, GenerationFailedError) as exc:
        raise CommandError(str(exc), EXIT_USAGE) from None
    summary = (f"{spec.kind.value} {grid.width}x{grid.height} seed={spec.seed} "
               f"obstacle_cells={int(grid.obstacle_mask.sum())} targets={grid.m}")
    if args.output:
        try:
            write_map(args.output, grid)
        except OSError as exc:
            raise CommandError(f"cannot write {args.output}: {exc}", EXIT_IO) from None
        print(f"wrote {args.output}: {summary}")
    else:
        sys.stdout.write(format_map(grid))
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_solve(args):
    grid = _read_grid(args.map)
    if grid.m < 1:
        raise CommandError("map has no targets", EXIT_USAGE)
    ind = hol = None
    if args.approach in ("individual", "both"):
        ind = solve_individual(grid)
        print(f"individual: robots={ind.count} time={ind.solve_time:.6f}s "
              f"parallel_estimate={parallel_individual_time_estimate(ind):.6f}s "
              f"max_target_time={parallel_individual_time_bound(ind):.6f}s "
              f"feasible={'yes' if ind.feasible else 'no'}")
    if args.approach in ("holistic", "both"):
        hol = solve_holistic(grid)
        print(f"holistic: robots={hol.count} time={hol.solve_time:.6f}s "
              f"feasible={'yes' if hol.feasible else 'no'}")
    if ind and hol:
        savings = ind.count - hol.count if ind.feasible and hol.feasible else "n/a"
        print(f"individual={ind.count} holistic={hol.count} savings={savings}")
    chosen = hol if hol is not None else ind
    if args.output:
        _write(args.output, format_map(grid, chosen.robots))
    infeasible = [p for p in (ind, hol) if p is not None and not p.feasible]
    if infeasible:
        if ind is not None and not ind.feasible:
            bad = [i for i, ok in enumerate(ind.per_target_feasible) if not ok]
            print(f"infeasible: targets {bad} touch the border through unguardable cells", file=sys.stderr)
        else:
            print("infeasible: some target touches the border through unguardable cells", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_verify(args):
    grid = _read_grid(args.map)
    robots = _read_placement(args.placement, grid)
    try:
        path = find_leak(grid, robots)
    except ContractViolation as exc:
        raise CommandError(f"contract error: {exc}", EXIT_USAGE) from None
    if path is None:
        print("SEPARATED")
        return EXIT_OK
    print("LEAK")
    print("path: " + " -> ".join(f"({r},{c})" for r, c in path))
    return EXIT_LEAK


def cmd_sweep(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        raise CommandError(f"{args.config}: {exc}", EXIT_USAGE) from None
    except OSError as exc:
        raise CommandError(f"cannot read {args.config}: {exc}", EXIT_IO) from None
    if os.environ.get("CORDON_SEED"):
        try:
            seed = int(os.environ["CORDON_SEED"])
        except ValueError:
            raise CommandError("CORDON_SEED must be an integer", EXIT_USAGE) from None
        cfg = type(cfg)(**{**cfg.__dict__, "seed": seed})
    if args.unchecked:
        cfg = type(cfg)(**{**cfg.__dict__, "checked": False})
    name = args.name or Path(args.config).stem
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CommandError(f"cannot create {out}: {exc}", EXIT_IO) from None
    records = run_experiment(cfg, jobs=args.jobs)
    _write(out / f"{name}_trials.csv", records_to_csv(records))
    summary = summarize(records)
    _write(out / f"{name}_summary.csv", summary.to_csv())
    report = trend_checks(summary, cfg.sweep)
    _write(out / f"{name}_trends.txt", "\n".join(report.lines()) + "\n")
    print(f"{len(records)} trials -> {out / (name + '_trials.csv')}")
    for line in report.lines():
        print(line)
    return EXIT_OK


def cmd_render(args):
    grid = _read_grid(args.map)
    robots = _read_placement(args.placement, grid) if args.placement else frozenset()
    text = render_ascii(grid, robots) if args.ascii else render_svg(grid, robots, cell=args.cell,
                                                                      title=Path(args.map).name)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_network(args):
    grid = _read_grid(args.map)
    net = build_base_network(grid)
    try:
        if args.target is None:
            net = attach_merged_sink(net, grid)
        else:
            net = attach_single_sink(net, grid, args.target)
    except ContractViolation as exc:
        raise CommandError(str(exc), EXIT_USAGE) from None
    text = dump_network(net)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cordon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cordon {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log generation retries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random environment")
    p.add_argument("--kind", required=True, choices=["open", "closed"])
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--height", type=int, default=100)
    p.add_argument("--obstacles", type=int, default=0,
                   help="rectangles (open) or blocked intersections (closed)")
    p.add_argument("--targets", type=_targets, default=1, help="N or LO-HI")
    p.add_argument("--block-size", type=int, default=3)
    p.add_argument("--margin", type=int, default=1, help="minimum target distance from the edge")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="place robots")
    p.add_argument("map")
    p.add_argument("--approach", choices=["individual", "holistic", "both"], default="both")
    p.add_argument("-o", "--output", help="placement file (holistic robots when --approach both)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check that a placement separates border and targets")
    p.add_argument("map")
    p.add_argument("placement")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name", help="output file prefix (default: config file stem)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--unchecked", action="store_true", help="skip oracle verification")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("render", help="draw a map and placement")
    p.add_argument("map")
    p.add_argument("placement", nargs="?")
    p.add_argument("--ascii", action="store_true")
    p.add_argument("--cell", type=int, default=10, help="SVG cell size in pixels")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("network", help="dump the flow network as an edge list")
    p.add_argument("map")
    p.add_argument("--target", type=int, help="single target id (default: merged sink)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_network)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"cordon {args.command}: {exc}", file=sys.stderr)
        return exc.code
