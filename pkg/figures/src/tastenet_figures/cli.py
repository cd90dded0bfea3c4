"""render_figure: turn tastenet CSV exports into figure images.

Kinds: plane, performance, network, homophily, rho-sweep, per-item.
Network kinds take the edge list via --in and node attributes via --nodes.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import render

log = logging.getLogger(__name__)

KINDS = ("plane", "performance", "network", "homophily", "rho-sweep", "per-item")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="render_figure", description=__doc__)
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--in", dest="in_path", required=True, help="input CSV (edge list for network kinds)")
    parser.add_argument("--nodes", help="node attribute CSV (network kinds)")
    parser.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    parser.add_argument("--rho", type=float, default=1.0, help="rho slice for the performance figure")
    parser.add_argument("--target-group", default="all", help="target-group slice for performance figures")
    parser.add_argument("--variant", default="influence", choices=["influence", "first-calls"])
    parser.add_argument("--min-weight", type=float, default=0.05, help="display cutoff for network edges")
    parser.add_argument("--size-by", default="auto", help="node-size column for network kinds")
    parser.add_argument("--layout-seed", type=int, default=7)
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def make_figure(args):
    table = render.load_table(args.in_path)
    if args.kind == "plane":
        return render.render_plane(table, path=args.in_path)
    if args.kind == "performance":
        return render.render_performance(table, path=args.in_path, rho=args.rho, target_group=args.target_group)
    if args.kind == "rho-sweep":
        return render.render_rho_sweep(table, path=args.in_path, target_group=args.target_group)
    if args.kind == "homophily":
        return render.render_homophily(table, path=args.in_path, variant=args.variant)
    # network and per-item share the node-link renderer
    if not args.nodes:
        raise render.SchemaError(f"--kind {args.kind} needs --nodes with the node attribute CSV")
    nodes = render.load_table(args.nodes)
    return render.render_network(
        table,
        nodes,
        edges_path=args.in_path,
        nodes_path=args.nodes,
        min_weight=args.min_weight,
        size_by=args.size_by,
        layout_seed=args.layout_seed,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if not args.verbose else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        fig = make_figure(args)
    except render.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    fig.savefig(args.out, dpi=args.dpi)
    log.info("wrote %s", args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
