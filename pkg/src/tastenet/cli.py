"""Command-line entry point.

Subcommands: ingest, synth, predict, evaluate, network, homophily, report.
All outputs are deterministic for a fixed seed (no timestamps), record the
seed and tool version in a comment header or manifest, and never modify
input files. Exit codes: 0 ok, 1 config error, 2 data error, 3 runtime
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._util import meta_comment
from .dataset import RatingMatrix, filter_dataset, load_ratings, save_ratings, z_normalize
from .errors import ConfigError, DataError, TasteNetError
from .evaluation import EvaluationPlan, run_evaluation
from .homophily import build_report, group_baselines
from .network import build_influence_network, build_potential_network, export_network, network_from_json
from .recommender import KnnConfig, form_committee, predict_utility
from .similarity import build_similarity_matrix, correlation_profile, export_similarity_csv
from .synthetic import default_spec, generate_population, parse_spec_file

log = logging.getLogger(__name__)

DEFAULT_K_LIST = "1,3,5,10,15,20,30,50,N-1"
DEFAULT_RHO_LIST = "0,0.5,1,2"
DEFAULT_DISPLAY_CUTOFF = 0.05


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise ConfigError(message)


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ratings", required=True, help="ratings CSV (rater_id,item_id,rating,group)")
    p.add_argument("--min-item-reviews", type=int, default=0, help="drop items with fewer reviews")
    p.add_argument("--min-rater-ratings", type=int, default=0, help="drop raters with fewer ratings")
    p.add_argument("--protect", action="append", default=[], metavar="GROUP", help="group exempt from the rater filter")


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-list", default=DEFAULT_K_LIST, help="comma-separated committee sizes; N-1 allowed")
    p.add_argument("--rho-list", default=DEFAULT_RHO_LIST, help="comma-separated similarity sensitivities")
    p.add_argument("--pool-list", default="all", help="comma-separated adviser pools (all or group labels)")
    p.add_argument("--overlap-threshold", type=int, default=5, help="pairs need overlap strictly above this")


def build_parser() -> _Parser:
    parser = _Parser(prog="tastenet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tastenet {__version__}")
    parser.add_argument("--config", help="JSON file of default option values")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--threads", type=int, default=1, help="worker processes for evaluation repetitions")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("-v", "--verbose", action="count", default=0)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, filter, and summarize a ratings file")
    _add_data_args(p)
    p.add_argument("--save-filtered", metavar="PATH", help="write the filtered dataset")
    p.add_argument("--export-similarity", metavar="PATH", help="write the pairwise similarity CSV")
    p.add_argument("--overlap-threshold", type=int, default=5)

    p = sub.add_parser("synth", help="generate a synthetic population")
    p.add_argument("--spec", help="flat key=value spec file (defaults to the built-in two-group spec)")
    p.add_argument("--out-ratings", default="ratings.csv")
    p.add_argument("--truth", default="truth.csv")
    p.add_argument("--items", type=int, help="override item count of the built-in spec")

    p = sub.add_parser("predict", help="predict utilities with full committee transparency")
    _add_data_args(p)
    p.add_argument("--target", required=True)
    p.add_argument("--item", action="append", required=True, help="item to predict (repeatable)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--pool", default="all")
    p.add_argument("--overlap-threshold", type=int, default=5)
    p.add_argument("--out-file", help="also write the records to this JSON file")

    p = sub.add_parser("evaluate", help="Monte-Carlo pairwise-choice accuracy over a parameter grid")
    _add_data_args(p)
    _add_grid_args(p)
    p.add_argument("--holdout", type=int, default=10, help="held-out items per target")
    p.add_argument("--repetitions", type=int, default=1000)
    p.add_argument("--targets", help="comma-separated target ids (default: every rater)")

    p = sub.add_parser("network", help="advice-network reconstruction")
    net_sub = p.add_subparsers(dest="network_command", required=True)

    np_ = net_sub.add_parser("potential", help="first-call advice network")
    _add_data_args(np_)
    np_.add_argument("--k", type=int, default=5)
    np_.add_argument("--rho", type=float, default=1.0)
    np_.add_argument("--pool", default="all")
    np_.add_argument("--overlap-threshold", type=int, default=5)
    np_.add_argument("--format", choices=["csv", "dot", "json"], default="csv")
    np_.add_argument("--min-weight", type=float, default=None, help="display cutoff (export only)")
    np_.add_argument("--out-file", help="output path (default derived from parameters)")

    ni = net_sub.add_parser("influence", help="realized advice network over items")
    _add_data_args(ni)
    ni.add_argument("--k", type=int, default=5)
    ni.add_argument("--rho", type=float, default=1.0)
    ni.add_argument("--pool", default="all")
    ni.add_argument("--overlap-threshold", type=int, default=5)
    ni.add_argument("--item", help="restrict to one item (per-item influence network)")
    ni.add_argument("--coupled-holdout", action="store_true", help="perturb availability with per-repetition holdouts")
    ni.add_argument("--repetitions", type=int, default=1000, help="repetitions (only used with --coupled-holdout)")
    ni.add_argument("--holdout", type=int, default=10)
    ni.add_argument("--format", choices=["csv", "dot", "json"], default="csv")
    ni.add_argument("--min-weight", type=float, default=None)
    ni.add_argument("--out-file")

    ne = net_sub.add_parser("export", help="convert a JSON network export to another format")
    ne.add_argument("--in", dest="in_path", required=True, help="network JSON produced by potential/influence")
    ne.add_argument("--format", choices=["csv", "dot", "json"], default="csv")
    ne.add_argument("--min-weight", type=float, default=None)
    ne.add_argument("--out-file", required=True)

    p = sub.add_parser("homophily", help="taste homophily across a (k, rho) grid")
    _add_data_args(p)
    _add_grid_args(p)
    p.add_argument("--variant", choices=["influence", "first-calls", "both"], default="both")
    p.add_argument("--coupled-holdout", action="store_true")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--holdout", type=int, default=10)

    p = sub.add_parser("report", help="run the full pipeline and write a manifest of figure inputs")
    _add_data_args(p)
    _add_grid_args(p)
    p.add_argument("--holdout", type=int, default=10)
    p.add_argument("--repetitions", type=int, default=1000)
    p.add_argument("--highlight-k", type=int, default=5, help="(k, rho) cell for the network panels")
    p.add_argument("--highlight-rho", type=float, default=1.0)
    p.add_argument("--item", help="item for the per-item influence panel (default: most rated)")
    p.add_argument("--min-weight", type=float, default=DEFAULT_DISPLAY_CUTOFF)

    return parser


def _walk_parsers(parser: argparse.ArgumentParser):
    """Yield (parser, own_dests) for the parser and every nested subparser."""
    stack = [parser]
    while stack:
        current = stack.pop()
        dests = set()
        for action in current._actions:  # noqa: SLF001 - argparse has no public walk
            if isinstance(action, argparse._SubParsersAction):  # noqa: SLF001
                stack.extend(action.choices.values())
            elif action.dest != "help":
                dests.add(action.dest)
        yield current, dests


def _apply_config_file(parser: _Parser, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {known.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {known.config} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        matched = set()
        # Subparsers parse into a fresh namespace, so defaults must be set on
        # whichever parser actually owns the option.
        for subparser, dests in _walk_parsers(parser):
            overlap = {k: v for k, v in cfg.items() if k in dests}
            if overlap:
                subparser.set_defaults(**overlap)
                matched.update(overlap)
        unknown = set(cfg) - matched
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _load_filtered(args) -> RatingMatrix:
    matrix = load_ratings(args.ratings)
    if args.min_item_reviews or args.min_rater_ratings:
        matrix = filter_dataset(matrix, args.min_item_reviews, args.min_rater_ratings, set(args.protect))
    return matrix


def _parse_k_list(text: str, n_raters: int) -> list[int]:
    ks = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.upper() in {"N-1", "N−1"}:
            ks.append(n_raters - 1)
        else:
            try:
                ks.append(int(tok))
            except ValueError:
                raise ConfigError(f"bad k value: {tok!r}") from None
    if not ks:
        raise ConfigError("empty k list")
    return sorted(set(ks))


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        vals = [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad {what} list: {text!r}") from None
    if not vals:
        raise ConfigError(f"empty {what} list")
    return sorted(set(vals))


def _build_grid(args, data) -> list[KnnConfig]:
    ks = _parse_k_list(args.k_list, data.n_raters)
    rhos = _parse_float_list(args.rho_list, "rho")
    pools = [tok.strip() for tok in str(args.pool_list).split(",") if tok.strip()]
    labels = set(data.group_labels())
    for pool in pools:
        if pool != "all" and pool not in labels:
            raise ConfigError(f"pool {pool!r} is not a group label in the data")
    return [
        KnnConfig(k=k, rho=rho, pool=pool, overlap_threshold=args.overlap_threshold)
        for pool in pools
        for rho in rhos
        for k in ks
    ]


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: list[str], rows, comment: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(comment + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict, seed: int) -> None:
    payload = {"_meta": {"tool": "tastenet", "version": __version__, "seed": seed}, **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    out = _outdir(args)
    matrix = _load_filtered(args)
    summary = matrix.summary()
    summary["source"] = str(args.ratings)
    summary["filters"] = {
        "min_item_reviews": args.min_item_reviews,
        "min_rater_ratings": args.min_rater_ratings,
        "protected_groups": sorted(args.protect),
    }
    _write_json(out / "dataset_summary.json", summary, args.seed)
    if args.save_filtered:
        save_ratings(matrix, out / args.save_filtered, header_comment=meta_comment(seed=args.seed))
    if args.export_similarity:
        normalized = z_normalize(matrix)
        sim = build_similarity_matrix(normalized, args.overlap_threshold)
        export_similarity_csv(sim, out / args.export_similarity, meta_comment(seed=args.seed))
    log.info("ingested %d raters, %d items, %d ratings", matrix.n_raters, matrix.n_items, matrix.n_ratings)
    return 0


def cmd_synth(args) -> int:
    out = _outdir(args)
    if args.spec:
        spec = parse_spec_file(args.spec)
    else:
        spec = default_spec(seed=args.seed, n_items=args.items or 200)
    matrix, truth = generate_population(spec)
    save_ratings(matrix, out / args.out_ratings, header_comment=meta_comment(seed=spec.seed))
    with open(out / args.truth, "w", newline="", encoding="utf-8") as fh:
        fh.write(meta_comment(seed=spec.seed) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["rater_id", "item_id", "latent_utility"])
        for i, rater in enumerate(matrix.rater_ids):
            for j, item in enumerate(matrix.item_ids):
                writer.writerow([rater, item, _fmt(truth.latent[i, j])])
    log.info("wrote %s and %s", args.out_ratings, args.truth)
    return 0


def cmd_predict(args) -> int:
    matrix = _load_filtered(args)
    data = z_normalize(matrix)
    sim = build_similarity_matrix(data, args.overlap_threshold)
    cfg = KnnConfig(k=args.k, rho=args.rho, pool=args.pool, overlap_threshold=args.overlap_threshold)
    records = []
    for item in args.item:
        if item not in data.item_index:
            raise DataError(f"unknown item: {item!r}")
        committee = form_committee(args.target, item, sim, data, cfg)
        prediction = predict_utility(committee, data)
        records.append(
            {
                "target": args.target,
                "item": item,
                "prediction": prediction.value,
                "complete": committee.complete,
                "equal_weight_fallback": committee.equal_weight_fallback,
                "committee": [
                    {
                        "adviser": m.adviser,
                        "raw_weight": m.raw_weight,
                        "amplified_weight": m.amplified_weight,
                        "share": m.share,
                    }
                    for m in committee.members
                ],
            }
        )
    for record in records:
        sys.stdout.write(json.dumps(record) + "\n")
    if args.out_file:
        _write_json(_outdir(args) / args.out_file, {"records": records}, args.seed)
    return 0


def _evaluate(args, data, grid) -> "PerformanceReport":
    plan = EvaluationPlan(
        grid=grid,
        holdout_per_rater=args.holdout,
        repetitions=args.repetitions,
        master_seed=args.seed,
        targets=[t.strip() for t in args.targets.split(",")] if getattr(args, "targets", None) else None,
    )
    return run_evaluation(plan, data, threads=args.threads)


def _write_performance(report, out: Path, seed: int) -> tuple[Path, Path]:
    comment = meta_comment(seed=seed, repetitions=report.repetitions)
    per_target = out / "performance_per_target.csv"
    _write_csv(
        per_target,
        ["k", "rho", "pool", "target_group", "target_id", "mean_accuracy", "repetitions"],
        (
            [r["k"], _fmt(r["rho"]), r["pool"], r["target_group"], r["target_id"], _fmt(r["mean_accuracy"]), r["repetitions"]]
            for r in report.rows()
        ),
        comment,
    )
    aggregate = out / "performance_aggregate.csv"
    _write_csv(
        aggregate,
        ["k", "rho", "pool", "target_group", "mean_accuracy", "n_targets", "repetitions"],
        (
            [r["k"], _fmt(r["rho"]), r["pool"], r["target_group"], _fmt(r["mean_accuracy"]), r["n_targets"], r["repetitions"]]
            for r in report.aggregate_rows()
        ),
        comment,
    )
    return per_target, aggregate


def cmd_evaluate(args) -> int:
    out = _outdir(args)
    data = z_normalize(_load_filtered(args))
    grid = _build_grid(args, data)
    report = _evaluate(args, data, grid)
    _write_performance(report, out, args.seed)
    _write_json(
        out / "evaluation_summary.json",
        {
            "repetitions": report.repetitions,
            "holdout_per_rater": report.holdout_per_rater,
            "targets_evaluated": len(report.target_ids),
            "targets_excluded": report.excluded_targets,
            "cells": [
                {
                    "k": cfg.k,
                    "rho": cfg.rho,
                    "pool": cfg.pool_name(),
                    "aggregate_accuracy": report.aggregate(ci),
                    "incomplete_committees": int(report.incomplete_committees[ci]),
                    "zero_weight_fallbacks": int(report.zero_weight_fallbacks[ci]),
                }
                for ci, cfg in enumerate(report.cells)
            ],
        },
        args.seed,
    )
    return 0


def _network_out_name(kind: str, args, ext: str) -> str:
    bits = [f"network_{kind}", f"k{args.k}", f"rho{args.rho:g}"]
    if getattr(args, "item", None):
        bits.append(f"item_{args.item}")
    return "_".join(bits) + "." + ext


def cmd_network(args) -> int:
    if args.network_command == "export":
        net = network_from_json(args.in_path)
        export_network(
            net,
            _outdir(args) / args.out_file,
            format=args.format,
            min_weight=args.min_weight,
            header_comment=meta_comment(seed=args.seed),
        )
        return 0

    out = _outdir(args)
    data = z_normalize(_load_filtered(args))
    cfg = KnnConfig(k=args.k, rho=args.rho, pool=args.pool, overlap_threshold=args.overlap_threshold)
    if args.network_command == "potential":
        sim = build_similarity_matrix(data, args.overlap_threshold)
        net = build_potential_network(sim, cfg)
        kind = "potential"
    else:
        net = build_influence_network(
            data,
            cfg,
            scope=args.item or "global",
            repetitions=args.repetitions,
            master_seed=args.seed,
            coupled_holdout=args.coupled_holdout,
            holdout_per_rater=args.holdout,
        )
        kind = "influence"
    out_file = args.out_file or _network_out_name(kind, args, args.format)
    export_network(net, out / out_file, format=args.format, min_weight=args.min_weight, header_comment=meta_comment(seed=args.seed))
    log.info("wrote %s", out_file)
    return 0


def _homophily_rows(args, matrix, data):
    baselines = group_baselines(matrix)
    ks = _parse_k_list(args.k_list, data.n_raters)
    rhos = _parse_float_list(args.rho_list, "rho")
    variants = ["influence", "first-calls"] if args.variant == "both" else [args.variant]
    sim = build_similarity_matrix(data, args.overlap_threshold)
    for k in ks:
        for rho in rhos:
            cfg = KnnConfig(k=k, rho=rho, overlap_threshold=args.overlap_threshold)
            for variant in variants:
                if variant == "first-calls":
                    net = build_potential_network(sim, cfg)
                else:
                    net = build_influence_network(
                        data,
                        cfg,
                        repetitions=args.repetitions,
                        master_seed=args.seed,
                        coupled_holdout=args.coupled_holdout,
                        holdout_per_rater=args.holdout,
                    )
                yield build_report(net, baselines, variant)


def cmd_homophily(args) -> int:
    out = _outdir(args)
    matrix = _load_filtered(args)
    data = z_normalize(matrix)
    rows = []
    for report in _homophily_rows(args, matrix, data):
        for e in report.entries:
            rows.append(
                [report.k, _fmt(report.rho), report.variant, e.group, _fmt(e.h), _fmt(e.p_baseline), _fmt(e.r_baseline)]
            )
    _write_csv(
        out / "homophily.csv",
        ["k", "rho", "variant", "group", "H", "p_baseline", "r_baseline"],
        rows,
        meta_comment(seed=args.seed),
    )
    return 0


def cmd_report(args) -> int:
    out = _outdir(args)
    matrix = _load_filtered(args)
    data = z_normalize(matrix)
    grid = _build_grid(args, data)
    seed = args.seed
    manifest: dict[str, object] = {
        "parameters": {
            "ratings": str(args.ratings),
            "k_list": args.k_list,
            "rho_list": args.rho_list,
            "pool_list": args.pool_list,
            "overlap_threshold": args.overlap_threshold,
            "holdout": args.holdout,
            "repetitions": args.repetitions,
            "highlight_k": args.highlight_k,
            "highlight_rho": args.highlight_rho,
            "display_min_weight": args.min_weight,
        },
        "artifacts": [],
    }

    def register(figure: str, path: Path, **params) -> None:
        manifest["artifacts"].append({"figure": figure, "file": path.name, **params})

    sim = build_similarity_matrix(data, args.overlap_threshold)
    highlight = KnnConfig(k=args.highlight_k, rho=args.highlight_rho, overlap_threshold=args.overlap_threshold)

    # Correlation plane (per-rater similarity profiles, several audiences).
    potential_net = build_potential_network(sim, highlight)
    potential = potential_net.strengths()
    plane_rows = []
    labels = data.group_labels()
    for i, rater in enumerate(data.rater_ids):
        audiences = {"same_group": [r for r, g in zip(data.rater_ids, data.groups) if g == data.groups[i] and r != rater]}
        audiences["all"] = [r for r in data.rater_ids if r != rater]
        for label in labels:
            audiences[f"group:{label}"] = [r for r, g in zip(data.rater_ids, data.groups) if g == label and r != rater]
        for audience_name, audience in audiences.items():
            mean, sd = correlation_profile(rater, audience, sim) if audience else (float("nan"), float("nan"))
            n_obs = 0
            if audience:
                idx = [sim.rater_index[a] for a in audience]
                n_obs = int((sim.provenance[i, idx] == 0).sum())
            plane_rows.append(
                [rater, data.groups[i], audience_name, _fmt(mean), _fmt(sd), n_obs, _fmt(potential[i])]
            )
    plane_path = out / "plane.csv"
    _write_csv(
        plane_path,
        ["rater_id", "group", "audience", "mean_weight", "sd_weight", "n_observed", "potential"],
        plane_rows,
        meta_comment(seed=seed, k=highlight.k, rho=highlight.rho),
    )
    register("correlation-plane", plane_path, k=highlight.k, rho=highlight.rho)

    # Performance grid (also feeds the rho-sweep small multiples).
    report = _evaluate(args, data, grid)
    per_target_path, aggregate_path = _write_performance(report, out, seed)
    register("performance-vs-k", aggregate_path, repetitions=args.repetitions)
    register("rho-sweep", aggregate_path, repetitions=args.repetitions)
    register("individual-performance", per_target_path, repetitions=args.repetitions)

    # Networks at the highlight cell.
    influence_net = build_influence_network(data, highlight, master_seed=seed)
    for kind, net in (("potential", potential_net), ("influence", influence_net)):
        path = out / f"network_{kind}.csv"
        export_network(net, path, format="csv", header_comment=meta_comment(seed=seed, kind=kind, k=highlight.k, rho=highlight.rho))
        register(f"network-{kind}", path, k=highlight.k, rho=highlight.rho, display_min_weight=args.min_weight)

    # Node attributes shared by the network panels.
    accuracy_cell = next(
        (ci for ci, cfg in enumerate(report.cells) if cfg.k == highlight.k and cfg.rho == highlight.rho and cfg.pool_name() == "all"),
        None,
    )
    acc_by_target = {}
    if accuracy_cell is not None:
        acc_by_target = {t: report.per_target[accuracy_cell, ti] for ti, t in enumerate(report.target_ids)}
    counts = data.rating_counts()
    influence = influence_net.strengths()
    nodes_path = out / "network_nodes.csv"
    _write_csv(
        nodes_path,
        ["rater_id", "group", "n_ratings", "potential", "influence", "accuracy"],
        (
            [
                rater,
                data.groups[i],
                int(counts[i]),
                _fmt(potential[i]),
                _fmt(influence[i]),
                _fmt(acc_by_target[rater]) if rater in acc_by_target else "",
            ]
            for i, rater in enumerate(data.rater_ids)
        ),
        meta_comment(seed=seed, k=highlight.k, rho=highlight.rho),
    )
    register("network-nodes", nodes_path, k=highlight.k, rho=highlight.rho)

    # Per-item influence panel (most rated item unless told otherwise).
    item = args.item or data.item_ids[int(np.argmax(np.isfinite(data.values).sum(axis=0)))]
    per_item_net = build_influence_network(data, highlight, scope=item, master_seed=seed)
    per_item_path = out / "network_influence_item.csv"
    export_network(per_item_net, per_item_path, format="csv", header_comment=meta_comment(seed=seed, item=item))
    register("network-per-item", per_item_path, item=item, display_min_weight=args.min_weight)

    # Homophily sweep, both variants.
    homophily_rows = []
    baselines = group_baselines(matrix)
    ks = _parse_k_list(args.k_list, data.n_raters)
    rhos = _parse_float_list(args.rho_list, "rho")
    for k in ks:
        for rho in rhos:
            cfg = KnnConfig(k=k, rho=rho, overlap_threshold=args.overlap_threshold)
            for variant, net in (
                ("influence", build_influence_network(data, cfg, master_seed=seed)),
                ("first-calls", build_potential_network(sim, cfg)),
            ):
                for e in build_report(net, baselines, variant).entries:
                    homophily_rows.append([k, _fmt(rho), variant, e.group, _fmt(e.h), _fmt(e.p_baseline), _fmt(e.r_baseline)])
    homophily_path = out / "homophily.csv"
    _write_csv(
        homophily_path,
        ["k", "rho", "variant", "group", "H", "p_baseline", "r_baseline"],
        homophily_rows,
        meta_comment(seed=seed),
    )
    register("homophily-vs-k", homophily_path, variant="influence")
    register("homophily-first-calls", homophily_path, variant="first-calls")

    _write_json(out / "manifest.json", manifest, seed)
    return 0


# ---------------------------------------------------------------------------


def setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


_COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "network": cmd_network,
    "homophily": cmd_homophily,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        setup_logging(args.verbose)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except TasteNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
