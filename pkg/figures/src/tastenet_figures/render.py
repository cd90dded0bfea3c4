"""Renderers for the six figure kinds.

Inputs are the CSVs written by the tastenet CLI (`report` bundles all of
them); each function validates the columns it needs and returns a
matplotlib Figure.
"""

from __future__ import annotations

import logging
import warnings

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx
import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

# minority-expert groups render purple, crowd groups orange in the wine
# setting; assignment is just sorted-label order so any group set works
PALETTE = ["#e66101", "#7b3294", "#0571b0", "#008837", "#a6611a", "#5e3c99"]


class SchemaError(ValueError):
    """An input table is missing a required column."""


def load_table(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def require_columns(df: pd.DataFrame, columns, path="input") -> None:
    for column in columns:
        if column not in df.columns:
            raise SchemaError(f"{path}: missing required column {column!r}")


def group_color_map(groups) -> dict[str, str]:
    ordered = sorted(set(groups))
    return {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(ordered)}


def _finalize(fig):
    fig.tight_layout()
    return fig


def render_plane(df: pd.DataFrame, path="plane.csv", audiences=("same_group", "all")) -> plt.Figure:
    """Per-rater similarity profiles on the (mean, dispersion) plane."""
    require_columns(df, ["rater_id", "group", "audience", "mean_weight", "sd_weight", "potential"], path)
    colors = group_color_map(df["group"])
    fig, axes = plt.subplots(1, len(audiences), figsize=(6 * len(audiences), 5), squeeze=False)
    for ax, audience in zip(axes[0], audiences):
        sub = df[df["audience"] == audience].dropna(subset=["mean_weight"])
        if sub.empty:
            log.warning("no rows for audience %r; axes left empty", audience)
        for group, block in sub.groupby("group"):
            size = 25 + 120 * (block["potential"] / max(df["potential"].max(), 1e-9))
            ax.scatter(
                block["mean_weight"], block["sd_weight"], s=size,
                color=colors[group], alpha=0.75, label=group, edgecolor="white", linewidth=0.4,
            )
            ax.axvline(block["mean_weight"].mean(), color=colors[group], linestyle=":", linewidth=1)
            ax.axhline(block["sd_weight"].mean(), color=colors[group], linestyle=":", linewidth=1)
        ax.set_xlabel(f"mean taste similarity ({audience})")
        ax.set_ylabel("dispersion in taste similarity (SD)")
        ax.legend()
    return _finalize(fig)


def render_performance(df: pd.DataFrame, path="performance_aggregate.csv", rho=1.0, target_group="all") -> plt.Figure:
    """Aggregate pairwise-choice accuracy vs k, one line per adviser pool."""
    require_columns(df, ["k", "rho", "pool", "target_group", "mean_accuracy"], path)
    fig, ax = plt.subplots(figsize=(7, 5))
    sub = df[df["target_group"] == target_group]
    sub = sub[np.isclose(sub["rho"].astype(float), rho)]
    if sub.empty:
        log.warning("%s: no rows for target_group=%r rho=%s; rendering empty axes", path, target_group, rho)
    for pool, block in sub.groupby("pool"):
        block = block.sort_values("k")
        ax.plot(block["k"], block["mean_accuracy"], marker="o", label=f"pool: {pool}")
    ax.axhline(0.5, color="grey", linestyle=":", linewidth=1)
    ax.set_xlabel("number of neighbors k")
    ax.set_ylabel("proportion of correct pairwise choices")
    ax.set_title(f"targets: {target_group}, rho = {rho:g}")
    if not sub.empty:
        ax.legend()
    return _finalize(fig)


def render_rho_sweep(df: pd.DataFrame, path="performance_aggregate.csv", target_group="all") -> plt.Figure:
    """Small multiples: accuracy vs rho, one panel per k, lines per pool."""
    require_columns(df, ["k", "rho", "pool", "target_group", "mean_accuracy"], path)
    sub = df[df["target_group"] == target_group]
    ks = sorted(sub["k"].unique())
    if not ks:
        log.warning("%s: no rows for target_group=%r", path, target_group)
        fig, _ = plt.subplots(figsize=(5, 4))
        return _finalize(fig)
    ncols = min(3, len(ks))
    nrows = (len(ks) + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.4 * nrows), squeeze=False, sharey=True)
    for ax in axes.flat[len(ks):]:
        ax.set_axis_off()
    for ax, k in zip(axes.flat, ks):
        block_k = sub[sub["k"] == k]
        for pool, block in block_k.groupby("pool"):
            block = block.sort_values("rho")
            ax.plot(block["rho"], block["mean_accuracy"], marker="o", label=f"pool: {pool}")
        ax.set_title(f"k = {k}")
        ax.set_xlabel("rho")
        ax.set_ylabel("accuracy")
    axes.flat[0].legend()
    return _finalize(fig)


def render_network(
    edges: pd.DataFrame,
    nodes: pd.DataFrame,
    edges_path="network.csv",
    nodes_path="network_nodes.csv",
    min_weight: float = 0.05,
    size_by: str = "auto",
    layout_seed: int = 7,
) -> plt.Figure:
    """Node-link panel; edges below the display cutoff are omitted.

    Edge color follows the adviser's group; node size follows influence
    (or potential when the influence column is absent or size_by says so);
    node color shows per-rater accuracy when available, group otherwise.
    """
    require_columns(edges, ["source", "target", "weight"], edges_path)
    require_columns(nodes, ["rater_id", "group"], nodes_path)
    kept = edges[edges["weight"].astype(float) >= min_weight]

    graph = nx.DiGraph()
    for row in nodes.itertuples():
        graph.add_node(row.rater_id)
    for row in kept.itertuples():
        graph.add_edge(row.source, row.target, weight=float(row.weight))

    if size_by == "auto":
        size_by = "influence" if "influence" in nodes.columns else "potential" if "potential" in nodes.columns else None
    node_info = nodes.set_index("rater_id")
    colors = group_color_map(nodes["group"])

    if size_by and size_by in nodes.columns:
        raw = node_info[size_by].astype(float).fillna(0.0)
        top = max(float(raw.max()), 1e-9)
        sizes = [40 + 360 * raw[n] / top for n in graph.nodes]
    else:
        sizes = [80 for _ in graph.nodes]

    fig, ax = plt.subplots(figsize=(7.5, 7))
    pos = nx.spring_layout(graph, seed=layout_seed, weight="weight")
    has_accuracy = "accuracy" in nodes.columns and node_info["accuracy"].notna().any()
    if has_accuracy:
        acc = node_info["accuracy"].astype(float)
        fill = float(acc.mean())
        node_colors = [acc.get(n, np.nan) if np.isfinite(acc.get(n, np.nan)) else fill for n in graph.nodes]
        drawn = nx.draw_networkx_nodes(
            graph, pos, ax=ax, node_size=sizes, node_color=node_colors, cmap="viridis", edgecolors="grey", linewidths=0.5
        )
        fig.colorbar(drawn, ax=ax, label="pairwise-choice accuracy", shrink=0.8)
    else:
        node_colors = [colors[node_info.loc[n, "group"]] for n in graph.nodes]
        nx.draw_networkx_nodes(graph, pos, ax=ax, node_size=sizes, node_color=node_colors, edgecolors="grey", linewidths=0.5)
    edge_colors = [colors[node_info.loc[dst, "group"]] for _, dst in graph.edges]
    nx.draw_networkx_edges(
        graph, pos, ax=ax, edge_color=edge_colors, alpha=0.5, arrowsize=7,
        width=[1 + 4 * graph.edges[e]["weight"] for e in graph.edges],
    )
    handles = [plt.Line2D([], [], color=c, marker="o", linestyle="", label=g) for g, c in colors.items()]
    ax.legend(handles=handles, loc="lower left")
    ax.set_axis_off()
    return _finalize(fig)


def render_homophily(df: pd.DataFrame, path="homophily.csv", variant="influence") -> plt.Figure:
    """H vs k per group, lines per rho, dashed population/rating baselines."""
    require_columns(df, ["k", "rho", "variant", "group", "H", "p_baseline", "r_baseline"], path)
    sub = df[df["variant"] == variant]
    groups = sorted(sub["group"].unique())
    if not groups:
        log.warning("%s: no rows for variant %r", path, variant)
        fig, _ = plt.subplots(figsize=(5, 4))
        return _finalize(fig)
    fig, axes = plt.subplots(1, len(groups), figsize=(5.5 * len(groups), 4.5), squeeze=False, sharey=True)
    for ax, group in zip(axes[0], groups):
        block_g = sub[sub["group"] == group]
        for rho, block in block_g.groupby("rho"):
            block = block.sort_values("k")
            ax.plot(block["k"], block["H"], marker="o", label=f"rho = {rho:g}")
        ax.axhline(block_g["p_baseline"].iloc[0], color="black", linestyle="--", linewidth=1.2, label="group weight")
        ax.axhline(block_g["r_baseline"].iloc[0], color="grey", linestyle="--", linewidth=1.2, label="count weight")
        ax.set_title(f"group: {group} ({variant})")
        ax.set_xlabel("number of neighbors k")
        ax.set_ylabel("homophily index")
        ax.set_ylim(-0.02, 1.02)
        ax.legend()
    return _finalize(fig)
