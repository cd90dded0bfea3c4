"""Advice networks spanned by the recommender.

Two reconstructions of "who advises whom": the potential network counts
only the first k advisers the algorithm would call for each target,
ignoring whether they rated anything; the influence network runs the full
committee-completion search per item and credits the advisers who could
actually supply ratings. Edge weights are normalized committee shares, so
each served target contributes one unit of weight per query. A node's
incoming strength is its recommender potential or influence.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from ._util import RNG_SPLIT, derive_rng, format_weight, stable_id_key
from .dataset import NormalizedRatings
from .errors import ConfigError, DataError
from .recommender import KnnConfig, rank_advisers, resolve_pool
from .similarity import SimilarityMatrix, amplify_weight, build_weights

log = logging.getLogger(__name__)

SCOPE_GLOBAL = "global"


@dataclass
class NetworkMeta:
    kind: str  # "potential" | "influence"
    k: int
    rho: float
    pool: str
    scope: str = SCOPE_GLOBAL  # "global" or a single item id
    repetitions: int = 1
    coupled_holdout: bool = False
    master_seed: int | None = None


@dataclass
class AdviceNetwork:
    """Weighted directed advice graph; rows seek, columns advise."""

    edges: np.ndarray  # (n, n) float64, edges[target, adviser]
    rater_ids: list[str]
    groups: list[str]
    meta: NetworkMeta

    def __post_init__(self) -> None:
        self.rater_index = {r: i for i, r in enumerate(self.rater_ids)}
        if np.any(np.diagonal(self.edges) != 0):
            raise DataError("advice networks have no self-edges")

    @property
    def n_raters(self) -> int:
        return len(self.rater_ids)

    def strengths(self) -> np.ndarray:
        """Incoming strength of every node."""
        return self.edges.sum(axis=0)

    def out_weights(self) -> np.ndarray:
        return self.edges.sum(axis=1)

    def group_mean_strength(self, group: str) -> float:
        members = [i for i, g in enumerate(self.groups) if g == group]
        if not members:
            raise DataError(f"unknown group: {group!r}")
        return float(self.strengths()[members].mean())


def node_strength(net: AdviceNetwork, node: str) -> float:
    """Sum of the node's incoming edge weights."""
    if node not in net.rater_index:
        raise DataError(f"unknown node: {node!r}")
    return float(net.edges[:, net.rater_index[node]].sum())


def _committee_shares(raw: np.ndarray, rho: float) -> np.ndarray:
    """Normalized shares for seated advisers; equal split when all weights
    amplify to zero, so a served target always hands out one unit."""
    if len(raw) == 0:
        return raw
    amplified = amplify_weight(raw, rho)
    total = amplified.sum()
    if total <= 0:
        return np.full(len(raw), 1.0 / len(raw))
    return amplified / total


def build_potential_network(s: SimilarityMatrix, cfg: KnnConfig) -> AdviceNetwork:
    """First-call advice network, disregarding item availability."""
    n = s.n_raters
    edges = np.zeros((n, n))
    pool_mask = resolve_pool(cfg.pool, s.groups, s.rater_ids)
    for t in range(n):
        ranked = rank_advisers(t, s.weights[t], pool_mask, cfg.seat_negative)
        seated = ranked[: cfg.k]
        edges[t, seated] = _committee_shares(s.weights[t, seated], cfg.rho)
    return AdviceNetwork(
        edges=edges,
        rater_ids=list(s.rater_ids),
        groups=list(s.groups),
        meta=NetworkMeta(kind="potential", k=cfg.k, rho=cfg.rho, pool=cfg.pool_name()),
    )


def _influence_edges_once(
    values: np.ndarray,
    weights: np.ndarray,
    item_cols: np.ndarray,
    cfg: KnnConfig,
    pool_mask: np.ndarray,
) -> np.ndarray:
    """Sum of per-item committee shares over all targets, one pass."""
    n = len(values)
    edges = np.zeros((n, n))
    rated = np.isfinite(values)
    for t in range(n):
        ranked = rank_advisers(t, weights[t], pool_mask, cfg.seat_negative)
        if len(ranked) == 0:
            continue
        ranked_w = weights[t, ranked]
        for m in item_cols:
            avail = rated[ranked, m]
            seated = ranked[avail][: cfg.k]
            if len(seated) == 0:
                continue
            edges[t, seated] += _committee_shares(ranked_w[avail][: cfg.k], cfg.rho)
    return edges


def build_influence_network(
    r: NormalizedRatings,
    cfg: KnnConfig,
    scope: str = SCOPE_GLOBAL,
    repetitions: int = 1,
    master_seed: int = 0,
    coupled_holdout: bool = False,
    holdout_per_rater: int = 10,
) -> AdviceNetwork:
    """Advice network of committees that actually supplied ratings.

    For every target and every in-scope item the committee-completion
    search runs against the training data and its normalized shares land on
    the target's outgoing edges; global weights are the per-item shares
    averaged over items (and over repetitions).

    By default committees form on the full data, which is deterministic, so
    repetitions only matter with coupled_holdout=True: there each
    repetition removes a fresh holdout from every rater's row (the same
    splits the evaluation harness would draw) before relearning
    similarities, which perturbs adviser availability.
    """
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if scope == SCOPE_GLOBAL:
        item_cols = np.arange(r.n_items)
    else:
        if scope not in r.item_index:
            raise DataError(f"unknown item: {scope!r}")
        item_cols = np.array([r.item_index[scope]])

    pool_mask = resolve_pool(cfg.pool, r.groups, r.rater_ids)
    n = r.n_raters
    counts = r.rating_counts()
    total = np.zeros((n, n))
    effective_reps = repetitions if coupled_holdout else 1
    for rep in range(effective_reps):
        if coupled_holdout:
            train = r.values.copy()
            for t, rater in enumerate(r.rater_ids):
                if counts[t] < holdout_per_rater:
                    continue
                rng = derive_rng(master_seed, RNG_SPLIT, rep, stable_id_key(rater))
                rated = np.nonzero(np.isfinite(r.values[t]))[0]
                train[t, rng.choice(rated, size=holdout_per_rater, replace=False)] = np.nan
        else:
            train = r.values
        weights, _, _ = build_weights(train, cfg.overlap_threshold)
        total += _influence_edges_once(train, weights, item_cols, cfg, pool_mask)

    edges = total / (effective_reps * len(item_cols))
    return AdviceNetwork(
        edges=edges,
        rater_ids=list(r.rater_ids),
        groups=list(r.groups),
        meta=NetworkMeta(
            kind="influence",
            k=cfg.k,
            rho=cfg.rho,
            pool=cfg.pool_name(),
            scope=scope,
            repetitions=effective_reps,
            coupled_holdout=coupled_holdout,
            master_seed=master_seed if coupled_holdout else None,
        ),
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def export_network(
    net: AdviceNetwork,
    path: str | os.PathLike,
    format: str = "csv",
    min_weight: float | None = None,
    accuracies: dict[str, float] | None = None,
    header_comment: str | None = None,
) -> None:
    """Write the network as an edge-list CSV, DOT, or JSON document.

    min_weight is a display cutoff for visualization exports; computation
    never drops edges. CSV keeps >= 9 significant digits so a re-import
    reproduces the edge multiset.
    """
    srcs, dsts = np.nonzero(net.edges > 0)
    keep = np.ones(len(srcs), dtype=bool)
    if min_weight is not None:
        keep = net.edges[srcs, dsts] >= min_weight
    edge_rows = [
        (net.rater_ids[s], net.rater_ids[d], float(net.edges[s, d]))
        for s, d in zip(srcs[keep], dsts[keep])
    ]

    if format == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if header_comment:
                fh.write(header_comment + "\n")
            writer = csv.writer(fh)
            writer.writerow(["source", "target", "weight"])
            for s, d, w in edge_rows:
                writer.writerow([s, d, format_weight(w)])
    elif format == "dot":
        strengths = net.strengths()
        with open(path, "w", encoding="utf-8") as fh:
            if header_comment:
                fh.write("// " + header_comment.lstrip("# ") + "\n")
            fh.write("digraph advice {\n")
            for i, rid in enumerate(net.rater_ids):
                attrs = [f'group="{net.groups[i]}"', f"strength={format_weight(strengths[i])}"]
                if accuracies and rid in accuracies:
                    attrs.append(f"accuracy={format_weight(accuracies[rid])}")
                fh.write(f'  "{rid}" [{", ".join(attrs)}];\n')
            for s, d, w in edge_rows:
                fh.write(f'  "{s}" -> "{d}" [weight={format_weight(w)}];\n')
            fh.write("}\n")
    elif format == "json":
        from . import __version__

        strengths = net.strengths()
        doc = {
            "meta": {
                "tool": "tastenet",
                "version": __version__,
                **({"provenance": header_comment.lstrip("# ")} if header_comment else {}),
                "kind": net.meta.kind,
                "k": net.meta.k,
                "rho": net.meta.rho,
                "pool": net.meta.pool,
                "scope": net.meta.scope,
                "repetitions": net.meta.repetitions,
                "coupled_holdout": net.meta.coupled_holdout,
                "master_seed": net.meta.master_seed,
            },
            "nodes": [
                {
                    "id": rid,
                    "group": net.groups[i],
                    "strength": float(strengths[i]),
                    **({"accuracy": accuracies[rid]} if accuracies and rid in accuracies else {}),
                }
                for i, rid in enumerate(net.rater_ids)
            ],
            "edges": [{"source": s, "target": d, "weight": w} for s, d, w in edge_rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=False)
            fh.write("\n")
    else:
        raise ConfigError(f"unknown export format: {format!r}")


def import_network_csv(path: str | os.PathLike) -> list[tuple[str, str, float]]:
    """Read back an edge-list CSV written by export_network."""
    edges = []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        reader = csv.reader(rows)
        header = next(reader, None)
        if header != ["source", "target", "weight"]:
            raise DataError(f"{path}: not an edge-list CSV")
        for src, dst, w in reader:
            edges.append((src, dst, float(w)))
    return edges


def network_from_json(path: str | os.PathLike) -> AdviceNetwork:
    """Rebuild a network from its JSON export (used by the CLI's export command)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    rater_ids = [n["id"] for n in doc["nodes"]]
    groups = [n["group"] for n in doc["nodes"]]
    index = {r: i for i, r in enumerate(rater_ids)}
    edges = np.zeros((len(rater_ids), len(rater_ids)))
    for e in doc["edges"]:
        edges[index[e["source"]], index[e["target"]]] = e["weight"]
    meta = doc.get("meta", {})
    return AdviceNetwork(
        edges=edges,
        rater_ids=rater_ids,
        groups=groups,
        meta=NetworkMeta(
            kind=meta.get("kind", "unknown"),
            k=meta.get("k", 0),
            rho=meta.get("rho", 0.0),
            pool=meta.get("pool", "all"),
            scope=meta.get("scope", SCOPE_GLOBAL),
            repetitions=meta.get("repetitions", 1),
            coupled_holdout=meta.get("coupled_holdout", False),
            master_seed=meta.get("master_seed"),
        ),
    )
