"""Taste homophily of groups and individuals on advice networks.

A group's homophily index is the share of its outgoing advice weight that
lands on advisers of the same group. It is read against two baselines: the
group's share of the population (group weight) and its share of all
ratings (count weight); the latter matters because prolific raters can
supply advice far more often than their headcount suggests.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .dataset import RatingMatrix
from .errors import DataError
from .network import AdviceNetwork, build_potential_network
from .recommender import KnnConfig
from .similarity import SimilarityMatrix

log = logging.getLogger(__name__)


@dataclass
class HomophilyEntry:
    group: str
    h: float  # NaN when the group directs no weight
    p_baseline: float  # population share
    r_baseline: float  # rating share
    homophilous_vs_p: bool | None
    homophilous_vs_r: bool | None


@dataclass
class HomophilyReport:
    k: int
    rho: float
    variant: str  # "influence" | "first-calls"
    entries: list[HomophilyEntry]

    def entry(self, group: str) -> HomophilyEntry:
        for e in self.entries:
            if e.group == group:
                return e
        raise DataError(f"group {group!r} not in report")


def group_baselines(m: RatingMatrix) -> tuple[dict[str, float], dict[str, float]]:
    """Population share p and rating share r per group."""
    if m.n_ratings == 0:
        raise DataError("empty rating matrix")
    counts = m.rating_counts()
    total_ratings = counts.sum()
    p, r = {}, {}
    for g in m.group_labels():
        members = m.group_members(g)
        p[g] = len(members) / m.n_raters
        r[g] = float(counts[members].sum() / total_ratings)
    return p, r


def _same_and_cross_weight(net: AdviceNetwork, member_rows: list[int]) -> tuple[float, float]:
    group_set = set(member_rows)
    same = 0.0
    cross = 0.0
    sub = net.edges[member_rows]
    same_cols = np.array([j in group_set for j in range(net.n_raters)])
    same = float(sub[:, same_cols].sum())
    cross = float(sub[:, ~same_cols].sum())
    return same, cross


def homophily_index(net: AdviceNetwork, group: str) -> float:
    """Share of the group's outgoing advice weight staying inside the group.

    NaN (undefined) when the group directs no weight at all; zero would
    wrongly read as perfect heterophily.
    """
    members = [i for i, g in enumerate(net.groups) if g == group]
    if not members:
        raise DataError(f"unknown group: {group!r}")
    same, cross = _same_and_cross_weight(net, members)
    if same + cross <= 0:
        log.warning("group %r directs no advice weight; homophily undefined", group)
        return float("nan")
    return same / (same + cross)


def individual_homophily(net: AdviceNetwork, node: str) -> float:
    """Share of one rater's outgoing weight directed to same-group advisers."""
    if node not in net.rater_index:
        raise DataError(f"unknown node: {node!r}")
    i = net.rater_index[node]
    row = net.edges[i]
    total = row.sum()
    if total <= 0:
        log.warning("node %r directs no advice weight; homophily undefined", node)
        return float("nan")
    same_cols = [j for j, g in enumerate(net.groups) if g == net.groups[i] and j != i]
    return float(row[same_cols].sum() / total)


def potential_homophily_index(s: SimilarityMatrix, cfg: KnnConfig, group: str) -> float:
    """Homophily over the first calls only (potential network)."""
    return homophily_index(build_potential_network(s, cfg), group)


def build_report(net: AdviceNetwork, baselines: tuple[dict[str, float], dict[str, float]], variant: str) -> HomophilyReport:
    p, r = baselines
    entries = []
    for g in dict.fromkeys(net.groups):
        h = homophily_index(net, g)
        defined = not math.isnan(h)
        entries.append(
            HomophilyEntry(
                group=g,
                h=h,
                p_baseline=p[g],
                r_baseline=r[g],
                homophilous_vs_p=(h > p[g]) if defined else None,
                homophilous_vs_r=(h > r[g]) if defined else None,
            )
        )
    return HomophilyReport(k=net.meta.k, rho=net.meta.rho, variant=variant, entries=entries)
