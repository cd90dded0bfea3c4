"""Adviser committees and weighted k-NN utility predictions.

For a (target, item) query the algorithm walks the target's advisers in
descending similarity order and seats the first k who actually rated the
item, searching further down the list past raters who did not. The
seated committee predicts the item's utility as the amplification-weighted
mean of its members' ratings.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dataset import NormalizedRatings
from .errors import ConfigError, DataError
from .similarity import SimilarityMatrix, amplify_weight

log = logging.getLogger(__name__)

POOL_ALL = "all"


@dataclass(frozen=True)
class KnnConfig:
    """One recommender parameterization.

    pool restricts the advisers considered: "all", a group label, or an
    explicit set of rater ids. The target itself is never eligible.
    seat_negative controls whether negative-similarity advisers may occupy
    committee seats (they rank last and contribute zero weight either way);
    the default seats them.
    """

    k: int
    rho: float = 1.0
    pool: str | frozenset = POOL_ALL
    overlap_threshold: int = 5
    seat_negative: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.rho < 0:
            raise ConfigError("rho must be >= 0")

    def pool_name(self) -> str:
        if isinstance(self.pool, str):
            return self.pool
        return "set:" + ",".join(sorted(self.pool))


@dataclass(frozen=True)
class CommitteeMember:
    adviser: str
    raw_weight: float
    amplified_weight: float
    share: float


@dataclass
class Committee:
    """Ordered advisers backing one prediction.

    Members are sorted by raw weight descending (ties broken by ascending
    rater index). Shares are the amplified weights normalized to sum to 1;
    when every amplified weight is zero the members share equally instead,
    which is what makes the zero-weight prediction an unweighted mean.
    """

    target: str
    item: str | None
    members: list[CommitteeMember]
    complete: bool
    equal_weight_fallback: bool = False

    def advisers(self) -> list[str]:
        return [m.adviser for m in self.members]


@dataclass
class Prediction:
    value: float | None
    committee: Committee


def resolve_pool(pool, groups: list[str], rater_ids: list[str]) -> np.ndarray:
    """Boolean eligibility mask for a pool specification."""
    if isinstance(pool, str):
        if pool == POOL_ALL:
            return np.ones(len(rater_ids), dtype=bool)
        mask = np.array([g == pool for g in groups])
        if not mask.any():
            raise DataError(f"pool {pool!r} matches no group label")
        return mask
    wanted = set(pool)
    unknown = wanted.difference(rater_ids)
    if unknown:
        raise DataError(f"pool contains unknown raters: {sorted(unknown)}")
    return np.array([r in wanted for r in rater_ids])


def rank_advisers(target_idx: int, weights_row: np.ndarray, pool_mask: np.ndarray, seat_negative: bool = True) -> np.ndarray:
    """Adviser candidates ranked by raw weight descending, rater index ascending.

    Undefined (NaN) similarities are excluded entirely; negative ones are
    excluded too when seat_negative is off.
    """
    eligible = pool_mask.copy()
    eligible[target_idx] = False
    eligible &= np.isfinite(weights_row)
    if not seat_negative:
        eligible &= weights_row >= 0
    candidates = np.nonzero(eligible)[0]
    order = np.lexsort((candidates, -weights_row[candidates]))
    return candidates[order]


def _committee_from_members(
    target: str,
    item: str | None,
    advisers: list[str],
    raw: np.ndarray,
    rho: float,
    complete: bool,
) -> Committee:
    amplified = amplify_weight(raw, rho) if len(raw) else np.zeros(0)
    total = float(np.sum(amplified))
    fallback = bool(len(raw)) and total <= 0.0
    if fallback:
        shares = np.full(len(raw), 1.0 / len(raw))
    elif len(raw):
        shares = amplified / total
    else:
        shares = amplified
    members = [
        CommitteeMember(adviser=a, raw_weight=float(w), amplified_weight=float(aw), share=float(s))
        for a, w, aw, s in zip(advisers, raw, np.atleast_1d(amplified), np.atleast_1d(shares))
    ]
    return Committee(target=target, item=item, members=members, complete=complete, equal_weight_fallback=fallback)


def form_committee(
    target: str,
    item: str,
    s: SimilarityMatrix,
    train: NormalizedRatings,
    cfg: KnnConfig,
) -> Committee:
    """Seat up to k advisers for one (target, item) query.

    Candidates are walked in similarity-rank order and seated only if they
    rated the item in the training data; the committee is flagged
    incomplete when the pool runs out first.
    """
    if s.rater_ids != train.rater_ids:
        raise DataError("similarity matrix and training data index different raters")
    if target not in s.rater_index:
        raise DataError(f"unknown target rater: {target!r}")
    if item not in train.item_index:
        raise DataError(f"unknown item: {item!r}")
    t = s.rater_index[target]
    m = train.item_index[item]
    pool_mask = resolve_pool(cfg.pool, s.groups, s.rater_ids)
    ranked = rank_advisers(t, s.weights[t], pool_mask, cfg.seat_negative)
    rated = np.isfinite(train.values[ranked, m])
    seated = ranked[rated][: cfg.k]
    raw = s.weights[t, seated]
    return _committee_from_members(
        target,
        item,
        [s.rater_ids[i] for i in seated],
        raw,
        cfg.rho,
        complete=len(seated) == cfg.k,
    )


def first_call_committee(target: str, s: SimilarityMatrix, cfg: KnnConfig) -> Committee:
    """The committee the algorithm would call first, ignoring item availability."""
    t = s.rater_index[target]
    pool_mask = resolve_pool(cfg.pool, s.groups, s.rater_ids)
    ranked = rank_advisers(t, s.weights[t], pool_mask, cfg.seat_negative)
    seated = ranked[: cfg.k]
    return _committee_from_members(
        target,
        None,
        [s.rater_ids[i] for i in seated],
        s.weights[t, seated],
        cfg.rho,
        complete=len(seated) == cfg.k,
    )


def predict_utility(c: Committee, train: NormalizedRatings, rho: float | None = None) -> Prediction:
    """Weighted-mean utility estimate from a committee.

    With rho given, amplified weights are recomputed from the raw weights;
    otherwise the committee's stored weighting is used. An empty committee
    yields no prediction; a committee whose amplified weights sum to zero
    falls back to the unweighted mean of its members' ratings.
    """
    if not c.members:
        return Prediction(value=None, committee=c)
    if c.item is None:
        raise ConfigError("cannot predict from a first-call committee (no item)")
    m = train.item_index[c.item]
    ratings = np.array([train.values[train.rater_index[mem.adviser], m] for mem in c.members])
    if not np.isfinite(ratings).all():
        raise DataError("committee member without a training rating for the item")
    if rho is not None:
        raw = np.array([mem.raw_weight for mem in c.members])
        c = _committee_from_members(c.target, c.item, c.advisers(), raw, rho, c.complete)
    shares = np.array([mem.share for mem in c.members])
    return Prediction(value=float(shares @ ratings), committee=c)


def make_predictor(s: SimilarityMatrix, train: NormalizedRatings, cfg: KnnConfig):
    """Bind similarity, training data, and config into (target, item) -> value."""

    def predict(target: str, item: str) -> float | None:
        return predict_utility(form_committee(target, item, s, train, cfg), train).value

    return predict


def choose_between(target: str, item_a: str, item_b: str, predictor, rng: np.random.Generator) -> str:
    """Pick the item with the higher predicted utility; break ties at random.

    A missing prediction on either side counts as a tie, so two absent
    predictions or an exact tie both resolve by a fair coin.
    """
    ua = predictor(target, item_a)
    ub = predictor(target, item_b)
    if ua is not None and ub is not None and ua != ub:
        return item_a if ua > ub else item_b
    return item_a if rng.random() < 0.5 else item_b


def strategy_presets(population_size: int, clique_size: int = 5, weighted_rho: float = 1.0) -> dict[str, KnnConfig]:
    """Named (k, rho) presets for the classic opinion-aggregation strategies.

    doppelganger consults only the single most similar rater (rho is
    irrelevant there and set to weighted_rho for concreteness); clique and
    weighted clique consult a fixed small committee; weighted crowd and
    whole crowd consult everyone.
    """
    if population_size < 2:
        raise ConfigError("need at least two raters to form strategies")
    if weighted_rho <= 0:
        raise ConfigError("weighted presets need rho > 0")
    n = clique_size
    return {
        "doppelganger": KnnConfig(k=1, rho=weighted_rho),
        "clique": KnnConfig(k=n, rho=0.0),
        "weighted_clique": KnnConfig(k=n, rho=weighted_rho),
        "weighted_crowd": KnnConfig(k=population_size - 1, rho=weighted_rho),
        "whole_crowd": KnnConfig(k=population_size - 1, rho=0.0),
    }
