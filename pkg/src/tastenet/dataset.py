"""Sparse rating matrices with per-rater group labels.

Ratings are held densely as a rater-by-item float array with NaN marking
unrated cells; at the population sizes this toolkit targets (hundreds of
raters, a few thousand items) that is both the fastest and the simplest
representation.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

log = logging.getLogger(__name__)

RATINGS_HEADER = ("rater_id", "item_id", "rating", "group")


@dataclass
class RatingMatrix:
    """Rater-by-item ratings; NaN means unrated.

    Row/column order is the order of first appearance in the source, so a
    given input always produces the same dense indices.
    """

    values: np.ndarray  # (n_raters, n_items) float64
    rater_ids: list[str]
    item_ids: list[str]
    groups: list[str]  # one label per rater, parallel to rater_ids

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.rater_ids), len(self.item_ids)):
            raise DataError("values shape does not match rater/item index")
        if len(self.groups) != len(self.rater_ids):
            raise DataError("every rater needs exactly one group label")
        self.rater_index = {r: i for i, r in enumerate(self.rater_ids)}
        self.item_index = {m: j for j, m in enumerate(self.item_ids)}
        if len(self.rater_index) != len(self.rater_ids):
            raise DataError("duplicate rater id")
        if len(self.item_index) != len(self.item_ids):
            raise DataError("duplicate item id")

    @property
    def n_raters(self) -> int:
        return len(self.rater_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def n_ratings(self) -> int:
        return int(np.isfinite(self.values).sum())

    def rated_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def rating_counts(self) -> np.ndarray:
        """Number of rated items per rater."""
        return np.isfinite(self.values).sum(axis=1)

    def group_labels(self) -> list[str]:
        """Distinct group labels in first-appearance order."""
        seen: dict[str, None] = {}
        for g in self.groups:
            seen.setdefault(g)
        return list(seen)

    def group_members(self, group: str) -> list[int]:
        members = [i for i, g in enumerate(self.groups) if g == group]
        if not members:
            raise DataError(f"unknown group: {group!r}")
        return members

    def to_triples(self) -> list[tuple[str, str, float]]:
        rows, cols = np.nonzero(np.isfinite(self.values))
        return [
            (self.rater_ids[i], self.item_ids[j], float(self.values[i, j]))
            for i, j in zip(rows.tolist(), cols.tolist())
        ]

    def take(self, rater_idx: np.ndarray | list[int], item_idx: np.ndarray | list[int]) -> "RatingMatrix":
        """Sub-matrix restricted to the given rater and item indices (order kept)."""
        rater_idx = np.asarray(rater_idx, dtype=int)
        item_idx = np.asarray(item_idx, dtype=int)
        return RatingMatrix(
            values=self.values[np.ix_(rater_idx, item_idx)].copy(),
            rater_ids=[self.rater_ids[i] for i in rater_idx],
            item_ids=[self.item_ids[j] for j in item_idx],
            groups=[self.groups[i] for i in rater_idx],
        )

    def summary(self) -> dict:
        """Counts and per-group densities, as emitted by the CLI ingest command."""
        counts = self.rating_counts()
        per_group = {}
        total = self.n_ratings
        for g in self.group_labels():
            members = self.group_members(g)
            per_group[g] = {
                "raters": len(members),
                "ratings": int(counts[members].sum()),
                "rating_share": float(counts[members].sum() / total) if total else 0.0,
                "mean_density": float(np.mean(counts[members] / self.n_items)) if self.n_items else 0.0,
            }
        return {
            "raters": self.n_raters,
            "items": self.n_items,
            "ratings": total,
            "groups": per_group,
        }


@dataclass
class NormalizedRatings(RatingMatrix):
    """Per-rater z-scored ratings; raters whose z-scores would be undefined
    (fewer than two ratings, or zero variance) have been dropped."""

    dropped_raters: list[str] = field(default_factory=list)


class _CommentFilter:
    """Line iterator that drops '#' comment lines but keeps physical line
    numbers for error messages."""

    def __init__(self, fh):
        self._lines = enumerate(fh, start=1)
        self.lineno = 0

    def __iter__(self):
        return self

    def __next__(self) -> str:
        for lineno, line in self._lines:
            if line.lstrip().startswith("#"):
                continue
            self.lineno = lineno
            return line
        raise StopIteration


def load_ratings(source: str | os.PathLike, allowed_groups: set[str] | None = None) -> RatingMatrix:
    """Load a ratings CSV with header rater_id,item_id,rating,group.

    Lines starting with '#' are provenance comments and are skipped.
    Duplicate (rater, item) rows, conflicting group labels for one rater,
    and malformed rows are errors; messages carry the offending line number.
    """
    rater_ids: list[str] = []
    item_ids: list[str] = []
    rater_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    groups: dict[str, str] = {}
    triples: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()

    try:
        fh = open(source, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read ratings file: {exc}") from None
    with fh:
        lines = _CommentFilter(fh)
        reader = csv.reader(lines)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{source}: empty file") from None
        if [h.strip() for h in header] != list(RATINGS_HEADER):
            raise DataError(f"{source}: expected header {','.join(RATINGS_HEADER)!r}, got {','.join(header)!r}")
        for row in reader:
            lineno = lines.lineno
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise DataError(f"{source}:{lineno}: expected 4 fields, got {len(row)}")
            rater, item, raw_value, group = (f.strip() for f in row)
            if not rater or not item or not group:
                raise DataError(f"{source}:{lineno}: empty identifier or group")
            try:
                value = float(raw_value)
            except ValueError:
                raise DataError(f"{source}:{lineno}: rating {raw_value!r} is not a number") from None
            if not math.isfinite(value):
                raise DataError(f"{source}:{lineno}: rating must be finite")
            if allowed_groups is not None and group not in allowed_groups:
                raise DataError(f"{source}:{lineno}: group {group!r} not in the configured whitelist")
            if rater in groups and groups[rater] != group:
                raise DataError(f"{source}:{lineno}: rater {rater!r} has conflicting groups {groups[rater]!r} and {group!r}")
            groups[rater] = group
            i = rater_index.setdefault(rater, len(rater_ids))
            if i == len(rater_ids):
                rater_ids.append(rater)
            j = item_index.setdefault(item, len(item_ids))
            if j == len(item_ids):
                item_ids.append(item)
            if (i, j) in seen:
                raise DataError(f"{source}:{lineno}: duplicate rating for ({rater!r}, {item!r})")
            seen.add((i, j))
            triples.append((i, j, value))

    if not triples:
        raise DataError(f"{source}: no ratings")
    values = np.full((len(rater_ids), len(item_ids)), np.nan)
    for i, j, v in triples:
        values[i, j] = v
    return RatingMatrix(values=values, rater_ids=rater_ids, item_ids=item_ids, groups=[groups[r] for r in rater_ids])


def save_ratings(m: RatingMatrix, path: str | os.PathLike, header_comment: str | None = None) -> None:
    """Write the matrix back out in the load_ratings schema (lossless)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(header_comment + "\n")
        writer = csv.writer(fh)
        writer.writerow(RATINGS_HEADER)
        mask = m.rated_mask()
        for i, rater in enumerate(m.rater_ids):
            for j in np.nonzero(mask[i])[0]:
                writer.writerow([rater, m.item_ids[j], repr(float(m.values[i, j])), m.groups[i]])


def filter_dataset(
    m: RatingMatrix,
    min_reviews_per_item: int,
    min_ratings_per_rater: int,
    protected_groups: set[str] | frozenset[str] = frozenset(),
) -> RatingMatrix:
    """Drop thin items, then thin raters.

    Items with fewer than ``min_reviews_per_item`` ratings go first; raters
    outside ``protected_groups`` with fewer than ``min_ratings_per_rater``
    ratings over the *surviving* items go second. Applied once, in that
    order (no fixpoint iteration), so the result is idempotent for fixed
    thresholds.
    """
    if min_reviews_per_item < 0 or min_ratings_per_rater < 0:
        raise ConfigError("filter thresholds must be >= 0")
    mask = m.rated_mask()
    keep_items = np.nonzero(mask.sum(axis=0) >= min_reviews_per_item)[0]
    counts_after = mask[:, keep_items].sum(axis=1)
    protected = np.array([g in protected_groups for g in m.groups])
    keep_raters = np.nonzero(protected | (counts_after >= min_ratings_per_rater))[0]
    result = m.take(keep_raters, keep_items)
    if result.n_ratings == 0:
        raise DataError("filtering removed every rating")
    return result


def z_normalize(m: RatingMatrix) -> NormalizedRatings:
    """Z-score each rater's ratings: (value - rater mean) / rater sample SD.

    The sample standard deviation (n-1 denominator) is used. Raters with
    fewer than two ratings or zero variance have no defined z-scores and
    are dropped with a warning; they could not contribute to correlations
    anyway.
    """
    counts = m.rating_counts()
    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # rows with < 2 ratings
        means = np.nanmean(m.values, axis=1)
        sds = np.nanstd(m.values, axis=1, ddof=1)
    ok = (counts >= 2) & np.isfinite(sds) & (sds > 0)
    dropped = [m.rater_ids[i] for i in np.nonzero(~ok)[0]]
    for rater in dropped:
        log.warning("dropping rater %r during normalization: fewer than 2 ratings or zero variance", rater)
    keep = np.nonzero(ok)[0]
    values = (m.values[keep] - means[keep, None]) / sds[keep, None]
    return NormalizedRatings(
        values=values,
        rater_ids=[m.rater_ids[i] for i in keep],
        item_ids=list(m.item_ids),
        groups=[m.groups[i] for i in keep],
        dropped_raters=dropped,
    )


def density(m: RatingMatrix, group: str) -> float:
    """Mean proportion of items rated by members of the group."""
    members = m.group_members(group)
    return float(np.mean(m.rating_counts()[members] / m.n_items))


def balance_sparsity(
    m: RatingMatrix,
    group: str,
    target_density: float,
    rng: np.random.Generator,
) -> RatingMatrix:
    """Thin one group's ratings down to a target density.

    For each rater in the group, ratings are removed uniformly at random
    until the rater keeps floor(target_density * n_items) of them, the
    largest count whose density does not exceed the target. Other groups
    are untouched. Deterministic given the generator state.
    """
    members = m.group_members(group)
    values = m.values.copy()
    # Epsilon guards the target == current-density case against float error.
    keep_count = int(math.floor(target_density * m.n_items + 1e-9))
    for i in members:
        rated = np.nonzero(np.isfinite(values[i]))[0]
        if target_density > len(rated) / m.n_items:
            raise DataError(
                f"target density {target_density} exceeds current density of rater {m.rater_ids[i]!r}"
            )
        n_remove = len(rated) - keep_count
        if n_remove <= 0:
            continue
        drop = rng.choice(rated, size=n_remove, replace=False)
        values[i, drop] = np.nan
    return RatingMatrix(values=values, rater_ids=list(m.rater_ids), item_ids=list(m.item_ids), groups=list(m.groups))
