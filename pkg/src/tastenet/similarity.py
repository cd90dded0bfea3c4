"""Pairwise taste similarity over overlapping items.

Similarity between two raters is the Pearson correlation of their
normalized ratings over the items both rated, with means and variances
taken over that overlap set. Pairs whose overlap does not exceed a
threshold are unreliable and fall back to the mean of the rater's
reliable correlations; raters with no reliable correlation at all stay
undefined and can never be consulted.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass

import numpy as np

from .dataset import NormalizedRatings
from .errors import ConfigError

log = logging.getLogger(__name__)

PROV_OBSERVED = 0
PROV_FALLBACK = 1
PROV_UNDEFINED = 2

_PROV_NAMES = {PROV_OBSERVED: "observed", PROV_FALLBACK: "fallback", PROV_UNDEFINED: "undefined"}

# Variances below this are zero for correlation purposes.
_VAR_EPS = 1e-12


@dataclass
class SimilarityMatrix:
    """All-pairs similarity with overlap counts and per-entry provenance."""

    weights: np.ndarray  # (n, n) float64; NaN where undefined; diagonal NaN
    overlaps: np.ndarray  # (n, n) int64, items rated by both
    provenance: np.ndarray  # (n, n) uint8: observed / fallback / undefined
    rater_ids: list[str]
    groups: list[str]
    overlap_threshold: int

    def __post_init__(self) -> None:
        self.rater_index = {r: i for i, r in enumerate(self.rater_ids)}

    @property
    def n_raters(self) -> int:
        return len(self.rater_ids)

    def weight(self, i: str, j: str) -> float:
        return float(self.weights[self.rater_index[i], self.rater_index[j]])

    def provenance_name(self, i: str, j: str) -> str:
        return _PROV_NAMES[int(self.provenance[self.rater_index[i], self.rater_index[j]])]


def _pairwise_pearson(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Correlation and overlap count for every rater pair in one shot.

    For a pair (i, j) with overlap set O and n = |O|, the estimator is the
    plain Pearson coefficient on the paired observations:

        r = (n * S_xy - S_x * S_y) / sqrt((n * S_xx - S_x^2)(n * S_yy - S_y^2))

    where the sums run over O only. All five sums are expressible as matrix
    products of the zero-filled value matrix and the rated-indicator
    matrix, so the whole computation stays in BLAS.
    """
    rated = np.isfinite(values)
    filled = np.where(rated, values, 0.0)
    ind = rated.astype(np.float64)

    overlap = ind @ ind.T  # n_ij
    sum_i = filled @ ind.T  # S_x over overlap(i, j), asymmetric
    sumsq_i = (filled * filled) @ ind.T  # S_xx over overlap
    cross = filled @ filled.T  # S_xy

    with np.errstate(invalid="ignore", divide="ignore"):
        cov = overlap * cross - sum_i * sum_i.T
        var_i = overlap * sumsq_i - sum_i**2
        var_j = var_i.T
        denom_sq = var_i * var_j
        corr = np.where(
            (overlap >= 2) & (var_i > _VAR_EPS) & (var_j > _VAR_EPS),
            cov / np.sqrt(np.where(denom_sq > 0, denom_sq, 1.0)),
            np.nan,
        )
    np.clip(corr, -1.0, 1.0, out=corr)
    # Mirror the upper triangle: the formula is symmetric, this makes it
    # bit-exact regardless of BLAS scheduling.
    iu = np.triu_indices(len(values), k=1)
    corr[(iu[1], iu[0])] = corr[iu]
    np.fill_diagonal(corr, np.nan)
    return corr, overlap.astype(np.int64)


def pairwise_correlation(i: str, j: str, r: NormalizedRatings) -> tuple[float, int]:
    """Similarity of one rater pair: (weight, overlap count).

    The weight is NaN (undefined) when the overlap has fewer than two items
    or either rater has zero variance on it.
    """
    if i == j:
        raise ConfigError("a rater has no similarity with itself")
    a = r.values[r.rater_index[i]]
    b = r.values[r.rater_index[j]]
    both = np.isfinite(a) & np.isfinite(b)
    n = int(both.sum())
    if n < 2:
        return float("nan"), n
    x = a[both]
    y = b[both]
    vx = x - x.mean()
    vy = y - y.mean()
    denom_sq = float((vx @ vx) * (vy @ vy))
    if denom_sq <= _VAR_EPS:
        return float("nan"), n
    return float(np.clip((vx @ vy) / np.sqrt(denom_sq), -1.0, 1.0)), n


def build_weights(values: np.ndarray, overlap_threshold: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw threshold-plus-fallback weight arrays for a value matrix.

    Entries whose overlap strictly exceeds the threshold (and whose
    correlation is defined) are observed. Every other entry in rater i's
    row takes the mean of i's observed weights; if i has none, the row
    stays undefined. Fallback rows are therefore not symmetric in general.
    """
    corr, overlap = _pairwise_pearson(values)
    observed = (overlap > overlap_threshold) & np.isfinite(corr)
    np.fill_diagonal(observed, False)

    n = len(values)
    provenance = np.full((n, n), PROV_UNDEFINED, dtype=np.uint8)
    weights = np.full((n, n), np.nan)
    weights[observed] = corr[observed]
    provenance[observed] = PROV_OBSERVED

    n_observed = observed.sum(axis=1)
    with np.errstate(invalid="ignore"):
        row_fallback = np.where(n_observed > 0, np.nansum(np.where(observed, corr, 0.0), axis=1) / np.maximum(n_observed, 1), np.nan)
    fallback_cells = ~observed & np.isfinite(row_fallback)[:, None]
    np.fill_diagonal(fallback_cells, False)
    weights = np.where(fallback_cells, row_fallback[:, None], weights)
    provenance[fallback_cells] = PROV_FALLBACK
    np.fill_diagonal(provenance, PROV_UNDEFINED)
    return weights, overlap, provenance


def build_similarity_matrix(r: NormalizedRatings, overlap_threshold: int = 5) -> SimilarityMatrix:
    """All-pairs similarity with the overlap threshold and mean fallback."""
    if overlap_threshold < 0:
        raise ConfigError("overlap threshold must be >= 0")
    weights, overlap, provenance = build_weights(r.values, overlap_threshold)
    return SimilarityMatrix(
        weights=weights,
        overlaps=overlap,
        provenance=provenance,
        rater_ids=list(r.rater_ids),
        groups=list(r.groups),
        overlap_threshold=overlap_threshold,
    )


def amplify_weight(w, rho: float):
    """Similarity-sensitivity weighting: w ** rho for w >= 0, else 0.

    rho = 0 therefore maps every non-negative weight (including 0) to 1 and
    every negative weight to 0.
    """
    if rho < 0:
        raise ConfigError("similarity sensitivity must be >= 0")
    arr = np.asarray(w, dtype=np.float64)
    out = np.where(arr >= 0, np.power(np.clip(arr, 0.0, None), rho), 0.0)
    if np.isscalar(w) or arr.ndim == 0:
        return float(out)
    return out


def correlation_profile(i: str, audience, s: SimilarityMatrix) -> tuple[float, float]:
    """Mean and sample SD of rater i's observed similarities with an audience.

    Only observed entries count; fallback and undefined entries are
    excluded. With fewer than two observed entries the SD is NaN, and with
    none the mean is NaN as well.
    """
    idx = s.rater_index[i]
    audience_idx = [s.rater_index[a] for a in audience]
    if idx in audience_idx:
        raise ConfigError("audience must exclude the rater itself")
    row = s.weights[idx, audience_idx]
    observed = s.provenance[idx, audience_idx] == PROV_OBSERVED
    vals = row[observed]
    if len(vals) == 0:
        return float("nan"), float("nan")
    mean = float(vals.mean())
    sd = float(vals.std(ddof=1)) if len(vals) >= 2 else float("nan")
    return mean, sd


def export_similarity_csv(s: SimilarityMatrix, path: str | os.PathLike, header_comment: str | None = None) -> None:
    """Write all defined pairs as rater_i,rater_j,weight,overlap,provenance."""
    from ._util import format_weight

    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(header_comment + "\n")
        writer = csv.writer(fh)
        writer.writerow(["rater_i", "rater_j", "weight", "overlap", "provenance"])
        for i, rid in enumerate(s.rater_ids):
            for j, other in enumerate(s.rater_ids):
                if i == j or s.provenance[i, j] == PROV_UNDEFINED:
                    continue
                writer.writerow(
                    [rid, other, format_weight(s.weights[i, j]), int(s.overlaps[i, j]), _PROV_NAMES[int(s.provenance[i, j])]]
                )
