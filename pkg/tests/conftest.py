"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from tastenet.dataset import NormalizedRatings, RatingMatrix


def make_matrix(values, groups, rater_ids=None, item_ids=None) -> RatingMatrix:
    values = np.asarray(values, dtype=float)
    n, m = values.shape
    return RatingMatrix(
        values=values,
        rater_ids=rater_ids or [f"r{i}" for i in range(n)],
        item_ids=item_ids or [f"i{j}" for j in range(m)],
        groups=list(groups),
    )


def make_normalized(values, groups, rater_ids=None, item_ids=None) -> NormalizedRatings:
    values = np.asarray(values, dtype=float)
    n, m = values.shape
    return NormalizedRatings(
        values=values,
        rater_ids=rater_ids or [f"r{i}" for i in range(n)],
        item_ids=item_ids or [f"i{j}" for j in range(m)],
        groups=list(groups),
    )


def write_ratings_csv(path, rows, header="rater_id,item_id,rating,group"):
    lines = [header] + [",".join(str(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def dense_population():
    """6 raters x 8 items, fully dense, continuous values so correlation
    ranks are strict with probability one."""
    rng = np.random.default_rng(42)
    values = rng.standard_normal((6, 8)) + rng.standard_normal((1, 8))
    return make_matrix(values, groups=["blue"] * 3 + ["gold"] * 3)
