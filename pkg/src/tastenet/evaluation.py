"""Monte-Carlo leave-n-out evaluation of pairwise-choice accuracy.

Each repetition holds out n rated items per target (removing them from the
target's own row only), relearns similarities on the remaining data, and
scores every grid cell on the same splits, so cells are compared on a
paired design. Accuracy is the fraction of correctly ordered held-out item
pairs, with ties resolved by fair coin and true-value ties worth one half.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ._util import RNG_SPLIT, RNG_TIE, derive_rng, stable_id_key
from .dataset import NormalizedRatings
from .errors import ConfigError, DataError
from .recommender import KnnConfig, choose_between, rank_advisers, resolve_pool
from .similarity import amplify_weight, build_weights

log = logging.getLogger(__name__)


@dataclass
class EvaluationPlan:
    grid: list[KnnConfig]
    holdout_per_rater: int = 10
    repetitions: int = 1000
    master_seed: int = 0
    targets: list[str] | None = None  # None = every rater

    def __post_init__(self) -> None:
        if not self.grid:
            raise ConfigError("evaluation grid is empty")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.holdout_per_rater < 2:
            raise ConfigError("need at least 2 held-out items to form a pair")


@dataclass
class PerformanceReport:
    """Per-target and aggregate accuracy for every grid cell."""

    cells: list[KnnConfig]
    target_ids: list[str]
    target_groups: list[str]
    per_target: np.ndarray  # (n_cells, n_targets) mean accuracy over repetitions
    repetitions: int
    master_seed: int
    holdout_per_rater: int
    incomplete_committees: np.ndarray  # (n_cells,) committees seated short of k
    zero_weight_fallbacks: np.ndarray  # (n_cells,) equal-weight fallback predictions
    excluded_targets: list[str] = field(default_factory=list)

    def aggregate(self, cell_idx: int) -> float:
        """Unweighted mean of per-target accuracies for one cell."""
        return float(self.per_target[cell_idx].mean())

    def group_aggregate(self, cell_idx: int, group: str) -> float:
        sel = [i for i, g in enumerate(self.target_groups) if g == group]
        if not sel:
            raise DataError(f"no evaluated targets in group {group!r}")
        return float(self.per_target[cell_idx, sel].mean())

    def rows(self):
        """Long-format rows: one per (cell, target)."""
        for ci, cfg in enumerate(self.cells):
            for ti, (tid, grp) in enumerate(zip(self.target_ids, self.target_groups)):
                yield {
                    "k": cfg.k,
                    "rho": cfg.rho,
                    "pool": cfg.pool_name(),
                    "target_group": grp,
                    "target_id": tid,
                    "mean_accuracy": float(self.per_target[ci, ti]),
                    "repetitions": self.repetitions,
                }

    def aggregate_rows(self):
        """One row per (cell, target_group) plus an 'all' row per cell."""
        group_order = list(dict.fromkeys(self.target_groups))
        for ci, cfg in enumerate(self.cells):
            base = {"k": cfg.k, "rho": cfg.rho, "pool": cfg.pool_name(), "repetitions": self.repetitions}
            for grp in group_order:
                sel = [i for i, g in enumerate(self.target_groups) if g == grp]
                yield {
                    **base,
                    "target_group": grp,
                    "mean_accuracy": float(self.per_target[ci, sel].mean()),
                    "n_targets": len(sel),
                }
            yield {
                **base,
                "target_group": "all",
                "mean_accuracy": self.aggregate(ci),
                "n_targets": len(self.target_ids),
            }


def make_holdout_split(
    r: NormalizedRatings,
    target: str,
    n: int,
    rng: np.random.Generator,
) -> tuple[NormalizedRatings, list[str]]:
    """Hold out n of the target's rated items.

    Only the target's own ratings of the chosen items leave the training
    data; other raters' ratings of those items remain visible, otherwise no
    adviser could ever supply them.
    """
    t = r.rater_index[target]
    rated = np.nonzero(np.isfinite(r.values[t]))[0]
    if n > len(rated):
        raise DataError(f"target {target!r} has {len(rated)} ratings, cannot hold out {n}")
    test_idx = np.sort(rng.choice(rated, size=n, replace=False)) if n else np.array([], dtype=int)
    values = r.values.copy()
    values[t, test_idx] = np.nan
    train = NormalizedRatings(
        values=values,
        rater_ids=list(r.rater_ids),
        item_ids=list(r.item_ids),
        groups=list(r.groups),
        dropped_raters=list(getattr(r, "dropped_raters", [])),
    )
    return train, [r.item_ids[j] for j in test_idx]


def score_individual(
    target: str,
    test_items: list[str],
    predictor,
    truth: NormalizedRatings,
    rng: np.random.Generator,
) -> float:
    """Fraction of correctly ordered held-out pairs for one target.

    Every unordered pair of test items is compared once; the predictor's
    choice earns 1 when it matches the target's true order, 0 when it does
    not, and 0.5 when the true values tie.
    """
    t = truth.rater_index[target]
    pairs = list(combinations(sorted(test_items, key=truth.item_index.__getitem__), 2))
    if not pairs:
        raise ConfigError("need at least two test items to score")
    total = 0.0
    for item_a, item_b in pairs:
        ua = truth.values[t, truth.item_index[item_a]]
        ub = truth.values[t, truth.item_index[item_b]]
        if not (np.isfinite(ua) and np.isfinite(ub)):
            raise DataError("test item without a true rating")
        choice = choose_between(target, item_a, item_b, predictor, rng)
        if ua == ub:
            total += 0.5
        else:
            true_winner = item_a if ua > ub else item_b
            total += 1.0 if choice == true_winner else 0.0
    return total / len(pairs)


# ---------------------------------------------------------------------------
# Vectorized evaluation engine
# ---------------------------------------------------------------------------


@dataclass
class _CellGroup:
    """Cells sharing a similarity threshold, pool, and seating rule can share
    one ranked adviser list per target and differ only in (k, rho)."""

    overlap_threshold: int
    pool_key: object
    seat_negative: bool
    ks: np.ndarray  # unique ks, ascending
    rhos: list[float]  # unique rhos, ascending
    cell_slots: list[tuple[int, int, int]]  # (cell_idx, k_pos, rho_pos)
    pool_mask: np.ndarray | None = None
    pool_rng_key: int = 0


def _plan_cell_groups(grid: list[KnnConfig], groups: list[str], rater_ids: list[str]) -> list[_CellGroup]:
    by_key: dict[tuple, list[tuple[int, KnnConfig]]] = {}
    for ci, cfg in enumerate(grid):
        key = (cfg.overlap_threshold, cfg.pool_name(), cfg.seat_negative)
        by_key.setdefault(key, []).append((ci, cfg))
    out = []
    for (thr, pool_name, seat_neg), cells in by_key.items():
        ks = np.array(sorted({cfg.k for _, cfg in cells}), dtype=int)
        rhos = sorted({cfg.rho for _, cfg in cells})
        slots = [
            (ci, int(np.searchsorted(ks, cfg.k)), rhos.index(cfg.rho))
            for ci, cfg in cells
        ]
        pool_spec = cells[0][1].pool
        out.append(
            _CellGroup(
                overlap_threshold=thr,
                pool_key=pool_name,
                seat_negative=seat_neg,
                ks=ks,
                rhos=rhos,
                cell_slots=slots,
                pool_mask=resolve_pool(pool_spec, groups, rater_ids),
                pool_rng_key=stable_id_key(pool_name),
            )
        )
    return out


def _evaluate_repetition(
    values: np.ndarray,
    target_rows: np.ndarray,
    target_keys: np.ndarray,
    holdout_n: int,
    master_seed: int,
    rep: int,
    cell_groups: list[_CellGroup],
    n_cells: int,
    pair_a: np.ndarray,
    pair_b: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Accuracy of every (cell, target) for one repetition."""
    n_targets = len(target_rows)
    acc = np.zeros((n_cells, n_targets))
    incomplete = np.zeros(n_cells, dtype=np.int64)
    fallbacks = np.zeros(n_cells, dtype=np.int64)

    train = values.copy()
    test_items = np.empty((n_targets, holdout_n), dtype=int)
    for ti, row in enumerate(target_rows):
        rng = derive_rng(master_seed, RNG_SPLIT, rep, int(target_keys[ti]))
        rated = np.nonzero(np.isfinite(values[row]))[0]
        test_items[ti] = np.sort(rng.choice(rated, size=holdout_n, replace=False))
        train[row, test_items[ti]] = np.nan

    weights_by_threshold = {
        thr: build_weights(train, thr)[0] for thr in {g.overlap_threshold for g in cell_groups}
    }

    for group in cell_groups:
        weights = weights_by_threshold[group.overlap_threshold]
        ks = group.ks
        n_k, n_rho = len(ks), len(group.rhos)
        max_k = int(ks[-1])
        for ti, row in enumerate(target_rows):
            ranked = rank_advisers(row, weights[row], group.pool_mask, group.seat_negative)
            ranked_w = weights[row, ranked]
            preds = np.full((holdout_n, n_k, n_rho), np.nan)
            lengths = np.zeros(holdout_n, dtype=int)
            used_fallback = np.zeros((holdout_n, n_k, n_rho), dtype=bool)
            for mi, m in enumerate(test_items[ti]):
                avail = np.isfinite(train[ranked, m])
                members_w = ranked_w[avail][:max_k]
                n_members = len(members_w)
                lengths[mi] = n_members
                if n_members == 0:
                    continue
                ratings = train[ranked[avail][:max_k], m]
                k_pos = np.minimum(ks, n_members) - 1
                mean_by_k = np.cumsum(ratings)[k_pos] / (k_pos + 1)
                for ri, rho in enumerate(group.rhos):
                    w = amplify_weight(members_w, rho)
                    den = np.cumsum(w)[k_pos]
                    num = np.cumsum(w * ratings)[k_pos]
                    zero = den <= 0.0
                    preds[mi, :, ri] = np.where(zero, mean_by_k, num / np.where(zero, 1.0, den))
                    used_fallback[mi, :, ri] = zero

            truth = values[row, test_items[ti]]
            tdiff = truth[pair_a] - truth[pair_b]
            pdiff = preds[pair_a] - preds[pair_b]  # (n_pairs, n_k, n_rho)
            tie_rng = derive_rng(master_seed, RNG_TIE, rep, int(target_keys[ti]), group.pool_rng_key)
            coin = tie_rng.random(pdiff.shape) < 0.5
            with np.errstate(invalid="ignore"):
                pred_tie = ~np.isfinite(pdiff) | (pdiff == 0)
                correct = np.where(pred_tie, coin, (pdiff > 0) == (tdiff[:, None, None] > 0))
            score = np.where(tdiff[:, None, None] == 0, 0.5, correct.astype(np.float64))
            acc_kr = score.mean(axis=0)

            for cell_idx, k_pos_i, rho_pos_i in group.cell_slots:
                acc[cell_idx, ti] = acc_kr[k_pos_i, rho_pos_i]
                incomplete[cell_idx] += int((lengths < ks[k_pos_i]).sum())
                fallbacks[cell_idx] += int(used_fallback[:, k_pos_i, rho_pos_i].sum())

    return acc, incomplete, fallbacks


def _run_rep_chunk(args) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    (values, target_rows, target_keys, holdout_n, master_seed, rep_start, rep_stop, cell_groups, n_cells, pair_a, pair_b) = args
    accs = []
    incomplete = np.zeros(n_cells, dtype=np.int64)
    fallbacks = np.zeros(n_cells, dtype=np.int64)
    for rep in range(rep_start, rep_stop):
        acc, inc, fb = _evaluate_repetition(
            values, target_rows, target_keys, holdout_n, master_seed, rep, cell_groups, n_cells, pair_a, pair_b
        )
        accs.append(acc)
        incomplete += inc
        fallbacks += fb
    return rep_start, np.stack(accs), incomplete, fallbacks


def run_evaluation(plan: EvaluationPlan, data: NormalizedRatings, threads: int = 1) -> PerformanceReport:
    """Run the full Monte-Carlo evaluation.

    Deterministic for a fixed master seed: every repetition and every
    target derives its own generator, and the across-repetition mean is
    taken over an array in repetition order, so thread count does not
    change the result.
    """
    wanted = plan.targets if plan.targets is not None else list(data.rater_ids)
    unknown = [t for t in wanted if t not in data.rater_index]
    if unknown:
        raise DataError(f"unknown evaluation targets: {unknown}")
    counts = data.rating_counts()
    target_ids, excluded = [], []
    for t in wanted:
        if counts[data.rater_index[t]] >= plan.holdout_per_rater:
            target_ids.append(t)
        else:
            excluded.append(t)
            log.warning("excluding target %r: fewer than %d ratings", t, plan.holdout_per_rater)
    if not target_ids:
        raise DataError("no target has enough ratings for the requested holdout")

    target_rows = np.array([data.rater_index[t] for t in target_ids])
    target_keys = np.array([stable_id_key(t) for t in target_ids], dtype=np.uint64)
    cell_groups = _plan_cell_groups(plan.grid, data.groups, data.rater_ids)
    pair_a, pair_b = map(
        np.array, zip(*combinations(range(plan.holdout_per_rater), 2))
    )

    n_cells = len(plan.grid)
    per_rep = np.empty((plan.repetitions, n_cells, len(target_ids)))
    incomplete = np.zeros(n_cells, dtype=np.int64)
    fallbacks = np.zeros(n_cells, dtype=np.int64)

    def chunk_args(start: int, stop: int):
        return (
            data.values,
            target_rows,
            target_keys,
            plan.holdout_per_rater,
            plan.master_seed,
            start,
            stop,
            cell_groups,
            n_cells,
            pair_a,
            pair_b,
        )

    done = 0

    def note_progress(new_reps: int) -> None:
        nonlocal done
        done += new_reps
        log.info("evaluation progress: %d/%d repetitions", done, plan.repetitions)

    if threads > 1 and plan.repetitions > 1:
        from concurrent.futures import ProcessPoolExecutor

        n_chunks = min(threads * 4, plan.repetitions)
        bounds = np.linspace(0, plan.repetitions, n_chunks + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for rep_start, acc_block, inc, fb in pool.map(
                _run_rep_chunk,
                [chunk_args(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a],
            ):
                per_rep[rep_start : rep_start + len(acc_block)] = acc_block
                incomplete += inc
                fallbacks += fb
                note_progress(len(acc_block))
    else:
        step = max(1, plan.repetitions // 10)
        for start in range(0, plan.repetitions, step):
            stop = min(start + step, plan.repetitions)
            _, acc_block, inc, fb = _run_rep_chunk(chunk_args(start, stop))
            per_rep[start:stop] = acc_block
            incomplete += inc
            fallbacks += fb
            note_progress(stop - start)

    return PerformanceReport(
        cells=list(plan.grid),
        target_ids=target_ids,
        target_groups=[data.groups[data.rater_index[t]] for t in target_ids],
        per_target=per_rep.mean(axis=0),
        repetitions=plan.repetitions,
        master_seed=plan.master_seed,
        holdout_per_rater=plan.holdout_per_rater,
        incomplete_committees=incomplete,
        zero_weight_fallbacks=fallbacks,
        excluded_targets=excluded,
    )
