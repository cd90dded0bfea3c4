"""Synthetic rating populations with planted latent tastes.

Items carry latent scores on a handful of taste archetypes. Every rater
mixes the archetypes: a group-level anchor weight pulls members toward the
first archetype (the shared-consensus axis) and the remainder is a random
convex mix, then each rating adds personal noise. Group knobs for count,
density, noise, and anchor weight let one plant a consistent, prolific
group next to a noisy, sparse one and know the true latent utilities for
oracle scoring.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ._util import RNG_SYNTH, derive_rng
from .dataset import RatingMatrix
from .errors import ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupSpec:
    name: str
    count: int
    density: float  # fraction of items each member rates
    noise_sd: float  # personal noise on top of the latent utility, z-like units
    anchor_weight: float = 0.8  # pull toward the shared first archetype, in [0, 1]

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ConfigError("group count must be >= 1")
        if not 0 < self.density <= 1:
            raise ConfigError("density must be in (0, 1]")
        if self.noise_sd < 0:
            raise ConfigError("noise SD must be >= 0")
        if not 0 <= self.anchor_weight <= 1:
            raise ConfigError("anchor weight must be in [0, 1]")


@dataclass(frozen=True)
class SyntheticSpec:
    groups: tuple[GroupSpec, ...]
    n_items: int = 200
    n_archetypes: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.groups:
            raise ConfigError("need at least one group")
        if self.n_items < 1 or self.n_archetypes < 1:
            raise ConfigError("need at least one item and one archetype")


@dataclass
class SyntheticTruth:
    """Hidden generative state for oracle scoring."""

    latent: np.ndarray  # (n_raters, n_items) noise-free utilities
    mixes: np.ndarray  # (n_raters, n_archetypes) convex archetype mixes
    archetype_scores: np.ndarray  # (n_archetypes, n_items)
    spec: SyntheticSpec

    def expected_correlation(self, i: int, j: int) -> float:
        """True rating correlation of two raters implied by their mixes."""
        noise = np.array([self._noise_sd(i), self._noise_sd(j)])
        ci, cj = self.mixes[i], self.mixes[j]
        return float((ci @ cj) / math.sqrt((ci @ ci + noise[0] ** 2) * (cj @ cj + noise[1] ** 2)))

    def _noise_sd(self, i: int) -> float:
        offset = 0
        for g in self.spec.groups:
            if i < offset + g.count:
                return g.noise_sd
            offset += g.count
        raise IndexError(i)


def default_spec(seed: int = 0, n_items: int = 200) -> SyntheticSpec:
    """Two-group population shaped like a critics-vs-amateurs rating site:
    a small consistent prolific group and a large noisy sparse one."""
    return SyntheticSpec(
        groups=(
            GroupSpec(name="critic", count=14, density=0.5, noise_sd=0.7, anchor_weight=0.9),
            GroupSpec(name="amateur", count=120, density=0.05, noise_sd=1.3, anchor_weight=0.55),
        ),
        n_items=n_items,
        n_archetypes=4,
        seed=seed,
    )


def generate_population(spec: SyntheticSpec, rng: np.random.Generator | None = None) -> tuple[RatingMatrix, SyntheticTruth]:
    """Draw one population: ratings plus the hidden truth record.

    Sampling order is fixed (archetype scores, then per rater in index
    order: mix, noise, rated subset), so the same spec and seed always
    produce bit-identical output.
    """
    if rng is None:
        rng = derive_rng(spec.seed, RNG_SYNTH)
    n_raters = sum(g.count for g in spec.groups)
    archetype_scores = rng.standard_normal((spec.n_archetypes, spec.n_items))

    values = np.full((n_raters, spec.n_items), np.nan)
    mixes = np.empty((n_raters, spec.n_archetypes))
    latent = np.empty((n_raters, spec.n_items))
    rater_ids: list[str] = []
    groups: list[str] = []

    row = 0
    for g in spec.groups:
        n_rated = int(math.floor(g.density * spec.n_items + 1e-9))
        if n_rated < 1:
            raise ConfigError(f"group {g.name!r}: density x item count is below one rating")
        for member in range(g.count):
            rater_ids.append(f"{g.name}_{member:03d}")
            groups.append(g.name)
            free = rng.dirichlet(np.ones(spec.n_archetypes))
            mix = g.anchor_weight * np.eye(spec.n_archetypes)[0] + (1 - g.anchor_weight) * free
            mixes[row] = mix
            latent[row] = mix @ archetype_scores
            noise = rng.standard_normal(spec.n_items) * g.noise_sd
            rated = rng.choice(spec.n_items, size=n_rated, replace=False)
            values[row, rated] = latent[row, rated] + noise[rated]
            row += 1

    matrix = RatingMatrix(
        values=values,
        rater_ids=rater_ids,
        item_ids=[f"item_{j:04d}" for j in range(spec.n_items)],
        groups=groups,
    )
    return matrix, SyntheticTruth(latent=latent, mixes=mixes, archetype_scores=archetype_scores, spec=spec)


# ---------------------------------------------------------------------------
# Spec files: flat key = value lines, with group.<name>.<field> entries
# ---------------------------------------------------------------------------


def parse_spec_file(path) -> SyntheticSpec:
    """Read a flat key-value spec file.

    Recognized keys: items, archetypes, seed, and per group
    group.<name>.count / .density / .noise_sd / .anchor_weight.
    """
    scalars: dict[str, str] = {}
    group_fields: dict[str, dict[str, str]] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key.startswith("group."):
                try:
                    _, name, fieldname = key.split(".", 2)
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: group keys look like group.<name>.<field>") from None
                if name not in group_fields:
                    group_fields[name] = {}
                    order.append(name)
                group_fields[name][fieldname] = value
            else:
                scalars[key] = value

    def to_int(name: str, default: int) -> int:
        try:
            return int(scalars.get(name, default))
        except ValueError:
            raise ConfigError(f"{path}: {name} must be an integer") from None

    groups = []
    for name in order:
        fields_ = group_fields[name]
        try:
            groups.append(
                GroupSpec(
                    name=name,
                    count=int(fields_["count"]),
                    density=float(fields_["density"]),
                    noise_sd=float(fields_.get("noise_sd", 1.0)),
                    anchor_weight=float(fields_.get("anchor_weight", 0.8)),
                )
            )
        except KeyError as missing:
            raise ConfigError(f"{path}: group {name!r} is missing {missing}") from None
        except ValueError:
            raise ConfigError(f"{path}: group {name!r} has a non-numeric field") from None
    if not groups:
        raise ConfigError(f"{path}: no groups defined")
    return SyntheticSpec(
        groups=tuple(groups),
        n_items=to_int("items", 200),
        n_archetypes=to_int("archetypes", 4),
        seed=to_int("seed", 0),
    )
