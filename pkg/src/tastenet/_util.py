"""Shared helpers: deterministic RNG derivation and output headers."""

from __future__ import annotations

import zlib

import numpy as np

# Domains keep independently derived streams from colliding even when the
# remaining path components happen to match.
RNG_SPLIT = 0
RNG_TIE = 1
RNG_SYNTH = 2
RNG_BALANCE = 3
RNG_CHOICE = 4


def stable_id_key(identifier: str) -> int:
    """Order-free integer key for a rater/item id (stable across runs)."""
    return zlib.crc32(identifier.encode("utf-8"))


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Derive an independent generator from a master seed and an integer path.

    The same (seed, path) always yields the same stream, on any platform,
    which is what makes repetitions safe to run in parallel.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(seq)


def meta_comment(seed: int | None = None, **extra: object) -> str:
    """Comment line recording provenance in CSV outputs (no timestamps:
    identical runs must produce identical bytes)."""
    from . import __version__

    parts = [f"tool=tastenet", f"version={__version__}"]
    if seed is not None:
        parts.append(f"seed={seed}")
    parts.extend(f"{k}={v}" for k, v in extra.items())
    return "# " + " ".join(parts)


def format_weight(w: float) -> str:
    """Format an edge weight / rating with enough digits to round-trip."""
    return format(float(w), ".12g")
