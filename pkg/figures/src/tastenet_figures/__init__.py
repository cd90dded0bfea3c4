"""Figure rendering for tastenet CSV exports.

Every renderer is a pure function of the input tables: no statistics are
recomputed here, no network access, and layouts are seeded, so the same
inputs always produce the same image.
"""

__version__ = "0.1.0"
