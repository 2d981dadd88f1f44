"""Tiny numeric helpers used across modules."""

from __future__ import annotations

import math


def round_half_up(x: float) -> int:
    """Round to nearest integer, halves away from zero toward +inf.

    Used everywhere instead of built-in round() so .5 cases do not
    depend on banker's rounding.
    """
    return math.floor(x + 0.5)


def clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x
