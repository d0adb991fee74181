"""Aperiodic template enumeration for the non-overlapping template test."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def aperiodic_template_values(m: int) -> tuple[int, ...]:
    """All m-bit patterns that cannot overlap a shifted copy of themselves.

    A pattern is kept when no proper shift aligns a suffix with a prefix,
    which also means raw occurrence counts in a scan equal non-overlapping
    counts.  For m = 9 there are 148 such patterns.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    values = []
    for value in range(2**m):
        bits = [(value >> (m - 1 - k)) & 1 for k in range(m)]
        if all(bits[s:] != bits[: m - s] for s in range(1, m)):
            values.append(value)
    return tuple(values)


def aperiodic_templates(m: int) -> list[np.ndarray]:
    """Aperiodic templates as bit arrays, ascending by pattern value."""
    return [
        np.array([(v >> (m - 1 - k)) & 1 for k in range(m)], dtype=np.uint8)
        for v in aperiodic_template_values(m)
    ]


def template_label(value: int, m: int) -> str:
    return format(value, f"0{m}b")


__all__ = ["aperiodic_template_values", "aperiodic_templates", "template_label"]
