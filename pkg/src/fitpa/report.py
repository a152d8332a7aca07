"""Deterministic CSV-style report text: LF endings, '.' decimals, 17 significant digits."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value + 0.0, ".17g")  # + 0.0 turns -0.0 into 0.0
    if isinstance(value, np.integer):
        return str(int(value))
    if isinstance(value, np.floating):
        return fmt(float(value))
    return str(value)


def table(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def key_values(pairs: Iterable[tuple[str, object]]) -> str:
    return "".join(f"{k}={fmt(v)}\n" for k, v in pairs)
