# flowpepa/naming.py
"""Key ordering and number formatting shared by the printer and the code generator."""

import math
import re
from typing import Tuple, Union

_DIGITS = re.compile(r"(\d+)")

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def natural_key(key: str) -> Tuple[Tuple[int, Union[int, str]], ...]:
    """Sort key that orders embedded numbers numerically: st2 < st10."""
    parts = []
    for chunk in _DIGITS.split(key):
        if not chunk:
            continue
        if chunk.isdigit():
            parts.append((0, int(chunk)))
        else:
            parts.append((1, chunk))
    return tuple(parts)


def format_number(value: float) -> str:
    """Shortest text that reads back to the same float; integral values drop the '.0'."""
    if math.isfinite(value) and value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def is_identifier(text: str) -> bool:
    return IDENTIFIER.match(text) is not None
