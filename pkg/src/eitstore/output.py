"""Deterministic numeric formatting for data files.

All CSV emitters use 9 significant digits in scientific notation so that
identical configurations reproduce byte-identical outputs.
"""


def format_float(x: float) -> str:
    return f"{x:.8e}"
