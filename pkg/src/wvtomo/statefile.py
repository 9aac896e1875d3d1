"""Plain-text matrix files.

Format: first line holds the dimension d; each of the next d lines holds
d whitespace-separated entries written as ``re,im``.  Values are written
with 17 significant digits so a write/read cycle is bit-exact for float64.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import StateFileError


def write_state_file(path: str | Path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateFileError(f"state file needs a square matrix, got shape {m.shape}")
    d = m.shape[0]
    lines = [str(d)]
    for row in m:
        lines.append(" ".join(f"{v.real:.17g},{v.imag:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_state_file(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise StateFileError(f"{path}: line 1: expected the dimension, found nothing")
    try:
        d = int(lines[0].strip())
    except ValueError:
        raise StateFileError(f"{path}: line 1: expected an integer dimension, got {lines[0].strip()!r}")
    if d < 1:
        raise StateFileError(f"{path}: line 1: dimension must be positive, got {d}")
    if len([ln for ln in lines[1:] if ln.strip()]) < d:
        raise StateFileError(f"{path}: expected {d} matrix rows after line 1")

    m = np.zeros((d, d), dtype=complex)
    row = 0
    for idx, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if row >= d:
            raise StateFileError(f"{path}: line {idx}: more than {d} matrix rows")
        tokens = line.split()
        if len(tokens) != d:
            raise StateFileError(f"{path}: line {idx}: expected {d} entries, got {len(tokens)}")
        for col, tok in enumerate(tokens):
            parts = tok.split(",")
            if len(parts) != 2:
                raise StateFileError(f"{path}: line {idx}: entry {col + 1} is not 're,im': {tok!r}")
            try:
                re, im = float(parts[0]), float(parts[1])
            except ValueError:
                raise StateFileError(f"{path}: line {idx}: entry {col + 1} is not numeric: {tok!r}")
            if not (math.isfinite(re) and math.isfinite(im)):
                raise StateFileError(f"{path}: line {idx}: entry {col + 1} is not finite: {tok!r}")
            m[row, col] = complex(re, im)
        row += 1
    if row != d:
        raise StateFileError(f"{path}: expected {d} matrix rows, found {row}")
    return m
