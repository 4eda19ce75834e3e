"""CSV interchange for sample matrices."""

from __future__ import annotations

import numpy as np

from .elliptical import as_sample
from .errors import InputError


def write_sample_csv(path, x) -> None:
    """Plain comma-separated rows, no header, full float precision."""
    np.savetxt(path, np.asarray(x, dtype=float), delimiter=",", fmt="%.17g")


def read_sample_csv(path, name=None):
    """Read an n x p sample; a single non-numeric header row is skipped."""
    name = name or str(path)
    try:
        with open(path) as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not lines:
        raise InputError(f"{name} is empty")
    try:
        [float(v) for v in lines[0].split(",")]
    except ValueError:
        lines = lines[1:]
    try:
        rows = [[float(v) for v in ln.split(",")] for ln in lines]
    except ValueError as exc:
        raise InputError(f"{name}: {exc}") from None
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise InputError(f"{name}: ragged rows (widths {sorted(widths)})")
    return as_sample(np.array(rows, dtype=float).reshape(len(rows), -1), name)
