"""Lexicographic enumeration of integer boxes and residue cubes."""

from __future__ import annotations

from typing import Iterator

import numpy as np


def box_size(dim: int, width: int) -> int:
    return width**dim


def grid_slice(dim: int, lo: int, width: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the lexicographic list of points in ``{lo..lo+width-1}^dim``."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, dim), dtype=np.int64)
    for k in range(dim - 1, -1, -1):
        out[:, k] = idx % width + lo
        idx //= width
    return out


def grid(dim: int, lo: int, width: int) -> np.ndarray:
    return grid_slice(dim, lo, width, 0, width**dim)


def iter_grid(dim: int, lo: int, width: int, chunk: int = 1 << 18) -> Iterator[np.ndarray]:
    total = width**dim
    for start in range(0, total, chunk):
        yield grid_slice(dim, lo, width, start, min(total, start + chunk))


def cross(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """All concatenations ``left[a] ++ right[b]`` in lexicographic (a, b) order."""
    nl, nr = left.shape[0], right.shape[0]
    return np.concatenate([np.repeat(left, nr, axis=0), np.tile(right, (nl, 1))], axis=1)
