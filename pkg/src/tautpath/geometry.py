"""Small shared geometry helpers."""

from __future__ import annotations

import numpy as np


def unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def orthonormal_complement(direction) -> np.ndarray:
    """Deterministic orthonormal basis of the complement of a direction.

    Returns an (n-1, n) array of row vectors. The first row is the
    coordinate axis least aligned with the direction, Gram-Schmidt
    orthogonalized, so it is stable under small perturbations of the input.
    """
    d = unit(direction)
    n = d.size
    order = np.argsort(np.abs(d), kind="stable")
    basis = []
    for idx in order:
        e = np.zeros(n)
        e[idx] = 1.0
        v = e - (e @ d) * d
        for b in basis:
            v = v - (v @ b) * b
        norm = float(np.linalg.norm(v))
        if norm > 1e-12:
            basis.append(v / norm)
        if len(basis) == n - 1:
            break
    return np.array(basis)


def point_segment_distance(x, a, b) -> float:
    """Distance from point x to the closed segment [a, b]."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(x - a))
    t = float((x - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(x - (a + t * ab)))


def index_runs(mask) -> list:
    """Maximal runs of consecutive True entries as (first, last) index pairs."""
    mask = np.asarray(mask, dtype=bool)
    runs = []
    i = 0
    while i < len(mask):
        if mask[i]:
            j = i
            while j + 1 < len(mask) and mask[j + 1]:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs
