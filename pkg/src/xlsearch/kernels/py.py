"""Pure-numpy scan kernel, the fallback when the compiled one is absent."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def scan_scores(matrix: np.ndarray, norms: np.ndarray, q: np.ndarray, absolute: bool) -> np.ndarray:
    """Similarity of q against every row: dot / (row_norm * q_norm).

    ``norms`` carries precomputed row norms; all inputs float64.
    """
    qn = float(np.linalg.norm(q))
    if qn == 0.0:
        raise ValueError("query vector has zero norm")
    dots = matrix @ q
    if absolute:
        np.abs(dots, out=dots)
    return dots / (norms * qn)
