"""RBF kernel evaluation and Gram-form RKHS norms."""

from __future__ import annotations

import numpy as np


def rbf_kernel(X: np.ndarray, Z: np.ndarray, gamma: float) -> np.ndarray:
    """Gram block k(x_i, z_j) = exp(-gamma * ||x_i - z_j||^2).

    X is (n, d) and Z is (m, d); returns (n, m).  Empty inputs yield an
    empty block so zero-anchor expansions evaluate to 0 naturally.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if X.shape[0] == 0 or Z.shape[0] == 0:
        return np.zeros((X.shape[0], Z.shape[0]))
    sq = (
        np.sum(X * X, axis=1)[:, None]
        - 2.0 * (X @ Z.T)
        + np.sum(Z * Z, axis=1)[None, :]
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def rkhs_norm(weights: np.ndarray, gram: np.ndarray) -> float:
    """sqrt(w' G w), clipped at 0 against roundoff."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        return 0.0
    return float(np.sqrt(max(w @ gram @ w, 0.0)))
