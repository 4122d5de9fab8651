"""Two-component PCA via power iteration with deflation.

Axes are fit on the real data only (mean-centered, covariance over rows);
synthetic rows are projected onto the same axes so both clouds share a
coordinate system. A dense eigensolver is deliberately not used here so
tests can cross-check against one independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError


@dataclass(frozen=True)
class Projection:
    real: np.ndarray        # (n_real, 2)
    synthetic: np.ndarray   # (n_syn, 2)
    axes: np.ndarray        # (f, 2) orthonormal columns
    eigenvalues: np.ndarray       # (2,)
    explained_fraction: np.ndarray  # (2,)


def top_eigenpairs(matrix: np.ndarray, k: int, iterations: int = 2000,
                   tol: float = 1e-12, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Leading k eigenpairs of a symmetric PSD matrix by power iteration.

    Deflation subtracts each converged component before the next run.
    Returns (eigenvalues (k,), eigenvectors (f, k)).
    """
    f = matrix.shape[0]
    if matrix.shape != (f, f):
        raise DataError("matrix must be square")
    work = matrix.copy()
    rng = np.random.default_rng(seed)
    values = np.zeros(k)
    vectors = np.zeros((f, k))
    for j in range(k):
        v = rng.standard_normal(f)
        # keep iterates orthogonal to already-found components so deflation
        # round-off cannot erode orthonormality
        v -= vectors[:, :j] @ (vectors[:, :j].T @ v)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iterations):
            w = work @ v
            w -= vectors[:, :j] @ (vectors[:, :j].T @ w)
            norm = np.linalg.norm(w)
            if norm < tol:
                break  # remaining spectrum is (numerically) zero
            w /= norm
            delta = np.linalg.norm(w - v)
            v, lam = w, norm
            if delta < tol:
                break
        values[j] = lam
        vectors[:, j] = v
        work -= lam * np.outer(v, v)
    return values, vectors


def pca_project(real: np.ndarray, synthetic: np.ndarray, seed: int = 0) -> Projection:
    """Project real and synthetic rows onto the real data's top-2 axes."""
    real = np.asarray(real, dtype=np.float64)
    synthetic = np.asarray(synthetic, dtype=np.float64).reshape(-1, real.shape[1]) \
        if np.asarray(synthetic).size else np.empty((0, real.shape[1]))
    if real.shape[1] < 2:
        raise DataError("PCA needs at least 2 features")
    if len(real) + len(synthetic) < 2:
        raise DataError("PCA needs at least 2 rows")
    mean = real.mean(axis=0)
    centered = real - mean
    cov = centered.T @ centered / max(1, len(real) - 1)
    total = float(np.trace(cov))
    if total <= 0.0:
        raise DataError("zero-variance data has no principal axes")
    values, axes = top_eigenpairs(cov, 2, seed=seed)
    return Projection(
        real=centered @ axes,
        synthetic=(synthetic - mean) @ axes,
        axes=axes,
        eigenvalues=values,
        explained_fraction=values / total,
    )
