"""PCA and ICA projections of the pooled collection, used as comparison baselines."""

import numpy as np

from .data import DatasetCollection
from .density import as_points
from .optimizer import ProjectionMatrix


class ConvergenceError(RuntimeError):
    def __init__(self, message, delta):
        super().__init__(message)
        self.delta = delta


def _pooled(collection):
    sets = collection.point_sets if isinstance(collection, DatasetCollection) else [as_points(x) for x in collection]
    X = np.hstack(sets)
    if X.shape[1] <= X.shape[0]:
        raise ValueError(f"need more pooled points ({X.shape[1]}) than dimensions ({X.shape[0]})")
    return X


def _sign_fix(rows):
    idx = np.argmax(np.abs(rows), axis=1)
    signs = np.sign(rows[np.arange(len(rows)), idx])
    signs[signs == 0] = 1.0
    return rows * signs[:, None]


def pca_projection(collection, m):
    """Top-``m`` principal axes of the pooled, centered data as rows."""
    X = _pooled(collection)
    d = X.shape[0]
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    Xc = X - X.mean(axis=1, keepdims=True)
    evals, evecs = np.linalg.eigh(Xc @ Xc.T / (X.shape[1] - 1))
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    rank = int(np.sum(evals > evals[0] * d * np.finfo(float).eps)) if evals[0] > 0 else 0
    if rank < m:
        raise ValueError(f"pooled covariance has rank {rank} < m={m}")
    return ProjectionMatrix(_sign_fix(evecs[:, :m].T))


def _sym_decorrelate(W):
    s, u = np.linalg.eigh(W @ W.T)
    return (u * (1.0 / np.sqrt(s))) @ u.T @ W


def fast_ica(X, seed=0, max_iter=200, tol=1e-6):
    """Symmetric fixed-point ICA with a tanh contrast.

    ``X`` is ``d x n``.  Returns ``(unmixing, whitening)`` where ``unmixing``
    acts on whitened data; ``unmixing @ whitening`` is the unmixing matrix
    for centered data in the original coordinates.
    """
    d, n = X.shape
    Xc = X - X.mean(axis=1, keepdims=True)
    evals, evecs = np.linalg.eigh(Xc @ Xc.T / n)
    if evals.min() <= 0:
        raise ValueError("pooled covariance is singular; cannot whiten")
    K = (evecs / np.sqrt(evals)).T
    Z = K @ Xc
    rng = np.random.default_rng(seed)
    W = _sym_decorrelate(rng.standard_normal((d, d)))
    delta = np.inf
    for _ in range(max_iter):
        G = np.tanh(W @ Z)
        W_new = _sym_decorrelate(G @ Z.T / n - np.mean(1.0 - G**2, axis=1)[:, None] * W)
        delta = float(np.max(np.abs(np.abs(np.einsum("ij,ij->i", W_new, W)) - 1.0)))
        W = W_new
        if delta < tol:
            return W, K
    raise ConvergenceError(f"ICA did not converge in {max_iter} sweeps (last delta {delta:.3g})", delta)


def ica_projection(collection, m, seed=0, max_iter=200, tol=1e-6):
    """Highest-norm ``m`` ICA unmixing rows (original coordinates), orthonormalized."""
    X = _pooled(collection)
    d = X.shape[0]
    if not 1 <= m <= d:
        raise ValueError(f"need 1 <= m <= d, got m={m}, d={d}")
    W, K = fast_ica(X, seed=seed, max_iter=max_iter, tol=tol)
    unmixing = W @ K
    order = np.argsort(-np.linalg.norm(unmixing, axis=1), kind="stable")
    rows = unmixing[order[:m]]
    # Gram-Schmidt on the ranked rows, keeping their order
    Q, R = np.linalg.qr(rows.T)
    Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
    return ProjectionMatrix(_sign_fix(Q.T))
