"""Embedding whole datasets as points via classical MDS on geodesic information distances."""

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from .divergence import DissimilarityMatrix, dissimilarity_matrix, fisher_geodesic_matrix


@dataclass(frozen=True)
class EmbeddingResult:
    coordinates: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    ids: tuple = ()
    labels: tuple = ()
    clamped: bool = False

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        e = self.coordinates.shape[1]
        w.writerow(["id", "label"] + [f"coord_{k + 1}" for k in range(e)])
        for i, row in enumerate(self.coordinates):
            label = self.labels[i] if self.labels and self.labels[i] is not None else ""
            w.writerow([self.ids[i], label] + [repr(float(x)) for x in row])
        return buf.getvalue()


def classical_mds(G, e):
    """Classical (Torgerson) MDS of a dissimilarity matrix into ``e`` dimensions.

    Negative eigenvalues of the double-centered matrix are clamped to zero
    (``clamped`` is set and a warning issued when a retained one was
    negative).  Each coordinate column is signed so that its largest-magnitude
    entry is positive.
    """
    values = np.asarray(getattr(G, "values", G), dtype=float)
    ids = tuple(getattr(G, "ids", None) or (str(i) for i in range(len(values))))
    N = len(values)
    if values.ndim != 2 or values.shape != (N, N):
        raise ValueError(f"dissimilarity matrix must be square, got {values.shape}")
    if not np.allclose(values, values.T, rtol=1e-10, atol=1e-12):
        raise ValueError("dissimilarity matrix must be symmetric")
    if not 1 <= e <= N - 1:
        raise ValueError(f"embedding dimension must satisfy 1 <= e <= N-1 = {N - 1}, got {e}")
    H = np.eye(N) - 1.0 / N
    B = -0.5 * H @ (values**2) @ H
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1][:e]
    evals, evecs = evals[order], evecs[:, order]
    clamped = bool(np.any(evals < 0))
    if clamped:
        warnings.warn("non-Euclidean dissimilarities: negative eigenvalues clamped to zero", RuntimeWarning)
    evals = np.maximum(evals, 0.0)
    Y = evecs * np.sqrt(evals)
    Y -= Y.mean(axis=0)
    idx = np.argmax(np.abs(Y), axis=0)
    signs = np.sign(Y[idx, np.arange(e)])
    signs[signs == 0] = 1.0
    return EmbeddingResult(Y * signs, evals, ids, (), clamped)


def fine(collection, e=2, bandwidth_rule="silverman"):
    """Symmetrized KL matrix, then geodesic closure of its square root, then classical MDS."""
    G = fisher_geodesic_matrix(dissimilarity_matrix(collection, bandwidth_rule))
    res = classical_mds(G, e)
    labels = tuple(getattr(collection, "labels", ()) or ())
    return EmbeddingResult(res.coordinates, res.eigenvalues, res.ids, labels, res.clamped)
