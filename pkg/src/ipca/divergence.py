"""Kullback-Leibler dissimilarities between point clouds and their geodesic closure."""

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, DatasetCollection
from .density import as_points, fit_kde, kde_log_values, log_density_many, select_bandwidth

KINDS = ("kl_symmetric", "fisher_geodesic")


@dataclass(frozen=True)
class DissimilarityMatrix:
    values: np.ndarray = field(repr=False)
    kind: str = "kl_symmetric"
    ids: tuple = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"dissimilarity matrix must be square, got shape {v.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown dissimilarity kind {self.kind!r}")
        if not np.all(np.isfinite(v)):
            raise ValueError("dissimilarity values must be finite")
        if not np.allclose(v, v.T, rtol=1e-12, atol=1e-12):
            raise ValueError("dissimilarity matrix must be symmetric")
        if np.any(np.diag(v) != 0):
            raise ValueError("dissimilarity matrix must have a zero diagonal")
        if np.any(v < 0):
            raise ValueError("dissimilarity values must be >= 0")
        ids = tuple(str(i) for i in self.ids) if self.ids is not None else tuple(str(i) for i in range(len(v)))
        if len(ids) != len(v):
            raise ValueError(f"{len(ids)} ids for a {len(v)}x{len(v)} matrix")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "ids", ids)

    def __len__(self):
        return len(self.values)

    def ids_digest(self):
        return ids_digest(self.ids)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.ids)
        for row in self.values:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, kind="kl_symmetric"):
        rows = list(csv.reader(io.StringIO(text)))
        return cls(np.array([[float(x) for x in r] for r in rows[1:] if r]), kind, tuple(rows[0]))

    def to_json(self, **extra):
        doc = {
            "kind": self.kind,
            "ids": list(self.ids),
            "ids_sha256": self.ids_digest(),
            "values": self.values.tolist(),
        }
        doc.update(extra)
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(np.array(doc["values"], dtype=float), doc["kind"], tuple(doc["ids"]))


def ids_digest(ids):
    return hashlib.sha256("\x1f".join(ids).encode("utf-8")).hexdigest()


def _point_sets(collection):
    if isinstance(collection, DatasetCollection):
        return collection.point_sets, collection.ids
    sets = [x.points if isinstance(x, Dataset) else as_points(x) for x in collection]
    return sets, None


def kl_plugin(p, q, samples_from_p=None):
    """Plug-in estimate of ``KL(p || q)``: mean log-ratio over samples from ``p``.

    Defaults to the points that built ``p``.  The raw value is returned and can
    be slightly negative.
    """
    samples = p.points if samples_from_p is None else as_points(samples_from_p)
    if not (p.dim == q.dim == samples.shape[0]):
        raise ValueError(f"dimension mismatch: p={p.dim}, q={q.dim}, samples={samples.shape[0]}")
    return float(np.mean(log_density_many(p, samples) - log_density_many(q, samples)))


def dkl_symmetric(x_i, x_j, bandwidth_rule="silverman"):
    """Symmetrized KL between the KDEs of two point clouds, clamped at zero."""
    pts_i = x_i.points if isinstance(x_i, Dataset) else as_points(x_i)
    pts_j = x_j.points if isinstance(x_j, Dataset) else as_points(x_j)
    if pts_i.shape[0] != pts_j.shape[0]:
        raise ValueError(f"dimension mismatch: {pts_i.shape[0]} vs {pts_j.shape[0]}")
    p, q = fit_kde(pts_i, bandwidth_rule), fit_kde(pts_j, bandwidth_rule)
    return max(0.0, kl_plugin(p, q) + kl_plugin(q, p))


def plugin_kl_table(point_sets, bandwidths):
    """``K[i, j]`` = plug-in ``KL(p_i || p_j)`` for every ordered pair.

    Each KDE ``p_k`` is centered on ``point_sets[k]`` with bandwidth
    ``bandwidths[k]``; samples for row ``i`` are the points of set ``i``.
    """
    n_sets = len(point_sets)
    # logd[i][k]: log p_k evaluated at the points of set i
    K = np.zeros((n_sets, n_sets))
    for i, pts in enumerate(point_sets):
        logd = [kde_log_values(pts, point_sets[k], bandwidths[k]) for k in range(n_sets)]
        for j in range(n_sets):
            if j != i:
                K[i, j] = np.mean(logd[i] - logd[j])
    return K


def symmetrize(K):
    """Clamp ``K + K.T`` at zero with an exactly zero diagonal."""
    D = np.maximum(K + K.T, 0.0)
    np.fill_diagonal(D, 0.0)
    return D


def dissimilarity_matrix(collection, bandwidth_rule="silverman", bandwidths=None):
    """Pairwise symmetrized KL matrix of a collection (or a list of ``m x n`` arrays).

    Bandwidths are chosen independently per point set unless given explicitly.
    """
    sets, ids = _point_sets(collection)
    if len(sets) < 2:
        raise ValueError(f"need N >= 2 point sets, got {len(sets)}")
    dims = {s.shape[0] for s in sets}
    if len(dims) != 1:
        raise ValueError(f"point sets have differing dimensions {sorted(dims)}")
    if bandwidths is None:
        bandwidths = [select_bandwidth(s, bandwidth_rule) for s in sets]
    return DissimilarityMatrix(symmetrize(plugin_kl_table(sets, bandwidths)), "kl_symmetric", ids)


def fisher_geodesic_matrix(D):
    """Shortest-path closure of the complete graph with edge lengths ``sqrt(D)``."""
    if D.kind != "kl_symmetric":
        raise ValueError(f"expected a kl_symmetric matrix, got {D.kind!r}")
    W = np.sqrt(D.values)
    # Floyd-Warshall; zero-length edges between identical densities are kept
    for k in range(len(W)):
        W = np.minimum(W, W[:, k, None] + W[None, k, :])
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, 0.0)
    return DissimilarityMatrix(W, "fisher_geodesic", D.ids)
