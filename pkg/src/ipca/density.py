"""Isotropic Gaussian kernel density estimates.

Kernel centers are stored as an ``m x n`` array (one column per point).  The
kernel covariance is ``h**2 * I``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class KdeModel:
    points: np.ndarray = field(repr=False)
    bandwidth: float

    def __post_init__(self):
        pts = as_points(self.points)
        if not np.all(np.isfinite(pts)):
            raise ValueError("KDE points must be finite")
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "bandwidth", float(self.bandwidth))

    @property
    def dim(self):
        return self.points.shape[0]

    @property
    def n(self):
        return self.points.shape[1]


def as_points(points):
    """Coerce to a float ``m x n`` array; a 1-D input is a single-dimension cloud."""
    pts = np.array(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2:
        raise ValueError(f"points must be an m x n array, got ndim={pts.ndim}")
    if pts.shape[1] == 0:
        raise ValueError("empty point set")
    return pts


def parse_bandwidth_rule(rule):
    """Normalize a bandwidth rule to ``"silverman"`` or a positive float.

    Accepts ``"silverman"``, a number, ``"fixed:<h>"`` or ``("fixed", h)``.
    """
    if isinstance(rule, str):
        if rule == "silverman":
            return rule
        if rule.startswith("fixed:"):
            rule = rule.split(":", 1)[1]
        try:
            h = float(rule)
        except ValueError:
            raise ValueError(f"unknown bandwidth rule {rule!r}") from None
    elif isinstance(rule, tuple) and len(rule) == 2 and rule[0] == "fixed":
        h = float(rule[1])
    else:
        h = float(rule)
    if not (np.isfinite(h) and h > 0):
        raise ValueError(f"fixed bandwidth must be > 0, got {h}")
    return h


def silverman_bandwidth(points):
    """Silverman's normal-reference bandwidth for an isotropic kernel.

    The spread is the root-mean-square of the per-dimension sample standard
    deviations, ``sqrt(trace(cov) / m)``, which is invariant to rotations of
    the point cloud.  Degenerate clouds (``n == 1`` or zero spread) get
    ``h = 1``.
    """
    pts = as_points(points)
    m, n = pts.shape
    if n == 1:
        return 1.0
    sigma = np.sqrt(np.mean(np.var(pts, axis=1, ddof=1)))
    if not sigma > 0:
        return 1.0
    return float(sigma * (4.0 / ((m + 2) * n)) ** (1.0 / (m + 4)))


def select_bandwidth(points, rule):
    rule = parse_bandwidth_rule(rule)
    if rule == "silverman":
        return silverman_bandwidth(points)
    return rule


def fit_kde(points, bandwidth_rule="silverman"):
    pts = as_points(points)
    return KdeModel(pts, select_bandwidth(pts, bandwidth_rule))


def _neg_half_scaled_sqdist(queries, centers, h):
    if queries.shape[0] == 1:
        diff = queries.T - centers
        diff *= diff
        sq = diff
    else:
        sq = cdist(queries.T, centers.T, "sqeuclidean")
    sq *= -0.5 / h**2
    return sq


def kde_log_values(queries, centers, h, return_weights=False):
    """Log KDE values at the columns of ``queries`` for kernels on ``centers``.

    With ``return_weights`` also returns the ``(n_queries, n_centers)`` matrix
    of per-query softmax weights over the kernels.
    """
    m, n = centers.shape
    s = _neg_half_scaled_sqdist(queries, centers, h)
    top = s.max(axis=1)
    s -= top[:, None]
    np.exp(s, out=s)
    total = s.sum(axis=1)
    out = np.log(total) + top - np.log(n) - 0.5 * m * (LOG_2PI + 2.0 * np.log(h))
    if return_weights:
        s /= total[:, None]
        return out, s
    return out


def log_density_many(model, queries):
    """Log density of ``model`` at each column of ``queries`` (``m x q``)."""
    q = as_points(queries)
    if q.shape[0] != model.dim:
        raise ValueError(f"query dimension {q.shape[0]} does not match model dimension {model.dim}")
    if not np.all(np.isfinite(q)):
        raise ValueError("queries must be finite")
    return kde_log_values(q, model.points, model.bandwidth)


def log_density(model, query):
    q = np.asarray(query, dtype=float).reshape(-1, 1)
    return float(log_density_many(model, q)[0])


def density_grid(model, bounds, resolution):
    """Evaluate the density on a regular grid (1-D or 2-D models only).

    Returns ``(axes, values)``: ``axes`` is a list of 1-D coordinate arrays and
    ``values`` has shape ``resolution`` with the first axis varying slowest.
    """
    if model.dim > 2:
        raise ValueError(f"density grids are only produced for 1-D or 2-D models, got dim={model.dim}")
    if np.ndim(bounds) == 1:
        bounds = [bounds]
    resolution = np.atleast_1d(resolution).astype(int)
    if len(bounds) != model.dim or len(resolution) != model.dim:
        raise ValueError("bounds and resolution must have one entry per model dimension")
    axes = []
    for (lo, hi), r in zip(bounds, resolution):
        if not lo < hi:
            raise ValueError(f"grid bounds need lo < hi, got ({lo}, {hi})")
        if r < 2:
            raise ValueError(f"grid resolution must be >= 2, got {r}")
        axes.append(np.linspace(lo, hi, r))
    mesh = np.meshgrid(*axes, indexing="ij")
    queries = np.vstack([g.ravel() for g in mesh])
    values = np.exp(log_density_many(model, queries)).reshape(tuple(resolution))
    return axes, values


def grid_to_csv(axes, values):
    """Render a density grid as CSV text with columns ``x[,y],density``."""
    names = ["x", "y"][: len(axes)]
    mesh = np.meshgrid(*axes, indexing="ij")
    cols = [g.ravel() for g in mesh] + [values.ravel()]
    lines = [",".join(names + ["density"])]
    lines += [",".join(repr(float(v)) for v in row) for row in zip(*cols)]
    return "\n".join(lines) + "\n"


def padded_bounds(model, pad=8.0):
    """Bounding box of the kernel centers widened by ``pad * h`` on each side."""
    lo = model.points.min(axis=1) - pad * model.bandwidth
    hi = model.points.max(axis=1) + pad * model.bandwidth
    return [(float(a), float(b)) for a, b in zip(lo, hi)]
