"""Synthetic collections with known structure."""

import numpy as np

from .data import Dataset, DatasetCollection


def _mirror_set(rng, n, df):
    x = rng.chisquare(df, n)
    y = rng.chisquare(df, n) * rng.choice([-1.0, 1.0], n)
    return np.vstack([x, y])


def make_mirror_collection(n1=5, n2=5, points_per_set=400, df=4, seed=0):
    """Two classes of 2-D sets that are mirror images about the line ``x = 5``.

    Class 1 has ``x ~ chi2(df)`` and ``y = +/- chi2(df)`` with an equiprobable
    sign per point.  Class 2 is drawn the same way and then mapped by
    ``x -> 10 - x``.
    """
    if min(n1, n2, points_per_set) < 1:
        raise ValueError("counts must be >= 1")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    rng = np.random.default_rng(seed)
    datasets = []
    for k in range(n1):
        datasets.append(Dataset(f"class1_{k + 1:02d}", ("x", "y"), _mirror_set(rng, points_per_set, df), "class1"))
    for k in range(n2):
        pts = _mirror_set(rng, points_per_set, df)
        pts[0] = 10.0 - pts[0]
        datasets.append(Dataset(f"class2_{k + 1:02d}", ("x", "y"), pts, "class2"))
    return DatasetCollection(tuple(datasets))


def make_planted_collection(n_per_class=5, d=6, informative_dims=(3, 4), separation=4.0,
                            points_per_set=200, seed=0, spread=0.25):
    """Two classes of standard-normal sets with structure in two planted channels.

    ``informative_dims`` are 1-based.  Class 2 is shifted by ``separation`` in
    both informative channels.  Each set also gets its own mean offset in the
    informative plane with standard deviation ``spread * separation``, so the
    structure spans both channels and vanishes when ``separation == 0``.
    """
    a, b = informative_dims
    if a == b or not (1 <= a <= d and 1 <= b <= d):
        raise ValueError(f"informative dims must be distinct and within 1..{d}, got {informative_dims}")
    if n_per_class < 1 or points_per_set < 1:
        raise ValueError("counts must be >= 1")
    rng = np.random.default_rng(seed)
    channels = tuple(f"ch{k + 1}" for k in range(d))
    rows = [a - 1, b - 1]
    datasets = []
    for cls in (0, 1):
        for k in range(n_per_class):
            pts = rng.standard_normal((d, points_per_set))
            offset = cls * separation + spread * separation * rng.standard_normal(2)
            pts[rows] += offset[:, None]
            datasets.append(Dataset(f"class{cls + 1}_{k + 1:02d}", channels, pts, f"class{cls + 1}"))
    return DatasetCollection(tuple(datasets))
