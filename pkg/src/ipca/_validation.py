"""Input checks shared by the estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array, check_random_state

from .data import Dataset, DatasetCollection


def check_collection(X, min_sets=2):
    """Coerce estimator input to a :class:`DatasetCollection`.

    Accepts a collection, a sequence of :class:`Dataset`, or a sequence of
    ``(n_samples_i, n_features)`` arrays (one array per dataset, rows are
    observations).
    """
    if isinstance(X, DatasetCollection):
        collection = X
    else:
        if isinstance(X, np.ndarray) and X.ndim == 2:
            raise ValueError(
                "expected a collection of datasets (a list of 2-D arrays), got a single 2-D array"
            )
        items = list(X)
        if len(items) < min_sets:
            raise ValueError(f"need at least {min_sets} datasets, got {len(items)}")
        datasets = []
        for i, item in enumerate(items):
            if isinstance(item, Dataset):
                datasets.append(item)
                continue
            arr = check_array(item, ensure_min_samples=1, input_name=f"X[{i}]")
            channels = tuple(f"x{k}" for k in range(arr.shape[1]))
            datasets.append(Dataset(str(i), channels, arr.T))
        d = {ds.d for ds in datasets}
        if len(d) != 1:
            raise ValueError(f"datasets have differing numbers of features: {sorted(d)}")
        collection = DatasetCollection(tuple(datasets), datasets[0].channels)
    if len(collection) < min_sets:
        raise ValueError(f"need at least {min_sets} datasets, got {len(collection)}")
    return collection


def check_n_components(n_components, n_features, name="n_components"):
    if not isinstance(n_components, numbers.Integral) or not 1 <= n_components <= n_features:
        raise ValueError(f"{name} must be an integer in [1, {n_features}], got {n_components!r}")
    return int(n_components)


def seed_from(random_state):
    """Integer seed from an sklearn-style ``random_state``."""
    if isinstance(random_state, numbers.Integral):
        return int(random_state)
    return int(check_random_state(random_state).randint(np.iinfo(np.int32).max))
