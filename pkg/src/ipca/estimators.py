"""scikit-learn compatible estimators.

Every estimator is fit on a *collection* of datasets: a
:class:`~ipca.data.DatasetCollection` or a list of ``(n_samples_i,
n_features)`` arrays.  ``transform`` accepts the same kind of collection, or a
single 2-D array of observations.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_collection, check_n_components, seed_from
from .baselines import ica_projection, pca_projection
from .data import DatasetCollection
from .divergence import DissimilarityMatrix, dissimilarity_matrix
from .fine import fine
from .optimizer import OptimizerConfig, optimize_restarts, per_pair, variable_selection_report


class _ProjectionMixin(TransformerMixin):
    def transform(self, X):
        check_is_fitted(self, "components_")
        A = self.components_
        if isinstance(X, DatasetCollection):
            if X.d != A.shape[1]:
                raise ValueError(f"collection has d={X.d}, projection expects {A.shape[1]}")
            return X.project(A)
        if isinstance(X, np.ndarray) and X.ndim == 2:
            X = check_array(X)
            if X.shape[1] != A.shape[1]:
                raise ValueError(f"X has {X.shape[1]} features, projection expects {A.shape[1]}")
            return X @ A.T
        return [self.transform(check_array(x)) for x in X]

    def variable_selection(self, channels=None):
        check_is_fitted(self, "components_")
        if channels is None:
            channels = getattr(self, "channels_", None) or [f"x{k}" for k in range(self.components_.shape[1])]
        return variable_selection_report(self.components_, channels)


class IPCA(_ProjectionMixin, BaseEstimator):
    """Information preserving component analysis.

    Finds ``A`` with orthonormal rows minimizing the squared Frobenius
    mismatch between the symmetrized-KL matrix of the datasets and that of
    the projected datasets ``A @ X_i``.

    Parameters
    ----------
    n_components : int
        Target dimension ``m``.
    mu : float
        Initial gradient step size; halved on any step that increases the
        objective.
    max_iter, tol : int, float
        Iteration cap and relative-change convergence threshold.
    gradient : {"analytic", "fd"}
        Frozen-bandwidth analytic gradient or central finite differences.
    bandwidth : "silverman" or float
        KDE bandwidth rule, applied per dataset.
    n_restarts : int
        Number of random starts; the lowest final objective wins.
    random_state : int, RandomState or None

    Attributes
    ----------
    components_ : ndarray of shape (n_components, n_features)
    dissimilarity_ : DissimilarityMatrix of the unprojected collection
    trace_ : OptimizerTrace
    objective_ : float, final objective
    objective_per_pair_ : float, ``objective_ / (N (N - 1))``
    n_iter_ : int
    """

    def __init__(self, n_components=2, *, mu=1e-3, max_iter=500, tol=1e-6, gradient="analytic",
                 bandwidth="silverman", n_restarts=1, fd_epsilon=1e-5, retraction_threshold=1e-9,
                 random_state=0):
        self.n_components = n_components
        self.mu = mu
        self.max_iter = max_iter
        self.tol = tol
        self.gradient = gradient
        self.bandwidth = bandwidth
        self.n_restarts = n_restarts
        self.fd_epsilon = fd_epsilon
        self.retraction_threshold = retraction_threshold
        self.random_state = random_state

    def fit(self, X, y=None, dissimilarity=None):
        """Fit on a collection; ``dissimilarity`` may supply a precomputed full-space KL matrix."""
        collection = check_collection(X)
        m = check_n_components(self.n_components, collection.d)
        if dissimilarity is None:
            dissimilarity = dissimilarity_matrix(collection, self.bandwidth)
        elif not isinstance(dissimilarity, DissimilarityMatrix):
            dissimilarity = DissimilarityMatrix(np.asarray(dissimilarity, dtype=float), "kl_symmetric", collection.ids)
        if len(dissimilarity) != len(collection):
            raise ValueError(f"dissimilarity is {len(dissimilarity)}x{len(dissimilarity)} but N={len(collection)}")
        config = OptimizerConfig(
            m=m, mu=self.mu, max_iters=self.max_iter, tol=self.tol, seed=seed_from(self.random_state),
            grad_mode=self.gradient, fd_epsilon=self.fd_epsilon,
            retraction_threshold=self.retraction_threshold, bandwidth=self.bandwidth,
        )
        A, trace = optimize_restarts(collection, config, dissimilarity, self.n_restarts)
        self.components_ = np.array(A.values)
        self.dissimilarity_ = dissimilarity
        self.trace_ = trace
        self.objective_ = trace.final_J
        self.objective_per_pair_ = per_pair(trace.final_J, len(collection))
        self.n_iter_ = trace.iterations
        self.n_features_in_ = collection.d
        self.channels_ = list(collection.channels)
        return self


class PooledPCA(_ProjectionMixin, BaseEstimator):
    """Leading principal axes of all datasets pooled together."""

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        collection = check_collection(X)
        m = check_n_components(self.n_components, collection.d)
        self.components_ = np.array(pca_projection(collection, m).values)
        self.n_features_in_ = collection.d
        self.channels_ = list(collection.channels)
        return self


class PooledICA(_ProjectionMixin, BaseEstimator):
    """Highest-norm independent components of the pooled data, orthonormalized."""

    def __init__(self, n_components=2, *, max_iter=200, tol=1e-6, random_state=0):
        self.n_components = n_components
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        collection = check_collection(X)
        m = check_n_components(self.n_components, collection.d)
        A = ica_projection(collection, m, seed=seed_from(self.random_state), max_iter=self.max_iter, tol=self.tol)
        self.components_ = np.array(A.values)
        self.n_features_in_ = collection.d
        self.channels_ = list(collection.channels)
        return self


class FINE(BaseEstimator):
    """Embed each dataset as one point (geodesic information distance + classical MDS).

    ``fit_transform`` returns an ``(N, n_components)`` array; the full
    :class:`~ipca.fine.EmbeddingResult` is kept in ``embedding_``.
    """

    def __init__(self, n_components=2, *, bandwidth="silverman"):
        self.n_components = n_components
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        collection = check_collection(X)
        self.embedding_ = fine(collection, self.n_components, self.bandwidth)
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_.coordinates
