"""Information preserving linear projections of collections of datasets."""

from .baselines import ica_projection, pca_projection
from .data import Dataset, DatasetCollection, load_collection, save_collection, subsample
from .density import KdeModel, density_grid, fit_kde, log_density
from .divergence import (
    DissimilarityMatrix,
    dissimilarity_matrix,
    dkl_symmetric,
    fisher_geodesic_matrix,
    kl_plugin,
)
from .estimators import FINE, IPCA, PooledICA, PooledPCA
from .fine import EmbeddingResult, classical_mds, fine
from .optimizer import (
    OptimizerConfig,
    OptimizerTrace,
    ProjectionMatrix,
    constrain_gradient,
    gradient,
    objective,
    optimize,
    random_orthonormal,
    variable_selection_report,
)
from .synth import make_mirror_collection, make_planted_collection

__version__ = "0.1.0"
