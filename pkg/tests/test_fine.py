import warnings

import numpy as np
import pytest

from ipca.data import Dataset, DatasetCollection
from ipca.divergence import DissimilarityMatrix
from ipca.fine import classical_mds, fine
from ipca.synth import make_mirror_collection
from oracles import pairwise_distances, silhouette_two_class


def test_line_points():
    G = pairwise_distances([[0.0], [1.0], [2.0]])
    res = classical_mds(G, 1)
    np.testing.assert_allclose(pairwise_distances(res.coordinates), G, atol=1e-12)


def test_zero_matrix():
    res = classical_mds(np.zeros((4, 4)), 2)
    assert np.all(res.coordinates == 0)


@pytest.mark.parametrize("seed", range(5))
def test_planar_roundtrip(seed):
    rng = np.random.default_rng(seed)
    G = pairwise_distances(rng.normal(size=(5, 2)) * 3)
    res = classical_mds(DissimilarityMatrix(G, "fisher_geodesic"), 2)
    np.testing.assert_allclose(pairwise_distances(res.coordinates), G, rtol=1e-8, atol=1e-10)


def test_centered_sorted_and_bounded(rng):
    G = pairwise_distances(rng.normal(size=(7, 3)))
    res = classical_mds(G, 3)
    np.testing.assert_allclose(res.coordinates.mean(axis=0), 0, atol=1e-9)
    assert np.all(np.diff(res.eigenvalues) <= 0) and np.all(res.eigenvalues >= 0)
    H = np.eye(7) - 1 / 7
    B = -0.5 * H @ G**2 @ H
    assert res.eigenvalues.sum() <= np.trace(B) + 1e-9


def test_permutation_equivariance(rng):
    G = pairwise_distances(rng.normal(size=(6, 2)))
    perm = rng.permutation(6)
    a = classical_mds(G, 2).coordinates
    b = classical_mds(G[np.ix_(perm, perm)], 2).coordinates
    np.testing.assert_allclose(b, a[perm], atol=1e-10)


def test_non_euclidean_clamped():
    G = np.array([[0, 1, 1, 5], [1, 0, 1, 5], [1, 1, 0, 5], [5, 5, 5, 0.0]])
    G[0, 1] = G[1, 0] = 3.0
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        res = classical_mds(G, 3)
    assert np.all(res.eigenvalues >= 0)


@pytest.mark.parametrize("e", [0, 4])
def test_dimension_range(e):
    with pytest.raises(ValueError):
        classical_mds(np.zeros((4, 4)), e)


def test_asymmetric():
    with pytest.raises(ValueError):
        classical_mds(np.array([[0, 1.0], [2.0, 0]]), 1)


def test_identical_datasets(rng):
    x = rng.normal(size=(2, 50))
    col = DatasetCollection(tuple(Dataset(f"d{k}", ("a", "b"), x) for k in range(4)))
    res = fine(col, 2)
    np.testing.assert_allclose(res.coordinates, 0, atol=1e-12)


def test_mirror_classes_separate():
    col = make_mirror_collection(seed=3)
    res = fine(col, 2)
    assert res.coordinates.shape == (10, 2)
    assert silhouette_two_class(res.coordinates, col.labels) > 0.5
    # a threshold on the first coordinate splits the classes
    first = res.coordinates[:, 0]
    c1, c2 = first[:5], first[5:]
    assert c1.max() < c2.min() or c2.max() < c1.min()


def test_embedding_csv():
    col = make_mirror_collection(n1=2, n2=2, points_per_set=50, seed=0)
    text = fine(col, 2).to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "id,label,coord_1,coord_2"
    assert lines[1].startswith("class1_01,class1,")
