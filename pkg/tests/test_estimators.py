import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ipca import FINE, IPCA, PooledICA, PooledPCA
from ipca.data import DatasetCollection
from ipca.synth import make_mirror_collection


@pytest.fixture(scope="module")
def small_mirror():
    return make_mirror_collection(n1=3, n2=3, points_per_set=120, seed=0)


def as_arrays(col):
    return [ds.points.T for ds in col]


def test_get_set_params_and_clone():
    est = IPCA(n_components=1, mu=5e-4, random_state=3)
    params = est.get_params()
    assert params["n_components"] == 1 and params["mu"] == 5e-4
    other = clone(est).set_params(max_iter=7)
    assert other.max_iter == 7 and est.max_iter == 500


def test_ipca_fit_transform(small_mirror):
    est = IPCA(n_components=1, random_state=0, max_iter=50).fit(small_mirror)
    assert est.components_.shape == (1, 2)
    np.testing.assert_allclose(est.components_ @ est.components_.T, 1.0, atol=1e-8)
    assert est.objective_per_pair_ == pytest.approx(est.objective_ / 30)
    out = est.transform(as_arrays(small_mirror))
    assert [o.shape for o in out] == [(120, 1)] * 6
    np.testing.assert_allclose(est.transform(small_mirror[0].points.T), out[0])
    projected = est.transform(small_mirror)
    assert isinstance(projected, DatasetCollection) and projected.d == 1
    assert est.variable_selection()[0].channel == "x"


def test_ipca_accepts_array_list(small_mirror):
    a = IPCA(n_components=1, random_state=0, max_iter=20).fit(as_arrays(small_mirror))
    b = IPCA(n_components=1, random_state=0, max_iter=20).fit(small_mirror)
    np.testing.assert_array_equal(a.components_, b.components_)


def test_ipca_precomputed_dissimilarity(small_mirror):
    base = IPCA(n_components=1, random_state=0, max_iter=20).fit(small_mirror)
    again = IPCA(n_components=1, random_state=0, max_iter=20).fit(small_mirror, dissimilarity=base.dissimilarity_)
    np.testing.assert_array_equal(base.components_, again.components_)
    with pytest.raises(ValueError):
        IPCA(n_components=1).fit(small_mirror, dissimilarity=np.zeros((2, 2)))


def test_input_validation(small_mirror):
    with pytest.raises(ValueError):
        IPCA(n_components=3).fit(small_mirror)
    with pytest.raises(ValueError):
        IPCA().fit([np.zeros((5, 2))])
    with pytest.raises(ValueError):
        IPCA().fit(np.zeros((5, 2)))
    with pytest.raises(ValueError):
        IPCA().fit([np.zeros((5, 2)), np.zeros((5, 3))])
    with pytest.raises(ValueError):
        IPCA().fit([np.full((5, 2), np.nan), np.zeros((5, 2))])
    with pytest.raises(NotFittedError):
        IPCA().transform(np.zeros((3, 2)))


def test_restarts_pick_best(small_mirror):
    from ipca.optimizer import OptimizerConfig, optimize

    est = IPCA(n_components=1, random_state=4, max_iter=30, n_restarts=3).fit(small_mirror)
    children = np.random.SeedSequence(4).spawn(3)
    finals = []
    for child in children:
        cfg = OptimizerConfig(m=1, max_iters=30, seed=int(child.generate_state(1)[0]))
        finals.append(optimize(small_mirror, cfg, est.dissimilarity_)[1].final_J)
    assert est.objective_ == min(finals)


def test_baseline_estimators(small_mirror):
    pca = PooledPCA(n_components=1).fit(small_mirror)
    ica = PooledICA(n_components=1, random_state=0).fit(small_mirror)
    assert pca.components_.shape == ica.components_.shape == (1, 2)
    assert pca.transform(np.ones((4, 2))).shape == (4, 1)


def test_fine_estimator(small_mirror):
    Y = FINE(n_components=2).fit_transform(small_mirror)
    assert Y.shape == (6, 2)
