import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.metrics import accuracy_score

from bracewatch.config import RunConfig
from bracewatch.errors import InvalidThresholds
from bracewatch.estimator import AxialKMeans, BraceDetector
from bracewatch.synth import ScaffoldSpec, render_frame


@pytest.fixture(scope="module")
def samples():
    presence = np.array([[True, False, True]])
    img, ann, truth = render_frame(ScaffoldSpec(), 3, 1, presence, seed=1)
    X = [(img, r) for r in ann.regions]
    y = np.array([u.brace_present for u in truth.units])
    return X, y


def test_params_and_clone():
    det = BraceDetector(central_frac=0.5, random_state=3)
    params = det.get_params()
    assert params["central_frac"] == 0.5 and params["random_state"] == 3
    twin = clone(det)
    assert twin.get_params() == params and twin is not det


def test_from_config_matches_defaults():
    assert BraceDetector.from_config(RunConfig()).get_params() == BraceDetector().get_params()


def test_predict_without_fit(samples):
    X, y = samples
    det = BraceDetector()
    assert np.array_equal(det.predict(X), y)
    assert accuracy_score(y, det.predict(X)) == 1.0
    hits = det.decision_function(X)
    assert np.array_equal(hits >= 1, y)


def test_fit_validates(samples):
    X, y = samples
    det = BraceDetector().fit(X, y)
    assert list(det.classes_) == [False, True]
    with pytest.raises(InvalidThresholds):
        BraceDetector(canny_low=300).fit()


def test_sample_validation():
    with pytest.raises(ValueError):
        BraceDetector().predict([np.zeros((4, 4))])
    with pytest.raises(TypeError):
        BraceDetector().predict([(np.zeros((4, 4)), "region")])


def test_axial_kmeans():
    deg = np.radians([10, 170, 85, 95])
    km = AxialKMeans().fit(deg)
    assert km.labels_[0] == km.labels_[1] != km.labels_[2] == km.labels_[3]
    assert km.inertia_ == pytest.approx(0.29426, abs=1e-5)
    assert km.best_restart_ == 0
    assert np.array_equal(km.predict(deg), km.labels_)
    assert np.array_equal(km.fit_predict(deg.reshape(-1, 1)), km.labels_)
    assert km.predict([math.pi - 0.001])[0] == km.labels_[0]


def test_axial_kmeans_rejects_bad_input():
    with pytest.raises(ValueError):
        AxialKMeans().fit([[1.0, 2.0]])
    with pytest.raises(ValueError):
        AxialKMeans().fit([np.nan, 1.0])
