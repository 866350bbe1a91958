"""scikit-learn style front ends for the brace pipeline.

``BraceDetector`` is a stateless binary classifier over ``(image, region)``
samples, so it works with ``get_params``/``clone``, grid search over its
thresholds, and ``sklearn.metrics``. ``AxialKMeans`` exposes the two-family
angle clustering as a ``ClusterMixin`` estimator on raw line angles.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .brace import DEFAULT_SEED, BraceParams, detect_unit, embed_angles, kmeans_two
from .coco import UnitRegion
from .hough import HoughParams, PolarLine
from .imaging import DEFAULT_CANNY_HIGH, DEFAULT_CANNY_LOW
from .errors import InvalidThresholds


def check_unit_samples(X) -> list:
    """Validate a batch of ``(image, UnitRegion)`` pairs."""
    samples = list(X)
    for i, sample in enumerate(samples):
        if not isinstance(sample, (tuple, list)) or len(sample) != 2:
            raise ValueError(f"sample {i} must be an (image, region) pair")
        image, region = sample
        if not isinstance(region, UnitRegion):
            raise TypeError(f"sample {i}: region must be a UnitRegion, got {type(region).__name__}")
        if np.ndim(image) != 2:
            raise ValueError(f"sample {i}: image must be a 2-D gray array")
    return samples


def check_angles(X) -> np.ndarray:
    """Line angles as a 1-D float array; accepts shape (n,) or (n, 1)."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected angles of shape (n,) or (n, 1), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("angles must be finite")
    return arr


class BraceDetector(ClassifierMixin, BaseEstimator):
    """Predicts ``True`` for units whose cross brace is installed.

    Parameters mirror the canny / hough / brace config sections. The
    detector has nothing to learn, so ``fit`` only validates parameters and
    ``predict`` works on an unfitted instance.

    Examples
    --------
    >>> det = BraceDetector(central_frac=0.5)
    >>> det.get_params()["central_frac"]
    0.5
    """

    def __init__(
        self,
        canny_low=DEFAULT_CANNY_LOW,
        canny_high=DEFAULT_CANNY_HIGH,
        rho_res=1.0,
        theta_res=math.pi / 180,
        hough_threshold=None,
        threshold_frac=0.3,
        nms_rho=2,
        nms_theta=2,
        max_lines=16,
        vert_tol=math.radians(15),
        horiz_tol=math.radians(10),
        central_frac=0.6,
        kmeans_restarts=10,
        kmeans_max_iter=100,
        kmeans_tol=1e-6,
        parallel_eps=1e-3,
        random_state=DEFAULT_SEED,
    ):
        self.canny_low = canny_low
        self.canny_high = canny_high
        self.rho_res = rho_res
        self.theta_res = theta_res
        self.hough_threshold = hough_threshold
        self.threshold_frac = threshold_frac
        self.nms_rho = nms_rho
        self.nms_theta = nms_theta
        self.max_lines = max_lines
        self.vert_tol = vert_tol
        self.horiz_tol = horiz_tol
        self.central_frac = central_frac
        self.kmeans_restarts = kmeans_restarts
        self.kmeans_max_iter = kmeans_max_iter
        self.kmeans_tol = kmeans_tol
        self.parallel_eps = parallel_eps
        self.random_state = random_state

    @classmethod
    def from_config(cls, config) -> "BraceDetector":
        h, b = config.hough, config.brace
        return cls(
            canny_low=config.canny.low, canny_high=config.canny.high,
            rho_res=h.rho_res, theta_res=h.theta_res, hough_threshold=h.threshold,
            threshold_frac=h.threshold_frac, nms_rho=h.nms_rho, nms_theta=h.nms_theta, max_lines=h.max_lines,
            vert_tol=b.vert_tol, horiz_tol=b.horiz_tol, central_frac=b.central_frac,
            kmeans_restarts=b.kmeans_restarts, kmeans_max_iter=b.kmeans_max_iter, kmeans_tol=b.kmeans_tol,
            parallel_eps=b.parallel_eps, random_state=config.seed,
        )

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = False
        tags.non_deterministic = False
        tags.input_tags.two_d_array = False
        return tags

    def _params(self):
        if not 0 <= self.canny_low <= self.canny_high:
            raise InvalidThresholds(f"need 0 <= canny_low <= canny_high, got {self.canny_low}, {self.canny_high}")
        hough = HoughParams(self.rho_res, self.theta_res, self.hough_threshold, self.threshold_frac,
                            self.nms_rho, self.nms_theta, self.max_lines)
        brace = BraceParams(self.vert_tol, self.horiz_tol, self.central_frac, self.kmeans_restarts,
                            self.kmeans_max_iter, self.kmeans_tol, self.parallel_eps)
        return hough, brace

    def fit(self, X=None, y=None):
        self.hough_params_, self.brace_params_ = self._params()
        self.classes_ = np.array([False, True])
        return self

    def detect(self, X) -> list:
        """Full :class:`UnitVerdict` for each ``(image, region)`` sample."""
        hough, brace = self._params()
        return [
            detect_unit(image, region, canny_low=self.canny_low, canny_high=self.canny_high,
                        hough=hough, brace=brace, seed=self.random_state)
            for image, region in check_unit_samples(X)
        ]

    def predict(self, X) -> np.ndarray:
        return np.array([v.brace_present for v in self.detect(X)], dtype=bool)

    def decision_function(self, X) -> np.ndarray:
        """Number of intersections inside each unit's central window."""
        return np.array([v.central_hits for v in self.detect(X)], dtype=np.int64)


class AxialKMeans(ClusterMixin, BaseEstimator):
    """Two-cluster k-means on line orientations (radians, period pi).

    Angles are embedded as ``(cos 2t, sin 2t)`` before clustering, so 1 and
    ``pi - 0.01`` land together.
    """

    def __init__(self, n_restarts=10, max_iter=100, tol=1e-6, random_state=DEFAULT_SEED):
        self.n_restarts = n_restarts
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        theta = check_angles(X)
        params = BraceParams(kmeans_restarts=self.n_restarts, kmeans_max_iter=self.max_iter, kmeans_tol=self.tol)
        points = embed_angles([PolarLine(0.0, float(t)) for t in theta])
        part = kmeans_two(points, params, self.random_state)
        labels = np.zeros(len(theta), dtype=np.int64)
        labels[list(part.index_b)] = 1
        emb = np.array([[p.x, p.y] for p in points])
        self.labels_ = labels
        self.cluster_centers_ = np.stack([emb[labels == k].mean(axis=0) for k in (0, 1)])
        self.inertia_ = part.objective
        self.n_iter_ = part.n_iter
        self.best_restart_ = part.restart
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "cluster_centers_")
        theta = check_angles(X)
        emb = np.stack([np.cos(2 * theta), np.sin(2 * theta)], axis=1)
        d = ((emb[:, None, :] - self.cluster_centers_[None]) ** 2).sum(-1)
        return np.argmin(d, axis=1)
