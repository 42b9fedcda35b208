"""Differential entropy estimators shared by the information-flow methods.

Default is the Gaussian plug-in: h(Z) = 1/2 * log((2*pi*e)^d * det(Cov)),
computed via slogdet with a small diagonal jitter.  A Kozachenko-
Leonenko k-NN estimator is available behind the config for
non-Gaussian data; it is slower and sample-hungry.

Differential entropies can be negative; downstream code must not assume
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln

from ..errors import DegenerateDataError, InsufficientDataError

LOG_2PI_E = math.log(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class EntropyEstimatorConfig:
    kind: str = "gaussian"        # "gaussian" | "knn"
    jitter: float = 1e-8
    k: int = 4

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "knn"):
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.jitter < 0:
            raise ValueError("jitter must be nonnegative")
        if self.k < 1:
            raise ValueError("k must be >= 1")


def entropy_from_covariance(cov: np.ndarray) -> float:
    """Closed-form Gaussian entropy in nats for a given covariance."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    d = cov.shape[0]
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise DegenerateDataError("covariance is not positive definite")
    return 0.5 * (d * LOG_2PI_E + logdet)


def gaussian_entropy(samples: np.ndarray, jitter: float = 1e-8) -> float:
    """Plug-in estimate from an (m, d) sample matrix."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] <= samples.shape[1] + 1:
        raise InsufficientDataError(
            f"need more than d+1={samples.shape[1] + 1} samples, "
            f"got {samples.shape[0]}")
    cov = np.cov(samples, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov) + jitter * np.eye(samples.shape[1])
    try:
        return entropy_from_covariance(cov)
    except DegenerateDataError:
        raise DegenerateDataError(
            "sample covariance singular even after jitter") from None


def knn_entropy(samples: np.ndarray, k: int = 4) -> float:
    """Kozachenko-Leonenko estimator with Euclidean balls."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    m, d = samples.shape
    if m <= k + 1:
        raise InsufficientDataError(f"need more than k+1={k + 1} samples, got {m}")
    tree = cKDTree(samples)
    # k+1 because the query point itself comes back at distance 0
    dist, _ = tree.query(samples, k=k + 1)
    radii = np.maximum(dist[:, k], 1e-300)
    log_vd = (d / 2.0) * math.log(math.pi) - gammaln(d / 2.0 + 1.0)
    return float(digamma(m) - digamma(k) + log_vd + d * np.mean(np.log(radii)))


def entropy(samples: np.ndarray, config: EntropyEstimatorConfig) -> float:
    if config.kind == "knn":
        return knn_entropy(samples, config.k)
    return gaussian_entropy(samples, config.jitter)


def conditional_entropy(x: np.ndarray, y: np.ndarray | None,
                        config: EntropyEstimatorConfig = EntropyEstimatorConfig()
                        ) -> float:
    """h(X | Y) = h(X, Y) - h(Y); with empty Y this is h(X)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1:
        x = x.T
    if y is None or (hasattr(y, "size") and np.asarray(y).size == 0):
        return entropy(x, config)
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[0] == 1:
        y = y.T
    if x.shape[0] != y.shape[0]:
        raise InsufficientDataError("X and Y must have the same sample count")
    joint = np.concatenate([x, y], axis=1)
    if joint.shape[0] <= joint.shape[1] + 1:
        raise InsufficientDataError(
            f"need more than p+q+1={joint.shape[1] + 1} samples, "
            f"got {joint.shape[0]}")
    return entropy(joint, config) - entropy(y, config)
