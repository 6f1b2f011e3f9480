"""Gaussian RBF kernels with per-center shape parameters.

The kernel between two stored samples uses the smaller of their two shape
parameters, K(x_i, x_j) = exp(-||x_i - x_j||^2 / min(s_i, s_j)).  Shape
parameters are chosen so that every cross-class kernel value stays
strictly below the separation constant T: the largest value satisfying
that bound for sample i is d_min(i)^2 / ln(1/T), where d_min(i) is the
distance from i to its nearest opposite-class sample.  A safety factor
slightly below 1 turns the bound into a strict inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateDataError, ValidationError
from .shape_dataset import samples_to_arrays


@dataclass(frozen=True, eq=False)
class ShapeParameterSet:
    """Per-sample squared shape parameters (pixel^2) plus the constants
    they were derived from."""

    sigma_sq: np.ndarray
    T: float
    safety_factor: float

    def __post_init__(self):
        sig = np.asarray(self.sigma_sq, dtype=np.float64)
        if sig.ndim != 1 or sig.size == 0:
            raise ValidationError("sigma_sq must be a non-empty 1-D array")
        if not (sig > 0).all():
            raise ValidationError("every sigma_sq must be positive")
        _check_t_and_safety(self.T, self.safety_factor)
        object.__setattr__(self, "sigma_sq", sig)


def _check_t_and_safety(T: float, safety_factor: float) -> None:
    if not 0.0 < T < 1.0:
        raise ValidationError(f"T must lie strictly in (0, 1), got {T}")
    if not 0.0 < safety_factor <= 1.0:
        raise ValidationError(
            f"safety_factor must lie in (0, 1], got {safety_factor}"
        )


def rbf(x, center, sigma_sq: float) -> float:
    """exp(-||x - center||^2 / sigma_sq); 1 exactly when x == center."""
    if sigma_sq <= 0:
        raise ValidationError(f"sigma_sq must be positive, got {sigma_sq}")
    x = np.asarray(x, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    d_sq = float(np.sum((x - center) ** 2))
    return math.exp(-d_sq / sigma_sq)


def pair_sigma_sq(sigma_sq_i: float, sigma_sq_j: float) -> float:
    """Shape parameter of a sample pair: the smaller of the two."""
    if sigma_sq_i <= 0 or sigma_sq_j <= 0:
        raise ValidationError("shape parameters must be positive")
    return min(sigma_sq_i, sigma_sq_j)


def nearest_opposite_sq_distances(coords: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Squared distance from each point to its nearest opposite-class point.

    Backed by a k-d tree per class; tests cross-check against the O(n^2)
    brute-force scan.
    """
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels > 0
    neg = ~pos
    if not pos.any() or not neg.any():
        raise ValidationError("samples must contain both classes")
    d_sq = np.empty(len(coords), dtype=np.float64)
    for own, other in ((pos, neg), (neg, pos)):
        tree = cKDTree(coords[other])
        dist, _ = tree.query(coords[own], k=1)
        d_sq[own] = dist**2
    return d_sq


def estimate_sigmas(samples, T: float, safety_factor: float = 0.99) -> ShapeParameterSet:
    """Per-sample sigma^2 = safety_factor * d_min^2 / ln(1/T).

    d_min is the nearest opposite-class distance, so every cross-class
    kernel value is at most T^(1/safety_factor) < T for safety_factor < 1.
    """
    _check_t_and_safety(T, safety_factor)
    coords, labels = samples_to_arrays(samples)
    d_sq = nearest_opposite_sq_distances(coords, labels)
    if (d_sq == 0).any():
        culprit = coords[int(np.argmin(d_sq))]
        raise DegenerateDataError(
            "opposite-label samples share the coordinate "
            f"({culprit[0]:g}, {culprit[1]:g}); shape parameters are undefined"
        )
    sigma_sq = safety_factor * d_sq / math.log(1.0 / T)
    return ShapeParameterSet(sigma_sq, T, safety_factor)


def kernel_row(coords: np.ndarray, sigma_sq: np.ndarray, i: int) -> np.ndarray:
    """Row i of the pairwise-minimum-sigma kernel matrix."""
    diff = coords - coords[i]
    d_sq = np.einsum("ij,ij->i", diff, diff)
    return np.exp(-d_sq / np.minimum(sigma_sq, sigma_sq[i]))


def max_cross_class_kernel(
    coords: np.ndarray, labels: np.ndarray, sigma_sq: np.ndarray
) -> float:
    """Largest kernel value over all cross-class pairs (exhaustive audit).

    Constraint satisfaction means this value is strictly below T.
    """
    coords = np.asarray(coords, dtype=np.float64)
    sigma_sq = np.asarray(sigma_sq, dtype=np.float64)
    labels = np.asarray(labels)
    pos = np.flatnonzero(labels > 0)
    neg = np.flatnonzero(labels < 0)
    if pos.size == 0 or neg.size == 0:
        return 0.0
    worst = 0.0
    # chunk the positive side to bound the (|pos| x |neg|) work matrix
    chunk = max(1, int(4e6) // max(1, neg.size))
    for start in range(0, pos.size, chunk):
        p = pos[start : start + chunk]
        diff = coords[p][:, None, :] - coords[neg][None, :, :]
        d_sq = np.einsum("ijk,ijk->ij", diff, diff)
        s = np.minimum.outer(sigma_sq[p], sigma_sq[neg])
        worst = max(worst, float(np.exp(-d_sq / s).max()))
    return worst
