"""Pairwise-ascent solver for the constrained dual problem.

The trainer maximizes

    Q(alpha) = sum_i alpha_i
             - 1/2 sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j)

subject to sum_i alpha_i y_i = 0 and 0 <= alpha_i <= C, where K uses the
pairwise-minimum shape parameter (kernel_geometry.kernel_row).  Samples
that finish with alpha above the sparsity cutoff become the model's
similarity domains.

The solver is an SMO-style coordinate ascent: each step picks the
maximally violating feasible pair (worst KKT violator paired with the
sample of most opposed prediction error), maximizes Q exactly along that
two-variable direction, and clips to the box.  Pair updates preserve the
equality constraint by construction, so feasibility holds after every
step.  Optimality is measured by the standard pair-violation gap

    max_{i in I_up} y_i g_i  -  min_{j in I_low} y_j g_j

with g = dQ/dalpha; the gap bounds how far any bias-slack value can be
from satisfying all box KKT conditions at once, and it is zero exactly at
the constrained optimum.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .kernel_geometry import estimate_sigmas, kernel_row
from .sdn_model import DEFAULT_RADIUS_FACTOR, SdnModel, SimilarityDomain
from .shape_dataset import samples_to_arrays


@dataclass(frozen=True)
class TrainConfig:
    """Knobs of the dual solver; defaults reproduce the shape experiments."""

    T: float = 0.05
    C: float = 1000.0
    safety_factor: float = 0.99
    kkt_tol: float = 1e-3
    alpha_eps: float = 1e-8
    max_passes: int | None = None  # None -> 10 * n stalled updates allowed
    cache_mb: int = 256
    debug: bool = False  # assert monotone ascent on every accepted update

    def __post_init__(self):
        if not 0.0 < self.T < 1.0:
            raise ValidationError(f"T must lie strictly in (0, 1), got {self.T}")
        if self.C <= 0:
            raise ValidationError(f"C must be positive, got {self.C}")
        if self.kkt_tol <= 0:
            raise ValidationError(f"kkt_tol must be positive, got {self.kkt_tol}")
        if self.alpha_eps < 0:
            raise ValidationError(f"alpha_eps must be nonnegative, got {self.alpha_eps}")


@dataclass
class DualState:
    """Solver output: the dual variables and their first-order data."""

    alpha: np.ndarray
    objective: float
    gradient: np.ndarray  # dQ/dalpha_i = 1 - y_i f(x_i)
    violation: float
    iterations: int


class KernelRowCache:
    """Lazily filled rows of the kernel matrix with LRU eviction.

    A full Gram matrix is quadratic in the pixel count, so rows are kept
    only up to a configurable memory budget.
    """

    def __init__(self, coords: np.ndarray, sigma_sq: np.ndarray, cache_mb: int = 256):
        self._coords = coords
        self._sigma_sq = sigma_sq
        row_bytes = 8 * len(coords)
        self.max_rows = max(2, int(cache_mb * 2**20) // max(1, row_bytes))
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def row(self, i: int) -> np.ndarray:
        cached = self._rows.get(i)
        if cached is not None:
            self.hits += 1
            self._rows.move_to_end(i)
            return cached
        self.misses += 1
        row = kernel_row(self._coords, self._sigma_sq, i)
        row.flags.writeable = False
        self._rows[i] = row
        while len(self._rows) > self.max_rows:
            self._rows.popitem(last=False)
        return row


def _as_solver_arrays(samples, sigmas) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    coords, labels = samples_to_arrays(samples)
    sigma_sq = np.asarray(sigmas.sigma_sq if hasattr(sigmas, "sigma_sq") else sigmas,
                          dtype=np.float64)
    if len(sigma_sq) != len(coords):
        raise ValidationError(
            f"{len(coords)} samples but {len(sigma_sq)} shape parameters"
        )
    return coords, labels.astype(np.float64), sigma_sq


def dual_objective(samples, sigmas, alpha) -> float:
    """Q(alpha) evaluated directly from the quadratic form."""
    coords, y, sigma_sq = _as_solver_arrays(samples, sigmas)
    alpha = np.asarray(alpha, dtype=np.float64)
    if len(alpha) != len(coords):
        raise ValidationError(f"{len(coords)} samples but {len(alpha)} weights")
    w = alpha * y
    quad = 0.0
    for i in range(len(coords)):
        if w[i] != 0.0:
            quad += w[i] * float(kernel_row(coords, sigma_sq, i) @ w)
    return float(alpha.sum()) - 0.5 * quad


def _gradient(coords, y, sigma_sq, alpha) -> np.ndarray:
    w = alpha * y
    f = np.zeros(len(coords))
    for i in np.flatnonzero(w):
        f += w[i] * kernel_row(coords, sigma_sq, i)
    return 1.0 - y * f


def _pair_gap(y, alpha, grad, C) -> tuple[int, int, float]:
    """Maximal violating pair and its gap; (-1, -1, 0) when none exists."""
    yg = y * grad
    up = ((alpha < C) & (y > 0)) | ((alpha > 0) & (y < 0))
    lo = ((alpha < C) & (y < 0)) | ((alpha > 0) & (y > 0))
    if not up.any() or not lo.any():
        return -1, -1, 0.0
    i = int(np.argmax(np.where(up, yg, -np.inf)))
    j = int(np.argmin(np.where(lo, yg, np.inf)))
    return i, j, float(yg[i] - yg[j])


def kkt_violation(samples, sigmas, alpha, C) -> float:
    """Largest first-order optimality gap of the box-and-equality dual.

    Zero means some bias-slack value satisfies every per-sample condition
    (alpha_i = 0 on or below it, alpha_i = C on or above, interior equal).
    """
    coords, y, sigma_sq = _as_solver_arrays(samples, sigmas)
    alpha = np.asarray(alpha, dtype=np.float64)
    grad = _gradient(coords, y, sigma_sq, alpha)
    _, _, gap = _pair_gap(y, alpha, grad, float(C))
    return max(0.0, gap)


def solve_dual(samples, sigmas, config: TrainConfig, progress=None) -> DualState:
    """Run the pairwise ascent until the violation gap sinks below kkt_tol.

    ``progress``, if given, is called as progress(iteration, Q, gap) every
    1000 updates and once on exit.
    """
    coords, y, sigma_sq = _as_solver_arrays(samples, sigmas)
    n = len(coords)
    C = float(config.C)
    cache = KernelRowCache(coords, sigma_sq, config.cache_mb)

    alpha = np.zeros(n)
    grad = np.ones(n)  # dQ/dalpha at alpha = 0
    objective = 0.0
    stall_limit = config.max_passes if config.max_passes is not None else 10 * n
    stalled = 0
    iterations = 0

    def attempt(i: int, j: int) -> float:
        """Maximize Q along the feasible (i, j) direction; returns delta Q."""
        nonlocal objective, grad
        if i == j:
            return 0.0
        row_i = cache.row(i)
        s = y[i] * y[j]
        k_ij = row_i[j]
        eta = 2.0 - 2.0 * k_ij
        quad = eta if eta > 1e-12 else 1e-12
        # unconstrained maximizer along the direction, then box clip
        aj_new = alpha[j] - y[j] * (y[i] * grad[i] - y[j] * grad[j]) / quad
        if s < 0:
            lo_b = max(0.0, alpha[j] - alpha[i])
            hi_b = min(C, C + alpha[j] - alpha[i])
        else:
            lo_b = max(0.0, alpha[i] + alpha[j] - C)
            hi_b = min(C, alpha[i] + alpha[j])
        aj_new = min(max(aj_new, lo_b), hi_b)
        dj = aj_new - alpha[j]
        if dj == 0.0:
            return 0.0
        di = -s * dj
        row_j = cache.row(j)
        gain = (grad[i] * di + grad[j] * dj
                - 0.5 * (di * di + dj * dj) - s * k_ij * di * dj)
        alpha[i] += di
        alpha[j] = aj_new
        grad -= y * ((di * y[i]) * row_i + (dj * y[j]) * row_j)
        objective += gain
        if config.debug and gain < -1e-9 * max(1.0, abs(objective)):
            raise AssertionError(
                f"objective decreased by {gain} on pair ({i}, {j})"
            )
        return gain

    gap = np.inf
    while True:
        i, j, gap = _pair_gap(y, alpha, grad, C)
        if i < 0 or gap <= config.kkt_tol:
            break
        # progress means the accumulated objective actually advanced;
        # sub-ulp gains do not count, which keeps the loop finite
        before = objective
        attempt(i, j)
        attempts = 1
        if objective == before:
            # clipped to a corner: scan for any partner that still moves
            order = np.flatnonzero(((alpha < C) & (y < 0)) | ((alpha > 0) & (y > 0)))
            for j_alt in order:
                attempts += 1
                if j_alt != j and attempt(i, int(j_alt)) and objective > before:
                    break
        iterations += 1
        if objective == before:
            stalled += attempts
            if stalled >= stall_limit:
                raise ConvergenceError(
                    f"no progress after {stalled} stalled pair updates; "
                    f"KKT violation still {gap:.3e} (tolerance {config.kkt_tol:.0e})",
                    violation=gap,
                )
        else:
            stalled = 0
        if progress is not None and iterations % 1000 == 0:
            progress(iterations, objective, gap)

    if progress is not None:
        progress(iterations, objective, max(0.0, gap))
    return DualState(alpha, objective, grad, max(0.0, gap), iterations)


def train(samples, config: TrainConfig = TrainConfig(), *,
          width: int | None = None, height: int | None = None,
          a: float = DEFAULT_RADIUS_FACTOR, progress=None) -> SdnModel:
    """Estimate shape parameters, solve the dual, keep the nonzero centers.

    ``width``/``height`` record the source grid for reconstruction; when
    omitted they are inferred from the sample coordinates.
    """
    sigmas = estimate_sigmas(samples, config.T, config.safety_factor)
    state = solve_dual(samples, sigmas, config, progress=progress)
    coords, labels = samples_to_arrays(samples)
    if width is None:
        width = int(math.floor(coords[:, 0].max())) + 1
    if height is None:
        height = int(math.floor(coords[:, 1].max())) + 1
    keep = np.flatnonzero(state.alpha > config.alpha_eps)
    domains = tuple(
        SimilarityDomain(
            (float(coords[i, 0]), float(coords[i, 1])),
            float(sigmas.sigma_sq[i]),
            float(state.alpha[i]),
            int(labels[i]),
        )
        for i in keep
    )
    return SdnModel(domains, config.T, config.C, a, width, height)
