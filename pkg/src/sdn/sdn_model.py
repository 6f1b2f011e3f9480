"""The trained similarity-domain model.

A model is a sparse list of similarity domains (RBF centers that kept a
nonzero dual weight), each carrying its own shape parameter.  The decision
function is the plain weighted kernel sum

    f(x) = sum_i  alpha_i * y_i * exp(-||x - c_i||^2 / sigma_i^2)

with no bias term; a point is foreground when f(x) > 0.  The one-class
approximation drops the background domains entirely and declares x
foreground when it falls strictly inside any foreground domain's sphere
of radius sqrt(a * sigma_i^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError
from .shape_dataset import BinaryImage, labels_to_image

#: Default sphere-radius multiplier for the one-class approximation.
DEFAULT_RADIUS_FACTOR = 2.85

_EVAL_CHUNK = 512  # pixel rows of the (points x domains) work matrix


@dataclass(frozen=True)
class SimilarityDomain:
    """An RBF center with shape parameter, dual weight and class label."""

    center: tuple[float, float]  # (col, row) in pixels
    sigma_sq: float
    alpha: float
    label: int

    def __post_init__(self):
        if self.sigma_sq <= 0:
            raise ValidationError(f"sigma_sq must be positive, got {self.sigma_sq}")
        if self.alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        if self.label not in (-1, 1):
            raise ValidationError(f"label must be -1 or +1, got {self.label}")

    def radius(self, a: float) -> float:
        """Rendered sphere radius sqrt(a * sigma_sq)."""
        return float(np.sqrt(a * self.sigma_sq))


@dataclass(frozen=True)
class SdnModel:
    """Trained model: similarity domains plus the constants used to fit them."""

    domains: tuple[SimilarityDomain, ...]
    T: float
    C: float
    a: float
    source_width: int
    source_height: int

    def __post_init__(self):
        object.__setattr__(self, "domains", tuple(self.domains))
        if self.source_width < 1 or self.source_height < 1:
            raise ValidationError("source dimensions must be positive")

    # -- array views (rebuilt on demand; models are small) ------------------

    def _arrays(self, domains=None):
        doms = self.domains if domains is None else domains
        centers = np.array([d.center for d in doms], dtype=np.float64)
        sigma_sq = np.array([d.sigma_sq for d in doms], dtype=np.float64)
        weights = np.array([d.alpha * d.label for d in doms], dtype=np.float64)
        return centers, sigma_sq, weights

    @property
    def k(self) -> int:
        """Total number of retained centers."""
        return len(self.domains)


def foreground_domains(model: SdnModel) -> list[SimilarityDomain]:
    """Domains with label +1 (the shape's own centers)."""
    return [d for d in model.domains if d.label == 1]


def background_domains(model: SdnModel) -> list[SimilarityDomain]:
    return [d for d in model.domains if d.label == -1]


def decision_values(model: SdnModel, points) -> np.ndarray:
    """Vectorized f(x) over an (n, 2) array of (col, row) points."""
    if not model.domains:
        raise ValidationError("model has no similarity domains")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    centers, sigma_sq, weights = model._arrays()
    out = np.empty(len(pts), dtype=np.float64)
    for start in range(0, len(pts), _EVAL_CHUNK):
        chunk = pts[start : start + _EVAL_CHUNK]
        diff = chunk[:, None, :] - centers[None, :, :]
        d_sq = np.einsum("ijk,ijk->ij", diff, diff)
        out[start : start + _EVAL_CHUNK] = np.exp(-d_sq / sigma_sq) @ weights
    return out


def decision_value(model: SdnModel, x) -> float:
    """f(x) for a single (col, row) point."""
    return float(decision_values(model, np.asarray(x, dtype=np.float64)[None, :])[0])


def classify(model: SdnModel, x) -> int:
    """sign(f(x)) with the tie f(x) == 0 mapped to background (-1)."""
    return 1 if decision_value(model, x) > 0 else -1


def _grid_points(width: int, height: int) -> np.ndarray:
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    return np.column_stack([cols.ravel(), rows.ravel()]).astype(np.float64)


def reconstruct(model: SdnModel) -> BinaryImage:
    """Classify every pixel of the source grid and assemble the mask."""
    pts = _grid_points(model.source_width, model.source_height)
    labels = np.where(decision_values(model, pts) > 0, 1, -1)
    return labels_to_image(model.source_width, model.source_height, labels)


def pixel_error(model: SdnModel, reference: BinaryImage) -> int:
    """Hamming distance between the reconstruction and a reference mask."""
    if (reference.width, reference.height) != (model.source_width, model.source_height):
        raise ValidationError(
            f"reference is {reference.width}x{reference.height}, model grid is "
            f"{model.source_width}x{model.source_height}"
        )
    recon = reconstruct(model)
    return int(np.count_nonzero(recon.pixels != reference.pixels))


def one_class_values(model: SdnModel, points, a: float | None = None) -> np.ndarray:
    """Vectorized one-class labels (+1/-1) over an (n, 2) point array."""
    a = model.a if a is None else a
    if a <= 0:
        raise ValidationError(f"radius factor a must be positive, got {a}")
    fg = foreground_domains(model)
    if not fg:
        raise ValidationError("model has no foreground domains")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    centers, sigma_sq, _ = model._arrays(fg)
    r_sq = a * sigma_sq
    out = np.full(len(pts), -1, dtype=np.int8)
    for start in range(0, len(pts), _EVAL_CHUNK):
        chunk = pts[start : start + _EVAL_CHUNK]
        diff = chunk[:, None, :] - centers[None, :, :]
        d_sq = np.einsum("ijk,ijk->ij", diff, diff)
        inside = (d_sq < r_sq).any(axis=1)  # strictly inside the sphere
        out[start : start + _EVAL_CHUNK][inside] = 1
    return out


def one_class_classify(model: SdnModel, x, a: float | None = None) -> int:
    """+1 iff x lies strictly inside some foreground domain's sphere."""
    return int(one_class_values(model, np.asarray(x, dtype=np.float64)[None, :], a)[0])


# ---------------------------------------------------------------------------
# Serialization: versioned line-oriented text, 9 significant digits
# ---------------------------------------------------------------------------

_MAGIC = "SDN"
_VERSION = "v1"


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def save_model(model: SdnModel, path) -> None:
    """Write the versioned text format; deterministic byte-for-byte."""
    lines = [
        f"{_MAGIC} {_VERSION} {model.source_width} {model.source_height} "
        f"{_fmt(model.T)} {_fmt(model.C)} {_fmt(model.a)}"
    ]
    for d in model.domains:
        lines.append(
            f"{_fmt(d.center[0])} {_fmt(d.center[1])} "
            f"{_fmt(d.sigma_sq)} {_fmt(d.alpha)} {d.label:d}"
        )
    with open(str(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> SdnModel:
    with open(str(path), "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty model file")
    head = lines[0].split()
    if len(head) != 7 or head[0] != _MAGIC or head[1] != _VERSION:
        raise FormatError(f"{path}:1: bad header {lines[0]!r}")
    try:
        width, height = int(head[2]), int(head[3])
        T, C, a = float(head[4]), float(head[5]), float(head[6])
    except ValueError:
        raise FormatError(f"{path}:1: non-numeric header field") from None
    domains = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"{path}:{ln}: expected 5 fields, got {len(parts)}")
        try:
            col, row, sigma_sq, alpha = (float(p) for p in parts[:4])
            label = int(parts[4])
        except ValueError:
            raise FormatError(f"{path}:{ln}: non-numeric domain field") from None
        domains.append(SimilarityDomain((col, row), sigma_sq, alpha, label))
    return SdnModel(tuple(domains), T, C, a, width, height)
