"""Binary shape images and their conversion to labeled training samples.

Coordinate convention used throughout the package: a sample coordinate is
``(col, row)`` with the origin at the top-left pixel, matching row-major
image storage.  Foreground pixels carry label +1, background -1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ValidationError

DARK_FOREGROUND = "dark"
BRIGHT_FOREGROUND = "bright"


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """A width x height grid of {0,1} pixels, 1 = foreground."""

    width: int
    height: int
    pixels: np.ndarray  # shape (height, width), uint8, values in {0,1}

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError(
                f"image dimensions must be positive, got {self.width}x{self.height}"
            )
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.shape != (self.height, self.width):
            raise ValidationError(
                f"pixel grid shape {px.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if not np.isin(px, (0, 1)).all():
            raise ValidationError("pixel values must be 0 or 1")
        object.__setattr__(self, "pixels", px)

    @property
    def foreground_count(self) -> int:
        return int(self.pixels.sum())

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class LabeledSample:
    """One pixel as a 2-D (col, row) coordinate with a +/-1 class label."""

    x: tuple[float, float]
    y: int

    def __post_init__(self):
        if self.y not in (-1, 1):
            raise ValidationError(f"label must be -1 or +1, got {self.y}")


def image_to_samples(img: BinaryImage) -> list[LabeledSample]:
    """Turn every pixel into a labeled sample, row-major order.

    Foreground (1) pixels map to y=+1, background to y=-1.
    """
    samples = []
    for row in range(img.height):
        for col in range(img.width):
            label = 1 if img.pixels[row, col] else -1
            samples.append(LabeledSample((float(col), float(row)), label))
    return samples


def labels_to_image(width: int, height: int, labels) -> BinaryImage:
    """Inverse of :func:`image_to_samples`: +1 -> 1, -1 -> 0, row-major."""
    arr = np.asarray(labels)
    if arr.size != width * height:
        raise ValidationError(
            f"expected {width * height} labels for a {width}x{height} image, "
            f"got {arr.size}"
        )
    if not np.isin(arr, (-1, 1)).all():
        raise ValidationError("labels must be -1 or +1")
    pixels = (arr.reshape(height, width) == 1).astype(np.uint8)
    return BinaryImage(width, height, pixels)


def samples_to_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """Pack samples into (coords float64 (n,2), labels int8 (n,)) arrays."""
    if len(samples) == 0:
        raise ValidationError("empty sample list")
    coords = np.array([s.x for s in samples], dtype=np.float64)
    labels = np.array([s.y for s in samples], dtype=np.int8)
    return coords, labels


# ---------------------------------------------------------------------------
# PGM / PNG input, PGM output
# ---------------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"^\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_pgm_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read whitespace-separated header tokens, skipping # comments.

    Returns the tokens and the offset just past the final separator.
    """
    tokens = []
    pos = 0
    for _ in range(count):
        m = _PGM_TOKEN.match(data[pos:])
        if not m:
            raise FormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos += m.end()
    if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n":
        raise FormatError("truncated PGM header")
    return tokens, pos + 1


def _load_pgm(data: bytes) -> np.ndarray:
    if len(data) < 2 or data[:1] != b"P":
        raise FormatError("not a PGM file (missing P2/P5 magic)")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported PNM magic {magic!r} (expected P2 or P5)")
    tokens, offset = _read_pgm_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"non-numeric PGM header fields {tokens!r}") from None
    if width < 1 or height < 1:
        raise ValidationError(f"zero-dimension image {width}x{height}")
    if not 0 < maxval <= 255:
        raise FormatError(f"unsupported PGM maxval {maxval} (only 8-bit supported)")
    body = data[2 + offset :]
    n = width * height
    if magic == b"P5":
        if len(body) < n:
            raise FormatError(f"P5 payload holds {len(body)} bytes, expected {n}")
        gray = np.frombuffer(body[:n], dtype=np.uint8)
    else:
        values = body.split()
        if len(values) < n:
            raise FormatError(f"P2 payload holds {len(values)} values, expected {n}")
        try:
            gray = np.array([int(v) for v in values[:n]], dtype=np.int64)
        except ValueError:
            raise FormatError("non-numeric P2 pixel value") from None
        if gray.min() < 0 or gray.max() > maxval:
            raise FormatError("P2 pixel value outside [0, maxval]")
        gray = gray.astype(np.uint8)
    return gray.reshape(height, width)


def _load_png(path: str) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError:  # pragma: no cover - Pillow is an optional extra
        raise FormatError(
            "PNG support requires Pillow (pip install sdn[png])"
        ) from None
    with Image.open(path) as im:
        gray = np.asarray(im.convert("L"), dtype=np.uint8)
    if gray.size == 0:
        raise ValidationError("zero-dimension image")
    return gray


def load_image(path, threshold: int = 128, polarity: str = DARK_FOREGROUND) -> BinaryImage:
    """Load a grayscale PGM (P2/P5) or PNG file and binarize it.

    Pixels with gray value >= ``threshold`` are "bright".  With polarity
    ``"dark"`` (default) dark pixels become foreground 1; with ``"bright"``
    the bright pixels do.
    """
    if polarity not in (DARK_FOREGROUND, BRIGHT_FOREGROUND):
        raise ValidationError(f"polarity must be 'dark' or 'bright', got {polarity!r}")
    if not 0 <= threshold <= 255:
        raise ValidationError(f"threshold must be in [0, 255], got {threshold}")
    path = str(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
        fh.seek(0)
        if head[:2] in (b"P2", b"P5"):
            gray = _load_pgm(fh.read())
        elif head.startswith(b"\x89PNG"):
            gray = _load_png(path)
        else:
            raise FormatError(f"unrecognized image format in {path}")
    bright = gray >= threshold
    fg = ~bright if polarity == DARK_FOREGROUND else bright
    h, w = gray.shape
    return BinaryImage(w, h, fg.astype(np.uint8))


def save_pgm(img: BinaryImage, path, polarity: str = DARK_FOREGROUND) -> None:
    """Write a binary P5 PGM.  With polarity "dark" the foreground is
    written as gray 0 so that a default load_image round-trips exactly."""
    if polarity == DARK_FOREGROUND:
        gray = np.where(img.pixels == 1, 0, 255).astype(np.uint8)
    elif polarity == BRIGHT_FOREGROUND:
        gray = np.where(img.pixels == 1, 255, 0).astype(np.uint8)
    else:
        raise ValidationError(f"polarity must be 'dark' or 'bright', got {polarity!r}")
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    with open(str(path), "wb") as fh:
        fh.write(header)
        fh.write(gray.tobytes())
