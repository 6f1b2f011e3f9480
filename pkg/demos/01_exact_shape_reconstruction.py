"""Fit a sparse similarity-domain model to a binary shape and get the
shape back, pixel for pixel.

Every pixel of the input becomes a training sample: its (col, row)
coordinate is the input vector, foreground/background is the +/-1 label.
The solver keeps only the samples that matter (a few hundred out of
thousands), yet the sign of the learned decision function reproduces the
input image exactly.
"""

import pathlib
import time

import numpy as np

from sdn import (
    BinaryImage,
    TrainConfig,
    background_domains,
    foreground_domains,
    image_to_samples,
    pixel_error,
    reconstruct,
    save_model,
    save_pgm,
    train,
)

OUT = pathlib.Path("demo_output/01_reconstruction")
OUT.mkdir(parents=True, exist_ok=True)


def make_ring(size=40, outer=14, inner=8):
    yy, xx = np.mgrid[0:size, 0:size]
    d_sq = (xx - size // 2) ** 2 + (yy - size // 2) ** 2
    return BinaryImage(size, size, ((d_sq <= outer**2) & (d_sq >= inner**2)).astype(np.uint8))


def make_disk(size=32, radius=10):
    yy, xx = np.mgrid[0:size, 0:size]
    d_sq = (xx - size // 2) ** 2 + (yy - size // 2) ** 2
    return BinaryImage(size, size, (d_sq <= radius**2).astype(np.uint8))


for name, image in [("disk32", make_disk()), ("ring40", make_ring())]:
    samples = image_to_samples(image)
    print(f"\n=== {name}: {image.width}x{image.height}, "
          f"{image.foreground_count} foreground pixels, {len(samples)} samples ===")

    started = time.perf_counter()
    model = train(samples, TrainConfig(T=0.05), width=image.width, height=image.height)
    elapsed = time.perf_counter() - started

    err = pixel_error(model, image)
    total = image.width * image.height
    print(f"trained in {elapsed:.2f}s")
    print(f"retained centers: k={model.k} of {total} pixels "
          f"({100 * model.k / total:.1f}%)")
    print(f"  foreground s1={len(foreground_domains(model))}, "
          f"background s2={len(background_domains(model))}")
    print(f"pixel error: {err}")
    assert err == 0, "reconstruction should be exact on these shapes"

    save_model(model, OUT / f"{name}.sdn")
    save_pgm(image, OUT / f"{name}.pgm")
    save_pgm(reconstruct(model), OUT / f"{name}.recon.pgm")
    print(f"wrote {OUT}/{name}.sdn and the input/reconstruction PGMs")

print("\nBoth reconstructions are exact; the model files are plain text, "
      "one similarity domain per line.")
