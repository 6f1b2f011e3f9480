"""Visualize the similarity domains a trained model keeps.

Each retained center carries its own shape parameter sigma^2; drawn as a
circle of radius sqrt(a * sigma^2) it marks the region the center
"owns".  Small circles hug the class boundary, a handful of large ones
fill each object's interior.  The gallery renders all domains, then the
foreground ones alone, in the style of the similarity-domain figures:
blue background, yellow shape, red centers, green radius ticks.
"""

import pathlib

import numpy as np

from sdn import (
    BinaryImage,
    TrainConfig,
    background_domains,
    foreground_domains,
    image_to_samples,
    sigma_histogram,
    train,
)
from sdn.cli_app import format_histogram_table, render_overlay_svg

OUT = pathlib.Path("demo_output/02_gallery")
OUT.mkdir(parents=True, exist_ok=True)

yy, xx = np.mgrid[0:64, 0:64]
mask = ((xx - 18) ** 2 + (yy - 22) ** 2 <= 49) | ((xx - 44) ** 2 + (yy - 40) ** 2 <= 81)
image = BinaryImage(64, 64, mask.astype(np.uint8))

model = train(image_to_samples(image), TrainConfig(T=0.05), width=64, height=64)
fg, bg = foreground_domains(model), background_domains(model)
print(f"two-blob image: k={model.k} centers ({len(fg)} foreground, {len(bg)} background)")

sigma = np.array([d.sigma_sq for d in fg])
print(f"foreground sigma^2 spans [{sigma.min():.2f}, {sigma.max():.2f}] px^2")
print("\nforeground shape-parameter histogram (10 uniform bins):")
print(format_histogram_table(sigma_histogram(model, 10)))

(OUT / "all_domains.svg").write_text(
    render_overlay_svg(image, model.domains, model.a)
)
(OUT / "foreground_domains.svg").write_text(
    render_overlay_svg(image, fg, model.a)
)
print(f"\nwrote {OUT}/all_domains.svg and {OUT}/foreground_domains.svg")
print("open them in a browser: boundary centers are dense and small, "
      "interior centers are few and large")
