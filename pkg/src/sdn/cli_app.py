"""Command-line front end: train, reconstruct, oneclass, skeleton,
transform, groups, inspect.

Exit codes: 0 success, 2 nonzero pixel error (suppressed by
--allow-error), 3 validation/usage error, 4 solver non-convergence,
5 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ConvergenceError, FormatError, ValidationError
from .sdn_model import (
    SdnModel,
    background_domains,
    foreground_domains,
    load_model,
    pixel_error,
    reconstruct,
    save_model,
)
from .sdn_trainer import TrainConfig, train
from .shape_dataset import BinaryImage, image_to_samples, load_image, save_pgm
from .shape_ops import (
    group_domains,
    parse_transform_script,
    render_one_class,
    transform_groups,
)
from .skeleton_extractor import (
    SkeletonGraph,
    extract_skeleton,
    sigma_histogram,
    write_skeleton,
)

EXIT_OK = 0
EXIT_PIXEL_ERROR = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_IO = 5

DEFAULTS = {
    "T": 0.05,
    "C": 1000.0,
    "a": 2.85,
    "safety_factor": 0.99,
    "bins": 10,
    "max_nodes": 25,
    "binarize_threshold": 128,
    "polarity": "dark",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems map to the validation exit code
        raise ValidationError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out-dir", default=".", help="directory for output files")
        p.add_argument("--config", help="JSON file with default option values")
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("train", help="fit a model to a binary image")
    p.add_argument("image")
    p.add_argument("--T", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--safety-factor", dest="safety_factor", type=float)
    p.add_argument("--polarity", choices=["dark", "bright"])
    p.add_argument("--binarize-threshold", dest="binarize_threshold", type=int)
    p.add_argument("--allow-error", action="store_true",
                   help="exit 0 even when the reconstruction has pixel errors")
    add_common(p)

    p = sub.add_parser("reconstruct", help="rasterize a model's decision function")
    p.add_argument("model")
    p.add_argument("--reference", help="image to count pixel errors against")
    p.add_argument("--polarity", choices=["dark", "bright"])
    p.add_argument("--binarize-threshold", dest="binarize_threshold", type=int)
    p.add_argument("--allow-error", action="store_true")
    add_common(p)

    p = sub.add_parser("oneclass", help="rasterize the one-class approximation")
    p.add_argument("model")
    p.add_argument("--a", type=float)
    add_common(p)

    p = sub.add_parser("skeleton", help="extract and render the skeleton")
    p.add_argument("model")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--threshold", type=float, help="explicit sigma^2 cut")
    mode.add_argument("--auto", action="store_true",
                      help="pick the smallest histogram edge keeping <= max-nodes")
    p.add_argument("--bins", type=int)
    p.add_argument("--max-nodes", dest="max_nodes", type=int)
    p.add_argument("--a", type=float)
    add_common(p)

    p = sub.add_parser("transform", help="scale/shift domain groups per a script")
    p.add_argument("model")
    p.add_argument("script")
    p.add_argument("--a", type=float)
    add_common(p)

    p = sub.add_parser("groups", help="list the connected domain groups")
    p.add_argument("model")
    p.add_argument("--a", type=float)
    add_common(p)

    p = sub.add_parser("inspect", help="summarize a model file")
    p.add_argument("model")
    p.add_argument("--bins", type=int)
    add_common(p)

    return parser


def _config_values(args) -> dict:
    config = getattr(args, "_config_values", None)
    if config is None:
        config = {}
        if getattr(args, "config", None):
            with open(args.config) as fh:
                try:
                    config = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise FormatError(f"{args.config}: {exc}") from None
        args._config_values = config
    return config


def _resolve(args, key):
    """Option precedence: command line > config file > built-in default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    config = _config_values(args)
    if key in config:
        return config[key]
    return DEFAULTS[key]


def _resolve_a(args, model: SdnModel) -> float:
    """Radius factor: command line > config file > the model's stored value."""
    if getattr(args, "a", None) is not None:
        return args.a
    config = _config_values(args)
    if "a" in config:
        return config["a"]
    return model.a


def _out_path(args, stem: str, suffix: str) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / f"{stem}{suffix}"


def _load(path: str) -> SdnModel:
    return load_model(path)


# ---------------------------------------------------------------------------
# SVG overlay, styled after the similarity-domain figures: blue background,
# yellow shape, yellow domain circles, red centers, green radius ticks,
# blue skeleton polyline.
# ---------------------------------------------------------------------------

_GENERATOR_COMMENT = "<!-- generated by sdn -->"
_BG_FILL = "#1f49b5"
_FG_FILL = "#ffd92f"
_CIRCLE_STROKE = "#ffd92f"
_CENTER_FILL = "#e02020"
_TICK_STROKE = "#20c040"
_SKELETON_STROKE = "#1040ff"


def _foreground_runs(image: BinaryImage):
    """Merge each row's foreground pixels into (row, col_start, length) runs."""
    for row in range(image.height):
        line = image.pixels[row]
        col = 0
        while col < image.width:
            if line[col]:
                start = col
                while col < image.width and line[col]:
                    col += 1
                yield row, start, col - start
            else:
                col += 1


def render_overlay_svg(
    image: BinaryImage | None,
    domains,
    a: float,
    skeleton: SkeletonGraph | None = None,
    scale: int = 6,
) -> str:
    """Build the overlay SVG as a string; output is deterministic."""
    if image is not None:
        width, height = image.width, image.height
    elif skeleton is not None and skeleton.nodes:
        width = int(max(d.center[0] for d in skeleton.nodes)) + 2
        height = int(max(d.center[1] for d in skeleton.nodes)) + 2
    else:
        raise ValidationError("nothing to render")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width * scale}" '
        f'height="{height * scale}" viewBox="0 0 {width} {height}">',
        _GENERATOR_COMMENT,
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="{_BG_FILL}"/>',
    ]
    if image is not None:
        for row, start, length in _foreground_runs(image):
            parts.append(
                f'<rect x="{start}" y="{row}" width="{length}" height="1" '
                f'fill="{_FG_FILL}"/>'
            )
    for d in domains:
        cx, cy = d.center[0] + 0.5, d.center[1] + 0.5
        r = d.radius(a)
        parts.append(
            f'<circle cx="{cx:.9g}" cy="{cy:.9g}" r="{r:.9g}" fill="none" '
            f'stroke="{_CIRCLE_STROKE}" stroke-width="0.12"/>'
        )
        parts.append(
            f'<line x1="{cx:.9g}" y1="{cy:.9g}" x2="{cx + r:.9g}" y2="{cy:.9g}" '
            f'stroke="{_TICK_STROKE}" stroke-width="0.1"/>'
        )
    for d in domains:
        cx, cy = d.center[0] + 0.5, d.center[1] + 0.5
        parts.append(f'<circle cx="{cx:.9g}" cy="{cy:.9g}" r="0.3" fill="{_CENTER_FILL}"/>')
    if skeleton is not None:
        for (x1, y1), (x2, y2) in skeleton.polyline_segments():
            parts.append(
                f'<line x1="{x1 + 0.5:.9g}" y1="{y1 + 0.5:.9g}" '
                f'x2="{x2 + 0.5:.9g}" y2="{y2 + 0.5:.9g}" '
                f'stroke="{_SKELETON_STROKE}" stroke-width="0.35"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def format_histogram_table(hist) -> str:
    """Two-row layout: bin centers above the per-bin counts."""
    centers = [f"{c:.2f}" for c in hist.bin_centers]
    counts = [str(int(c)) for c in hist.counts]
    widths = [max(len(a), len(b)) for a, b in zip(centers, counts)]
    label_w = len("Total Counts:")
    center_row = "Bin Center:".ljust(label_w) + "  " + "  ".join(
        c.rjust(w) for c, w in zip(centers, widths)
    )
    count_row = "Total Counts:".ljust(label_w) + "  " + "  ".join(
        c.rjust(w) for c, w in zip(counts, widths)
    )
    return center_row + "\n" + count_row


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_train(args) -> int:
    polarity = _resolve(args, "polarity")
    threshold = _resolve(args, "binarize_threshold")
    image = load_image(args.image, threshold=threshold, polarity=polarity)
    config = TrainConfig(
        T=_resolve(args, "T"),
        C=_resolve(args, "C"),
        safety_factor=_resolve(args, "safety_factor"),
    )
    progress = None
    if args.verbose:
        def progress(it, q, gap):
            print(f"  iter={it} Q={q:.6f} gap={gap:.3e}", file=sys.stderr)
    samples = image_to_samples(image)
    started = time.perf_counter()
    model = train(samples, config, width=image.width, height=image.height,
                  a=_resolve(args, "a"), progress=progress)
    elapsed = time.perf_counter() - started
    err = pixel_error(model, image)
    s1 = len(foreground_domains(model))
    s2 = len(background_domains(model))

    stem = Path(args.image).stem
    model_path = _out_path(args, stem, ".sdn")
    save_model(model, model_path)
    manifest_path = _out_path(args, stem, ".manifest.json")
    manifest = {
        "input": str(args.image),
        "config": {
            "T": config.T,
            "C": config.C,
            "a": model.a,
            "safety_factor": config.safety_factor,
            "binarize_threshold": threshold,
            "polarity": polarity,
            "determinism": "no random seed involved; identical runs are byte-identical",
        },
        "outputs": [str(model_path), str(manifest_path)],
        "metrics": {
            "pixel_error": err,
            "k": model.k,
            "s1": s1,
            "s2": s2,
            "train_seconds": round(elapsed, 3),
        },
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"k={model.k} s1={s1} s2={s2} pixel_error={err}")
    print(f"model: {model_path}")
    if err > 0 and not args.allow_error:
        print(f"reconstruction differs from input on {err} pixels", file=sys.stderr)
        return EXIT_PIXEL_ERROR
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    model = _load(args.model)
    image = reconstruct(model)
    stem = Path(args.model).stem
    out = _out_path(args, stem, ".recon.pgm")
    save_pgm(image, out, polarity=_resolve(args, "polarity"))
    print(f"reconstruction: {out}")
    if args.reference:
        reference = load_image(
            args.reference,
            threshold=_resolve(args, "binarize_threshold"),
            polarity=_resolve(args, "polarity"),
        )
        err = pixel_error(model, reference)
        print(f"pixel_error={err}")
        if err > 0 and not args.allow_error:
            return EXIT_PIXEL_ERROR
    return EXIT_OK


def _cmd_oneclass(args) -> int:
    model = _load(args.model)
    image = render_one_class(model, model.source_width, model.source_height,
                             _resolve_a(args, model))
    out = _out_path(args, Path(args.model).stem, ".oneclass.pgm")
    save_pgm(image, out)
    print(f"one-class render: {out}")
    return EXIT_OK


def _cmd_skeleton(args) -> int:
    model = _load(args.model)
    a = _resolve_a(args, model)
    bins = _resolve(args, "bins")
    hist = sigma_histogram(model, bins)
    print(format_histogram_table(hist))
    graph = extract_skeleton(
        model,
        threshold=args.threshold,
        m=bins,
        a=a,
        max_nodes=_resolve(args, "max_nodes"),
    )
    stem = Path(args.model).stem
    txt = _out_path(args, stem, ".skeleton.txt")
    write_skeleton(graph, txt)
    svg = _out_path(args, stem, ".skeleton.svg")
    mask = reconstruct(model)
    svg_text = render_overlay_svg(mask, graph.nodes, a, skeleton=graph)
    with open(svg, "w", encoding="ascii", newline="\n") as fh:
        fh.write(svg_text)
    kinds = list(graph.edge_kinds)
    print(f"nodes={len(graph.nodes)} edges={len(graph.edges)} "
          f"(overlap={kinds.count('overlap')}, fallback={kinds.count('closest-fallback')})")
    print(f"skeleton: {txt}")
    print(f"overlay: {svg}")
    return EXIT_OK


def _cmd_transform(args) -> int:
    model = _load(args.model)
    with open(args.script) as fh:
        transforms = parse_transform_script(fh.read())
    a = _resolve_a(args, model)
    moved = transform_groups(model, transforms, a)
    image = render_one_class(moved, model.source_width, model.source_height, a)
    stem = Path(args.model).stem
    out = _out_path(args, stem, ".transformed.pgm")
    save_pgm(image, out)
    model_out = _out_path(args, stem, ".transformed.sdn")
    save_model(moved, model_out)
    print(f"transformed render: {out}")
    print(f"transformed model: {model_out}")
    return EXIT_OK


def _cmd_groups(args) -> int:
    model = _load(args.model)
    groups = group_domains(model, _resolve_a(args, model))
    print(f"groups={len(groups)}")
    for g_id, g in enumerate(groups):
        cx, cy = g.centroid
        print(f"group {g_id}: members={len(g.member_ids)} centroid=({cx:.2f}, {cy:.2f})")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    model = _load(args.model)
    fg = foreground_domains(model)
    bg = background_domains(model)
    print(f"grid: {model.source_width}x{model.source_height}")
    print(f"constants: T={model.T:g} C={model.C:g} a={model.a:g}")
    print(f"domains: k={model.k} s1={len(fg)} s2={len(bg)}")
    if fg:
        sigma = np.array([d.sigma_sq for d in fg])
        print(f"foreground sigma^2: min={sigma.min():.4g} max={sigma.max():.4g}")
        print(format_histogram_table(sigma_histogram(model, _resolve(args, "bins"))))
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "reconstruct": _cmd_reconstruct,
    "oneclass": _cmd_oneclass,
    "skeleton": _cmd_skeleton,
    "transform": _cmd_transform,
    "groups": _cmd_groups,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
