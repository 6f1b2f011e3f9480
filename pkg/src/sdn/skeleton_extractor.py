"""Skeleton extraction from foreground similarity domains.

Pipeline: histogram the foreground shape parameters into m uniform bins,
cut away the small boundary-hugging domains below a threshold, drop
domains whose centers sit inside a larger surviving domain, then connect
the remaining centers -- overlapping domains get an edge directly, and
disconnected clusters are joined through their globally closest pair of
centers so the final graph is a single component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySkeletonError, ValidationError
from .sdn_model import SdnModel, SimilarityDomain, foreground_domains

DEFAULT_BIN_COUNT = 10
DEFAULT_MAX_NODES = 25

OVERLAP_EDGE = "overlap"
FALLBACK_EDGE = "closest-fallback"


@dataclass(frozen=True, eq=False)
class SigmaHistogram:
    """Uniform-width histogram of foreground sigma^2 values."""

    bin_centers: np.ndarray
    counts: np.ndarray
    edges: np.ndarray  # m + 1 boundaries; bins are [lo, hi), last closed

    def __post_init__(self):
        object.__setattr__(self, "bin_centers", np.asarray(self.bin_centers, float))
        object.__setattr__(self, "counts", np.asarray(self.counts, int))
        object.__setattr__(self, "edges", np.asarray(self.edges, float))

    @property
    def m(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class SkeletonGraph:
    """Surviving domains as nodes plus the connecting edges.

    ``edges[k] = (i, j)`` indexes into ``nodes``; ``edge_kinds[k]`` says
    whether the pair overlaps or was joined as the closest bridge between
    two components.  ``radii[i]`` is the rendered radius sqrt(a*sigma^2).
    """

    nodes: tuple[SimilarityDomain, ...]
    radii: tuple[float, ...]
    edges: tuple[tuple[int, int], ...]
    edge_kinds: tuple[str, ...]
    a: float

    def polyline_segments(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        """Straight center-to-center segments, one per edge."""
        return [(self.nodes[i].center, self.nodes[j].center) for i, j in self.edges]


def sigma_histogram(model: SdnModel, m: int = DEFAULT_BIN_COUNT) -> SigmaHistogram:
    """Bin the foreground shape parameters into m uniform bins.

    A degenerate value range (all sigma^2 equal) collapses to a single
    bin of width 1 centered on the shared value.
    """
    if m < 1:
        raise ValidationError(f"bin count must be >= 1, got {m}")
    fg = foreground_domains(model)
    if not fg:
        raise ValidationError("model has no foreground domains")
    values = np.array([d.sigma_sq for d in fg])
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        edges = np.array([lo - 0.5, lo + 0.5])
        return SigmaHistogram(np.array([lo]), np.array([len(fg)]), edges)
    counts, edges = np.histogram(values, bins=m, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    return SigmaHistogram(centers, counts, edges)


def _sorted_desc(domains) -> list[SimilarityDomain]:
    return sorted(domains, key=lambda d: -d.sigma_sq)


def threshold_domains(model: SdnModel, sigma_sq_min: float) -> list[SimilarityDomain]:
    """Foreground domains with sigma^2 strictly above the threshold,
    largest first."""
    return _sorted_desc(d for d in foreground_domains(model) if d.sigma_sq > sigma_sq_min)


def suppress_nested(domains, a: float) -> list[SimilarityDomain]:
    """Greedy scan, largest sigma^2 first: drop any domain whose center
    lies strictly inside an already-accepted domain's sphere."""
    ordered = _sorted_desc(domains)
    if not ordered:
        return []
    centers = np.array([d.center for d in ordered])
    r_sq = a * np.array([d.sigma_sq for d in ordered])
    kept: list[int] = []
    for i in range(len(ordered)):
        if kept:
            diff = centers[kept] - centers[i]
            d_sq = np.einsum("ij,ij->i", diff, diff)
            if (d_sq < r_sq[kept]).any():
                continue
        kept.append(i)
    return [ordered[i] for i in kept]


def build_skeleton(domains, a: float) -> SkeletonGraph:
    """Connect surviving domains: overlap edges first, then closest-pair
    bridges between components until the graph is connected."""
    if a <= 0:
        raise ValidationError(f"radius factor a must be positive, got {a}")
    nodes = suppress_nested(domains, a)
    if not nodes:
        raise ValidationError("cannot build a skeleton from zero domains")
    centers = np.array([d.center for d in nodes])
    radii = np.array([d.radius(a) for d in nodes])
    n = len(nodes)

    diff = centers[:, None, :] - centers[None, :, :]
    dist_sq = np.einsum("ijk,ijk->ij", diff, diff)
    reach_sq = (radii[:, None] + radii[None, :]) ** 2

    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges: list[tuple[int, int]] = []
    kinds: list[str] = []
    for i in range(n):
        for j in range(i + 1, n):
            if dist_sq[i, j] <= reach_sq[i, j]:
                edges.append((i, j))
                kinds.append(OVERLAP_EDGE)
                parent[find(i)] = find(j)

    # bridge remaining components through their globally shortest link
    candidates = sorted(
        (dist_sq[i, j], i, j) for i in range(n) for j in range(i + 1, n)
    )
    for d_sq, i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
            kinds.append(FALLBACK_EDGE)

    return SkeletonGraph(tuple(nodes), tuple(float(r) for r in radii),
                         tuple(edges), tuple(kinds), a)


def _auto_threshold(model: SdnModel, m: int, a: float, max_nodes: int) -> float:
    """Smallest bin-edge threshold keeping at most max_nodes (but at least
    2) surviving nodes; degenerate cases fall back as documented below.

    Candidate thresholds are the histogram bins' lower edges, so the
    choice always corresponds to discarding whole bins, smallest first.
    """
    hist = sigma_histogram(model, m)
    candidates = [float(e) for e in hist.edges[:-1]]
    counts = [
        len(suppress_nested(threshold_domains(model, t), a)) for t in candidates
    ]
    for t, c in zip(candidates, counts):
        if 2 <= c <= max_nodes:
            return t
    # nothing satisfies both bounds: prefer the smallest threshold that
    # meets the node cap with at least one node, else the largest that
    # keeps two or more, else keep every domain
    for t, c in zip(candidates, counts):
        if 1 <= c <= max_nodes:
            return t
    for t, c in reversed(list(zip(candidates, counts))):
        if c >= 2:
            return t
    return math.nextafter(float(hist.edges[0]), -math.inf)


def extract_skeleton(
    model: SdnModel,
    threshold: float | None = None,
    bin_index: int | None = None,
    m: int = DEFAULT_BIN_COUNT,
    a: float | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> SkeletonGraph:
    """Threshold, suppress and connect the foreground domains.

    Exactly one of ``threshold`` (explicit sigma^2 cut) or ``bin_index``
    (cut at that histogram bin's lower edge) may be given; with neither,
    the threshold is chosen automatically as the smallest histogram edge
    that keeps the skeleton at or under ``max_nodes`` nodes.
    """
    a = model.a if a is None else a
    if threshold is not None and bin_index is not None:
        raise ValidationError("give either a threshold or a bin index, not both")
    if bin_index is not None:
        hist = sigma_histogram(model, m)
        if not 0 <= bin_index < hist.m:
            raise ValidationError(
                f"bin index {bin_index} outside the {hist.m}-bin histogram"
            )
        # the cut is strict, so bin 0 drops any domain tied with the
        # histogram minimum; pass threshold=0 to keep every domain
        threshold = float(hist.edges[bin_index])
    elif threshold is None:
        threshold = _auto_threshold(model, m, a, max_nodes)
    survivors = threshold_domains(model, threshold)
    if not survivors:
        raise EmptySkeletonError(
            f"sigma^2 threshold {threshold:g} removed every foreground domain; "
            "retry with a lower threshold"
        )
    return build_skeleton(survivors, a)


# ---------------------------------------------------------------------------
# Text export
# ---------------------------------------------------------------------------


def write_skeleton(graph: SkeletonGraph, path) -> None:
    """Line-oriented text: NODE id col row radius / EDGE id1 id2 kind."""
    lines = []
    for idx, (node, radius) in enumerate(zip(graph.nodes, graph.radii)):
        lines.append(
            f"NODE {idx} {node.center[0]:.9g} {node.center[1]:.9g} {radius:.9g}"
        )
    for (i, j), kind in zip(graph.edges, graph.edge_kinds):
        lines.append(f"EDGE {i} {j} {kind}")
    with open(str(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
