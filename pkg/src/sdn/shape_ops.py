"""Object-level operations on foreground similarity domains.

Domains are grouped into objects by region growing over the overlap
graph (two domains belong together when their rendered spheres touch).
Each group can then be scaled about its centroid and shifted, and the
edited model is rendered back to pixels with the one-class rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import FormatError, ValidationError
from .sdn_model import SdnModel, SimilarityDomain, foreground_domains, one_class_values
from .shape_dataset import BinaryImage, labels_to_image


@dataclass(frozen=True)
class DomainGroup:
    """One connected object: indices into the model's foreground domains."""

    member_ids: tuple[int, ...]
    centroid: tuple[float, float]


@dataclass(frozen=True)
class GroupTransform:
    """Similarity transform for one group: scale about the group centroid,
    then shift."""

    group_id: int
    scale: float
    shift: tuple[float, float]

    def __post_init__(self):
        if self.scale <= 0:
            raise ValidationError(f"scale must be positive, got {self.scale}")


def group_domains(model: SdnModel, a: float | None = None) -> list[DomainGroup]:
    """Connected components of the foreground overlap graph, numbered by
    smallest member index."""
    a = model.a if a is None else a
    fg = foreground_domains(model)
    if not fg:
        raise ValidationError("model has no foreground domains")
    centers = np.array([d.center for d in fg])
    radii = np.sqrt(a * np.array([d.sigma_sq for d in fg]))
    diff = centers[:, None, :] - centers[None, :, :]
    dist_sq = np.einsum("ijk,ijk->ij", diff, diff)
    overlap = dist_sq <= (radii[:, None] + radii[None, :]) ** 2
    n_comp, labels = connected_components(csr_matrix(overlap), directed=False)
    groups = []
    for comp in range(n_comp):
        members = tuple(int(i) for i in np.flatnonzero(labels == comp))
        centroid = centers[list(members)].mean(axis=0)
        groups.append(DomainGroup(members, (float(centroid[0]), float(centroid[1]))))
    groups.sort(key=lambda g: g.member_ids[0])
    return groups


def transform_groups(model: SdnModel, transforms, a: float | None = None) -> SdnModel:
    """Apply one transform per targeted group and drop the background.

    Member centers map to centroid + scale*(c - centroid) + shift and
    sigma^2 scales by scale^2, keeping each domain geometrically similar.
    Groups are the ones computed on the input model; untargeted foreground
    domains pass through unchanged.  The result is a one-class model.
    """
    a = model.a if a is None else a
    groups = group_domains(model, a)
    by_id = {g_id: g for g_id, g in enumerate(groups)}
    assignment: dict[int, tuple[DomainGroup, GroupTransform]] = {}
    seen: set[int] = set()
    for t in transforms:
        if t.group_id not in by_id:
            raise ValidationError(
                f"group {t.group_id} does not exist (model has {len(groups)} groups)"
            )
        if t.group_id in seen:
            raise ValidationError(f"group {t.group_id} is transformed twice")
        seen.add(t.group_id)
        group = by_id[t.group_id]
        for member in group.member_ids:
            assignment[member] = (group, t)
    fg = foreground_domains(model)
    new_domains = []
    for idx, d in enumerate(fg):
        if idx in assignment:
            group, t = assignment[idx]
            gx, gy = group.centroid
            cx = gx + t.scale * (d.center[0] - gx) + t.shift[0]
            cy = gy + t.scale * (d.center[1] - gy) + t.shift[1]
            new_domains.append(
                SimilarityDomain((cx, cy), d.sigma_sq * t.scale**2, d.alpha, d.label)
            )
        else:
            new_domains.append(d)
    return SdnModel(tuple(new_domains), model.T, model.C, a,
                    model.source_width, model.source_height)


def transform_group(model: SdnModel, transform: GroupTransform,
                    a: float | None = None) -> SdnModel:
    """Single-group convenience wrapper around :func:`transform_groups`."""
    return transform_groups(model, [transform], a)


def render_one_class(model: SdnModel, width: int, height: int,
                     a: float | None = None) -> BinaryImage:
    """Rasterize the one-class rule over a width x height pixel grid."""
    if width < 1 or height < 1:
        raise ValidationError(f"grid dimensions must be positive, got {width}x{height}")
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    pts = np.column_stack([cols.ravel(), rows.ravel()]).astype(np.float64)
    labels = one_class_values(model, pts, a)
    return labels_to_image(width, height, labels)


# ---------------------------------------------------------------------------
# Transform scripts: "GROUP <id> SCALE <s> SHIFT <dx> <dy>" per line
# ---------------------------------------------------------------------------


def parse_transform_script(text: str) -> list[GroupTransform]:
    """Parse a transform script; '#' comments and blank lines are skipped."""
    transforms = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if (len(parts) != 7 or parts[0].upper() != "GROUP"
                or parts[2].upper() != "SCALE" or parts[4].upper() != "SHIFT"):
            raise FormatError(
                f"line {ln}: expected 'GROUP <id> SCALE <s> SHIFT <dx> <dy>', "
                f"got {raw!r}"
            )
        try:
            group_id = int(parts[1])
            scale = float(parts[3])
            dx, dy = float(parts[5]), float(parts[6])
        except ValueError:
            raise FormatError(f"line {ln}: non-numeric transform field in {raw!r}") from None
        try:
            transforms.append(GroupTransform(group_id, scale, (dx, dy)))
        except ValidationError as exc:
            raise FormatError(f"line {ln}: {exc}") from None
    return transforms
