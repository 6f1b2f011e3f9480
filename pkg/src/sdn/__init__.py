"""Sparse radial-basis shape models (similarity domains).

Train a sparse RBF model of a binary image, reconstruct the shape exactly
from the retained centers, and trace a skeleton through the largest
overlapping domains.
"""

from .errors import (
    ConvergenceError,
    DegenerateDataError,
    EmptySkeletonError,
    FormatError,
    SdnError,
    ValidationError,
)
from .kernel_geometry import (
    ShapeParameterSet,
    estimate_sigmas,
    max_cross_class_kernel,
    pair_sigma_sq,
    rbf,
)
from .sdn_model import (
    DEFAULT_RADIUS_FACTOR,
    SdnModel,
    SimilarityDomain,
    background_domains,
    classify,
    decision_value,
    decision_values,
    foreground_domains,
    load_model,
    one_class_classify,
    one_class_values,
    pixel_error,
    reconstruct,
    save_model,
)
from .sdn_trainer import (
    DualState,
    KernelRowCache,
    TrainConfig,
    dual_objective,
    kkt_violation,
    solve_dual,
    train,
)
from .shape_dataset import (
    BinaryImage,
    LabeledSample,
    image_to_samples,
    labels_to_image,
    load_image,
    samples_to_arrays,
    save_pgm,
)
from .shape_ops import (
    DomainGroup,
    GroupTransform,
    group_domains,
    parse_transform_script,
    render_one_class,
    transform_group,
    transform_groups,
)
from .skeleton_extractor import (
    SigmaHistogram,
    SkeletonGraph,
    build_skeleton,
    extract_skeleton,
    sigma_histogram,
    suppress_nested,
    threshold_domains,
    write_skeleton,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryImage",
    "ConvergenceError",
    "DEFAULT_RADIUS_FACTOR",
    "DegenerateDataError",
    "DomainGroup",
    "DualState",
    "EmptySkeletonError",
    "FormatError",
    "GroupTransform",
    "KernelRowCache",
    "LabeledSample",
    "SdnError",
    "SdnModel",
    "ShapeParameterSet",
    "SigmaHistogram",
    "SimilarityDomain",
    "SkeletonGraph",
    "TrainConfig",
    "ValidationError",
    "background_domains",
    "build_skeleton",
    "classify",
    "decision_value",
    "decision_values",
    "dual_objective",
    "estimate_sigmas",
    "extract_skeleton",
    "foreground_domains",
    "group_domains",
    "image_to_samples",
    "kkt_violation",
    "labels_to_image",
    "load_image",
    "load_model",
    "max_cross_class_kernel",
    "one_class_classify",
    "one_class_values",
    "pair_sigma_sq",
    "parse_transform_script",
    "pixel_error",
    "rbf",
    "reconstruct",
    "render_one_class",
    "samples_to_arrays",
    "save_model",
    "save_pgm",
    "sigma_histogram",
    "solve_dual",
    "suppress_nested",
    "threshold_domains",
    "train",
    "transform_group",
    "transform_groups",
    "write_skeleton",
]
