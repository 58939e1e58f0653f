"""Color-aware multi-style transfer.

Soft palette masks split deep-feature Gram statistics per color so that each
style in the reference image lands on the region of nearest color in the
content image, with automatic or user-steered color associations.
"""

from .errors import (
    CamsError,
    DecodeError,
    DimMismatch,
    EmptyFeature,
    InvalidAssociation,
    InvalidKernel,
    InvalidSigma,
    InvalidSize,
    KeySetMismatch,
    LayerSetMismatch,
    NonFiniteLoss,
    PaletteError,
    TooSmallInput,
    UnknownLayer,
    WeightsMismatch,
)
from .features import (
    BackboneConfig,
    FeatureExtractor,
    extract_features,
    load_backbone,
    load_default_backbone,
    tiny_backbone,
)
from .imaging import gaussian_blur, load_image, resize_bilinear, save_image
from .losses import (
    GramSet,
    LossWeights,
    cams_loss,
    classic_style_loss,
    content_loss,
    gram_matrix,
    total_loss,
    weighted_gram_matrix,
)
from .masking import MaskSet, adapt_mask_to_layer, build_mask_set, compute_color_mask
from .metrics import EvalReport, evaluate_triple
from .palette import Palette, extract_palette, merge_palettes
from .transfer import (
    AssociationMap,
    LossRecord,
    TransferConfig,
    TransferResult,
    run_classic_nst,
    run_transfer,
)

__version__ = "0.1.0"

__all__ = [
    "AssociationMap",
    "BackboneConfig",
    "CamsError",
    "DecodeError",
    "DimMismatch",
    "EmptyFeature",
    "EvalReport",
    "FeatureExtractor",
    "GramSet",
    "InvalidAssociation",
    "InvalidKernel",
    "InvalidSigma",
    "InvalidSize",
    "KeySetMismatch",
    "LayerSetMismatch",
    "LossRecord",
    "LossWeights",
    "MaskSet",
    "NonFiniteLoss",
    "Palette",
    "PaletteError",
    "TooSmallInput",
    "TransferConfig",
    "TransferResult",
    "UnknownLayer",
    "WeightsMismatch",
    "adapt_mask_to_layer",
    "build_mask_set",
    "cams_loss",
    "classic_style_loss",
    "compute_color_mask",
    "content_loss",
    "evaluate_triple",
    "extract_features",
    "extract_palette",
    "gaussian_blur",
    "gram_matrix",
    "load_backbone",
    "load_default_backbone",
    "load_image",
    "merge_palettes",
    "resize_bilinear",
    "run_classic_nst",
    "run_transfer",
    "save_image",
    "tiny_backbone",
    "total_loss",
    "weighted_gram_matrix",
]
