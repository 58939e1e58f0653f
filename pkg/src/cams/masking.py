"""Per-color soft masks and their adaptation to feature-layer geometry.

A mask weighs every pixel by its color similarity to one palette color t:
exp(-(||I_j - t||_2 / sigma)^2), computed from squared distance so the op is
differentiable everywhere, including at I_j == t. Masks are deliberately not
normalized across palette colors; each color carries an independent weight
field, and scaling a mask by s scales its weighted Gram by s^2 downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch

from .errors import InvalidSigma, InvalidSize
from .imaging import DTYPE, gaussian_blur, resize_bilinear, save_grayscale
from .palette import Palette

SMOOTH_KERNEL_SIZE = 15
SMOOTH_SIGMA_PX = 5.0
DEFAULT_SIGMA = 0.275


@dataclass
class MaskSet:
    """One soft mask per palette color, all sharing the source image's H x W."""

    masks: list[torch.Tensor]
    palette: Palette
    sigma: float
    smoothed: bool

    def __post_init__(self):
        if len(self.masks) != len(self.palette.colors):
            raise ValueError("one mask per palette color required")

    @property
    def height(self) -> int:
        return self.masks[0].shape[0]

    @property
    def width(self) -> int:
        return self.masks[0].shape[1]

    def detached(self) -> "MaskSet":
        return MaskSet([m.detach() for m in self.masks], self.palette, self.sigma, self.smoothed)


def compute_color_mask(img: torch.Tensor, t, sigma: float) -> torch.Tensor:
    """Soft similarity of every pixel to color t, values in (0, 1]."""
    if sigma <= 0:
        raise InvalidSigma(f"sigma must be positive, got {sigma}")
    color = torch.as_tensor(t, dtype=img.dtype if isinstance(img, torch.Tensor) else DTYPE)
    if color.shape != (3,):
        raise ValueError(f"expected an RGB triple, got shape {tuple(color.shape)}")
    if color.min() < 0.0 or color.max() > 1.0:
        raise ValueError(f"palette color out of [0,1]^3: {t}")
    sq_dist = ((img - color) ** 2).sum(dim=-1)
    return torch.exp(-sq_dist / (sigma * sigma))


def build_mask_set(
    img: torch.Tensor,
    palette: Palette,
    sigma: float = DEFAULT_SIGMA,
    smooth: bool = True,
) -> MaskSet:
    """One mask per palette color; optionally Gaussian-smoothed (15x15, 5 px)."""
    masks = []
    for color in palette.colors:
        m = compute_color_mask(img, color, sigma)
        if smooth:
            m = gaussian_blur(m, SMOOTH_KERNEL_SIZE, SMOOTH_SIGMA_PX)
        masks.append(m)
    return MaskSet(masks, palette, sigma, smooth)


def adapt_mask_to_layer(mask: torch.Tensor, layer_h: int, layer_w: int, layer_c: int) -> torch.Tensor:
    """Resize a mask to a feature layer's spatial dims and replicate over channels.

    Returns a (layer_c, layer_h, layer_w) tensor whose channel slices are all
    identical, ready for elementwise multiplication with a feature tensor.
    """
    if layer_c < 1:
        raise InvalidSize(f"layer_c must be >= 1, got {layer_c}")
    resized = resize_bilinear(mask, layer_h, layer_w)
    return resized.unsqueeze(0).expand(layer_c, layer_h, layer_w)


def save_mask_pngs(mask_set: MaskSet, directory, image_tag: str) -> list[Path]:
    """Debug export: each mask as 8-bit grayscale mask_<imageTag>_<colorIndex>.png."""
    directory = Path(directory)
    paths = []
    for i, mask in enumerate(mask_set.masks):
        p = directory / f"mask_{image_tag}_{i}.png"
        save_grayscale(mask, p)
        paths.append(p)
    return paths
