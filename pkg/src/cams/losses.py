"""Gram statistics and every loss term of the optimization.

A Gram matrix here is (1/m) F F^T over vectorized feature maps, m being the
full per-layer element count h*w. Weighted Grams apply a per-color mask to the
features first and keep the same m, so scaling a mask by s scales the Gram by
s^2; masks are weights, not region renormalizers.

GramSet is a plain dict keyed by (layer name, color index); the unmasked case
uses color index 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch

from .errors import (
    DimMismatch,
    EmptyFeature,
    KeySetMismatch,
    LayerSetMismatch,
    NonFiniteLoss,
)
from .masking import MaskSet, adapt_mask_to_layer

GramSet = dict[tuple[str, int], torch.Tensor]


@dataclass(frozen=True)
class LossWeights:
    """Scale factors for the joint objective: alpha*content + beta*style_term.

    style_layer_weights applies to the classic per-layer style loss only; None
    means uniform 1/len(style_layers), resolved where the layer set is known.
    """

    alpha: float = 1.0
    beta: float = 1.0e4
    style_layer_weights: dict[str, float] | None = field(default=None)

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.style_layer_weights is not None:
            if any(w < 0 for w in self.style_layer_weights.values()):
                raise ValueError("style layer weights must be >= 0")
        if self.alpha == 0 and self.beta == 0:
            raise ValueError("alpha and beta cannot both be zero")

    def resolve_layer_weights(self, style_layers) -> dict[str, float]:
        if self.style_layer_weights is not None:
            return dict(self.style_layer_weights)
        n = len(tuple(style_layers))
        return {layer: 1.0 / n for layer in style_layers}


def gram_matrix(feat: torch.Tensor, m_l: int | None = None) -> torch.Tensor:
    """(1/m_l) inner products between vectorized feature maps; (c, c) output."""
    if feat.numel() == 0:
        raise EmptyFeature("feature tensor has no elements")
    if feat.ndim != 3:
        raise DimMismatch(f"expected a (c, h, w) feature tensor, got {tuple(feat.shape)}")
    c = feat.shape[0]
    flat = feat.reshape(c, -1)
    if m_l is None:
        m_l = flat.shape[1]
    if m_l <= 0:
        raise EmptyFeature(f"m_l must be positive, got {m_l}")
    return flat @ flat.T / m_l


def weighted_gram_matrix(feat: torch.Tensor, layer_mask: torch.Tensor) -> torch.Tensor:
    """Gram of the Hadamard product feat * layer_mask, same m_l as unmasked."""
    if tuple(layer_mask.shape) != tuple(feat.shape):
        raise DimMismatch(
            f"mask shape {tuple(layer_mask.shape)} != feature shape {tuple(feat.shape)}"
        )
    return gram_matrix(feat * layer_mask)


def gram_set(taps: dict[str, torch.Tensor]) -> GramSet:
    """Unmasked Grams for every tap, keyed (layer, 0)."""
    return {(layer, 0): gram_matrix(feat) for layer, feat in taps.items()}


def weighted_gram_set(taps: dict[str, torch.Tensor], mask_set: MaskSet) -> GramSet:
    """Per-color weighted Grams for every tap, keyed (layer, color index).

    Each mask is resized to the layer's spatial dims and replicated across its
    channels before weighting.
    """
    grams: GramSet = {}
    for layer, feat in taps.items():
        c, h, w = feat.shape
        for t, mask in enumerate(mask_set.masks):
            grams[(layer, t)] = weighted_gram_matrix(feat, adapt_mask_to_layer(mask, h, w, c))
    return grams


def content_loss(content_taps: dict[str, torch.Tensor], gen_taps: dict[str, torch.Tensor]):
    """Half the summed squared Frobenius distance between matching taps."""
    if set(content_taps) != set(gen_taps):
        raise LayerSetMismatch(
            f"content taps {sorted(content_taps)} != generated taps {sorted(gen_taps)}"
        )
    total = None
    for layer, ref in content_taps.items():
        gen = gen_taps[layer]
        if tuple(ref.shape) != tuple(gen.shape):
            raise DimMismatch(
                f"layer {layer}: shapes {tuple(ref.shape)} vs {tuple(gen.shape)}"
            )
        term = 0.5 * ((ref - gen) ** 2).sum()
        total = term if total is None else total + term
    return total


def classic_style_loss(style_grams: GramSet, gen_grams: GramSet, w) -> torch.Tensor:
    """Per-layer weighted squared Frobenius distance between unmasked Grams.

    w is a {layer: weight} mapping or a single scalar applied to every layer.
    """
    if set(style_grams) != set(gen_grams):
        raise LayerSetMismatch(
            f"style gram keys {sorted(style_grams)} != generated {sorted(gen_grams)}"
        )
    total = None
    for (layer, _t), g_style in style_grams.items():
        weight = w[layer] if isinstance(w, dict) else float(w)
        term = weight * ((g_style - gen_grams[(layer, _t)]) ** 2).sum()
        total = term if total is None else total + term
    return total


def cams_loss(style_grams: GramSet, gen_grams: GramSet, pairs=None) -> torch.Tensor:
    """Color-aware style loss: summed squared Frobenius distances of per-color Grams.

    Without pairs, the two GramSets must cover identical (layer, color) keys
    and matching colors are compared (the automatic mode). With pairs, each
    (gen_color, style_color) pair is compared at every layer, which is how
    user-chosen associations between two different palettes are scored. Layers
    carry no weights here.
    """
    if pairs is None:
        if set(style_grams) != set(gen_grams):
            raise KeySetMismatch(
                f"gram keys differ: {sorted(set(style_grams) ^ set(gen_grams))}"
            )
        total = None
        for key, g_style in style_grams.items():
            term = ((g_style - gen_grams[key]) ** 2).sum()
            total = term if total is None else total + term
        return total

    style_layers = {layer for layer, _ in style_grams}
    gen_layers = {layer for layer, _ in gen_grams}
    if style_layers != gen_layers:
        raise KeySetMismatch(f"layer sets differ: {sorted(style_layers ^ gen_layers)}")
    total = None
    for layer in sorted(style_layers):
        for gen_color, style_color in pairs:
            if (layer, style_color) not in style_grams or (layer, gen_color) not in gen_grams:
                raise KeySetMismatch(
                    f"pair ({gen_color}, {style_color}) missing at layer {layer}"
                )
            term = ((style_grams[(layer, style_color)] - gen_grams[(layer, gen_color)]) ** 2).sum()
            total = term if total is None else total + term
    return total


def total_loss(lc, lstyle_or_cams, weights: LossWeights):
    """alpha*content + beta*style_term; NonFiniteLoss on NaN or infinity."""
    total = weights.alpha * lc + weights.beta * lstyle_or_cams
    value = float(total.detach()) if isinstance(total, torch.Tensor) else float(total)
    if not math.isfinite(value):
        raise NonFiniteLoss(f"total loss is not finite: {value}")
    return total
