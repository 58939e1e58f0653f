"""Post-hoc scoring of (output, content, style) triples.

Reports three numbers for any stylization result, whatever produced it: the
content distance to the content image, the whole-image Gram style distance to
the style image, and the color-aware distance built from the merged palette of
the content and style images (output takes the generated-image role). The
optional fid field is reserved and always null here.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import torch

from .errors import DimMismatch
from .features import FeatureExtractor
from .imaging import DTYPE, validate_image
from .losses import gram_matrix, weighted_gram_matrix
from .masking import adapt_mask_to_layer, build_mask_set
from .palette import extract_palette, merge_palettes
from .transfer import TransferConfig

CSV_HEADER = "name,color_aware,style,content,wall_time_s"


@dataclass
class EvalReport:
    color_aware: float
    style: float
    content: float
    per_layer_breakdown: dict[str, tuple[float, float]]
    wall_time_s: float
    style_layer_weight: float
    fid: None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "color_aware": self.color_aware,
                "style": self.style,
                "content": self.content,
                "per_layer_breakdown": {
                    layer: {"style": s, "color_aware": c}
                    for layer, (s, c) in self.per_layer_breakdown.items()
                },
                "wall_time_s": self.wall_time_s,
                "style_layer_weight": self.style_layer_weight,
                "fid": self.fid,
            }
        )

    def csv_row(self, name: str) -> str:
        return f"{name},{self.color_aware},{self.style},{self.content},{self.wall_time_s}"


def evaluate_triple(
    output: torch.Tensor,
    content: torch.Tensor,
    style: torch.Tensor,
    cfg: TransferConfig | None = None,
    extractor: FeatureExtractor | None = None,
) -> EvalReport:
    """Score one stylization output against its content and style sources.

    output and content must share dimensions (the output plays the generated
    image); the style image may differ. Pure and deterministic.
    """
    from .features import load_default_backbone

    cfg = cfg if cfg is not None else TransferConfig()
    extractor = extractor if extractor is not None else load_default_backbone()
    validate_image(output)
    validate_image(content)
    validate_image(style)
    if tuple(output.shape) != tuple(content.shape):
        raise DimMismatch(
            f"output shape {tuple(output.shape)} != content shape {tuple(content.shape)}"
        )
    output = output.to(DTYPE)
    content = content.to(DTYPE)
    style = style.to(DTYPE)

    start = time.perf_counter()
    style_layers = extractor.style_layers
    content_layers = extractor.content_layers
    w_l = 1.0 / len(style_layers)

    with torch.no_grad():
        out_content_taps = extractor.extract(output, content_layers)
        ref_content_taps = extractor.extract(content, content_layers)
        content_val = sum(
            0.5 * float(((ref_content_taps[l] - out_content_taps[l]) ** 2).sum())
            for l in content_layers
        )

        out_style_taps = extractor.extract(output, style_layers)
        ref_style_taps = extractor.extract(style, style_layers)

        merged = merge_palettes(
            extract_palette(style, cfg.palette_k, tag="style"),
            extract_palette(content, cfg.palette_k, tag="content"),
            cfg.tau_merge,
        )
        out_masks = build_mask_set(output, merged, cfg.sigma, cfg.smooth_masks)
        style_masks = build_mask_set(style, merged, cfg.sigma, cfg.smooth_masks)

        breakdown: dict[str, tuple[float, float]] = {}
        style_val = 0.0
        cams_val = 0.0
        for layer in style_layers:
            g_out = gram_matrix(out_style_taps[layer])
            g_ref = gram_matrix(ref_style_taps[layer])
            layer_style = w_l * float(((g_ref - g_out) ** 2).sum())

            c_out, h_out, w_out = out_style_taps[layer].shape
            c_ref, h_ref, w_ref = ref_style_taps[layer].shape
            layer_cams = 0.0
            for om, sm in zip(out_masks.masks, style_masks.masks):
                gw_out = weighted_gram_matrix(
                    out_style_taps[layer], adapt_mask_to_layer(om, h_out, w_out, c_out)
                )
                gw_ref = weighted_gram_matrix(
                    ref_style_taps[layer], adapt_mask_to_layer(sm, h_ref, w_ref, c_ref)
                )
                layer_cams += float(((gw_ref - gw_out) ** 2).sum())

            breakdown[layer] = (layer_style, layer_cams)
            style_val += layer_style
            cams_val += layer_cams

    return EvalReport(
        color_aware=cams_val,
        style=style_val,
        content=content_val,
        per_layer_breakdown=breakdown,
        wall_time_s=time.perf_counter() - start,
        style_layer_weight=w_l,
    )
