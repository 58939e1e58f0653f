"""Frozen convolutional backbones exposing named feature taps.

The production backbone is a VGG-19 feature stack with every max-pool swapped
for average pooling, loaded from a local weights file (torchvision state-dict
layout or this module's own layer names). Taps are taken after the ReLU that
follows each named convolution. A tiny seeded random backbone with the same
interface serves as a test double so gradient and oracle tests run without
pretrained weights.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .errors import TooSmallInput, UnknownLayer, WeightsMismatch
from .imaging import DTYPE

DEFAULT_STYLE_LAYERS = ("conv1_1", "conv2_1", "conv3_1", "conv4_1", "conv5_1")
DEFAULT_CONTENT_LAYERS = ("conv4_2", "conv5_2")
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)
WEIGHTS_ENV_VAR = "CAMS_WEIGHTS"

# Convs per block in VGG-19; pooling after each block.
_VGG19_BLOCKS = ((64, 64), (128, 128), (256, 256, 256, 256), (512, 512, 512, 512), (512, 512, 512, 512))


@dataclass(frozen=True)
class BackboneConfig:
    """Where the weights live and which taps feed the style and content losses."""

    weights_path: str | None = None
    style_layers: tuple[str, ...] = DEFAULT_STYLE_LAYERS
    content_layers: tuple[str, ...] = DEFAULT_CONTENT_LAYERS
    input_mean: tuple[float, float, float] = IMAGENET_MEAN
    input_std: tuple[float, float, float] = IMAGENET_STD

    def __post_init__(self):
        if not self.style_layers or not self.content_layers:
            raise ValueError("style_layers and content_layers must be nonempty")


class FeatureExtractor:
    """Immutable feature extractor over a frozen module chain.

    Parameters never receive gradients; the input image does, which is what
    the image-space optimization differentiates through.
    """

    def __init__(self, named_modules, config: BackboneConfig, min_input: int, name: str):
        self._modules = list(named_modules)
        self.config = config
        self.min_input = min_input
        self.name = name
        self._taps = tuple(n for n, _ in self._modules if n.startswith("conv"))
        for layer in tuple(config.style_layers) + tuple(config.content_layers):
            if layer not in self._taps:
                raise WeightsMismatch(f"layer {layer!r} does not resolve to a conv tap of {name}")
        self._mean = torch.tensor(config.input_mean, dtype=DTYPE).reshape(1, 3, 1, 1)
        self._std = torch.tensor(config.input_std, dtype=DTYPE).reshape(1, 3, 1, 1)
        for _, module in self._modules:
            for p in module.parameters():
                p.requires_grad_(False)
            module.eval()

    @property
    def taps(self) -> tuple[str, ...]:
        return self._taps

    @property
    def style_layers(self) -> tuple[str, ...]:
        return tuple(self.config.style_layers)

    @property
    def content_layers(self) -> tuple[str, ...]:
        return tuple(self.config.content_layers)

    def extract(self, img: torch.Tensor, layers) -> dict[str, torch.Tensor]:
        """Feature maps at the requested taps, as {name: (c, h, w)}.

        img is (H, W, 3) in image units; normalization happens here. Gradient
        flows back to img when it requires grad.
        """
        layers = list(layers)
        for layer in layers:
            if layer not in self._taps:
                raise UnknownLayer(f"{layer!r} is not a tap of {self.name} (taps: {self._taps})")
        if img.ndim != 3 or img.shape[2] != 3:
            raise TooSmallInput(f"expected an (H, W, 3) image, got {tuple(img.shape)}")
        if img.shape[0] < self.min_input or img.shape[1] < self.min_input:
            raise TooSmallInput(
                f"{self.name} needs inputs of at least {self.min_input}x{self.min_input}, "
                f"got {img.shape[0]}x{img.shape[1]}"
            )
        wanted = set(layers)
        x = img.to(DTYPE).permute(2, 0, 1).unsqueeze(0)
        x = (x - self._mean) / self._std
        out: dict[str, torch.Tensor] = {}
        current_conv = None
        for name, module in self._modules:
            x = module(x)
            if name.startswith("conv"):
                current_conv = name
            elif name.startswith("relu") and current_conv in wanted:
                out[current_conv] = x.squeeze(0)
                if len(out) == len(wanted):
                    break
        return {layer: out[layer] for layer in layers}

    def params_checksum(self) -> str:
        """A digest of every parameter; constant for a frozen backbone."""
        h = hashlib.sha256()
        for name, module in self._modules:
            for pname, p in module.named_parameters():
                h.update(name.encode())
                h.update(pname.encode())
                h.update(p.detach().cpu().numpy().tobytes())
        return h.hexdigest()


def _vgg19_modules():
    modules = []
    in_ch = 3
    for block, widths in enumerate(_VGG19_BLOCKS, start=1):
        for i, width in enumerate(widths, start=1):
            modules.append((f"conv{block}_{i}", nn.Conv2d(in_ch, width, 3, padding=1).to(DTYPE)))
            modules.append((f"relu{block}_{i}", nn.ReLU()))
            in_ch = width
        modules.append((f"pool{block}", nn.AvgPool2d(2, 2)))
    return modules


def _torchvision_key_map():
    """Map torchvision's features.N prefixes onto this module's conv names."""
    mapping = {}
    seq_idx = 0
    for block, widths in enumerate(_VGG19_BLOCKS, start=1):
        for i in range(1, len(widths) + 1):
            mapping[f"features.{seq_idx}"] = f"conv{block}_{i}"
            seq_idx += 2  # conv + relu
        seq_idx += 1  # pool
    return mapping


def load_backbone(cfg: BackboneConfig) -> FeatureExtractor:
    """Build the VGG-19 feature stack and load weights from cfg.weights_path.

    Accepts state dicts keyed either by torchvision's features.N layout or by
    this module's conv names. Missing keys or shape mismatches raise
    WeightsMismatch; a missing file raises FileNotFoundError.
    """
    if cfg.weights_path is None:
        raise FileNotFoundError("BackboneConfig.weights_path is not set")
    path = Path(cfg.weights_path)
    if not path.exists():
        raise FileNotFoundError(f"no such weights file: {path}")
    state = torch.load(path, map_location="cpu", weights_only=True)
    if not isinstance(state, dict):
        raise WeightsMismatch(f"{path} does not contain a state dict")
    key_map = _torchvision_key_map()
    renamed = {}
    for key, value in state.items():
        prefix, _, leaf = key.rpartition(".")
        conv = key_map.get(prefix, prefix)
        renamed[f"{conv}.{leaf}"] = value

    modules = _vgg19_modules()
    for name, module in modules:
        if not name.startswith("conv"):
            continue
        for leaf, param in (("weight", module.weight), ("bias", module.bias)):
            key = f"{name}.{leaf}"
            if key not in renamed:
                raise WeightsMismatch(f"{path} is missing parameter {key}")
            value = renamed[key]
            if tuple(value.shape) != tuple(param.shape):
                raise WeightsMismatch(
                    f"{path}: {key} has shape {tuple(value.shape)}, expected {tuple(param.shape)}"
                )
            with torch.no_grad():
                param.copy_(value.to(DTYPE))
    return FeatureExtractor(modules, cfg, min_input=32, name="vgg19")


def tiny_backbone(seed: int = 0) -> FeatureExtractor:
    """Seeded 2-conv random backbone used as a test double.

    conv1_1 (3->8) and conv2_1 (8->16, after a 2x average pool) give two style
    taps at strides 1 and 2; conv2_1 doubles as the content tap.
    """
    gen = torch.Generator().manual_seed(seed)
    conv1 = nn.Conv2d(3, 8, 3, padding=1).to(DTYPE)
    conv2 = nn.Conv2d(8, 16, 3, padding=1).to(DTYPE)
    with torch.no_grad():
        conv1.weight.copy_(torch.randn(conv1.weight.shape, generator=gen, dtype=DTYPE) * 0.35)
        conv1.bias.copy_(torch.randn(conv1.bias.shape, generator=gen, dtype=DTYPE) * 0.10 + 0.05)
        conv2.weight.copy_(torch.randn(conv2.weight.shape, generator=gen, dtype=DTYPE) * 0.15)
        conv2.bias.copy_(torch.randn(conv2.bias.shape, generator=gen, dtype=DTYPE) * 0.10 + 0.05)
    modules = [
        ("conv1_1", conv1),
        ("relu1_1", nn.ReLU()),
        ("pool1", nn.AvgPool2d(2, 2)),
        ("conv2_1", conv2),
        ("relu2_1", nn.ReLU()),
    ]
    cfg = BackboneConfig(
        weights_path=None,
        style_layers=("conv1_1", "conv2_1"),
        content_layers=("conv2_1",),
        input_mean=(0.5, 0.5, 0.5),
        input_std=(0.5, 0.5, 0.5),
    )
    return FeatureExtractor(modules, cfg, min_input=4, name=f"tiny(seed={seed})")


def load_default_backbone(weights_path: str | None = None) -> FeatureExtractor:
    """VGG-19 from an explicit path or the CAMS_WEIGHTS environment variable."""
    path = weights_path or os.environ.get(WEIGHTS_ENV_VAR)
    if not path:
        raise FileNotFoundError(
            f"no weights file given; pass --weights or set {WEIGHTS_ENV_VAR}"
        )
    return load_backbone(BackboneConfig(weights_path=path))


def extract_features(extractor: FeatureExtractor, img: torch.Tensor, layers) -> dict[str, torch.Tensor]:
    """Function form of FeatureExtractor.extract."""
    return extractor.extract(img, layers)
