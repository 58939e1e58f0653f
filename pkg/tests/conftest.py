"""Shared fixtures: the seeded tiny backbone and synthetic image pairs."""

import numpy as np
import pytest
import torch

from cams.features import tiny_backbone
from cams.imaging import DTYPE


@pytest.fixture(scope="session")
def tiny_extractor():
    return tiny_backbone(seed=0)


def make_two_style_pair(h=64, w=64):
    """Style: blue vertical stripes left, red checkerboard right.
    Content: blue disk on a red field. The canonical multi-style probe pair.
    """
    ys = torch.arange(h).reshape(-1, 1).expand(h, w)
    xs = torch.arange(w).reshape(1, -1).expand(h, w)
    left = xs < w // 2
    stripe = ((xs // 2) % 2 == 0).to(DTYPE) * 0.65 + 0.25
    checker = ((xs // 2 + ys // 2) % 2 == 0).to(DTYPE) * 0.7 + 0.25
    style = torch.empty(h, w, 3, dtype=DTYPE)
    style[..., 0] = torch.where(left, torch.tensor(0.05, dtype=DTYPE), checker)
    style[..., 1] = 0.05
    style[..., 2] = torch.where(left, stripe, torch.tensor(0.05, dtype=DTYPE))

    content = torch.empty(h, w, 3, dtype=DTYPE)
    cy, cx, r = h / 2.0, w / 2.0, h / 4.0
    disk = ((ys - cy) ** 2 + (xs - cx) ** 2) <= r * r
    content[..., 0] = torch.where(disk, 0.1, 0.8)
    content[..., 1] = 0.1
    content[..., 2] = torch.where(disk, 0.8, 0.1)
    return content, style


@pytest.fixture
def two_style_pair():
    return make_two_style_pair()


def random_image(h, w, seed=0):
    gen = torch.Generator().manual_seed(seed)
    return torch.rand(h, w, 3, generator=gen, dtype=DTYPE)


def random_field(h, w, seed=0):
    gen = torch.Generator().manual_seed(seed)
    return torch.rand(h, w, generator=gen, dtype=DTYPE)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
