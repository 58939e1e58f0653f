"""Dominant-color palette extraction and palette merging.

Extraction quantizes the image into a 16x16x16 RGB histogram and runs a
deterministic k-means over the occupied bins (Lloyd iterations on bin centers
weighted by counts, farthest-point seeding from the most populated bin). Each
cluster is reported as the count-weighted mean of the actual pixel colors in
its bins, so solid regions come back exact rather than snapped to bin centers.

Merging concatenates style colors then content colors and greedily keeps a
color only if it is farther than tau_merge from everything already kept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import torch

HIST_BINS = 16
KMEANS_MAX_ITER = 50
KMEANS_TOL = 1e-5
DEFAULT_K = 5
DEFAULT_TAU_MERGE = 0.08


@dataclass(frozen=True)
class Palette:
    """Ordered list of RGB colors in [0, 1] with per-color provenance tags.

    populations carry the pixel count behind each color (0 when unknown, e.g.
    after deserializing a file without them). degenerate marks an extraction
    that found fewer distinct quantized colors than requested.
    """

    colors: tuple[tuple[float, float, float], ...]
    source_tags: tuple[str, ...]
    populations: tuple[int, ...] = field(default=())
    degenerate: bool = False

    def __post_init__(self):
        if len(self.colors) < 1:
            raise ValueError("palette must contain at least one color")
        if len(self.source_tags) != len(self.colors):
            raise ValueError("one source tag per color required")
        if self.populations and len(self.populations) != len(self.colors):
            raise ValueError("one population per color required when given")
        for c in self.colors:
            if len(c) != 3 or any(not (0.0 <= v <= 1.0) for v in c):
                raise ValueError(f"color out of [0,1]^3: {c}")

    def __len__(self) -> int:
        return len(self.colors)

    def to_json(self) -> str:
        return json.dumps(
            {
                "colors": [list(c) for c in self.colors],
                "tags": list(self.source_tags),
                "populations": list(self.populations),
                "degenerate": self.degenerate,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Palette":
        data = json.loads(text)
        colors = tuple(tuple(float(v) for v in c) for c in data["colors"])
        tags = tuple(data.get("tags", ["content"] * len(colors)))
        pops = tuple(int(p) for p in data.get("populations", ()))
        return cls(colors, tags, pops, bool(data.get("degenerate", False)))


def _as_pixel_array(img) -> np.ndarray:
    if isinstance(img, torch.Tensor):
        img = img.detach().cpu().numpy()
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    return arr.reshape(-1, 3)


def _histogram(pixels: np.ndarray):
    """Occupied-bin summary: flat ids, counts, bin centers and mean pixel colors."""
    idx = np.minimum((pixels * HIST_BINS).astype(np.int64), HIST_BINS - 1)
    flat = (idx[:, 0] * HIST_BINS + idx[:, 1]) * HIST_BINS + idx[:, 2]
    counts = np.bincount(flat, minlength=HIST_BINS**3)
    sums = np.zeros((HIST_BINS**3, 3))
    for ch in range(3):
        sums[:, ch] = np.bincount(flat, weights=pixels[:, ch], minlength=HIST_BINS**3)
    occupied = np.flatnonzero(counts)
    bin_counts = counts[occupied].astype(np.float64)
    mean_colors = sums[occupied] / bin_counts[:, None]
    r = occupied // (HIST_BINS * HIST_BINS)
    g = (occupied // HIST_BINS) % HIST_BINS
    b = occupied % HIST_BINS
    centers = (np.stack([r, g, b], axis=1) + 0.5) / HIST_BINS
    return occupied, bin_counts, centers, mean_colors


def _farthest_point_seeds(centers: np.ndarray, counts: np.ndarray, k: int) -> np.ndarray:
    seeds = [int(np.argmax(counts))]
    d2 = np.sum((centers - centers[seeds[0]]) ** 2, axis=1)
    while len(seeds) < k:
        nxt = int(np.argmax(d2))
        seeds.append(nxt)
        d2 = np.minimum(d2, np.sum((centers - centers[nxt]) ** 2, axis=1))
    return centers[seeds].copy()


def extract_palette(img, k: int = DEFAULT_K, tag: str = "content") -> Palette:
    """Extract the k dominant colors of an image, ordered by cluster population.

    Deterministic for fixed inputs and invariant to pixel order. Images with
    fewer than k distinct quantized colors return the distinct set with the
    degenerate flag set instead of failing.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    pixels = _as_pixel_array(img)
    if pixels.shape[0] == 0:
        raise ValueError("image has no pixels")
    occupied, counts, centers, mean_colors = _histogram(pixels)

    if len(occupied) <= k:
        order = np.lexsort((occupied, -counts))
        colors = tuple(tuple(float(v) for v in mean_colors[i]) for i in order)
        pops = tuple(int(counts[i]) for i in order)
        return Palette(colors, (tag,) * len(colors), pops, degenerate=len(occupied) < k)

    means = _farthest_point_seeds(centers, counts, k)
    assign = None
    for _ in range(KMEANS_MAX_ITER):
        d2 = np.sum((centers[:, None, :] - means[None, :, :]) ** 2, axis=2)
        assign = np.argmin(d2, axis=1)
        new_means = means.copy()
        for j in range(k):
            sel = assign == j
            if sel.any():
                w = counts[sel]
                new_means[j] = np.average(centers[sel], axis=0, weights=w)
        shift = np.max(np.abs(new_means - means))
        means = new_means
        if shift < KMEANS_TOL:
            break

    colors, pops = [], []
    for j in range(k):
        sel = assign == j
        if not sel.any():
            continue
        w = counts[sel]
        colors.append(np.average(mean_colors[sel], axis=0, weights=w))
        pops.append(int(w.sum()))
    order = np.lexsort((np.arange(len(pops)), -np.asarray(pops, dtype=np.float64)))
    colors = tuple(tuple(float(np.clip(v, 0.0, 1.0)) for v in colors[i]) for i in order)
    pops = tuple(pops[i] for i in order)
    return Palette(colors, (tag,) * len(colors), pops, degenerate=len(colors) < k)


def merge_palettes(style_pal: Palette, content_pal: Palette, tau_merge: float = DEFAULT_TAU_MERGE) -> Palette:
    """Concatenate style then content colors, dropping colors within tau_merge of a kept one.

    The greedy rule runs uniformly over the concatenation, so duplicates inside
    one palette are excluded as well. Order-stable: identical inputs give the
    identical list.
    """
    if tau_merge < 0:
        raise ValueError(f"tau_merge must be >= 0, got {tau_merge}")
    kept_colors: list[tuple[float, float, float]] = []
    kept_tags: list[str] = []
    kept_pops: list[int] = []
    candidates = [
        (color, "style", pop)
        for color, pop in zip(style_pal.colors, style_pal.populations or (0,) * len(style_pal))
    ] + [
        (color, "content", pop)
        for color, pop in zip(content_pal.colors, content_pal.populations or (0,) * len(content_pal))
    ]
    for color, tag, pop in candidates:
        c = np.asarray(color)
        if all(np.linalg.norm(c - np.asarray(kc)) > tau_merge for kc in kept_colors):
            kept_colors.append(color)
            kept_tags.append(tag)
            kept_pops.append(pop)
    return Palette(tuple(kept_colors), tuple(kept_tags), tuple(kept_pops))


def color_hex(color) -> str:
    """#rrggbb form of an RGB triple in [0, 1], round-half-up quantization."""
    r, g, b = (int(np.floor(v * 255.0 + 0.5)) for v in color)
    return f"#{r:02x}{g:02x}{b:02x}"
