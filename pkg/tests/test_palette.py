"""Palette extraction and merge contracts."""

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from cams.imaging import DTYPE
from cams.palette import Palette, color_hex, extract_palette, merge_palettes


def solid(color, h=8, w=8):
    return torch.tensor(color, dtype=DTYPE).expand(h, w, 3).contiguous()


def quadrant_image(size=64):
    """Four solid quadrants: red, green, blue, white."""
    img = torch.zeros(size, size, 3, dtype=DTYPE)
    half = size // 2
    img[:half, :half] = torch.tensor([1.0, 0.0, 0.0], dtype=DTYPE)
    img[:half, half:] = torch.tensor([0.0, 1.0, 0.0], dtype=DTYPE)
    img[half:, :half] = torch.tensor([0.0, 0.0, 1.0], dtype=DTYPE)
    img[half:, half:] = torch.tensor([1.0, 1.0, 1.0], dtype=DTYPE)
    return img


class TestExtractPalette:
    def test_solid_red_is_single_color_degenerate(self):
        pal = extract_palette(solid([1.0, 0.0, 0.0]), k=5)
        assert len(pal) == 1
        assert pal.degenerate
        assert pal.colors[0] == pytest.approx((1.0, 0.0, 0.0), abs=1e-12)

    def test_black_white_halves(self):
        img = torch.zeros(10, 10, 3, dtype=DTYPE)
        img[:, 5:] = 1.0
        pal = extract_palette(img, k=2)
        assert not pal.degenerate
        got = sorted(pal.colors)
        assert got[0] == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
        assert got[1] == pytest.approx((1.0, 1.0, 1.0), abs=1e-12)
        assert pal.populations[0] == pal.populations[1] == 50

    def test_quadrants_recovered_exactly(self):
        img = quadrant_image()
        # oracle: the exact per-quadrant means, computed independently
        expected = {
            tuple(np.round(img[:32, :32].reshape(-1, 3).mean(0).numpy(), 6)),
            tuple(np.round(img[:32, 32:].reshape(-1, 3).mean(0).numpy(), 6)),
            tuple(np.round(img[32:, :32].reshape(-1, 3).mean(0).numpy(), 6)),
            tuple(np.round(img[32:, 32:].reshape(-1, 3).mean(0).numpy(), 6)),
        }
        pal = extract_palette(img, k=4)
        assert len(pal) == 4
        for color in pal.colors:
            err = min(np.linalg.norm(np.array(color) - np.array(e)) for e in expected)
            assert err < 1e-3

    def test_quadrants_with_k5_degenerate(self):
        pal = extract_palette(quadrant_image(), k=5)
        assert len(pal) == 4
        assert pal.degenerate

    def test_ordered_by_population(self):
        img = torch.zeros(10, 10, 3, dtype=DTYPE)
        img[:, 7:] = 1.0  # 30 white, 70 black
        pal = extract_palette(img, k=2)
        assert pal.colors[0] == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
        assert pal.populations == (70, 30)

    def test_pixel_order_invariance(self):
        gen = torch.Generator().manual_seed(5)
        img = torch.rand(12, 12, 3, generator=gen, dtype=DTYPE)
        pal = extract_palette(img, k=3)
        flat = img.reshape(-1, 3)
        perm = torch.randperm(flat.shape[0], generator=gen)
        shuffled = flat[perm].reshape(12, 12, 3)
        pal2 = extract_palette(shuffled, k=3)
        assert pal.colors == pal2.colors
        assert pal.populations == pal2.populations

    def test_deterministic_rerun(self):
        gen = torch.Generator().manual_seed(6)
        img = torch.rand(20, 20, 3, generator=gen, dtype=DTYPE)
        a = extract_palette(img, k=5)
        b = extract_palette(img, k=5)
        assert a.colors == b.colors and a.populations == b.populations

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            extract_palette(solid([0.5, 0.5, 0.5]), k=0)


class TestMergePalettes:
    def test_identical_palettes_collapse(self):
        colors = ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, 1.0, 1.0))
        pal = Palette(colors, ("style",) * 5)
        merged = merge_palettes(pal, Palette(colors, ("content",) * 5), 0.08)
        assert len(merged) == 5
        assert merged.colors == colors
        assert all(t == "style" for t in merged.source_tags)

    def test_distant_colors_all_kept(self):
        hues = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (1.0, 1.0, 0.0), (1.0, 0.0, 1.0))
        grays = tuple((g, g, g) for g in (0.0, 0.25, 0.5, 0.75, 1.0))
        merged = merge_palettes(Palette(hues, ("style",) * 5), Palette(grays, ("content",) * 5), 0.08)
        assert len(merged) == 10

    def test_near_duplicate_dropped(self):
        style = Palette(((0.0, 0.0, 0.0),), ("style",))
        content = Palette(((0.05, 0.0, 0.0),), ("content",))
        merged = merge_palettes(style, content, 0.08)
        assert merged.colors == ((0.0, 0.0, 0.0),)

    def test_exact_threshold_distance_dropped(self):
        # the greedy rule keeps a color only when distance strictly exceeds tau
        style = Palette(((0.0, 0.0, 0.0),), ("style",))
        content = Palette(((0.08, 0.0, 0.0),), ("content",))
        merged = merge_palettes(style, content, 0.08)
        assert len(merged) == 1

    def test_dedup_applies_within_one_palette(self):
        style = Palette(((0.5, 0.5, 0.5), (0.5, 0.5, 0.5)), ("style", "style"))
        content = Palette(((1.0, 1.0, 1.0),), ("content",))
        merged = merge_palettes(style, content, 0.08)
        assert len(merged) == 2

    def test_order_stable(self):
        style = Palette(((0.9, 0.1, 0.1), (0.1, 0.9, 0.1)), ("style", "style"))
        content = Palette(((0.1, 0.1, 0.9), (0.95, 0.15, 0.1)), ("content", "content"))
        a = merge_palettes(style, content, 0.08)
        b = merge_palettes(style, content, 0.08)
        assert a.colors == b.colors and a.source_tags == b.source_tags

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_merging_never_strands_a_pixel(self, seed):
        # nearest merged color is within (nearest content color + tau) per pixel
        tau = 0.08
        gen = torch.Generator().manual_seed(seed)
        img = torch.rand(8, 8, 3, generator=gen, dtype=DTYPE)
        content_pal = extract_palette(img, k=3)
        style_img = torch.rand(8, 8, 3, generator=gen, dtype=DTYPE)
        style_pal = extract_palette(style_img, k=3)
        merged = merge_palettes(style_pal, content_pal, tau)
        pixels = img.reshape(-1, 3).numpy()
        d_content = np.min(
            np.linalg.norm(pixels[:, None, :] - np.asarray(content_pal.colors)[None], axis=2), axis=1
        )
        d_merged = np.min(
            np.linalg.norm(pixels[:, None, :] - np.asarray(merged.colors)[None], axis=2), axis=1
        )
        assert np.all(d_merged <= d_content + tau + 1e-9)


class TestPaletteSerialization:
    def test_json_round_trip(self):
        pal = Palette(((0.25, 0.5, 0.75), (1.0, 0.0, 0.0)), ("style", "content"), (10, 4), True)
        back = Palette.from_json(pal.to_json())
        assert back == pal

    def test_json_keys(self):
        import json

        data = json.loads(Palette(((0.1, 0.2, 0.3),), ("style",)).to_json())
        assert "colors" in data and "tags" in data
        assert data["colors"] == [[0.1, 0.2, 0.3]]
        assert data["tags"] == ["style"]

    def test_color_hex(self):
        assert color_hex((1.0, 0.0, 0.5)) == "#ff0080"
        assert color_hex((0.5, 0.5, 0.5)) == "#808080"
