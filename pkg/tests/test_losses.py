"""Gram and loss contracts, each checked against a direct-summation oracle."""

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from cams.errors import (
    DimMismatch,
    EmptyFeature,
    KeySetMismatch,
    LayerSetMismatch,
    NonFiniteLoss,
)
from cams.imaging import DTYPE
from cams.losses import (
    LossWeights,
    cams_loss,
    classic_style_loss,
    content_loss,
    gram_matrix,
    total_loss,
    weighted_gram_matrix,
)


def rand_feat(c, h, w, seed=0):
    gen = torch.Generator().manual_seed(seed)
    return torch.randn(c, h, w, generator=gen, dtype=DTYPE)


def gram_oracle(feat):
    """Double loop over channel pairs and pixels."""
    c, h, w = feat.shape
    m = h * w
    out = np.zeros((c, c))
    f = feat.numpy()
    for i in range(c):
        for j in range(c):
            acc = 0.0
            for y in range(h):
                for x in range(w):
                    acc += f[i, y, x] * f[j, y, x]
            out[i, j] = acc / m
    return out


class TestGramMatrix:
    def test_constant_channels(self):
        feat = torch.stack(
            [torch.ones(3, 5, dtype=DTYPE), torch.full((3, 5), 2.0, dtype=DTYPE)]
        )
        g = gram_matrix(feat)
        assert torch.allclose(g, torch.tensor([[1.0, 2.0], [2.0, 4.0]], dtype=DTYPE), atol=1e-12)

    def test_zero_feature_gives_zero_matrix(self):
        g = gram_matrix(torch.zeros(4, 3, 3, dtype=DTYPE))
        assert torch.equal(g, torch.zeros(4, 4, dtype=DTYPE))

    def test_matches_double_loop_oracle(self):
        feat = rand_feat(2, 3, 4, seed=5)
        g = gram_matrix(feat)
        assert np.max(np.abs(g.numpy() - gram_oracle(feat))) < 1e-6

    def test_empty_feature_rejected(self):
        with pytest.raises(EmptyFeature):
            gram_matrix(torch.zeros(0, 2, 2, dtype=DTYPE))

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), c=st.integers(1, 5))
    def test_symmetric_and_psd(self, seed, c):
        feat = rand_feat(c, 4, 4, seed=seed)
        g = gram_matrix(feat)
        assert torch.allclose(g, g.T, atol=1e-6)
        eigvals = torch.linalg.eigvalsh(g)
        assert float(eigvals.min()) >= -1e-6


class TestWeightedGramMatrix:
    def test_all_ones_mask_equals_plain_gram(self):
        feat = rand_feat(3, 4, 4, seed=1)
        mask = torch.ones(3, 4, 4, dtype=DTYPE)
        assert torch.equal(weighted_gram_matrix(feat, mask), gram_matrix(feat))

    def test_zero_mask_gives_zero(self):
        feat = rand_feat(3, 4, 4, seed=2)
        g = weighted_gram_matrix(feat, torch.zeros(3, 4, 4, dtype=DTYPE))
        assert torch.equal(g, torch.zeros(3, 3, dtype=DTYPE))

    def test_matches_masked_double_loop_oracle(self):
        feat = rand_feat(2, 4, 4, seed=3)
        gen = torch.Generator().manual_seed(4)
        mask2d = torch.rand(4, 4, generator=gen, dtype=DTYPE)
        mask = mask2d.unsqueeze(0).expand(2, 4, 4)
        got = weighted_gram_matrix(feat, mask).numpy()
        expected = gram_oracle(feat * mask)
        assert np.max(np.abs(got - expected)) < 1e-6

    def test_mask_scaling_squares(self):
        # weighting is not renormalized: scaling the mask by s scales G by s^2
        feat = rand_feat(3, 5, 5, seed=6)
        gen = torch.Generator().manual_seed(7)
        mask = torch.rand(5, 5, generator=gen, dtype=DTYPE).unsqueeze(0).expand(3, 5, 5)
        g1 = weighted_gram_matrix(feat, mask)
        for s in (0.25, 0.5, 0.9):
            gs = weighted_gram_matrix(feat, s * mask)
            assert torch.allclose(gs, s * s * g1, rtol=1e-12)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(DimMismatch):
            weighted_gram_matrix(rand_feat(2, 4, 4), torch.ones(2, 3, 4, dtype=DTYPE))


class TestContentLoss:
    def test_identical_taps_zero(self):
        taps = {"a": rand_feat(2, 3, 3, seed=8)}
        assert float(content_loss(taps, {"a": taps["a"].clone()})) == 0.0

    def test_single_delta(self):
        ref = {"a": torch.zeros(1, 2, 2, dtype=DTYPE)}
        gen = {"a": torch.zeros(1, 2, 2, dtype=DTYPE)}
        gen["a"][0, 0, 1] = 0.3
        assert float(content_loss(ref, gen)) == pytest.approx(0.3**2 / 2, abs=1e-15)

    def test_matches_elementwise_oracle(self):
        ref = {"a": rand_feat(2, 3, 4, seed=9), "b": rand_feat(3, 2, 2, seed=10)}
        gen = {"a": rand_feat(2, 3, 4, seed=11), "b": rand_feat(3, 2, 2, seed=12)}
        expected = 0.0
        for layer in ref:
            diff = (ref[layer] - gen[layer]).numpy()
            expected += 0.5 * float(np.sum(diff * diff))
        assert float(content_loss(ref, gen)) == pytest.approx(expected, rel=1e-6)

    def test_layer_set_mismatch(self):
        with pytest.raises(LayerSetMismatch):
            content_loss({"a": rand_feat(1, 2, 2)}, {"b": rand_feat(1, 2, 2)})

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            content_loss({"a": rand_feat(1, 2, 2)}, {"a": rand_feat(1, 3, 3)})


class TestClassicStyleLoss:
    def test_identical_grams_zero(self):
        g = {("a", 0): gram_matrix(rand_feat(2, 3, 3, seed=13))}
        assert float(classic_style_loss(g, {k: v.clone() for k, v in g.items()}, 1.0)) == 0.0

    def test_single_entry_delta(self):
        gs = {("a", 0): torch.zeros(2, 2, dtype=DTYPE)}
        gg = {("a", 0): torch.zeros(2, 2, dtype=DTYPE)}
        gg[("a", 0)][0, 1] = 0.7
        assert float(classic_style_loss(gs, gg, 1.0)) == pytest.approx(0.7**2, abs=1e-15)

    def test_two_layer_weighted_oracle(self):
        gs = {("a", 0): gram_matrix(rand_feat(2, 3, 3, seed=14)), ("b", 0): gram_matrix(rand_feat(3, 2, 4, seed=15))}
        gg = {("a", 0): gram_matrix(rand_feat(2, 3, 3, seed=16)), ("b", 0): gram_matrix(rand_feat(3, 2, 4, seed=17))}
        w = {"a": 0.5, "b": 0.5}
        expected = sum(
            w[layer] * float(((gs[(layer, 0)] - gg[(layer, 0)]) ** 2).sum().item())
            for layer in ("a", "b")
        )
        assert float(classic_style_loss(gs, gg, w)) == pytest.approx(expected, rel=1e-6)

    def test_layer_set_mismatch(self):
        with pytest.raises(LayerSetMismatch):
            classic_style_loss({("a", 0): torch.zeros(1, 1)}, {("b", 0): torch.zeros(1, 1)}, 1.0)


class TestCamsLoss:
    def test_identical_gram_sets_zero(self):
        g = {("a", 0): gram_matrix(rand_feat(2, 3, 3, seed=18)), ("a", 1): gram_matrix(rand_feat(2, 3, 3, seed=19))}
        assert float(cams_loss(g, {k: v.clone() for k, v in g.items()})) == 0.0

    def test_single_color_ones_mask_reduces_to_classic(self):
        feat_s = rand_feat(3, 4, 4, seed=20)
        feat_g = rand_feat(3, 4, 4, seed=21)
        ones = torch.ones(3, 4, 4, dtype=DTYPE)
        masked_s = {("a", 0): weighted_gram_matrix(feat_s, ones)}
        masked_g = {("a", 0): weighted_gram_matrix(feat_g, ones)}
        plain_s = {("a", 0): gram_matrix(feat_s)}
        plain_g = {("a", 0): gram_matrix(feat_g)}
        assert float(cams_loss(masked_s, masked_g)) == float(
            classic_style_loss(plain_s, plain_g, 1.0)
        )

    def test_two_layers_three_colors_oracle(self):
        gs, gg = {}, {}
        seed = 22
        for layer in ("a", "b"):
            for color in range(3):
                gs[(layer, color)] = gram_matrix(rand_feat(2, 3, 3, seed=seed))
                gg[(layer, color)] = gram_matrix(rand_feat(2, 3, 3, seed=seed + 100))
                seed += 1
        expected = sum(
            float(((gs[k] - gg[k]) ** 2).sum().item()) for k in gs
        )
        assert float(cams_loss(gs, gg)) == pytest.approx(expected, rel=1e-6)

    def test_key_set_mismatch(self):
        with pytest.raises(KeySetMismatch):
            cams_loss({("a", 0): torch.zeros(1, 1)}, {("a", 1): torch.zeros(1, 1)})

    def test_association_pairs(self):
        # content color 0 pulled toward style color 1, the rest untouched
        gs = {("a", 0): torch.zeros(2, 2, dtype=DTYPE), ("a", 1): torch.ones(2, 2, dtype=DTYPE)}
        gg = {("a", 0): torch.zeros(2, 2, dtype=DTYPE), ("a", 1): torch.full((2, 2), 3.0, dtype=DTYPE)}
        loss = cams_loss(gs, gg, pairs=[(0, 1)])
        # || style[1] - gen[0] ||^2 = 4 entries of 1.0
        assert float(loss) == pytest.approx(4.0, abs=1e-12)

    def test_pairs_missing_color_rejected(self):
        gs = {("a", 0): torch.zeros(1, 1)}
        gg = {("a", 0): torch.zeros(1, 1)}
        with pytest.raises(KeySetMismatch):
            cams_loss(gs, gg, pairs=[(0, 5)])


class TestTotalLoss:
    def test_recommended_scales(self):
        weights = LossWeights(alpha=1.0, beta=1e4)
        assert float(total_loss(2.0, 0.003, weights)) == pytest.approx(32.0, abs=1e-12)

    def test_beta_zero_is_pure_content(self):
        weights = LossWeights(alpha=1.0, beta=0.0)
        assert float(total_loss(1.7, 123.0, weights)) == pytest.approx(1.7, abs=1e-15)

    def test_alpha_zero_is_pure_style(self):
        weights = LossWeights(alpha=0.0, beta=1e4)
        assert float(total_loss(55.0, 0.25, weights)) == pytest.approx(2500.0, abs=1e-9)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteLoss):
            total_loss(float("inf"), 1.0, LossWeights())
        with pytest.raises(NonFiniteLoss):
            total_loss(float("nan"), 1.0, LossWeights())

    def test_all_zero_weights_rejected(self):
        with pytest.raises(ValueError):
            LossWeights(alpha=0.0, beta=0.0)

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            LossWeights(alpha=-1.0)
