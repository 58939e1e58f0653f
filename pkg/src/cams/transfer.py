"""End-to-end image-space optimization, in color-aware and classic variants.

The color-aware run initializes the generated image to the content image,
merges the two extracted palettes, freezes per-color weighted Grams of the
style image, then drives L-BFGS on the pixels. In automatic mode the
generated-image masks are recomputed from the current pixels inside every
closure evaluation (and differentiated through); in manual mode they are
computed once from the initial image and frozen so the user's color
associations keep applying to the original regions.

One iteration is one quasi-Newton update: torch's L-BFGS is stepped with
max_iter=1 so history persists across steps while mask refresh, loss records
and progress callbacks stay aligned with iterations. The optimization variable
is never clamped; pixels are clamped to [0, 1] only when an image is exported.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import torch

from .errors import InvalidAssociation, NonFiniteLoss, PaletteError
from .features import FeatureExtractor, load_default_backbone
from .imaging import DTYPE, validate_image
from .losses import (
    GramSet,
    LossWeights,
    cams_loss,
    classic_style_loss,
    content_loss,
    gram_set,
    total_loss,
    weighted_gram_set,
)
from .masking import DEFAULT_SIGMA, MaskSet, build_mask_set
from .palette import DEFAULT_K, DEFAULT_TAU_MERGE, Palette, extract_palette, merge_palettes

GRAD_STOP_TOL = 1e-7
LBFGS_HISTORY = 10


@dataclass
class AssociationMap:
    """User-chosen color pairs between the content and style palettes.

    pairs holds (content_color_index, style_color_index) tuples; discarded
    indices are excluded from pairing entirely.
    """

    pairs: list[tuple[int, int]]
    discard_content: list[int] = field(default_factory=list)
    discard_style: list[int] = field(default_factory=list)

    def validate(self, content_pal: Palette, style_pal: Palette) -> None:
        if not self.pairs:
            raise InvalidAssociation("manual mode needs at least one association pair")
        for idx in self.discard_content:
            if not 0 <= idx < len(content_pal):
                raise InvalidAssociation(f"discarded content index {idx} out of range")
        for idx in self.discard_style:
            if not 0 <= idx < len(style_pal):
                raise InvalidAssociation(f"discarded style index {idx} out of range")
        for ci, si in self.pairs:
            if not 0 <= ci < len(content_pal):
                raise InvalidAssociation(f"content index {ci} out of range (palette size {len(content_pal)})")
            if not 0 <= si < len(style_pal):
                raise InvalidAssociation(f"style index {si} out of range (palette size {len(style_pal)})")
            if ci in self.discard_content or si in self.discard_style:
                raise InvalidAssociation(f"pair ({ci}, {si}) references a discarded color")

    def to_dict(self) -> dict:
        return {
            "pairs": [list(p) for p in self.pairs],
            "discard_content": list(self.discard_content),
            "discard_style": list(self.discard_style),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "AssociationMap":
        pairs = [tuple(int(v) for v in p) for p in data.get("pairs", [])]
        if any(len(p) != 2 for p in pairs):
            raise InvalidAssociation("every pair must be [content_index, style_index]")
        return cls(
            pairs=pairs,
            discard_content=[int(v) for v in data.get("discard_content", [])],
            discard_style=[int(v) for v in data.get("discard_style", [])],
        )

    @classmethod
    def from_json(cls, text: str) -> "AssociationMap":
        return cls.from_dict(json.loads(text))


@dataclass
class TransferConfig:
    """Every knob of a run; defaults follow the recommended operating point."""

    sigma: float = DEFAULT_SIGMA
    palette_k: int = DEFAULT_K
    tau_merge: float = DEFAULT_TAU_MERGE
    smooth_masks: bool = True
    weights: LossWeights = field(default_factory=LossWeights)
    iterations: int = 300
    learning_rate: float = 0.5
    mode: str = "auto"
    associations: AssociationMap | None = None
    seed: int = 0
    snapshot_every: int = 25
    max_side: int = 512
    detach_masks: bool = False

    def validate(self) -> None:
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.palette_k < 1:
            raise ValueError(f"palette_k must be >= 1, got {self.palette_k}")
        if self.tau_merge < 0:
            raise ValueError(f"tau_merge must be >= 0, got {self.tau_merge}")
        if self.snapshot_every < 1:
            raise ValueError(f"snapshot_every must be >= 1, got {self.snapshot_every}")
        if self.max_side < 1:
            raise ValueError(f"max_side must be >= 1, got {self.max_side}")
        if self.mode not in ("auto", "manual"):
            raise ValueError(f"mode must be 'auto' or 'manual', got {self.mode!r}")
        if self.mode == "manual" and self.associations is None:
            raise ValueError("manual mode requires associations")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["weights"] = {
            "alpha": self.weights.alpha,
            "beta": self.weights.beta,
            "style_layer_weights": self.weights.style_layer_weights,
        }
        data["associations"] = self.associations.to_dict() if self.associations else None
        return data


@dataclass
class LossRecord:
    """Losses observed at one iteration (the accepted line-search point)."""

    iteration: int
    content: float
    style_term: float
    total: float
    mask_digest: str | None = None


@dataclass
class TransferResult:
    image: torch.Tensor
    loss_history: list[LossRecord]
    config: TransferConfig
    loss_kind: str  # "cams" or "style"
    content_palette: Palette | None
    style_palette: Palette | None
    merged_palette: Palette | None
    style_masks: MaskSet | None
    gen_masks: MaskSet | None
    style_grams: GramSet | None
    iterations_run: int
    converged: bool
    cancelled: bool
    backbone: str

    @property
    def initial_total(self) -> float:
        return self.loss_history[0].total

    @property
    def final_total(self) -> float:
        return self.loss_history[-1].total

    def loss_jsonl(self) -> str:
        lines = []
        for rec in self.loss_history:
            lines.append(
                json.dumps(
                    {
                        "iter": rec.iteration,
                        "content": rec.content,
                        self.loss_kind: rec.style_term,
                        "total": rec.total,
                    }
                )
            )
        return "\n".join(lines) + "\n"

    def palettes_json(self) -> str:
        def pal(p):
            return json.loads(p.to_json()) if p is not None else None

        return json.dumps(
            {
                "content": pal(self.content_palette),
                "style": pal(self.style_palette),
                "merged": pal(self.merged_palette),
            }
        )


def _mask_digest(masks: list[torch.Tensor]) -> str:
    h = hashlib.sha256()
    for m in masks:
        h.update(m.detach().cpu().numpy().tobytes())
    return h.hexdigest()


def _clamped_copy(gen: torch.Tensor) -> torch.Tensor:
    return gen.detach().clamp(0.0, 1.0).clone()


def _drive(gen, closure, cfg, on_progress, should_stop, read_state, records):
    """Run the L-BFGS loop, appending a LossRecord per iteration to records.

    read_state() yields (content, style_term, total, masks_or_None) from the
    most recent closure evaluation. Returns (iterations_run, converged,
    cancelled). NonFiniteLoss from the closure propagates after gen is
    restored to the last finite iterate; records then hold the finite prefix.
    """
    # max_eval defaults to max_iter*5//4, which with max_iter=1 starves the
    # strong-Wolfe search of its evaluation budget (it degenerates to a blind
    # fixed step); give each quasi-Newton step a real budget instead.
    optimizer = torch.optim.LBFGS(
        [gen],
        lr=cfg.learning_rate,
        max_iter=1,
        max_eval=40,
        history_size=LBFGS_HISTORY,
        line_search_fn="strong_wolfe",
        tolerance_grad=GRAD_STOP_TOL,
        tolerance_change=1e-12,
    )

    def record(iteration):
        lc, ls, lt, masks = read_state()
        return LossRecord(iteration, lc, ls, lt, _mask_digest(masks) if masks is not None else None)

    closure()
    records.append(record(0))
    if on_progress:
        on_progress(0, records[0], _clamped_copy(gen))

    last_good = gen.detach().clone()
    converged = False
    cancelled = False
    iterations_run = 0
    for it in range(1, cfg.iterations + 1):
        if should_stop is not None and should_stop():
            cancelled = True
            break
        try:
            optimizer.step(closure)
            # The line search restores parameters around trial evaluations and
            # moves to the accepted point without re-invoking the closure, so
            # evaluate once more to observe the actual iterate (values and
            # gradient for the stopping test).
            closure()
        except NonFiniteLoss:
            with torch.no_grad():
                gen.copy_(last_good)
            raise
        iterations_run = it
        rec = record(it)
        records.append(rec)
        last_good = gen.detach().clone()
        grad_done = gen.grad is not None and float(gen.grad.detach().abs().max()) <= GRAD_STOP_TOL
        if on_progress and (it % cfg.snapshot_every == 0 or it == cfg.iterations or grad_done):
            on_progress(it, rec, _clamped_copy(gen))
        if grad_done:
            converged = True
            break
    return iterations_run, converged, cancelled


def run_transfer(
    content: torch.Tensor,
    style: torch.Tensor,
    cfg: TransferConfig | None = None,
    extractor: FeatureExtractor | None = None,
    on_progress=None,
    should_stop=None,
) -> TransferResult:
    """Color-aware style transfer of `style` onto `content`.

    on_progress(iteration, LossRecord, clamped_image) fires at iteration 0 and
    at least every cfg.snapshot_every iterations; should_stop() is polled once
    per iteration and cancels the run when it returns True.
    """
    cfg = cfg if cfg is not None else TransferConfig()
    cfg.validate()
    extractor = extractor if extractor is not None else load_default_backbone()
    validate_image(content)
    validate_image(style)
    content = content.to(DTYPE)
    style = style.to(DTYPE)
    torch.manual_seed(cfg.seed)

    content_pal = extract_palette(content, cfg.palette_k, tag="content")
    style_pal = extract_palette(style, cfg.palette_k, tag="style")

    if cfg.mode == "auto":
        merged = merge_palettes(style_pal, content_pal, cfg.tau_merge)
        if len(style_pal) == 1 and len(content_pal) == 1 and len(merged) == 1:
            raise PaletteError(
                "both images reduce to the same single color; no association to optimize"
            )
        gen_mask_palette = merged
        style_mask_palette = merged
        pairs = [(i, i) for i in range(len(merged))]
    else:
        assoc = cfg.associations
        assoc.validate(content_pal, style_pal)
        merged = None
        gen_mask_palette = content_pal
        style_mask_palette = style_pal
        pairs = [tuple(p) for p in assoc.pairs]

    with torch.no_grad():
        style_masks = build_mask_set(style, style_mask_palette, cfg.sigma, cfg.smooth_masks)
        style_taps = extractor.extract(style, extractor.style_layers)
        style_grams = {k: v.detach() for k, v in weighted_gram_set(style_taps, style_masks).items()}
        content_taps = {
            k: v.detach() for k, v in extractor.extract(content, extractor.content_layers).items()
        }

    gen = content.clone().requires_grad_(True)
    frozen_masks = None
    if cfg.mode == "manual":
        with torch.no_grad():
            frozen_masks = build_mask_set(content, gen_mask_palette, cfg.sigma, cfg.smooth_masks)

    union_layers = list(dict.fromkeys(list(extractor.content_layers) + list(extractor.style_layers)))
    state = {}

    def closure():
        gen.grad = None
        if frozen_masks is not None:
            masks = frozen_masks
        else:
            mask_source = gen.detach() if cfg.detach_masks else gen
            masks = build_mask_set(mask_source, gen_mask_palette, cfg.sigma, cfg.smooth_masks)
        taps = extractor.extract(gen, union_layers)
        lc = content_loss(content_taps, {l: taps[l] for l in extractor.content_layers})
        gen_grams = weighted_gram_set({l: taps[l] for l in extractor.style_layers}, masks)
        ls = cams_loss(style_grams, gen_grams, pairs=pairs)
        lt = total_loss(lc, ls, cfg.weights)
        lt.backward()
        state["values"] = (float(lc.detach()), float(ls.detach()), float(lt.detach()))
        state["masks"] = [m.detach() for m in masks.masks]
        return lt

    def read_state():
        lc, ls, lt = state["values"]
        return lc, ls, lt, state["masks"]

    records: list[LossRecord] = []
    try:
        iterations_run, converged, cancelled = _drive(
            gen, closure, cfg, on_progress, should_stop, read_state, records
        )
    except NonFiniteLoss as exc:
        exc.partial = _finalize(
            gen, records, cfg, "cams", content_pal, style_pal, merged, style_masks,
            frozen_masks, style_grams, max(0, len(records) - 1), False, False,
            extractor, gen_mask_palette,
        )
        raise

    return _finalize(
        gen, records, cfg, "cams", content_pal, style_pal, merged, style_masks,
        frozen_masks, style_grams, iterations_run, converged, cancelled, extractor,
        gen_mask_palette,
    )


def _finalize(
    gen, records, cfg, loss_kind, content_pal, style_pal, merged, style_masks,
    frozen_masks, style_grams, iterations_run, converged, cancelled, extractor,
    gen_mask_palette,
):
    if frozen_masks is not None:
        gen_masks = frozen_masks.detached()
    elif gen_mask_palette is not None:
        with torch.no_grad():
            gen_masks = build_mask_set(
                gen.detach(), gen_mask_palette, cfg.sigma, cfg.smooth_masks
            ).detached()
    else:
        gen_masks = None
    return TransferResult(
        image=_clamped_copy(gen),
        loss_history=records,
        config=cfg,
        loss_kind=loss_kind,
        content_palette=content_pal,
        style_palette=style_pal,
        merged_palette=merged,
        style_masks=style_masks.detached() if style_masks is not None else None,
        gen_masks=gen_masks,
        style_grams=style_grams,
        iterations_run=iterations_run,
        converged=converged,
        cancelled=cancelled,
        backbone=extractor.name,
    )


def run_classic_nst(
    content: torch.Tensor,
    style: torch.Tensor,
    cfg: TransferConfig | None = None,
    extractor: FeatureExtractor | None = None,
    on_progress=None,
    should_stop=None,
) -> TransferResult:
    """Whole-image Gram baseline: same loop, unmasked Grams, per-layer weights."""
    cfg = cfg if cfg is not None else TransferConfig()
    cfg.validate()
    extractor = extractor if extractor is not None else load_default_backbone()
    validate_image(content)
    validate_image(style)
    content = content.to(DTYPE)
    style = style.to(DTYPE)
    torch.manual_seed(cfg.seed)

    layer_weights = cfg.weights.resolve_layer_weights(extractor.style_layers)
    with torch.no_grad():
        style_taps = extractor.extract(style, extractor.style_layers)
        style_grams = {k: v.detach() for k, v in gram_set(style_taps).items()}
        content_taps = {
            k: v.detach() for k, v in extractor.extract(content, extractor.content_layers).items()
        }

    gen = content.clone().requires_grad_(True)
    union_layers = list(dict.fromkeys(list(extractor.content_layers) + list(extractor.style_layers)))
    state = {}

    def closure():
        gen.grad = None
        taps = extractor.extract(gen, union_layers)
        lc = content_loss(content_taps, {l: taps[l] for l in extractor.content_layers})
        gen_grams = gram_set({l: taps[l] for l in extractor.style_layers})
        ls = classic_style_loss(style_grams, gen_grams, layer_weights)
        lt = total_loss(lc, ls, cfg.weights)
        lt.backward()
        state["values"] = (float(lc.detach()), float(ls.detach()), float(lt.detach()))
        return lt

    def read_state():
        lc, ls, lt = state["values"]
        return lc, ls, lt, None

    records: list[LossRecord] = []
    try:
        iterations_run, converged, cancelled = _drive(
            gen, closure, cfg, on_progress, should_stop, read_state, records
        )
    except NonFiniteLoss as exc:
        exc.partial = _finalize(
            gen, records, cfg, "style", None, None, None, None, None, style_grams,
            max(0, len(records) - 1), False, False, extractor, None,
        )
        raise

    return _finalize(
        gen, records, cfg, "style", None, None, None, None, None, style_grams,
        iterations_run, converged, cancelled, extractor, None,
    )
