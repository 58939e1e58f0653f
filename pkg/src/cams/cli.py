"""Command-line entry points: transfer, palette, evaluate, serve.

Exit codes: 0 success, 2 usage error (argparse), 3 runtime error with a
message on stderr. Stdout carries only the documented report lines; anything
diagnostic goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import torch

from .errors import CamsError
from .features import WEIGHTS_ENV_VAR, load_default_backbone, tiny_backbone
from .imaging import DTYPE, load_image, save_image
from .losses import LossWeights
from .masking import save_mask_pngs
from .metrics import CSV_HEADER, evaluate_triple
from .palette import Palette, color_hex, extract_palette
from .transfer import AssociationMap, TransferConfig, run_classic_nst, run_transfer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cams",
        description="Color-aware multi-style transfer: optimization, palettes, evaluation, service.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    t = sub.add_parser("transfer", help="run a style transfer optimization")
    t.add_argument("--content", required=True, help="content image (PNG/JPEG)")
    t.add_argument("--style", required=True, help="style image (PNG/JPEG)")
    t.add_argument("--out", required=True, help="output PNG path")
    t.add_argument("--mode", choices=("auto", "manual"), default="auto")
    t.add_argument("--assoc", help="association JSON (required with --mode manual)")
    t.add_argument("--sigma", type=float, default=0.275, help="mask fall-off")
    t.add_argument("--k", type=int, default=5, help="palette size per image")
    t.add_argument("--iters", type=int, default=300)
    t.add_argument("--lr", type=float, default=0.5)
    t.add_argument("--alpha", type=float, default=1.0)
    t.add_argument("--beta", type=float, default=1.0e4)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--weights", help=f"backbone weights file (fallback: ${WEIGHTS_ENV_VAR})")
    t.add_argument("--backbone", choices=("vgg19", "tiny"), default="vgg19")
    t.add_argument("--baseline", action="store_true", help="run the classic whole-image Gram baseline")
    t.add_argument("--snapshots", help="directory for intermediate PNGs")
    t.add_argument("--snapshot-every", type=int, default=25)
    t.add_argument("--max-side", type=int, default=512)
    t.add_argument("--tau-merge", type=float, default=0.08)
    t.add_argument("--no-smooth", action="store_true", help="skip mask smoothing")
    t.add_argument("--detach-masks", action="store_true", help="exclude masks from the gradient")
    t.add_argument("--mask-dump", help="directory for per-color mask PNGs")
    t.set_defaults(func=cmd_transfer)

    p = sub.add_parser("palette", help="extract and print an image's palette")
    p.add_argument("--image", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--json", help="write palette JSON here")
    p.add_argument("--swatch", help="write a swatch-strip PNG here")
    p.set_defaults(func=cmd_palette)

    e = sub.add_parser("evaluate", help="score an (output, content, style) triple")
    e.add_argument("--output")
    e.add_argument("--content")
    e.add_argument("--style")
    e.add_argument("--triples", help="directory of triple subdirectories (batch mode)")
    e.add_argument("--csv", help="write a CSV summary here")
    e.add_argument("--weights", help=f"backbone weights file (fallback: ${WEIGHTS_ENV_VAR})")
    e.add_argument("--backbone", choices=("vgg19", "tiny"), default="vgg19")
    e.add_argument("--sigma", type=float, default=0.275)
    e.add_argument("--k", type=int, default=5)
    e.add_argument("--max-side", type=int, default=512)
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("serve", help="start the HTTP service")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--data-dir", help="spill job artifacts to disk here")
    s.add_argument("--pool-size", type=int, default=1)
    s.add_argument("--weights", help=f"backbone weights file (fallback: ${WEIGHTS_ENV_VAR})")
    s.add_argument("--backbone", choices=("vgg19", "tiny"), default="vgg19")
    s.add_argument("--ui-dir", help="static directory with the studio UI build")
    s.set_defaults(func=cmd_serve)

    return parser


def _build_extractor(args):
    if args.backbone == "tiny":
        return tiny_backbone()
    return load_default_backbone(args.weights)


def cmd_transfer(args, parser) -> int:
    if args.mode == "manual" and not args.assoc:
        parser.error("argument --assoc is required when --mode manual")

    extractor = _build_extractor(args)
    content = load_image(args.content, max_side=args.max_side)
    style = load_image(args.style, max_side=args.max_side)

    associations = None
    if args.assoc:
        associations = AssociationMap.from_json(Path(args.assoc).read_text())

    cfg = TransferConfig(
        sigma=args.sigma,
        palette_k=args.k,
        tau_merge=args.tau_merge,
        smooth_masks=not args.no_smooth,
        weights=LossWeights(alpha=args.alpha, beta=args.beta),
        iterations=args.iters,
        learning_rate=args.lr,
        mode=args.mode,
        associations=associations,
        seed=args.seed,
        snapshot_every=args.snapshot_every,
        max_side=args.max_side,
        detach_masks=args.detach_masks,
    )
    cfg.validate()

    out = Path(args.out)
    run_meta = {
        "command": "transfer",
        "content": str(Path(args.content).resolve()),
        "style": str(Path(args.style).resolve()),
        "out": str(out.resolve()),
        "baseline": bool(args.baseline),
        "backbone": args.backbone,
        "weights_path": args.weights,
        "snapshots": args.snapshots,
        **cfg.to_dict(),
    }
    run_json = out.parent / f"{out.name}.run.json"
    run_json.write_text(json.dumps(run_meta, indent=2))

    on_progress = None
    if args.snapshots:
        snap_dir = Path(args.snapshots)
        snap_dir.mkdir(parents=True, exist_ok=True)

        def on_progress(iteration, rec, image):
            save_image(image, snap_dir / f"iter_{iteration:05d}.png")
            print(f"iter {iteration}: total={rec.total:.6g}", file=sys.stderr)

    runner = run_classic_nst if args.baseline else run_transfer
    result = runner(content, style, cfg, extractor, on_progress=on_progress)

    save_image(result.image, out)
    (out.parent / f"{out.name}.losses.jsonl").write_text(result.loss_jsonl())
    (out.parent / f"{out.name}.palettes.json").write_text(result.palettes_json())
    if args.mask_dump and result.gen_masks is not None:
        dump = Path(args.mask_dump)
        dump.mkdir(parents=True, exist_ok=True)
        save_mask_pngs(result.style_masks, dump, "style")
        save_mask_pngs(result.gen_masks, dump, "generated")

    print(str(out))
    return 0


def cmd_palette(args, parser) -> int:
    img = load_image(args.image)
    pal = extract_palette(img, args.k)
    if pal.degenerate:
        print(
            f"warning: only {len(pal)} distinct quantized colors (requested {args.k})",
            file=sys.stderr,
        )
    for color, pop in zip(pal.colors, pal.populations):
        print(f"{color_hex(color)} {pop}")
    if args.json:
        Path(args.json).write_text(pal.to_json())
    if args.swatch:
        blocks = [torch.full((32, 32, 3), 0.0, dtype=DTYPE) + torch.tensor(c, dtype=DTYPE) for c in pal.colors]
        save_image(torch.cat(blocks, dim=1), args.swatch)
    return 0


def _evaluate_one(args, extractor, output_path, content_path, style_path):
    output = load_image(output_path, max_side=args.max_side)
    content = load_image(content_path, max_side=args.max_side)
    style = load_image(style_path, max_side=args.max_side)
    cfg = TransferConfig(sigma=args.sigma, palette_k=args.k, max_side=args.max_side)
    return evaluate_triple(output, content, style, cfg, extractor)


def cmd_evaluate(args, parser) -> int:
    extractor = _build_extractor(args)

    if args.triples:
        rows = []
        root = Path(args.triples)
        if not root.is_dir():
            raise FileNotFoundError(f"no such triples directory: {root}")
        for sub in sorted(p for p in root.iterdir() if p.is_dir()):
            paths = {}
            for role in ("output", "content", "style"):
                for ext in (".png", ".jpg", ".jpeg"):
                    cand = sub / f"{role}{ext}"
                    if cand.exists():
                        paths[role] = cand
                        break
                else:
                    raise FileNotFoundError(f"missing {role} image in {sub}")
            report = _evaluate_one(args, extractor, paths["output"], paths["content"], paths["style"])
            (sub / "report.json").write_text(report.to_json())
            rows.append(report.csv_row(sub.name))
        csv_text = "\n".join([CSV_HEADER] + rows) + "\n"
        if args.csv:
            Path(args.csv).write_text(csv_text)
        else:
            print(csv_text, end="")
        return 0

    if not (args.output and args.content and args.style):
        parser.error("evaluate needs --output, --content and --style (or --triples DIR)")
    report = _evaluate_one(args, extractor, args.output, args.content, args.style)
    print(f"color_aware={report.color_aware}")
    print(f"style={report.style}")
    print(f"content={report.content}")
    if args.csv:
        Path(args.csv).write_text(
            "\n".join([CSV_HEADER, report.csv_row(Path(args.output).stem)]) + "\n"
        )
    return 0


def cmd_serve(args, parser) -> int:
    import uvicorn

    from .service import create_app

    if args.backbone == "tiny":
        extractor = tiny_backbone()
    else:
        try:
            extractor = load_default_backbone(args.weights)
        except FileNotFoundError as exc:
            print(f"warning: {exc}; falling back to the tiny random backbone", file=sys.stderr)
            extractor = tiny_backbone()

    app = create_app(
        extractor=extractor,
        data_dir=args.data_dir,
        pool_size=args.pool_size,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (CamsError, FileNotFoundError, NotADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
