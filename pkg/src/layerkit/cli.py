"""Command-line interface.

`layerkit serve` runs the edit-session HTTP service; the remaining
subcommands are batch tools over files: dataset building, mask
derivation, edge extraction, metric evaluation, toy-model training, and
manifest validation/replay.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidArgumentError


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    ui_dir = args.ui_dir
    if ui_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(ServiceConfig(
        checkpoint=args.checkpoint,
        strict_sigma_zero=args.strict_sigma_zero,
        max_image_side=args.max_image_side,
        seed=args.seed,
        generation_workers=args.workers,
        ui_dir=ui_dir,
    ))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_build_dataset(args) -> int:
    from .dataset import BuilderConfig, build_dataset

    config = BuilderConfig.from_toml(args.config) if args.config else BuilderConfig()
    manifest, stats = build_dataset(
        pipeline=args.pipeline,
        input_dir=args.input_dir,
        out_dir=args.out_dir,
        seed=args.seed,
        workers=args.workers,
        config=config,
        limit=args.limit,
    )
    print(f"manifest: {manifest}")
    print(f"inputs: {stats.total}  succeeded: {stats.succeeded}  "
          f"rejected: {stats.rejected}  failed: {stats.failed}")
    if stats.success_rate < config.min_success_rate:
        print(f"success rate {stats.success_rate:.1%} below "
              f"{config.min_success_rate:.0%} floor", file=sys.stderr)
        return 1
    return 0


def _cmd_derive_mask(args) -> int:
    from .maskgen import ChangeMask, derive_mask
    from .raster import load_png, save_png

    src = load_png(args.src)
    edited = load_png(args.edited)
    result = derive_mask(src, edited, threshold=args.threshold, radius=args.radius)
    accepted = isinstance(result, ChangeMask)
    report = {
        "decision": "accepted" if accepted else "rejected",
        "reason": None if accepted else result.reason,
        "ratio": result.hull_area_ratio,
        "threshold": result.delta_threshold,
    }
    if accepted:
        save_png(result.mask.astype(np.float64), args.out_mask)
        report["mask"] = str(args.out_mask)
    report_path = args.report or (str(args.out_mask) + ".json")
    Path(report_path).write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return 0 if accepted else 2


def _cmd_canny(args) -> int:
    from .edges import CannyParams, canny
    from .raster import load_png, save_png

    edge = canny(load_png(args.input), CannyParams(sigma=args.sigma, low=args.low, high=args.high))
    save_png(edge, args.output)
    print(f"{args.output}: {int(edge.sum())} edge pixels")
    return 0


def _cmd_eval(args) -> int:
    from .metrics import evaluate_batch
    from .raster import load_png

    pred_dir, ref_dir = Path(args.pred_dir), Path(args.ref_dir)
    pairs = []
    for pred in sorted(pred_dir.glob("*.png")):
        ref = ref_dir / pred.name
        if not ref.exists():
            print(f"skipping {pred.name}: no reference", file=sys.stderr)
            continue
        pairs.append((load_png(pred), load_png(ref)))
    if not pairs:
        print("no image pairs found", file=sys.stderr)
        return 1
    report = evaluate_batch(pairs)
    Path(args.report).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    psnr_text = "inf" if math.isinf(report.psnr) else f"{report.psnr:.3f}"
    print(f"images: {report.image_count}  l1: {report.l1:.5f}  l2: {report.l2:.5f}  "
          f"psnr: {psnr_text}  ssim: {report.ssim:.4f}")
    return 0


def _cmd_train_toy(args) -> int:
    from .model import ColorFieldTask, ToyDiT, ToyModelConfig, save_checkpoint, train

    config = ToyModelConfig()
    model = ToyDiT(config, seed=args.seed)
    task = ColorFieldTask(config)
    result = train(
        model, task, steps=args.steps, lr=args.lr, batch_size=args.batch_size,
        seed=args.seed, loss_csv=args.loss_csv,
    )
    save_checkpoint(model, args.out)
    first = float(np.mean(result.losses[: min(100, len(result.losses))]))
    last = float(np.mean(result.losses[-min(100, len(result.losses)):]))
    print(f"saved {args.out}  steps: {args.steps}  first: {first:.4f}  last: {last:.4f}")
    return 0


def _cmd_validate_manifest(args) -> int:
    from .dataset import validate_manifest

    problems = validate_manifest(args.manifest)
    for problem in problems:
        print(problem, file=sys.stderr)
    print(f"{args.manifest}: {'ok' if not problems else f'{len(problems)} problem(s)'}")
    return 0 if not problems else 1


def _cmd_replay_check(args) -> int:
    from .dataset import verify_replay

    mismatches = verify_replay(args.manifest)
    for mismatch in mismatches:
        print(mismatch, file=sys.stderr)
    print(f"{args.manifest}: {'bitwise reproducible' if not mismatches else f'{len(mismatches)} mismatch(es)'}")
    return 0 if not mismatches else 1


def _cmd_export_openapi(args) -> int:
    from .service import ServiceConfig, create_app

    spec = create_app(ServiceConfig()).openapi()
    Path(args.out).write_text(json.dumps(spec, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="layerkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"layerkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the edit-session HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8787)
    serve.add_argument("--checkpoint", default=None, help="toy model checkpoint (.npz)")
    serve.add_argument("--strict-sigma-zero", action="store_true",
                       help="sigma=0 blocks text/context rows from the cue as well")
    serve.add_argument("--max-image-side", type=int, default=1024)
    serve.add_argument("--seed", type=int, default=0)
    serve.add_argument("--workers", type=int, default=1, help="generation worker count")
    serve.add_argument("--ui-dir", default=None, help="static UI bundle to serve at /")
    serve.set_defaults(fn=_cmd_serve)

    build = sub.add_parser("build-dataset", help="assemble training triplets")
    build.add_argument("--pipeline", required=True,
                       choices=("content", "structural", "color", "spatial", "removal"))
    build.add_argument("--input-dir", required=True)
    build.add_argument("--out-dir", required=True)
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--workers", type=int, default=1)
    build.add_argument("--config", default=None, help="TOML file of thresholds and rates")
    build.add_argument("--limit", type=int, default=None)
    build.set_defaults(fn=_cmd_build_dataset)

    derive = sub.add_parser("derive-mask", help="derive a spatial edit mask from an image pair")
    derive.add_argument("--src", required=True)
    derive.add_argument("--edited", required=True)
    derive.add_argument("--out-mask", required=True)
    derive.add_argument("--threshold", type=float, default=6.0)
    derive.add_argument("--radius", type=int, default=None)
    derive.add_argument("--report", default=None, help="JSON report path (default <out-mask>.json)")
    derive.set_defaults(fn=_cmd_derive_mask)

    canny_cmd = sub.add_parser("canny", help="extract a Canny edge map")
    canny_cmd.add_argument("--sigma", type=float, default=1.4)
    canny_cmd.add_argument("--low", type=float, default=0.1)
    canny_cmd.add_argument("--high", type=float, default=0.3)
    canny_cmd.add_argument("input")
    canny_cmd.add_argument("output")
    canny_cmd.set_defaults(fn=_cmd_canny)

    eval_cmd = sub.add_parser("eval", help="pixel metrics over prediction/reference directories")
    eval_cmd.add_argument("--pred-dir", required=True)
    eval_cmd.add_argument("--ref-dir", required=True)
    eval_cmd.add_argument("--report", required=True)
    eval_cmd.set_defaults(fn=_cmd_eval)

    train_cmd = sub.add_parser("train-toy", help="train the toy model on the color-field task")
    train_cmd.add_argument("--steps", type=int, default=2000)
    train_cmd.add_argument("--batch-size", type=int, default=8)
    train_cmd.add_argument("--lr", type=float, default=None, help="default: config value 1e-4")
    train_cmd.add_argument("--seed", type=int, default=0)
    train_cmd.add_argument("--out", required=True, help="checkpoint output path (.npz)")
    train_cmd.add_argument("--loss-csv", default=None)
    train_cmd.set_defaults(fn=_cmd_train_toy)

    validate = sub.add_parser("validate-manifest", help="referential-integrity check of a manifest")
    validate.add_argument("manifest")
    validate.set_defaults(fn=_cmd_validate_manifest)

    replay = sub.add_parser("replay-check", help="verify a dataset reproduces bitwise from its manifest")
    replay.add_argument("manifest")
    replay.set_defaults(fn=_cmd_replay_check)

    openapi = sub.add_parser("export-openapi", help="write the service's OpenAPI spec")
    openapi.add_argument("--out", default="openapi.json")
    openapi.set_defaults(fn=_cmd_export_openapi)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InvalidArgumentError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
