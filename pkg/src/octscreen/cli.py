"""Command-line entry points: gen, train, gradcheck, eval, sweep, serve."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import group_volumes, read_dataset, split_samples, write_dataset
from .gradcheck import check_model_gradients
from .model import ModelConfig, tiny_config
from .patches import PatchGeometry, anisotropic_geometry, toy_geometry
from .screening import pr_sweep, pr_sweep_tsv, select_center_frames
from .synthoct import GenConfig, generate_dataset, label_flip_rate
from .training import TrainConfig, fit


def _geometry_for(image_h: int, image_w: int) -> PatchGeometry:
    if (image_h, image_w) == (64, 64):
        return toy_geometry()
    if (image_h, image_w) == (224, 224):
        return anisotropic_geometry()
    raise SystemExit(
        f"no built-in tiling for {image_h}x{image_w}; use 64x64 or 224x224 data"
    )


def _select_volumes(samples, split: str | None, frames_k: int):
    if split:
        samples = split_samples(samples, split)
    volumes = {}
    for vid, frames in group_volumes(samples).items():
        k = min(frames_k, len(frames) if len(frames) % 2 else len(frames) - 1)
        chosen = select_center_frames(frames, k)
        volumes[vid] = (np.stack([s.image for s in chosen]), frames[0].se_d)
    return volumes


def cmd_gen(args) -> int:
    cfg = GenConfig(
        n_volumes=args.volumes,
        frames_per_volume=args.frames,
        image_h=args.height,
        image_w=args.width,
        noise_sigma_d=args.noise_sigma,
        se_range=(args.se_lo, args.se_hi),
        se_focus_weight=args.focus_weight,
        se_focus_range=(args.focus_lo, args.focus_hi),
        seed=args.seed,
    )
    samples = generate_dataset(cfg)
    write_dataset(args.out, samples)
    rate = label_flip_rate(samples, 0.0)
    print(
        f"wrote {cfg.n_volumes} volumes x {cfg.frames_per_volume} frames to {args.out} "
        f"(label flip rate at delta=0: {rate:.3f})"
    )
    return 0


def cmd_train(args) -> int:
    samples = read_dataset(args.data)
    train_split = split_samples(samples, "train")
    if not train_split:
        print("no training samples in dataset", file=sys.stderr)
        return 2
    h, w = train_split[0].image.shape
    model_cfg = ModelConfig(
        geometry=_geometry_for(h, w),
        embed_dim=args.embed_dim,
        depth=args.depth,
        heads=args.heads,
        mlp_ratio=args.mlp_ratio,
        use_ape=not args.no_ape,
        use_ace=not args.no_ace,
        use_sst=not args.no_sst,
    )
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        augment=not args.no_augment,
    )
    state = fit(train_split, model_cfg, cfg)
    save_checkpoint(
        args.out,
        state.model,
        state.sst_params if model_cfg.use_sst else None,
        epoch=cfg.epochs,
        seed=cfg.seed,
    )
    print(
        f"trained {state.step} steps on {len(train_split)} frames; "
        f"final loss {state.loss_trace[-1]:.4f}; checkpoint -> {args.out}"
    )
    return 0


def cmd_gradcheck(args) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        config = ModelConfig(
            geometry=PatchGeometry(*raw["geometry"]),
            embed_dim=raw.get("embed_dim", 8),
            depth=raw.get("depth", 1),
            heads=raw.get("heads", 2),
            mlp_ratio=raw.get("mlp_ratio", 2),
            use_ape=raw.get("use_ape", True),
            use_ace=raw.get("use_ace", True),
            use_sst=raw.get("use_sst", True),
        )
    else:
        config = tiny_config()
    result = check_model_gradients(
        config, eps=args.eps, seed=args.seed, max_coords_per_param=args.max_coords
    )
    for group, err in sorted(result.group_errors.items()):
        status = "ok" if err < result.tolerance else "FAIL"
        print(f"{group:24s} max_rel_err={err:.3e}  {status}")
    print("gradient check", "PASSED" if result.passed else "FAILED")
    return 0 if result.passed else 1


def cmd_eval(args) -> int:
    model, _, _, _ = load_checkpoint(args.ckpt)
    samples = read_dataset(args.data)
    volumes = _select_volumes(samples, args.split, args.frames)
    rows = pr_sweep(volumes, model, [args.delta])
    row = rows[0]
    print(
        f"delta={args.delta}  volumes={len(volumes)}  "
        f"accuracy={row['accuracy']:.3f}  precision={row['precision']:.3f}  "
        f"recall={row['recall']:.3f}  (tp={row['tp']} fp={row['fp']} fn={row['fn']} tn={row['tn']})"
    )
    return 0


def cmd_sweep(args) -> int:
    model, _, _, _ = load_checkpoint(args.ckpt)
    samples = read_dataset(args.data)
    volumes = _select_volumes(samples, args.split, args.frames)
    deltas = [float(tok) for tok in args.deltas.split(",") if tok.strip()]
    table = pr_sweep_tsv(pr_sweep(volumes, model, deltas))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(table)
        print(f"wrote sweep table to {args.out}")
    else:
        sys.stdout.write(table)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    model, sst, _, _ = load_checkpoint(args.ckpt)
    samples = read_dataset(args.data)
    app = create_app(model, sst, samples, frames_per_screen=args.frames)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="octscreen", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--volumes", type=int, default=60)
    g.add_argument("--frames", type=int, default=8)
    g.add_argument("--height", type=int, default=64)
    g.add_argument("--width", type=int, default=64)
    g.add_argument("--noise-sigma", type=float, default=0.75)
    g.add_argument("--se-lo", type=float, default=-12.0)
    g.add_argument("--se-hi", type=float, default=0.0)
    g.add_argument("--focus-weight", type=float, default=0.0,
                   help="fraction of volumes drawn from the near-criterion band")
    g.add_argument("--focus-lo", type=float, default=-7.0)
    g.add_argument("--focus-hi", type=float, default=-5.0)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train a screening model")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--epochs", type=int, default=10)
    t.add_argument("--batch-size", type=int, default=16)
    t.add_argument("--lr", type=float, default=3e-4)
    t.add_argument("--embed-dim", type=int, default=32)
    t.add_argument("--depth", type=int, default=2)
    t.add_argument("--heads", type=int, default=2)
    t.add_argument("--mlp-ratio", type=int, default=2)
    t.add_argument("--no-ape", action="store_true")
    t.add_argument("--no-ace", action="store_true")
    t.add_argument("--no-sst", action="store_true")
    t.add_argument("--no-augment", action="store_true")
    t.set_defaults(func=cmd_train)

    gc = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    gc.add_argument("--config", help="JSON model config (defaults to a built-in tiny one)")
    gc.add_argument("--eps", type=float, default=1e-5)
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--max-coords", type=int, default=None,
                    help="probe at most this many coordinates per parameter")
    gc.set_defaults(func=cmd_gradcheck)

    e = sub.add_parser("eval", help="screen a dataset at one adjustment coefficient")
    e.add_argument("--data", required=True)
    e.add_argument("--ckpt", required=True)
    e.add_argument("--delta", type=float, required=True)
    e.add_argument("--split", default="test")
    e.add_argument("--frames", type=int, default=7)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="precision/recall table over a delta grid")
    s.add_argument("--data", required=True)
    s.add_argument("--ckpt", required=True)
    s.add_argument("--deltas", default="-1,-0.5,0,0.5,1",
                   help="comma-separated grid; pass as --deltas=-1,0,1 (leading dash)")
    s.add_argument("--split", default="test")
    s.add_argument("--frames", type=int, default=7)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    sv = sub.add_parser("serve", help="run the JSON screening API")
    sv.add_argument("--ckpt", required=True)
    sv.add_argument("--data", required=True)
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--frames", type=int, default=7)
    sv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
