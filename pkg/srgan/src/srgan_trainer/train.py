"""Alternating adversarial training with resumable checkpoints.

Each step updates the discriminator on a real batch versus a detached
generated batch, then updates the generator on content plus the
weighted adversarial term.  Every step is logged to CSV; any non-finite
loss aborts the run with a diagnostic rather than training on garbage.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import torch

from .checkpoint import load_for_resume, save_checkpoint
from .data import PairedCrops
from .errors import CheckpointError, TrainerError, TrainingDiverged
from .losses import PerceptualLoss, PixelFeatures, VggFeatures, discriminator_loss
from .models import MIN_INPUT_EDGE, SCALE, Discriminator, Generator, GeneratorConfig

LOG_COLUMNS = ("step", "d_loss", "g_content_loss", "g_adv_loss", "g_total_loss")
LOG_NAME = "training_log.csv"


@dataclass(frozen=True)
class TrainConfig:
    """One run's worth of knobs; echoed verbatim into the checkpoint."""

    steps: int = 200
    batch_size: int = 4
    crop: int = 96
    learning_rate: float = 1e-4
    seed: int = 0
    content: str = "pixel"
    vgg_layer: str = "conv5_4"
    vgg_weights: str | None = None
    warmup_steps: int = 0
    features: int = 64
    residual_blocks: int = 16

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps cannot be negative")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")
        # the low-res crop must clear the generator's minimum input edge
        if self.crop % SCALE != 0 or self.crop < SCALE * MIN_INPUT_EDGE:
            raise ValueError(
                f"crop must be a multiple of {SCALE} and at least {SCALE * MIN_INPUT_EDGE}"
            )
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.content not in ("pixel", "vgg"):
            raise ValueError(f"content must be pixel or vgg, got {self.content!r}")
        if self.content == "vgg" and self.vgg_layer not in VggFeatures.LAYERS:
            raise ValueError(f"unknown vgg layer {self.vgg_layer!r}")
        if self.warmup_steps < 0:
            raise ValueError("warmup steps cannot be negative")


def _extractor(config: TrainConfig):
    if config.content == "vgg":
        return VggFeatures(config.vgg_layer, config.vgg_weights)
    return PixelFeatures()


def _append_log(path: Path, rows: list[tuple], fresh: bool) -> None:
    with open(path, "w" if fresh else "a", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(LOG_COLUMNS)
        writer.writerows(rows)


def train(data_dir: str | Path, out_dir: str | Path,
          config: TrainConfig | None = None, resume: str | Path | None = None,
          progress: Callable[[str], None] | None = None) -> Path:
    """Run (or continue) a training job and write a checkpoint directory.

    `resume` continues from an earlier checkpoint through `config.steps`
    total steps, reproducing the losses an uninterrupted run would have
    logged: optimizer moments and both RNG streams travel inside the
    checkpoint.  Per-step losses append to training_log.csv in out_dir.
    """
    config = config or TrainConfig()
    torch.manual_seed(config.seed)
    gen = Generator(GeneratorConfig(config.features, config.residual_blocks))
    disc = Discriminator()
    g_opt = torch.optim.Adam(gen.parameters(), lr=config.learning_rate)
    d_opt = torch.optim.Adam(disc.parameters(), lr=config.learning_rate)
    sampler = torch.Generator()
    sampler.manual_seed(config.seed + 1)

    start = 0
    if resume is not None:
        meta, g_state, d_state, state = load_for_resume(resume)
        echo = meta["config"]
        if (echo.get("features"), echo.get("residual_blocks")) != (
                config.features, config.residual_blocks):
            raise CheckpointError("checkpoint architecture does not match the config")
        gen.load_state_dict(g_state)
        disc.load_state_dict(d_state)
        g_opt.load_state_dict(state["g_opt"])
        d_opt.load_state_dict(state["d_opt"])
        sampler.set_state(state["sampler"])
        torch.set_rng_state(state["torch_rng"])
        start = meta["step"]

    data = PairedCrops(data_dir, config.crop)
    loss_fn = PerceptualLoss(_extractor(config))
    gen.train()
    disc.train()

    rows: list[tuple] = []
    for step in range(start + 1, config.steps + 1):
        hr, lr = data.batch(config.batch_size, sampler)
        sr = gen(lr)

        d_loss = discriminator_loss(disc(hr), disc(sr.detach()))
        d_opt.zero_grad()
        d_loss.backward()
        d_opt.step()

        parts = loss_fn(sr, hr, disc(sr))
        objective = parts.content if step <= config.warmup_steps else parts.total
        g_opt.zero_grad()
        objective.backward()
        g_opt.step()

        row = (step, d_loss.item(), parts.content.item(),
               parts.adversarial.item(), parts.total.item())
        if not all(math.isfinite(v) for v in row[1:]):
            raise TrainingDiverged(
                f"non-finite loss at step {step}: d={row[1]!r} "
                f"content={row[2]!r} adv={row[3]!r} total={row[4]!r}"
            )
        rows.append(row)
        if progress is not None and (step % 50 == 0 or step == config.steps):
            progress(f"step {step}/{config.steps}  d={row[1]:.4f}  "
                     f"content={row[2]:.6f}  total={row[4]:.6f}")

    out = Path(out_dir)
    final_step = max(start, config.steps)
    training_state = {
        "g_opt": g_opt.state_dict(),
        "d_opt": d_opt.state_dict(),
        "sampler": sampler.get_state(),
        "torch_rng": torch.get_rng_state(),
    }
    save_checkpoint(out, gen, disc, final_step, asdict(config), training_state)
    log_path = out / LOG_NAME
    _append_log(log_path, rows, fresh=not (resume is not None and log_path.exists()))
    return out


class _Parser(argparse.ArgumentParser):
    # exit 1 on bad usage; argparse's native exit code is 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="srgan-train",
                description="Train the adversarial 4x upscaler on a directory of PNGs.")
    p.add_argument("--data", required=True, help="directory of full-resolution .png files")
    p.add_argument("--out", required=True, help="checkpoint directory to write")
    p.add_argument("--steps", type=int, default=200, help="total training steps")
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--crop", type=int, default=96, help="full-resolution crop edge")
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--content", choices=("pixel", "vgg"), default="pixel",
                   help="feature space for the content term")
    p.add_argument("--vgg-layer", default="conv5_4",
                   choices=sorted(VggFeatures.LAYERS))
    p.add_argument("--vgg-weights", default=None,
                   help="local VGG19 state-dict file (random init otherwise)")
    p.add_argument("--warmup-steps", type=int, default=0,
                   help="steps trained on the content term alone first")
    p.add_argument("--features", type=int, default=64)
    p.add_argument("--residual-blocks", type=int, default=16)
    p.add_argument("--resume", default=None, help="checkpoint directory to continue from")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = TrainConfig(
            steps=args.steps, batch_size=args.batch_size, crop=args.crop,
            learning_rate=args.learning_rate, seed=args.seed,
            content=args.content, vgg_layer=args.vgg_layer,
            vgg_weights=args.vgg_weights, warmup_steps=args.warmup_steps,
            features=args.features, residual_blocks=args.residual_blocks,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        out = train(args.data, args.out, config, resume=args.resume, progress=print)
    except (TrainerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"checkpoint written to {out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
