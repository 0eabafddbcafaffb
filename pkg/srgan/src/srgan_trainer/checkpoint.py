"""Checkpoint directories: both networks plus a JSON metadata file.

Layout:

    generator.pt       generator state dict
    discriminator.pt   discriminator state dict
    metadata.json      {"step": N, "config": {...run configuration...}}
    training_state.pt  optimizers and RNG states (present when resumable)

`metadata.json` echoes the full run configuration so inference can
rebuild the right architecture without guessing.
"""

from __future__ import annotations

import json
import pickle
from pathlib import Path
from typing import Any

import torch

from .errors import CheckpointError
from .models import Discriminator, Generator, GeneratorConfig

_GENERATOR = "generator.pt"
_DISCRIMINATOR = "discriminator.pt"
_METADATA = "metadata.json"
_TRAINING_STATE = "training_state.pt"


def save_checkpoint(out_dir: str | Path, generator: Generator,
                    discriminator: Discriminator, step: int,
                    config: dict[str, Any],
                    training_state: dict[str, Any] | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(generator.state_dict(), out / _GENERATOR)
    torch.save(discriminator.state_dict(), out / _DISCRIMINATOR)
    if training_state is not None:
        torch.save(training_state, out / _TRAINING_STATE)
    # metadata last, so a complete metadata file marks a complete checkpoint
    (out / _METADATA).write_text(
        json.dumps({"step": step, "config": config}, indent=2) + "\n"
    )
    return out


def load_metadata(ckpt_dir: str | Path) -> dict[str, Any]:
    path = Path(ckpt_dir) / _METADATA
    try:
        meta = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"cannot read {path}: {exc}") from exc
    if not isinstance(meta.get("step"), int) or not isinstance(meta.get("config"), dict):
        raise CheckpointError(f"{path} lacks step/config fields")
    return meta


def _load_states(ckpt_dir: Path, name: str) -> dict:
    try:
        return torch.load(ckpt_dir / name, map_location="cpu", weights_only=True)
    except (OSError, RuntimeError, ValueError, pickle.UnpicklingError, EOFError) as exc:
        raise CheckpointError(f"cannot load {ckpt_dir / name}: {exc}") from exc


def generator_config(meta: dict[str, Any]) -> GeneratorConfig:
    cfg = meta["config"]
    return GeneratorConfig(
        features=int(cfg.get("features", 64)),
        residual_blocks=int(cfg.get("residual_blocks", 16)),
    )


def load_generator(ckpt_dir: str | Path) -> Generator:
    """Rebuild the generator described by the checkpoint's metadata."""
    ckpt = Path(ckpt_dir)
    meta = load_metadata(ckpt)
    net = Generator(generator_config(meta))
    try:
        net.load_state_dict(_load_states(ckpt, _GENERATOR))
    except RuntimeError as exc:
        raise CheckpointError(f"generator weights do not fit the config echo: {exc}") from exc
    net.eval()
    return net


def load_for_resume(ckpt_dir: str | Path) -> tuple[dict[str, Any], dict, dict, dict]:
    ckpt = Path(ckpt_dir)
    meta = load_metadata(ckpt)
    if not (ckpt / _TRAINING_STATE).exists():
        raise CheckpointError(f"{ckpt} has no training state to resume from")
    return (meta, _load_states(ckpt, _GENERATOR),
            _load_states(ckpt, _DISCRIMINATOR),
            _load_states(ckpt, _TRAINING_STATE))
