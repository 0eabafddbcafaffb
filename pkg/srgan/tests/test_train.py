"""Training loop behavior: loss descent, resumability, divergence guard."""

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pytest
from greenstore import RasterImage, encode_png

from srgan_trainer import CheckpointError, EmptyDataset, TrainConfig, TrainingDiverged, train
from srgan_trainer.train import LOG_COLUMNS, LOG_NAME, main


def synth_image(seed: int, size: int = 96) -> np.ndarray:
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    base = 120 + 60 * np.sin(xx / 9 + seed) + 50 * np.cos(yy / 13 - seed)
    px = np.stack([base, np.roll(base, 7, axis=0), np.roll(base, 3, axis=1)], axis=-1)
    return np.clip(px + rng.normal(0, 6, px.shape), 0, 255).astype(np.uint8)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("pairs")
    for i in range(10):
        (root / f"img{i:02d}.png").write_bytes(encode_png(RasterImage(synth_image(i))))
    return root


def read_log(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        assert tuple(reader.fieldnames) == LOG_COLUMNS
        return list(reader)


TINY = dict(batch_size=1, crop=64, features=16, residual_blocks=2)


@pytest.mark.slow
def test_toy_training_reduces_content_loss(dataset, tmp_path):
    config = TrainConfig(steps=200, batch_size=2, crop=64, seed=7)
    out = train(dataset, tmp_path / "ckpt", config)

    rows = read_log(out / LOG_NAME)
    assert [int(r["step"]) for r in rows] == list(range(1, 201))
    values = [float(v) for r in rows for k, v in r.items() if k != "step"]
    assert all(np.isfinite(values))
    assert float(rows[-1]["g_content_loss"]) < float(rows[0]["g_content_loss"])

    assert (out / "generator.pt").exists()
    assert (out / "discriminator.pt").exists()
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["step"] == 200
    assert meta["config"] == asdict(config)


def test_resume_reproduces_an_uninterrupted_run(dataset, tmp_path):
    config = TrainConfig(steps=10, seed=3, **TINY)
    straight = train(dataset, tmp_path / "a", config)
    rows_a = read_log(straight / LOG_NAME)

    part = train(dataset, tmp_path / "b1", TrainConfig(steps=6, seed=3, **TINY))
    resumed = train(dataset, tmp_path / "b2", config, resume=part)
    rows_b = read_log(resumed / LOG_NAME)

    assert [r["step"] for r in rows_b] == ["7", "8", "9", "10"]
    for row_a, row_b in zip(rows_a[6:], rows_b):
        for column in LOG_COLUMNS:
            assert float(row_a[column]) == float(row_b[column]), column


def test_resume_in_place_appends_to_the_log(dataset, tmp_path):
    ckpt = train(dataset, tmp_path / "c", TrainConfig(steps=3, seed=1, **TINY))
    train(dataset, ckpt, TrainConfig(steps=5, seed=1, **TINY), resume=ckpt)
    rows = read_log(ckpt / LOG_NAME)
    assert [int(r["step"]) for r in rows] == [1, 2, 3, 4, 5]


def test_resume_architecture_mismatch_rejected(dataset, tmp_path):
    ckpt = train(dataset, tmp_path / "d", TrainConfig(steps=1, seed=2, **TINY))
    other = TrainConfig(steps=2, seed=2, batch_size=1, crop=64,
                        features=8, residual_blocks=2)
    with pytest.raises(CheckpointError):
        train(dataset, tmp_path / "d2", other, resume=ckpt)


def test_warmup_trains_on_content_alone_first(dataset, tmp_path):
    config = TrainConfig(steps=3, warmup_steps=2, seed=4, **TINY)
    out = train(dataset, tmp_path / "e", config)
    assert len(read_log(out / LOG_NAME)) == 3


def test_divergence_aborts_with_diagnostic(dataset, tmp_path):
    # an absurd learning rate blows the weights up within a few steps
    config = TrainConfig(steps=20, learning_rate=1e20, seed=5, **TINY)
    with pytest.raises(TrainingDiverged, match="step"):
        train(dataset, tmp_path / "f", config)


def test_empty_dataset_raises(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    with pytest.raises(EmptyDataset):
        train(empty, tmp_path / "g", TrainConfig(steps=1, **TINY))


class TestConfigValidation:
    def test_crop_floor(self):
        with pytest.raises(ValueError):
            TrainConfig(crop=48)
        with pytest.raises(ValueError):
            TrainConfig(crop=66)

    def test_other_fields(self):
        with pytest.raises(ValueError):
            TrainConfig(steps=-1)
        with pytest.raises(ValueError):
            TrainConfig(batch_size=0)
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(content="l1")
        with pytest.raises(ValueError):
            TrainConfig(content="vgg", vgg_layer="conv1_9")
        with pytest.raises(ValueError):
            TrainConfig(warmup_steps=-2)


class TestCli:
    def test_missing_required_flags_exit_1(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 1

    def test_bad_config_exits_1(self, dataset, tmp_path, capsys):
        rc = main(["--data", str(dataset), "--out", str(tmp_path / "x"),
                   "--crop", "48"])
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_missing_data_dir_exits_2(self, tmp_path, capsys):
        rc = main(["--data", str(tmp_path / "absent"), "--out",
                   str(tmp_path / "x"), "--steps", "1"])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_tiny_run_writes_checkpoint(self, dataset, tmp_path, capsys):
        out = tmp_path / "cli-ckpt"
        rc = main(["--data", str(dataset), "--out", str(out), "--steps", "2",
                   "--batch-size", "1", "--crop", "64", "--features", "8",
                   "--residual-blocks", "1", "--seed", "1"])
        assert rc == 0
        assert "checkpoint written" in capsys.readouterr().out
        assert (out / "metadata.json").exists()
        assert len(read_log(out / LOG_NAME)) == 2
