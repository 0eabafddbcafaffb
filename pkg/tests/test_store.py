"""Archive store behavior: content addressing, durability across a killed
process, backend isolation, and dataset evaluation."""

import signal
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from greenstore.errors import (
    AmbiguousName,
    BackendFailure,
    EmptyDataset,
    NotFound,
    StorageError,
    TooSmall,
)
from greenstore.metrics import psnr
from greenstore.palette import DitherConfig
from greenstore.raster import RasterImage, decode_png, encode_png
from greenstore.store import (
    NATIVE_BACKEND,
    ArchiveStore,
    UpscalerBackend,
    evaluate_dataset,
    parse_backend,
)

from synth import synthetic_photo


def write_png(path, pixels):
    path.write_bytes(encode_png(RasterImage(np.asarray(pixels, dtype=np.uint8))))
    return path


def smooth_png(path, h, w, seed):
    rng = np.random.default_rng(seed)
    yy = np.linspace(0, 255, h)[:, None, None]
    xx = np.linspace(0, 200, w)[None, :, None]
    base = yy * 0.5 + xx * 0.5 + rng.normal(0, 6, size=(h, w, 3))
    return write_png(path, np.clip(base, 0, 255))


def backend_script(tmp_path, name, body):
    script = tmp_path / name
    script.write_text(textwrap.dedent(body))
    return UpscalerBackend("external", f"{sys.executable} {script}")


class TestParseBackend:
    def test_native(self):
        assert parse_backend("native") is NATIVE_BACKEND

    def test_external(self):
        b = parse_backend("external:/usr/bin/upscale --fast")
        assert b.kind == "external"
        assert b.command_template == "/usr/bin/upscale --fast"

    def test_rejects(self):
        with pytest.raises(BackendFailure):
            parse_backend("external:")
        with pytest.raises(BackendFailure):
            parse_backend("magic")


class TestArchiveBasics:
    def test_idempotent_same_file(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 1)
        store = ArchiveStore(tmp_path / "store")
        first = store.archive(src)
        second = store.archive(src)
        assert second.object_id == first.object_id
        assert len(store.entries()) == 1
        blobs = [p for p in (tmp_path / "store" / "objects").iterdir()]
        assert len(blobs) == 1

    def test_manifest_records_sizes_and_settings(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 2)
        store = ArchiveStore(tmp_path / "store")
        cfg = DitherConfig(scale=0.5, palette_size=64)
        entry = store.archive(src, cfg)
        assert entry.source_name == "a.png"
        assert (entry.original_width, entry.original_height) == (44, 40)
        assert entry.original_bytes == src.stat().st_size
        assert entry.stored_bytes == store.blob_path(entry.object_id).stat().st_size
        assert entry.dither_scale == 0.5
        assert entry.palette_size == 64
        assert entry.scale_factor == 4
        assert entry.codec == "png"

    def test_stored_blob_is_quarter_size_png(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 41, 38, 3)
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        small = decode_png(store.blob_path(entry.object_id).read_bytes())
        assert (small.width, small.height) == (10, 11)  # ceil(38/4), ceil(41/4)

    def test_missing_source(self, tmp_path):
        store = ArchiveStore(tmp_path / "store")
        with pytest.raises(NotFound):
            store.archive(tmp_path / "nope.png")

    def test_too_small_source(self, tmp_path):
        src = write_png(tmp_path / "tiny.png", np.zeros((3, 3, 3)))
        store = ArchiveStore(tmp_path / "store")
        with pytest.raises(TooSmall):
            store.archive(src)

    def test_open_missing_store(self, tmp_path):
        with pytest.raises(NotFound):
            ArchiveStore(tmp_path / "absent", create=False)


class TestLookup:
    def test_by_id_and_name(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 4)
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        assert store.lookup(entry.object_id) == entry
        assert store.lookup("a.png") == entry

    def test_ambiguous_name(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 5)
        store = ArchiveStore(tmp_path / "store")
        store.archive(src, DitherConfig(scale=1.0))
        store.archive(src, DitherConfig(scale=0.0))
        with pytest.raises(AmbiguousName):
            store.lookup("a.png")

    def test_not_found(self, tmp_path):
        store = ArchiveStore(tmp_path / "store")
        with pytest.raises(NotFound):
            store.lookup("missing.png")


class TestRetrieveNative:
    def test_dims_restored_non_multiple_of_four(self, tmp_path):
        src = smooth_png(tmp_path / "odd.png", 37, 45, 6)
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        out = store.retrieve(entry.object_id)
        assert (out.width, out.height) == (45, 37)

    def test_constant_image_roundtrips_exactly(self, tmp_path):
        src = write_png(tmp_path / "flat.png", np.full((44, 44, 3), 57))
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        out = store.retrieve(entry.object_id)
        assert np.array_equal(out.pixels, np.full((44, 44, 3), 57, dtype=np.uint8))

    def test_beats_nearest_neighbor_roundtrip(self, tmp_path):
        pixels = synthetic_photo(96, 80, seed=7)
        src = write_png(tmp_path / "photo.png", pixels)
        store = ArchiveStore(tmp_path / "store")
        out = store.retrieve(store.archive(src).object_id)
        small = pixels[::4, ::4]
        nn = np.repeat(np.repeat(small, 4, axis=0), 4, axis=1)[:80, :96]
        original = RasterImage(pixels)
        assert psnr(original, out) > psnr(original, RasterImage(nn))

    def test_retrieve_by_name(self, tmp_path):
        src = smooth_png(tmp_path / "named.png", 40, 40, 8)
        store = ArchiveStore(tmp_path / "store")
        store.archive(src)
        assert store.retrieve("named.png").width == 40


class TestVerifyAndCorruption:
    def test_clean_store(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 9)
        store = ArchiveStore(tmp_path / "store")
        store.archive(src)
        assert store.verify() == []

    def test_flipped_byte_detected(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 10)
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        blob_path = store.blob_path(entry.object_id)
        data = bytearray(blob_path.read_bytes())
        data[len(data) // 2] ^= 0xFF
        blob_path.write_bytes(bytes(data))
        problems = store.verify()
        assert len(problems) == 1 and "hash" in problems[0]
        with pytest.raises(StorageError):
            store.retrieve(entry.object_id)

    def test_missing_blob_detected(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 11)
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        store.blob_path(entry.object_id).unlink()
        problems = store.verify()
        assert len(problems) == 1 and "missing" in problems[0]
        with pytest.raises(StorageError):
            store.retrieve(entry.object_id)


class TestManifestReload:
    def test_fresh_open_sees_entries(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 12)
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        again = ArchiveStore(tmp_path / "store", create=False)
        assert [e.object_id for e in again.entries()] == [entry.object_id]
        assert again.retrieve(entry.object_id).width == 44

    def test_duplicate_manifest_lines_deduped(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 13)
        store = ArchiveStore(tmp_path / "store")
        entry = store.archive(src)
        with open(store.manifest_path, "a") as fh:
            fh.write(entry.to_json() + "\n")
        again = ArchiveStore(tmp_path / "store")
        assert len(again.entries()) == 1

    def test_corrupt_manifest_line_raises(self, tmp_path):
        store = ArchiveStore(tmp_path / "store")
        store.manifest_path.write_text("{not json\n")
        with pytest.raises(StorageError):
            ArchiveStore(tmp_path / "store")


class TestExternalBackend:
    def archived(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 14)
        store = ArchiveStore(tmp_path / "store")
        return store, store.archive(src)

    def test_conforming_command(self, tmp_path):
        store, entry = self.archived(tmp_path)
        backend = backend_script(
            tmp_path,
            "good.py",
            """\
            import os, sys
            assert os.environ["GREENSTORE_SCALE"] == "4"
            from greenstore.raster import decode_png, encode_png
            from greenstore.resample import upscale_4x
            img = decode_png(open(sys.argv[1], "rb").read())
            open(sys.argv[2], "wb").write(encode_png(upscale_4x(img)))
            """,
        )
        out = store.retrieve(entry.object_id, backend)
        assert (out.width, out.height) == (44, 40)
        assert np.array_equal(out.pixels, store.retrieve(entry.object_id).pixels)

    def test_wrong_dims_rejected(self, tmp_path):
        store, entry = self.archived(tmp_path)
        backend = backend_script(
            tmp_path,
            "identity.py",
            """\
            import shutil, sys
            shutil.copyfile(sys.argv[1], sys.argv[2])
            """,
        )
        with pytest.raises(BackendFailure):
            store.retrieve(entry.object_id, backend)

    def test_nonzero_exit_rejected(self, tmp_path):
        store, entry = self.archived(tmp_path)
        backend = backend_script(
            tmp_path,
            "crash.py",
            """\
            import sys
            sys.stderr.write("synthetic fault")
            sys.exit(3)
            """,
        )
        with pytest.raises(BackendFailure):
            store.retrieve(entry.object_id, backend)

    def test_garbage_output_rejected(self, tmp_path):
        store, entry = self.archived(tmp_path)
        backend = backend_script(
            tmp_path,
            "garbage.py",
            """\
            import sys
            open(sys.argv[2], "wb").write(b"not a png at all")
            """,
        )
        with pytest.raises(BackendFailure):
            store.retrieve(entry.object_id, backend)

    def test_unlaunchable_command(self, tmp_path):
        store, entry = self.archived(tmp_path)
        backend = UpscalerBackend("external", "/does/not/exist/upscaler")
        with pytest.raises(BackendFailure):
            store.retrieve(entry.object_id, backend)

    def test_hostile_backend_cannot_corrupt_store(self, tmp_path):
        # overwrites its input, scribbles a bad output, then dies
        store, entry = self.archived(tmp_path)
        backend = backend_script(
            tmp_path,
            "hostile.py",
            """\
            import sys
            open(sys.argv[1], "wb").write(b"vandalised")
            open(sys.argv[2], "wb").write(b"junk")
            sys.exit(1)
            """,
        )
        with pytest.raises(BackendFailure):
            store.retrieve(entry.object_id, backend)
        assert store.verify() == []
        assert store.retrieve(entry.object_id).width == 44


class TestDurability:
    def test_killed_process_leaves_readable_store(self, tmp_path):
        src = smooth_png(tmp_path / "a.png", 40, 44, 15)
        store_dir = tmp_path / "store"
        child = tmp_path / "child.py"
        child.write_text(
            textwrap.dedent(
                """\
                import os, signal, sys
                from greenstore.store import ArchiveStore
                entry = ArchiveStore(sys.argv[1]).archive(sys.argv[2])
                sys.stdout.write(entry.object_id)
                sys.stdout.flush()
                os.kill(os.getpid(), signal.SIGKILL)
                """
            )
        )
        proc = subprocess.run(
            [sys.executable, str(child), str(store_dir), str(src)],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == -signal.SIGKILL
        object_id = proc.stdout.strip()
        assert len(object_id) == 64
        store = ArchiveStore(store_dir, create=False)
        assert store.verify() == []
        out = store.retrieve(object_id)
        assert (out.width, out.height) == (44, 40)


class TestEvaluateDataset:
    def test_aggregates_two_configs(self, tmp_path):
        data = tmp_path / "set"
        data.mkdir()
        for i in range(3):
            smooth_png(data / f"img{i}.png", 40, 44, 20 + i)
        store = ArchiveStore(tmp_path / "store")
        cfgs = [DitherConfig(scale=1.0), DitherConfig(scale=0.5)]
        rows = evaluate_dataset(data, cfgs, store)
        assert [r.dither_scale for r in rows] == [1.0, 0.5]
        total = sum((data / f"img{i}.png").stat().st_size for i in range(3))
        for row in rows:
            assert row.dataset == "set"
            assert row.image_count == 3
            assert row.report.original_bytes == total
            assert 0 < row.report.stored_bytes < total
            assert row.report.psnr_db > 20.0
            assert 0.0 < row.report.ssim <= 1.0
        assert len(store.entries()) == 6

    def test_single_constant_image(self, tmp_path):
        data = tmp_path / "flat"
        data.mkdir()
        write_png(data / "flat.png", np.full((44, 44, 3), 128))
        store = ArchiveStore(tmp_path / "store")
        rows = evaluate_dataset(data, [DitherConfig()], store)
        assert rows[0].report.psnr_db == float("inf")
        assert rows[0].report.ssim == 1.0
        assert rows[0].to_json_dict()["psnr_db"] == "inf"

    def test_quality_can_be_skipped(self, tmp_path):
        data = tmp_path / "set"
        data.mkdir()
        smooth_png(data / "img.png", 40, 44, 30)
        store = ArchiveStore(tmp_path / "store")
        rows = evaluate_dataset(data, [DitherConfig()], store, compute_quality=False)
        assert rows[0].report.stored_bytes > 0
        assert rows[0].report.psnr_db != rows[0].report.psnr_db  # nan

    def test_empty_and_missing_dirs(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        store = ArchiveStore(tmp_path / "store")
        with pytest.raises(EmptyDataset):
            evaluate_dataset(empty, [DitherConfig()], store)
        with pytest.raises(NotFound):
            evaluate_dataset(tmp_path / "ghost", [DitherConfig()], store)
