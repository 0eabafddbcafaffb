"""Content-addressed archive of downscaled images.

Layout on disk:

    <root>/objects/<sha256-hex>   stored PNG blobs, named by content hash
    <root>/manifest.jsonl         append-only, one JSON record per object

Archiving quantizes an image onto a derived palette with error diffusion,
downscales it 4x with Lanczos3 and stores the PNG encoding of the result.
Retrieval decodes the blob, upscales 4x through a pluggable backend (the
built-in Lanczos3 path or an external command) and centre-crops back to
the recorded original dimensions.  Blob writes go through a temp file,
fsync and rename, and the manifest row is flushed before archive returns,
so a crash right after the call leaves a readable store.  Archiving bytes
that hash to an existing object is a no-op returning the existing row.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import os
import shlex
import subprocess
import tempfile
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    AmbiguousName,
    BackendFailure,
    CorruptInput,
    EmptyDataset,
    GreenstoreError,
    NotFound,
    StorageError,
)
from .metrics import QualityReport, psnr, ssim
from .palette import DitherConfig, dither_floyd_steinberg, median_cut
from .raster import EncodeParams, RasterImage, decode_png, encode_png
from .resample import SCALE_FACTOR, downscale_4x, upscale_4x

_CODEC = "png"


@dataclass(frozen=True)
class ArchiveManifest:
    """One stored object: identity, provenance and pipeline settings."""

    object_id: str
    source_name: str
    original_width: int
    original_height: int
    original_bytes: int
    stored_bytes: int
    dither_scale: float
    palette_size: int
    scale_factor: int
    codec: str
    created_at: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "ArchiveManifest":
        return cls(**json.loads(line))


@dataclass(frozen=True)
class UpscalerBackend:
    """4x upscaler: the built-in kernel or an external command.

    External commands are invoked as `<command_template> <in.png> <out.png>`
    with GREENSTORE_SCALE=4 in the environment; they must exit 0 and write
    a decodable PNG with exactly 4x the input dimensions.
    """

    kind: str = "native"
    command_template: str | None = None


NATIVE_BACKEND = UpscalerBackend("native")


def parse_backend(spec: str) -> UpscalerBackend:
    if spec == "native":
        return NATIVE_BACKEND
    if spec.startswith("external:") and spec[len("external:") :].strip():
        return UpscalerBackend("external", spec[len("external:") :])
    raise BackendFailure(f"backend must be 'native' or 'external:<command>', got {spec!r}")


def _run_external(template: str, in_path: Path, out_path: Path) -> None:
    argv = shlex.split(template) + [str(in_path), str(out_path)]
    env = dict(os.environ, GREENSTORE_SCALE=str(SCALE_FACTOR))
    try:
        proc = subprocess.run(argv, env=env, capture_output=True, text=True)
    except OSError as exc:
        raise BackendFailure(f"cannot launch upscaler {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip().splitlines()
        detail = tail[-1] if tail else "no output"
        raise BackendFailure(f"upscaler exited {proc.returncode}: {detail}")


def _upscale(backend: UpscalerBackend, img: RasterImage, blob_path: Path | None) -> RasterImage:
    if backend.kind == "native":
        return upscale_4x(img)
    if backend.kind != "external" or not backend.command_template:
        raise BackendFailure(f"unusable backend {backend!r}")
    with tempfile.TemporaryDirectory(prefix="greenstore-up-") as tmp:
        tmp_dir = Path(tmp)
        # the command only ever sees a throwaway copy, so a backend that
        # scribbles on or deletes its input cannot touch the stored blob
        in_path = tmp_dir / "input.png"
        if blob_path is not None:
            in_path.write_bytes(blob_path.read_bytes())
        else:
            in_path.write_bytes(encode_png(img))
        out_path = tmp_dir / "output.png"
        _run_external(backend.command_template, in_path.resolve(), out_path.resolve())
        try:
            up = decode_png(out_path.read_bytes())
        except (OSError, GreenstoreError) as exc:
            raise BackendFailure(f"upscaler output unreadable: {exc}") from exc
    if (up.width, up.height) != (img.width * SCALE_FACTOR, img.height * SCALE_FACTOR):
        raise BackendFailure(
            f"upscaler returned {up.width}x{up.height} for {img.width}x{img.height} input"
        )
    return up


def _center_crop(img: RasterImage, width: int, height: int) -> RasterImage:
    if img.width < width or img.height < height:
        raise BackendFailure(
            f"upscaled image {img.width}x{img.height} smaller than original {width}x{height}"
        )
    x0 = (img.width - width) // 2
    y0 = (img.height - height) // 2
    return RasterImage(img.pixels[y0 : y0 + height, x0 : x0 + width])


class ArchiveStore:
    """Flat-directory blob store with a JSONL manifest."""

    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        self.objects = self.root / "objects"
        self.manifest_path = self.root / "manifest.jsonl"
        if create:
            try:
                self.objects.mkdir(parents=True, exist_ok=True)
                self.manifest_path.touch(exist_ok=True)
            except OSError as exc:
                raise StorageError(f"cannot initialise store at {self.root}: {exc}") from exc
        elif not self.manifest_path.is_file():
            raise NotFound(f"no store at {self.root}")
        self._entries: list[ArchiveManifest] = []
        self._by_id: dict[str, ArchiveManifest] = {}
        self._load()

    def _load(self):
        try:
            lines = self.manifest_path.read_text().splitlines()
        except OSError as exc:
            raise StorageError(f"cannot read manifest: {exc}") from exc
        for line in lines:
            if not line.strip():
                continue
            try:
                entry = ArchiveManifest.from_json(line)
            except (json.JSONDecodeError, TypeError) as exc:
                raise StorageError(f"corrupt manifest line: {exc}") from exc
            if entry.object_id not in self._by_id:
                self._entries.append(entry)
                self._by_id[entry.object_id] = entry

    def entries(self) -> list[ArchiveManifest]:
        return list(self._entries)

    def blob_path(self, object_id: str) -> Path:
        return self.objects / object_id

    def _write_blob(self, object_id: str, blob: bytes):
        final = self.blob_path(object_id)
        if final.exists():
            return
        fd, tmp_name = tempfile.mkstemp(dir=self.objects, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_name, final)
            dir_fd = os.open(self.objects, os.O_RDONLY)
            try:
                os.fsync(dir_fd)
            finally:
                os.close(dir_fd)
        except OSError as exc:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise StorageError(f"blob write failed: {exc}") from exc

    def _append_manifest(self, entry: ArchiveManifest):
        line = entry.to_json() + "\n"
        try:
            with open(self.manifest_path, "a", encoding="utf-8") as fh:
                fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(f"manifest append failed: {exc}") from exc
        self._entries.append(entry)
        self._by_id[entry.object_id] = entry

    def _ingest(
        self,
        processed: RasterImage,
        source_name: str,
        original_size: tuple[int, int],
        original_bytes: int,
        cfg: DitherConfig,
        params: EncodeParams | None = None,
    ) -> ArchiveManifest:
        blob = encode_png(processed, None, params or EncodeParams())
        object_id = hashlib.sha256(blob).hexdigest()
        existing = self._by_id.get(object_id)
        if existing is not None:
            return existing
        entry = ArchiveManifest(
            object_id=object_id,
            source_name=source_name,
            original_width=original_size[0],
            original_height=original_size[1],
            original_bytes=int(original_bytes),
            stored_bytes=len(blob),
            dither_scale=cfg.scale,
            palette_size=cfg.palette_size,
            scale_factor=SCALE_FACTOR,
            codec=_CODEC,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        self._write_blob(object_id, blob)
        self._append_manifest(entry)
        return entry

    def archive(
        self,
        path: str | Path,
        cfg: DitherConfig | None = None,
        params: EncodeParams | None = None,
    ) -> ArchiveManifest:
        """Quantize, downscale and store one PNG file."""
        cfg = cfg or DitherConfig()
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise NotFound(f"cannot read {path}: {exc}") from exc
        img = decode_png(raw)
        quantized, _ = _quantize(img, cfg)
        small = downscale_4x(quantized)
        return self._ingest(small, path.name, (img.width, img.height), len(raw), cfg, params)

    def lookup(self, ref: str) -> ArchiveManifest:
        """Resolve an object id or a unique source name to its manifest row."""
        entry = self._by_id.get(ref)
        if entry is not None:
            return entry
        named = [e for e in self._entries if e.source_name == ref]
        if len(named) == 1:
            return named[0]
        if len(named) > 1:
            ids = ", ".join(e.object_id[:12] for e in named)
            raise AmbiguousName(f"{ref!r} matches several objects: {ids}")
        raise NotFound(f"no stored object matches {ref!r}")

    def retrieve(self, ref: str, backend: UpscalerBackend = NATIVE_BACKEND) -> RasterImage:
        """Upscale a stored object back to its original dimensions."""
        entry = self.lookup(ref)
        blob_path = self.blob_path(entry.object_id)
        try:
            blob = blob_path.read_bytes()
        except OSError as exc:
            raise StorageError(f"blob missing for {entry.object_id[:12]}: {exc}") from exc
        if hashlib.sha256(blob).hexdigest() != entry.object_id:
            raise StorageError(f"blob for {entry.object_id[:12]} fails its hash check")
        small = decode_png(blob)
        up = _upscale(backend, small, blob_path)
        return _center_crop(up, entry.original_width, entry.original_height)

    def verify(self) -> list[str]:
        """Re-hash every blob; returns a list of problems (empty when clean)."""
        problems = []
        for entry in self._entries:
            p = self.blob_path(entry.object_id)
            try:
                blob = p.read_bytes()
            except OSError:
                problems.append(f"{entry.object_id}: blob missing")
                continue
            if hashlib.sha256(blob).hexdigest() != entry.object_id:
                problems.append(f"{entry.object_id}: content hash mismatch")
            elif len(blob) != entry.stored_bytes:
                problems.append(f"{entry.object_id}: size mismatch")
        return problems


def _quantize(img: RasterImage, cfg: DitherConfig, palette=None):
    pal = palette if palette is not None else median_cut(img, cfg.palette_size)
    return dither_floyd_steinberg(img, pal, cfg.scale), pal


def dataset_paths(dataset_dir: str | Path) -> list[Path]:
    d = Path(dataset_dir)
    if not d.is_dir():
        raise NotFound(f"{d} is not a directory")
    paths = sorted(p for p in d.glob("*.png") if p.is_file())
    if not paths:
        raise EmptyDataset(f"no .png files in {d}")
    return paths


@dataclass(frozen=True)
class DatasetRow:
    """Aggregate quality/size figures for one dataset at one dither scale."""

    dataset: str
    dither_scale: float
    image_count: int
    report: QualityReport

    def to_json_dict(self) -> dict:
        d = {
            "dataset": self.dataset,
            "dither_scale": self.dither_scale,
            "image_count": self.image_count,
        }
        d.update(self.report.to_json_dict())
        return d


def evaluate_dataset(
    dataset_dir: str | Path,
    configs,
    store: ArchiveStore,
    backend: UpscalerBackend = NATIVE_BACKEND,
    params: EncodeParams | None = None,
    compute_quality: bool = True,
) -> list[DatasetRow]:
    """Archive a directory of PNGs under each config and score the results.

    Each image is decoded once; palettes are shared between configs with
    the same palette size.  Quality means are plain averages over images
    (an identical pair makes the PSNR mean inf).
    """
    paths = dataset_paths(dataset_dir)
    name = Path(dataset_dir).name
    per_cfg = {id(cfg): {"orig": 0, "stored": 0, "psnr": [], "ssim": []} for cfg in configs}
    for path in paths:
        raw = path.read_bytes()
        try:
            img = decode_png(raw)
        except CorruptInput as exc:
            raise CorruptInput(f"{path.name}: {exc}") from exc
        palettes: dict[int, object] = {}
        for cfg in configs:
            pal = palettes.get(cfg.palette_size)
            quantized, pal = _quantize(img, cfg, pal)
            palettes[cfg.palette_size] = pal
            small = downscale_4x(quantized)
            entry = store._ingest(small, path.name, (img.width, img.height), len(raw), cfg, params)
            acc = per_cfg[id(cfg)]
            acc["orig"] += len(raw)
            acc["stored"] += entry.stored_bytes
            if compute_quality:
                restored = store.retrieve(entry.object_id, backend)
                acc["psnr"].append(psnr(img, restored))
                acc["ssim"].append(ssim(img, restored))
    rows = []
    for cfg in configs:
        acc = per_cfg[id(cfg)]
        mean_psnr = float(np.mean(acc["psnr"])) if acc["psnr"] else float("nan")
        mean_ssim = float(np.mean(acc["ssim"])) if acc["ssim"] else float("nan")
        rows.append(
            DatasetRow(
                dataset=name,
                dither_scale=cfg.scale,
                image_count=len(paths),
                report=QualityReport.build(mean_psnr, mean_ssim, acc["orig"], acc["stored"]),
            )
        )
    return rows
