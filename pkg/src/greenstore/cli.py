"""Command-line interface.

Subcommands: archive, retrieve, evaluate, report, verify.  Every flag can
also be set through an environment variable with the GREENSTORE_ prefix
(GREENSTORE_STORE, GREENSTORE_DITHER, GREENSTORE_PALETTE_SIZE,
GREENSTORE_BACKEND, GREENSTORE_CARBON_FACTOR, GREENSTORE_TB_MODE); a flag
given on the command line wins.  Exit codes: 0 success, 1 usage error,
2 data error, 3 upscaler backend error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from pathlib import Path

from .energy import (
    DEFAULT_CARBON_G_PER_KWH,
    bytes_to_mb,
    projection,
    savings_report,
)
from .errors import BackendFailure, GreenstoreError, InvalidConfig
from .metrics import format_quality_table
from .palette import DitherConfig
from .raster import encode_png
from .store import ArchiveStore, dataset_paths, evaluate_dataset, parse_backend

_USAGE_EXIT = 1
_DATA_EXIT = 2
_BACKEND_EXIT = 3

_SIZE_RE = re.compile(r"^([0-9]+(?:\.[0-9]+)?)\s*(B|KB|MB|GB|TB)$", re.IGNORECASE)
_UNIT_POWER = {"B": 0, "KB": 1, "MB": 2, "GB": 3, "TB": 4}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(_USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _env(name: str, default=None):
    return os.environ.get("GREENSTORE_" + name, default)


def _size_to_tb(text: str, tb_mode: str) -> float:
    m = _SIZE_RE.match(text.strip())
    if not m:
        raise InvalidConfig(f"cannot parse size {text!r} (expected e.g. 428MB, 10TB)")
    value = float(m.group(1))
    step = 1024.0 if tb_mode == "binary" else 1000.0
    return value * step ** (_UNIT_POWER[m.group(2).upper()] - 4)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="greenstore", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_store(p):
        p.add_argument("--store", default=_env("STORE", "./greenstore"), help="store directory")

    def add_pipeline(p, multi_dither: bool):
        if multi_dither:
            p.add_argument(
                "--dither",
                default=_env("DITHER", "1.0"),
                help="comma-separated dither scales in [0, 1]",
            )
        else:
            p.add_argument("--dither", default=_env("DITHER", "1.0"), help="dither scale in [0, 1]")
        p.add_argument(
            "--palette-size",
            default=_env("PALETTE_SIZE", "256"),
            help="palette size in [2, 256]",
        )

    def add_backend(p):
        p.add_argument(
            "--backend",
            default=_env("BACKEND", "native"),
            help="'native' or 'external:<command>'",
        )

    def add_energy(p):
        p.add_argument(
            "--carbon-factor",
            default=_env("CARBON_FACTOR", str(DEFAULT_CARBON_G_PER_KWH)),
            help="grid intensity in gCO2/kWh",
        )
        p.add_argument(
            "--tb-mode",
            default=_env("TB_MODE", "binary"),
            choices=("binary", "decimal"),
            help="byte-unit convention",
        )

    p = sub.add_parser("archive", help="quantize, downscale and store PNG files")
    p.add_argument("paths", nargs="+", help="PNG files or directories of PNGs")
    add_store(p)
    add_pipeline(p, multi_dither=False)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("retrieve", help="upscale a stored object back to full size")
    p.add_argument("ref", help="object id or unique source name")
    p.add_argument("out", help="output PNG path")
    add_store(p)
    add_backend(p)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("evaluate", help="archive a dataset and score retrieval quality")
    p.add_argument("dataset", help="directory of PNG files")
    add_store(p)
    add_pipeline(p, multi_dither=True)
    add_backend(p)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("report", help="quality table plus energy and carbon accounting")
    p.add_argument("dataset", nargs="?", help="directory of PNG files")
    add_store(p)
    add_pipeline(p, multi_dither=True)
    add_backend(p)
    add_energy(p)
    p.add_argument(
        "--project",
        nargs=2,
        metavar=("SIZE", "FRACTION"),
        help="fleet projection, e.g. --project 10TB 0.70",
    )
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", help="re-hash every stored blob")
    add_store(p)
    p.add_argument("--json", action="store_true")

    return parser


def _parse_dithers(text: str) -> list[float]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(float(part))
        except ValueError as exc:
            raise InvalidConfig(f"bad dither scale {part!r}") from exc
    if not out:
        raise InvalidConfig("no dither scales given")
    return out


def _configs(args, multi: bool) -> list[DitherConfig]:
    try:
        palette_size = int(args.palette_size)
    except ValueError as exc:
        raise InvalidConfig(f"bad palette size {args.palette_size!r}") from exc
    scales = _parse_dithers(args.dither) if multi else [float(args.dither)]
    return [DitherConfig(scale=s, palette_size=palette_size) for s in scales]


def _cmd_archive(args) -> int:
    cfg = _configs(args, multi=False)[0]
    store = ArchiveStore(args.store)
    files: list[Path] = []
    for p in args.paths:
        path = Path(p)
        if path.is_dir():
            files.extend(dataset_paths(path))
        else:
            files.append(path)
    results = []
    for path in files:
        entry = store.archive(path, cfg)
        results.append(entry)
        if not args.json:
            print(
                f"archived {entry.source_name}: {entry.original_width}x{entry.original_height} "
                f"-> {entry.stored_bytes} B as {entry.object_id[:12]}"
            )
    orig = sum(e.original_bytes for e in results)
    stored = sum(e.stored_bytes for e in results)
    if args.json:
        payload = {
            "archived": [
                {
                    "object_id": e.object_id,
                    "source_name": e.source_name,
                    "original_bytes": e.original_bytes,
                    "stored_bytes": e.stored_bytes,
                }
                for e in results
            ],
            "original_bytes": orig,
            "stored_bytes": stored,
        }
        print(_json_dump(payload))
    else:
        pct = 100.0 * (1.0 - stored / orig) if orig else 0.0
        print(
            f"{len(results)} archived, {bytes_to_mb(orig):.4g} MB -> "
            f"{bytes_to_mb(stored):.4g} MB ({pct:.4f}% compression)"
        )
    return 0


def _cmd_retrieve(args) -> int:
    store = ArchiveStore(args.store, create=False)
    backend = parse_backend(args.backend)
    entry = store.lookup(args.ref)
    img = store.retrieve(entry.object_id, backend)
    Path(args.out).write_bytes(encode_png(img))
    if args.json:
        print(
            _json_dump(
                {
                    "object_id": entry.object_id,
                    "out": str(args.out),
                    "width": img.width,
                    "height": img.height,
                }
            )
        )
    else:
        print(f"retrieved {entry.object_id[:12]} -> {args.out} ({img.width}x{img.height})")
    return 0


def _row_record(row, tb_mode: str = "binary") -> dict:
    rec = row.to_json_dict()
    rec["stored_mb"] = f"{bytes_to_mb(row.report.stored_bytes, tb_mode):.4f}"
    rec["psnr_fmt"] = (
        "inf" if math.isinf(row.report.psnr_db) else f"{row.report.psnr_db:.2f}"
    )
    rec["ssim_fmt"] = f"{row.report.ssim:.5f}"
    rec["dither_fmt"] = f"{row.dither_scale:g}"
    rec["pct_fmt"] = f"{row.report.compression_pct:.4f}"
    return rec


_TABLE_COLUMNS = (
    ("dataset", "Dataset"),
    ("dither_fmt", "Dither"),
    ("psnr_fmt", "PSNR (dB)"),
    ("ssim_fmt", "SSIM"),
    ("stored_mb", "Stored (MB)"),
    ("pct_fmt", "Compression (%)"),
)


def _cmd_evaluate(args) -> int:
    configs = _configs(args, multi=True)
    store = ArchiveStore(args.store)
    backend = parse_backend(args.backend)
    rows = evaluate_dataset(args.dataset, configs, store, backend)
    if args.json:
        print(_json_dump({"rows": [r.to_json_dict() for r in rows]}))
    else:
        print(format_quality_table([_row_record(r) for r in rows], _TABLE_COLUMNS))
    return 0


def _cmd_report(args) -> int:
    carbon = float(args.carbon_factor)
    payload: dict = {}
    text_blocks: list[str] = []
    if args.dataset:
        configs = _configs(args, multi=True)
        store = ArchiveStore(args.store)
        backend = parse_backend(args.backend)
        rows = evaluate_dataset(args.dataset, configs, store, backend)
        payload["rows"] = [r.to_json_dict() for r in rows]
        text_blocks.append(
            format_quality_table([_row_record(r, args.tb_mode) for r in rows], _TABLE_COLUMNS)
        )
        payload["energy"] = []
        for row in rows:
            block = {}
            for arch in ("distributed", "centralized"):
                rep = savings_report(
                    row.report.original_bytes,
                    row.report.stored_bytes,
                    architecture=arch,
                    carbon_g_per_kwh=carbon,
                    tb_mode=args.tb_mode,
                )
                block[arch] = rep.to_json_dict(
                    {"carbon_g_per_kwh": carbon, "tb_mode": args.tb_mode}
                )
                text_blocks.append(
                    f"dither {row.dither_scale:g}, {arch}: "
                    f"{rep.initial_kwh:.6g} kWh/yr -> {rep.final_kwh:.6g} kWh/yr, "
                    f"saves {rep.savings_kwh:.6g} kWh/yr "
                    f"({rep.carbon_saved_g:.6g} g CO2/yr)"
                )
            block["dither_scale"] = row.dither_scale
            payload["energy"].append(block)
    if args.project:
        size_text, fraction_text = args.project
        proj = projection(
            _size_to_tb(size_text, args.tb_mode), float(fraction_text), carbon
        )
        payload["projection"] = proj.to_json_dict()
        text_blocks.append(
            f"projection {size_text} at {float(fraction_text):.0%} compression: "
            f"saves {proj.savings_kwh_distributed:.6g} kWh/yr distributed "
            f"({proj.carbon_saved_kg_distributed:.6g} kg CO2/yr), "
            f"{proj.savings_kwh_centralized:.6g} kWh/yr centralized "
            f"({proj.carbon_saved_kg_centralized:.6g} kg CO2/yr)"
        )
    if not payload:
        raise InvalidConfig("report needs a dataset directory or --project")
    if args.json:
        print(_json_dump(payload))
    else:
        print("\n".join(text_blocks))
    return 0


def _cmd_verify(args) -> int:
    store = ArchiveStore(args.store, create=False)
    problems = store.verify()
    if args.json:
        print(_json_dump({"objects": len(store.entries()), "problems": problems}))
    else:
        if problems:
            for p in problems:
                print(p, file=sys.stderr)
        print(f"{len(store.entries())} objects, {len(problems)} problems")
    return _DATA_EXIT if problems else 0


_COMMANDS = {
    "archive": _cmd_archive,
    "retrieve": _cmd_retrieve,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InvalidConfig as exc:
        print(f"greenstore: invalid configuration: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except BackendFailure as exc:
        print(f"greenstore: backend failure: {exc}", file=sys.stderr)
        return _BACKEND_EXIT
    except GreenstoreError as exc:
        print(f"greenstore: {exc}", file=sys.stderr)
        return _DATA_EXIT
    except ValueError as exc:
        print(f"greenstore: invalid value: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except OSError as exc:
        print(f"greenstore: {exc}", file=sys.stderr)
        return _DATA_EXIT


def entry():  # console-script hook
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
