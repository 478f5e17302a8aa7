"""Command-line front end.

Exit codes: 0 success, 1 I/O or data error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import imageio, lowrank, metrics, msvd, phantom, report
from .denoise import NoiseSpec, ThresholdSpec, add_gaussian_noise, denoise_msvd
from .errors import (
    ConvergenceError,
    DimensionError,
    FormatError,
    ManifestError,
    RangeError,
    UndefinedMetricError,
    ValidationError,
)
from .svd import svd

log = logging.getLogger("svdenoise")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
DUMP_SCHEMA = "svdenoise.msvd-dump/1"
# flags that only choose where output goes; kept out of report parameters
_OUTPUT_ONLY = {"func", "report", "verbose"}


class CommandFailed(Exception):
    """A command finished but some entries failed; carries the exit code."""

    def __init__(self, code: int):
        super().__init__(code)
        self.code = code


def _ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000.0, 3)


def _params(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in _OUTPUT_ONLY}


def _load_image(path) -> tuple[np.ndarray, imageio.ImageBuffer]:
    buf = imageio.read_pgm(path)
    return imageio.to_matrix(buf), buf


def _save_image(path, m, depth: int) -> None:
    imageio.write_pgm(path, imageio.from_matrix(m, depth))


def _emit(args, rep: dict, table: str | None = None) -> None:
    if table:
        print(table)
    if getattr(args, "report", None):
        report.write_report(args.report, rep)
        log.info("report written to %s", args.report)


def _visual(band: np.ndarray) -> np.ndarray:
    """Min-max stretch to 0..255 for viewing; a flat band maps to 0."""
    lo, hi = float(band.min()), float(band.max())
    if hi == lo:
        return np.zeros_like(band)
    return (band - lo) * (255.0 / (hi - lo))


# -- decompose / reconstruct -------------------------------------------------


def cmd_decompose(args) -> int:
    img, buf = _load_image(args.input)
    steps = msvd.analyze(img, args.levels)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    levels_meta = []
    for i, (bands, u) in enumerate(steps):
        files = {}
        for name, band in zip(msvd.BAND_NAMES, bands.bands()):
            stem = f"level{i}_{name.upper()}"
            imageio.write_raw(out / f"{stem}.raw", band)
            _save_image(out / f"{stem}.pgm", _visual(band), 8)
            files[name] = {"raw": f"{stem}.raw", "pgm": f"{stem}.pgm"}
        levels_meta.append({"index": i, "shape": list(bands.shape), "u": u.tolist(), "files": files})
    meta = {
        "schema": DUMP_SCHEMA,
        "source": str(args.input),
        "original_shape": list(img.shape),
        "maxval": buf.maxval,
        "depth": buf.depth,
        "levels": levels_meta,
        "top_ll": levels_meta[-1]["files"]["ll"]["raw"],
    }
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    rows = [[f"level{m['index']}", f"{m['shape'][0]}x{m['shape'][1]}"] for m in levels_meta]
    print(report.format_table(["level", "band shape"], rows))
    return EXIT_OK


def load_dump(directory) -> tuple[msvd.MsvdPyramid, dict]:
    """Rebuild a pyramid from a ``decompose`` output directory."""
    directory = Path(directory)
    meta = json.loads((directory / "metadata.json").read_text(encoding="utf-8"))
    if meta.get("schema") != DUMP_SCHEMA:
        raise ValidationError(f"unsupported dump schema {meta.get('schema')!r}")
    levels = []
    for lv in meta["levels"]:
        bands = {name: imageio.read_raw(directory / lv["files"][name]["raw"]) for name in ("lh", "hl", "hh")}
        levels.append(msvd.MsvdLevel(u=np.array(lv["u"], dtype=np.float64), **bands))
    pyramid = msvd.MsvdPyramid(
        levels=tuple(levels),
        top_ll=imageio.read_raw(directory / meta["top_ll"]),
        original_shape=tuple(meta["original_shape"]),
    )
    return pyramid, meta


def cmd_reconstruct(args) -> int:
    pyramid, meta = load_dump(args.dump)
    img = msvd.reconstruct(pyramid)
    _save_image(args.out, img, meta.get("depth", 8))
    if args.raw:
        imageio.write_raw(args.raw, img)
    return EXIT_OK


# -- denoise / truncate / noise ----------------------------------------------


def cmd_denoise(args) -> int:
    spec = ThresholdSpec.parse(args.mode, args.threshold)
    img, buf = _load_image(args.input)
    start = time.perf_counter()
    out, rep = denoise_msvd(img, args.levels, spec)
    elapsed = _ms(start)
    _save_image(args.out, out, buf.depth)
    if args.raw:
        imageio.write_raw(args.raw, out)

    result = {"id": Path(args.input).stem, "shape": list(img.shape), "denoise": rep.as_dict(), "timings_ms": {"denoise": elapsed}}
    columns = ["id", "sigma_hat", "lambda"]
    row = [result["id"], rep.sigma_hat, rep.lambdas[0]]
    if args.reference:
        clean, _ = _load_image(args.reference)
        peak = float(buf.maxval)
        before, after = metrics.psnr(img, clean, peak), metrics.psnr(out, clean, peak)
        result.update(psnr_noisy=before, psnr_denoised=after, psnr_gain=after - before)
        columns += ["PSNR noisy", "PSNR denoised", "gain (dB)"]
        row += [before, after, after - before]
    rep_doc = report.make_report("denoise", _params(args), [result])
    _emit(args, rep_doc, report.format_table(columns, [row]))
    return EXIT_OK


def _k_output(out: Path, k: int, many: bool) -> Path:
    return out.with_name(f"{out.stem}_k{k}{out.suffix}") if many else out


def cmd_truncate(args) -> int:
    img, buf = _load_image(args.input)
    start = time.perf_counter()
    factors = svd(img)
    svd_ms = _ms(start)
    ks = list(args.k)
    many = len(ks) > 1
    results, rows = [], []
    for k in ks:
        approx, tr = lowrank.truncate(factors, k)
        target = _k_output(Path(args.out), k, many)
        _save_image(target, approx, buf.depth)
        entry = {"id": f"k{k}", "output": str(target), **tr.as_dict()}
        results.append(entry)
        rows.append([k, tr.kept_energy, tr.dropped_energy, tr.frobenius_error])
    rep_doc = report.make_report(
        "truncate",
        _params(args),
        results,
        summary={"singular_values": factors.s.tolist(), "timings_ms": {"svd": svd_ms}},
    )
    _emit(args, rep_doc, report.format_table(["k", "kept energy", "dropped energy", "frobenius error"], rows))
    return EXIT_OK


def cmd_noise(args) -> int:
    img, buf = _load_image(args.input)
    noisy = add_gaussian_noise(img, NoiseSpec(args.sigma, args.seed))
    _save_image(args.out, noisy, buf.depth)
    return EXIT_OK


# -- metrics -----------------------------------------------------------------


def _mask_metrics(ident: str, pred_path, gt_path) -> dict:
    try:
        pred = imageio.to_mask(imageio.read_pgm(pred_path))
        gt = imageio.to_mask(imageio.read_pgm(gt_path))
        c = metrics.confusion(pred, gt)
        return {
            "id": ident,
            "confusion": {"tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn},
            "binary_accuracy": metrics.binary_accuracy(c),
            "iou": metrics.iou(pred, gt),
            "dice": metrics.dice(pred, gt),
            "empty_masks": c.tp + c.fp + c.fn == 0,
        }
    except (OSError, FormatError, DimensionError, UndefinedMetricError) as exc:
        return {"id": ident, "error": _describe(exc)}


def _describe(exc: Exception) -> str:
    if isinstance(exc, OSError):
        return f"{exc.strerror or exc}: {exc.filename}" if exc.filename else str(exc)
    return str(exc)


def _mean(values) -> float | None:
    values = list(values)
    return float(np.mean(values)) if values else None


def cmd_metrics(args) -> int:
    if args.manifest:
        manifest = imageio.load_manifest(args.manifest, check_files=False)
        pairs = sorted((e.identifier, e.image_path, e.mask_path) for e in manifest)
    else:
        pairs = [(Path(args.pred).stem, Path(args.pred), Path(args.gt))]
    results = [_mask_metrics(*p) for p in pairs]
    ok = [r for r in results if "error" not in r]
    failed = [r for r in results if "error" in r]
    names = ("binary_accuracy", "iou", "dice")
    summary = {f"mean_{n}": _mean(r[n] for r in ok) for n in names}
    summary.update(entries=len(results), failed=len(failed))
    rep_doc = report.make_report("metrics", _params(args), results, summary=summary)

    rows = [[r["id"], *(r[n] for n in names)] for r in ok]
    if ok:
        rows.append(["mean", *(summary[f"mean_{n}"] for n in names)])
    _emit(args, rep_doc, report.format_table(["id", "Binary accuracy", "IOU", "Dice-coef"], rows))
    for r in failed:
        print(f"svdenoise: {r['id']}: {r['error']}", file=sys.stderr)
    if failed:
        raise CommandFailed(EXIT_DATA)
    return EXIT_OK


# -- bench -------------------------------------------------------------------


def entry_seed(seed: int, identifier: str) -> int:
    """Per-image noise seed derived from the run seed and the image identifier.

    Independent of manifest order and of the number of workers.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(zlib.crc32(identifier.encode("utf-8")),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _bench_entry(entry: imageio.ManifestEntry, args, spec: ThresholdSpec) -> dict:
    try:
        clean, buf = _load_image(entry.image_path)
    except (OSError, FormatError) as exc:
        return {"id": entry.identifier, "error": _describe(exc)}
    noise_seed = entry_seed(args.seed, entry.identifier)
    peak = float(buf.maxval)
    runs, timings = [], {"noise": [], "denoise": []}
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        noisy = add_gaussian_noise(clean, NoiseSpec(args.sigma, noise_seed))
        timings["noise"].append(_ms(t0))
        t0 = time.perf_counter()
        out, rep = denoise_msvd(noisy, args.levels, spec)
        timings["denoise"].append(_ms(t0))
        before, after = metrics.psnr(noisy, clean, peak), metrics.psnr(out, clean, peak)
        runs.append(
            {
                "psnr_noisy": before,
                "psnr_denoised": after,
                "psnr_gain": after - before if np.isfinite(before) or np.isfinite(after) else 0.0,
                "mse_noisy": metrics.mse(noisy, clean),
                "mse_denoised": metrics.mse(out, clean),
                "max_abs_change": float(np.max(np.abs(out - noisy))),
                "denoise": rep.as_dict(),
            }
        )
    first = runs[0]
    return {
        "id": entry.identifier,
        "shape": list(clean.shape),
        "noise_seed": noise_seed,
        **first,
        "repeats_identical": all(r == first for r in runs[1:]),
        "timings_ms": timings,
    }


def cmd_bench(args) -> int:
    if args.repeat < 1:
        raise RangeError(f"--repeat must be >= 1, got {args.repeat}")
    if args.sigma < 0:
        raise RangeError(f"--sigma must be >= 0, got {args.sigma}")
    spec = ThresholdSpec.parse(args.mode, args.threshold)
    manifest = imageio.load_manifest(args.manifest, check_files=False)
    entries = sorted(manifest, key=lambda e: e.identifier)
    start = time.perf_counter()
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(lambda e: _bench_entry(e, args, spec), entries))
    else:
        results = [_bench_entry(e, args, spec) for e in entries]
    total_ms = _ms(start)

    ok = [r for r in results if "error" not in r]
    failed = [r for r in results if "error" in r]
    summary = {
        "entries": len(results),
        "failed": len(failed),
        "mean_psnr_noisy": _mean(r["psnr_noisy"] for r in ok),
        "mean_psnr_denoised": _mean(r["psnr_denoised"] for r in ok),
        "mean_psnr_gain": _mean(r["psnr_gain"] for r in ok),
        "timings_ms": {"total": total_ms},
    }
    rep_doc = report.make_report("bench", _params(args), results, summary=summary, seed=args.seed)
    cols = ["id", "PSNR noisy", "PSNR denoised", "gain (dB)", "sigma_hat", "lambda"]
    rows = [
        [r["id"], r["psnr_noisy"], r["psnr_denoised"], r["psnr_gain"], r["denoise"]["sigma_hat"], r["denoise"]["levels"][0]["lambda"]]
        for r in ok
    ]
    if ok:
        rows.append(["mean", summary["mean_psnr_noisy"], summary["mean_psnr_denoised"], summary["mean_psnr_gain"], "", ""])
    _emit(args, rep_doc, report.format_table(cols, rows))
    for r in failed:
        print(f"svdenoise: {r['id']}: {r['error']}", file=sys.stderr)
    if failed:
        raise CommandFailed(EXIT_DATA)
    return EXIT_OK


# -- phantom -----------------------------------------------------------------


def cmd_phantom(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for ident, img, mask in phantom.phantom_set(args.size, args.count):
        image_path, mask_path = out / f"{ident}.pgm", out / f"{ident}_mask.pgm"
        _save_image(image_path, img, 8)
        _save_image(mask_path, mask * 255.0, 8)
        records.append((ident, image_path, mask_path))
    imageio.write_manifest(out / "manifest.csv", records)
    print(f"wrote {len(records)} phantom(s) and manifest.csv to {out}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _threshold_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=_positive_int, default=2, help="MSVD levels (default: 2)")
    p.add_argument("--mode", choices=("soft", "hard"), default="soft", help="shrinkage mode (default: soft)")
    p.add_argument(
        "--lambda",
        dest="threshold",
        default="universal",
        metavar="VAL|universal",
        help="explicit threshold or 'universal' (default: universal)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svdenoise", description="SVD and multiresolution-SVD image denoising.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="MSVD-decompose an image into band files")
    p.add_argument("input", type=Path)
    p.add_argument("--levels", type=_positive_int, default=2)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("reconstruct", help="inverse MSVD from a decompose directory")
    p.add_argument("dump", type=Path, help="directory written by 'decompose'")
    p.add_argument("--out", type=Path, required=True, help="output PGM")
    p.add_argument("--raw", type=Path, help="also write unquantised float64 dump")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("denoise", help="MSVD detail-band shrinkage denoising")
    p.add_argument("input", type=Path)
    _threshold_flags(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--raw", type=Path, help="also write unquantised float64 dump")
    p.add_argument("--reference", type=Path, help="clean image; adds PSNR before/after to the report")
    p.add_argument("--report", type=Path, help="JSON report path")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("truncate", help="rank-k SVD approximation")
    p.add_argument("input", type=Path)
    p.add_argument("--k", type=int, nargs="+", required=True, help="rank(s) to keep")
    p.add_argument("--out", type=Path, required=True, help="output PGM; '_k<K>' is appended when several k are given")
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("noise", help="add seeded Gaussian noise")
    p.add_argument("input", type=Path)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("metrics", help="binary accuracy, IOU and Dice of predicted masks")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", type=Path, help="rows: identifier, predicted mask, ground-truth mask")
    src.add_argument("--pred", type=Path)
    p.add_argument("--gt", type=Path)
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="noise + denoise every manifest image and report PSNR")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    _threshold_flags(p)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("phantom", help="write the synthetic phantom set with masks and a manifest")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--count", type=_positive_int, default=3)
    p.add_argument("--size", type=_positive_int, default=256)
    p.set_defaults(func=cmd_phantom)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "metrics" and args.pred is not None and args.gt is None:
        parser.error("--pred requires --gt")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CommandFailed as exc:
        return exc.code
    except (DimensionError, RangeError, ValidationError) as exc:
        print(f"svdenoise: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError, ManifestError, ConvergenceError, UndefinedMetricError) as exc:
        print(f"svdenoise: error: {_describe(exc)}", file=sys.stderr)
        return EXIT_DATA
    except (KeyError, json.JSONDecodeError) as exc:
        print(f"svdenoise: error: malformed metadata: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
