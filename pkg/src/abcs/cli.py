"""Command-line front end: ``abcs sense``, ``abcs reconstruct`` and ``abcs bench``.

Exit status is 0 on success, 1 for usage errors and 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import statistics
import sys
import time
import warnings
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import transform
from .container import ContainerError, read_measurements, write_measurements
from .denoise import DENOISERS, get_denoiser
from .metrics import cropped_reference, psnr, quality, ssim
from .pixelio import ImageFormatError, load_image, save_image, to_uint8
from .recon import METHODS, DivergenceError, ReconConfig, reconstruct, write_trace
from .sensing import ALGORITHMS, ConfigError, SensingConfig, as_ratio, sense

log = logging.getLogger("abcs")

DEFAULT_RATIOS = "0.01,0.02,0.04,0.10,0.20,0.30,0.40,0.50"
BANDS = {"0.01-0.04": (0.01, 0.04), "0.10-0.50": (0.10, 0.50)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ratio(text: str):
    try:
        r = as_ratio(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < r <= 1:
        raise argparse.ArgumentTypeError(f"compression ratio must lie in (0, 1], got {text}")
    return r


def _ratio_list(text: str):
    return [_ratio(t) for t in text.split(",") if t.strip()]


def _choice_list(choices):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"invalid choice(s) {bad}; choose from {choices}")
        return items
    return parse


def _emit_warnings(caught):
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)


def _report_empty_blocks(ms, label) -> None:
    empty = int((ms.counts == 0).sum())
    if empty:
        print(f"warning: {label}: {empty} of {ms.grid.n_blocks} blocks received no coefficients "
              "and decode to 0", file=sys.stderr)


# -- sense ------------------------------------------------------------------

def cmd_sense(args) -> int:
    img = load_image(args.input)
    cfg = SensingConfig(args.cr, args.algo, args.block, args.threshold)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ms = sense(img, cfg)
    _emit_warnings(caught)
    _report_empty_blocks(ms, args.input)
    out = Path(args.output) if args.output else Path(args.input).with_suffix(".abcs")
    write_measurements(out, ms)

    print(f"wrote {out}  ({ms.algorithm}, {ms.height}x{ms.width}, B={ms.block}, C_R={float(ms.ratio):g})")
    if ms.algorithm != args.algo:
        print(f"note: {args.algo} reverted to {ms.algorithm}")
    print(f"M_target {ms.m_target}  M_actual {ms.m_actual}  coefficients {ms.counts.sum()}"
          f"  side {ms.side_count}")
    hist, edges = np.histogram(ms.counts, bins=min(8, max(1, int(np.ptp(ms.counts)) + 1)))
    print("per-block coefficient counts:")
    for n, lo, hi in zip(hist, edges[:-1], edges[1:]):
        print(f"  [{lo:7.1f}, {hi:7.1f})  {n}")
    return 0


# -- reconstruct -----------------------------------------------------------

def _recon_config(args) -> ReconConfig:
    return ReconConfig(method=args.method, iterations=args.iters, damping=args.df,
                       denoiser=get_denoiser(args.denoiser), lam=args.lam, seed=args.seed)


def cmd_reconstruct(args) -> int:
    if args.trace and not args.ref:
        raise UsageError("--trace needs --ref")
    ms = read_measurements(args.input)
    ref = cropped_reference(load_image(args.ref), ms.block) if args.ref else None
    if ref is not None and ref.shape != (ms.height, ms.width):
        raise UsageError(f"--ref is {ref.shape}, container decodes to {(ms.height, ms.width)}")
    result = reconstruct(ms, _recon_config(args), reference=ref)
    out = Path(args.output) if args.output else Path(args.input).with_suffix(".pgm")
    save_image(out, result.image)
    print(f"wrote {out}  ({args.method}, {ms.height}x{ms.width})")
    if ref is not None:
        # metrics of the 8-bit image actually written
        print(quality(ref, to_uint8(result.image).astype(np.float64)))
    if args.trace:
        write_trace(args.trace, result.trace)
        print(f"wrote trace {args.trace}")
    return 0


# -- bench -----------------------------------------------------------------

@dataclass
class BenchRow:
    image: str
    algorithm: str
    cr: str
    method: str
    df: str
    iterations: str
    psnr_db: float
    ssim: float
    sense_ms: float | None
    decode_ms: float | None


def _median_ms(fn, repeats: int) -> tuple[float, object]:
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times), out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "inf" if v == float("inf") else f"{v:.4f}"
    return str(v)


def _load_dir(directory: Path):
    images = []
    for path in sorted(p for p in directory.iterdir() if p.suffix.lower() in (".pgm", ".png")):
        try:
            images.append((path.stem, load_image(path)))
        except ImageFormatError as exc:
            print(f"warning: skipping {path.name}: {exc}", file=sys.stderr)
    return images


def run_bench(images, algos, ratios, methods, *, block=32, iterations=15, damping=2.0,
              denoiser="dct", seed=42, repeats=5, timing=True) -> list[BenchRow]:
    rows = []
    for name, img in images:
        ref = cropped_reference(img, block)
        for algo in algos:
            for cr in ratios:
                cfg = SensingConfig(cr, algo, block)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    sense_ms, ms = _median_ms(lambda: sense(img, cfg), repeats if timing else 1)
                _report_empty_blocks(ms, f"{name} {algo} C_R={float(cr):g}")
                for method in methods:
                    rcfg = ReconConfig(method=method, iterations=iterations, damping=damping,
                                       denoiser=get_denoiser(denoiser), seed=seed)
                    try:
                        decode_ms, res = _median_ms(lambda: reconstruct(ms, rcfg), repeats if timing else 1)
                        est = res.image
                    except DivergenceError as exc:
                        log.warning("%s %s C_R=%s %s: %s", name, algo, cr, method, exc)
                        decode_ms, est = None, np.clip(exc.estimate, 0, 255)
                    iterative = method != "idct"
                    rows.append(BenchRow(name, algo, f"{float(cr):.2f}", method,
                                         f"{damping:g}" if iterative else "",
                                         str(iterations) if iterative else "",
                                         psnr(ref, est), ssim(ref, est),
                                         sense_ms if timing else None,
                                         decode_ms if timing else None))
    rows.sort(key=lambda r: (r.image, r.algorithm, float(r.cr), r.method))
    return rows


def summarize(rows: list[BenchRow]) -> list[BenchRow]:
    """Per-ratio means over images, then band means over the per-ratio means."""
    groups = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.method, r.cr, r.df, r.iterations), []).append(r)
    means = []
    for (algo, method, cr, df, iters), grp in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], float(kv[0][2]))):
        means.append(BenchRow("mean", algo, cr, method, df, iters,
                              statistics.fmean(r.psnr_db for r in grp),
                              statistics.fmean(r.ssim for r in grp), None, None))
    bands = []
    for label, (lo, hi) in BANDS.items():
        per = {}
        for m in means:
            if lo - 1e-9 <= float(m.cr) <= hi + 1e-9:
                per.setdefault((m.algorithm, m.method, m.df, m.iterations), []).append(m)
        for (algo, method, df, iters), grp in sorted(per.items()):
            bands.append(BenchRow("mean", algo, label, method, df, iters,
                                  statistics.fmean(r.psnr_db for r in grp),
                                  statistics.fmean(r.ssim for r in grp), None, None))
    return means + bands


def write_bench_csv(path, rows: list[BenchRow]) -> None:
    names = [f.name for f in fields(BenchRow)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for r in rows:
            writer.writerow([_fmt(getattr(r, n)) for n in names])


def cmd_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise UsageError(f"{directory} is not a directory")
    images = _load_dir(directory)
    if not images:
        raise RuntimeError(f"no readable PGM/PNG images in {directory}")
    rows = run_bench(images, args.algos, args.crs, args.methods, block=args.block,
                     iterations=args.iters, damping=args.df, denoiser=args.denoiser,
                     seed=args.seed, repeats=args.repeats, timing=not args.no_timing)
    rows += summarize(rows)
    write_bench_csv(args.out, rows)
    print(f"wrote {args.out}: {len(images)} images, {len(rows)} rows "
          f"(seed {args.seed}, transform {transform.BACKEND})")
    return 0


# -- entry point -------------------------------------------------------------

def _add_recon_flags(p):
    p.add_argument("--denoiser", choices=sorted(DENOISERS), default="dct")
    p.add_argument("--df", type=float, default=2.0, help="damping factor D_F (>= 1)")
    p.add_argument("--iters", type=int, default=15)
    p.add_argument("--lam", type=float, default=1.0, help="ISTA/AMP threshold multiplier")
    p.add_argument("--seed", type=int, default=42, help="divergence probe seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abcs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sense", help="sense an image into a measurement container")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--algo", choices=ALGORITHMS, default="zz")
    p.add_argument("--cr", type=_ratio, required=True, help="compression ratio M/N in (0, 1]")
    p.add_argument("--block", type=int, default=32)
    p.add_argument("--threshold", type=float, help="override the DD threshold T")
    p.set_defaults(func=cmd_sense)

    p = sub.add_parser("reconstruct", help="decode a measurement container")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--method", choices=METHODS, default="idct")
    p.add_argument("--ref", help="reference image for PSNR/SSIM")
    p.add_argument("--trace", help="write a per-iteration CSV trace (needs --ref)")
    _add_recon_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("bench", help="benchmark a directory of images")
    p.add_argument("--dir", required=True)
    p.add_argument("--algos", type=_choice_list(ALGORITHMS), default=list(ALGORITHMS))
    p.add_argument("--crs", type=_ratio_list, default=_ratio_list(DEFAULT_RATIOS))
    p.add_argument("--methods", type=_choice_list(METHODS), default=["idct"])
    p.add_argument("--out", required=True)
    p.add_argument("--block", type=int, default=32)
    p.add_argument("--repeats", type=int, default=5, help="timing runs per cell (median)")
    p.add_argument("--no-timing", action="store_true",
                   help="leave timing columns empty so reruns are byte-identical")
    _add_recon_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits on -h (0) and on bad flags (1 via _Parser.error)
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"abcs: error: {exc}", file=sys.stderr)
        return 1
    except (ImageFormatError, ContainerError, DivergenceError, RuntimeError, OSError, ValueError) as exc:
        print(f"abcs: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
