"""Command-line interface: ``graykeep embed|extract|verify|bench``."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

from . import codec
from .baselines import SCHEMES, clamping_violations
from .errors import GraykeepError
from .image_core import load_image, save_image
from .metrics import format_psnr, invariance_report, psnr
from .payload import random_bits, read_payload, write_payload

log = logging.getLogger("graykeep")

CSV_FIELDS = ["image", "scheme", "capacity_bits", "t1", "t2", "psnr_db",
              "gray_changed_pixels", "runtime_ms"]
IMAGE_SUFFIXES = (".png", ".ppm", ".pnm")


@contextmanager
def _staged(path):
    """Yield a temporary path next to ``path``; move it into place only on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=path.suffix)
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _secret_from_args(args):
    if args.payload is not None:
        return read_payload(args.payload)
    return random_bits(args.random_bits, args.seed)


def cmd_embed(args):
    cover = load_image(args.cover)
    secret = _secret_from_args(args)
    marked, rep = codec.encode(cover, secret, t1=args.t1, t2=args.t2, scheme=args.method,
                               target_bits=args.target_bits)
    with _staged(args.out) as tmp:
        save_image(marked, tmp)
    print(f"scheme={rep.scheme} t1={rep.t1} t2={rep.t2} bits={rep.capacity_bits}")
    print(f"psnr_db={format_psnr(rep.psnr)} mse={float(rep.mse):.6f}")
    print(f"header_bits={rep.header_bits} header_pixels={rep.header_pixels} "
          f"segments={rep.segments} gray_changed_pixels={rep.gray_changed_pixels}")
    return 0


def cmd_extract(args):
    marked = load_image(args.marked)
    cover, secret = codec.decode(marked, scheme=args.method)
    # decode fully before touching either output
    with _staged(args.out_cover) as tmp_cover, _staged(args.out_payload) as tmp_bits:
        save_image(cover, tmp_cover)
        write_payload(tmp_bits, secret)
    print(f"recovered {secret.size} bits")
    return 0


def cmd_verify(args):
    cover = load_image(args.cover)
    marked = load_image(args.marked)
    changed, count = invariance_report(cover, marked)
    print(f"psnr_db={format_psnr(psnr(cover, marked))}")
    print(f"gray_changed_pixels={count}")
    for i, j in changed:
        print(f"  ({i}, {j})")
    outside = [p for p in changed if p[0] != 0]
    if outside:
        print(f"{len(outside)} changed pixel(s) outside row 0", file=sys.stderr)
        return 1
    return 0


def _bench_job(job):
    path, scheme, capacity, seed = job
    name = Path(path).stem
    cover = load_image(path)
    secret = random_bits(capacity, seed)
    start = time.perf_counter()
    try:
        _, rep = codec.encode(cover, secret, scheme=scheme)
    except GraykeepError as exc:
        log.warning("%s %s %d: %s", name, scheme, capacity, exc)
        return {"image": name, "scheme": scheme, "capacity_bits": capacity, "t1": "", "t2": "",
                "psnr_db": "", "gray_changed_pixels": "", "runtime_ms": ""}
    ms = (time.perf_counter() - start) * 1000
    return {"image": name, "scheme": scheme, "capacity_bits": capacity, "t1": rep.t1,
            "t2": rep.t2, "psnr_db": format_psnr(rep.psnr),
            "gray_changed_pixels": rep.gray_changed_pixels, "runtime_ms": f"{ms:.1f}"}


def _workers():
    cap = os.environ.get("GRAYKEEP_THREADS")
    n = os.cpu_count() or 1
    return max(1, min(n, int(cap))) if cap else n


def cmd_bench(args):
    folder = Path(args.images)
    images = sorted(p for p in folder.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not images:
        raise GraykeepError(f"no .png/.ppm images in {folder}")
    jobs = [(str(p), m, c, args.seed) for p in images for m in args.methods for c in args.capacities]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_bench_job, jobs))
    else:
        rows = [_bench_job(j) for j in jobs]
    rows.sort(key=lambda r: (r["image"], r["scheme"], r["capacity_bits"]))
    with _staged(args.csv) as tmp:
        with open(tmp, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
    bad = clamping_violations()
    print(f"wrote {len(rows)} rows to {args.csv}")
    print(f"second-level clamping check: {bad} violations "
          f"({'holds' if bad == 0 else 'BROKEN'})")
    return 0 if bad == 0 else 1


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _method_list(text):
    items = [v.strip().lower() for v in text.split(",") if v.strip()]
    unknown = [v for v in items if v not in SCHEMES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown method(s): {', '.join(unknown)}")
    return items


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graykeep", description="Reversible data hiding that keeps the grayscale intact.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="hide a payload in a cover image")
    p.add_argument("--cover", required=True)
    p.add_argument("--out", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--payload", help="payload file (length-prefixed packed bits)")
    src.add_argument("--random-bits", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t1", type=int)
    p.add_argument("--t2", type=int)
    p.add_argument("--target-bits", type=int, metavar="N")
    p.add_argument("--method", choices=SCHEMES, default="proposed")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover cover and payload from a marked image")
    p.add_argument("--marked", required=True)
    p.add_argument("--out-cover", required=True)
    p.add_argument("--out-payload", required=True)
    p.add_argument("--method", choices=SCHEMES, default="proposed")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("verify", help="check that only row 0 changed its grayscale")
    p.add_argument("--cover", required=True)
    p.add_argument("--marked", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="PSNR sweep over a folder of images, written as CSV")
    p.add_argument("--images", required=True)
    p.add_argument("--capacities", type=_int_list, default=[10000, 50000, 100000, 150000])
    p.add_argument("--methods", type=_method_list, default=list(SCHEMES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "embed":
        if (args.t1 is None) != (args.t2 is None):
            parser.error("--t1 and --t2 go together")
        if args.t1 is not None and args.target_bits is not None:
            parser.error("give either --t1/--t2 or --target-bits, not both")
        if args.random_bits is not None and args.random_bits < 0:
            parser.error("--random-bits must be non-negative")
    try:
        return args.func(args)
    except (GraykeepError, OSError) as exc:
        print(f"graykeep: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
