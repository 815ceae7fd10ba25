"""Command-line front end: encode, decode, psnr, rd sweeps and M statistics.

The report commands (``rd``, ``stats``) write CSV and, by default, render a
matching figure next to it (same stem, .png); pass --no-fig to skip the
figure or --fig PATH to place it elsewhere.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import analysis, codec, container
from .pgm import psnr, read_pgm, write_pgm
from .transform import forward_dwt97, inverse_dwt97, to_uint8


def _cmd_encode(args):
    image = read_pgm(args.input)
    data = codec.encode_image(
        image, levels=args.levels, rate_bpp=args.rate, arithmetic=not args.no_ac
    )
    container.write_stream(args.output, data)
    bpp = 8.0 * len(data) / image.size
    print(f"{args.output}: {len(data)} bytes ({bpp:.4f} bpp incl. header)")
    return 0


def _cmd_decode(args):
    with open(args.input, "rb") as f:
        data = f.read()
    image = codec.decode_image(data, rate_bpp=args.rate)
    write_pgm(args.output, image)
    print(f"{args.output}: {image.shape[1]}x{image.shape[0]}")
    return 0


def _cmd_psnr(args):
    value = psnr(read_pgm(args.a), read_pgm(args.b))
    print("inf" if value == float("inf") else f"{value:.4f}")
    return 0


def _fig_path(args):
    if args.no_fig:
        return None
    if args.fig:
        return args.fig
    return str(Path(args.csv).with_suffix(".png"))


def _cmd_rd(args):
    image = read_pgm(args.input)
    rates = sorted(float(r) for r in args.rates.split(","))
    pixels = image.size
    # one stream at the top rate serves every lower rate by truncation
    data = codec.encode_image(
        image, levels=args.levels, rate_bpp=rates[-1],
        arithmetic=not args.no_ac, charge_header=True,
    )
    rows = []
    for rate in rates:
        budget = codec.rate_to_budget(rate, image.shape[1], image.shape[0], charge_header=True)
        rec = codec.decode(data, rate_budget=budget)
        quality = psnr(image, to_uint8(inverse_dwt97(rec)))
        nbytes = container.HEADER_SIZE + min((budget + 7) // 8, len(data) - container.HEADER_SIZE)
        rows.append((rate, quality, nbytes))
    with open(args.csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["rate_bpp", "psnr_db", "bytes"])
        for rate, quality, nbytes in rows:
            writer.writerow([f"{rate:g}", f"{quality:.4f}", nbytes])
    print(f"{args.csv}: {len(rows)} rates")
    fig_path = _fig_path(args)
    if fig_path:
        fig, ax = plt.subplots(figsize=(5.5, 4))
        ax.plot([r[0] for r in rows], [r[1] for r in rows], "o-")
        ax.set_xlabel("rate (bpp)")
        ax.set_ylabel("PSNR (dB)")
        ax.set_title(Path(args.input).name)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(fig_path, dpi=120)
        plt.close(fig)
        print(fig_path)
    return 0


def _cmd_stats(args):
    image = read_pgm(args.input)
    pyramid = forward_dwt97(image.astype(np.float64), args.levels)
    n_max, empty = codec.compute_nmax(pyramid)
    if args.bitplanes:
        planes = [int(p) for p in args.bitplanes.split(",")]
    else:
        mid = n_max // 2
        planes = [p for p in (mid + 1, mid, mid - 1) if 0 <= p <= n_max]
    rows = []
    dists = {}
    for plane in planes:
        hist = analysis.m_histogram(pyramid, plane)
        dists[plane] = analysis.m_distribution(hist)
        for n in range(1, 9):
            for m in range(0, 9):
                if hist[n, m]:
                    rows.append((plane, n, m, int(hist[n, m])))
    with open(args.csv, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["bitplane", "n_available", "m", "count"])
        writer.writerows(rows)
    print(f"{args.csv}: planes {planes}")
    fig_path = _fig_path(args)
    if fig_path:
        fig, ax = plt.subplots(figsize=(5.5, 4))
        width = 0.8 / max(len(planes), 1)
        for i, plane in enumerate(planes):
            ax.bar(
                np.arange(9) + i * width, dists[plane], width=width,
                label=f"bitplane {plane}",
            )
        ax.set_xlabel("M (significant members in a group)")
        ax.set_ylabel("probability")
        ax.set_xticks(np.arange(9) + 0.4 - width / 2, [str(m) for m in range(9)])
        ax.legend()
        fig.tight_layout()
        fig.savefig(fig_path, dpi=120)
        plt.close(fig)
        print(fig_path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="mdwc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a PGM image to .mdw")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--rate", type=float, default=None, help="payload budget in bpp")
    p.add_argument("--no-ac", action="store_true", help="raw bits instead of arithmetic coding")
    p.add_argument("--levels", type=int, default=5)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="decode a .mdw stream to PGM")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--rate", type=float, default=None, help="decode only this many bpp")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("psnr", help="PSNR between two PGM images")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=_cmd_psnr)

    p = sub.add_parser("rd", help="rate-distortion sweep from one embedded stream")
    p.add_argument("input")
    p.add_argument("--rates", default="0.125,0.25,0.5,1,2")
    p.add_argument("--no-ac", action="store_true")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--csv", required=True)
    p.add_argument("--fig", default=None)
    p.add_argument("--no-fig", action="store_true")
    p.set_defaults(func=_cmd_rd)

    p = sub.add_parser("stats", help="group significance-count histogram")
    p.add_argument("input")
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--bitplanes", default=None, help="comma list; default: three middle planes")
    p.add_argument("--csv", required=True)
    p.add_argument("--fig", default=None)
    p.add_argument("--no-fig", action="store_true")
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # CLI boundary: fail with a message, not a trace
        print(f"mdwc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
