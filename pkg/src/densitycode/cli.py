"""Command-line interface: encode, compare, sweep, bench, gen-corpus.

Numeric output uses 17 significant digits so diffs catch real changes.
Configuration precedence: flags > environment (DC_LAMBDA, DC_SEED) >
built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from .corpus import CorpusSpec, generate_corpus
from .encoder import (
    EncodeParams,
    code_length,
    encode,
    read_code_csv,
    write_code_csv,
)
from .image_io import Polarity, load_image, make_density_field, normalize
from .matcher import all_powers, delta_median
from .quasirandom import halton

DEFAULT_LAMBDA = 1e-4
DEFAULT_SEED = 42
DEFAULT_GRID = "16,32,64,128,256,512"
DEFAULT_LENGTHS = "16,32,64,128,256,512,1024"


def _env_lambda() -> float:
    return float(os.environ.get("DC_LAMBDA", DEFAULT_LAMBDA))


def _env_seed() -> int:
    return int(os.environ.get("DC_SEED", DEFAULT_SEED))


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def cmd_encode(args) -> int:
    lam = args.lam if args.lam is not None else _env_lambda()
    img = load_image(args.image, args.format)
    polarity = Polarity(args.polarity)
    t0 = time.perf_counter()
    nimg = normalize(img, polarity)
    field = make_density_field(nimg, lam)
    seq = halton(args.points, 2)
    code = encode(field, seq, EncodeParams(lam=lam, alpha=args.alpha))
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    write_code_csv(code, args.out)
    print(f"m={code.m} elapsed_ms={elapsed_ms:.17g}")
    return 0


def cmd_compare(args) -> int:
    code_v = read_code_csv(args.code_v)
    code_w = read_code_csv(args.code_w)
    report = delta_median(code_v, code_w, args.degree)
    print(f"delta={report.delta:.17g}")
    if args.residuals:
        lines = ["index,residual"]
        for idx, value in enumerate(report.residuals):
            lines.append(f"{idx},{value:.17g}")
        Path(args.residuals).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _load_corpus(corpus_dir: Path, polarity: Polarity, lam: float):
    """Fields and pair labels for every image listed in the manifest."""
    manifest = corpus_dir / "manifest.csv"
    if not manifest.is_file():
        raise ValueError(f"corpus incomplete: missing {manifest}")
    entries = []  # (pair id, field)
    with open(manifest, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            pair = int(row["pair"])
            for key in ("file_a", "file_b"):
                path = corpus_dir / row[key]
                if not path.is_file():
                    raise ValueError(f"corpus incomplete: missing {path}")
                nimg = normalize(load_image(path), polarity)
                entries.append((pair, make_density_field(nimg, lam)))
    if len(entries) < 4:
        raise ValueError("corpus incomplete: need at least two pairs")
    return entries


def cmd_sweep(args) -> int:
    lam = args.lam if args.lam is not None else _env_lambda()
    corpus_dir = Path(args.corpus)
    entries = _load_corpus(corpus_dir, Polarity(args.polarity), lam)
    masses = [field.foreground_mass for _, field in entries]
    n_alphas = _round_half_up((args.alpha_max - args.alpha_min) / args.alpha_step) + 1
    alphas = [args.alpha_min + i * args.alpha_step for i in range(n_alphas)]
    seq_len = args.points
    if seq_len is None:
        seq_len = max(
            code_length(mass, args.alpha_max, 10**9) for mass in masses
        )
    seq = halton(seq_len, 2)
    # encode once at the largest requested length; shorter alphas reuse
    # prefixes, which are bit-identical to re-encoding at that alpha
    full_codes = [
        encode(field, seq, EncodeParams(lam=lam, alpha=args.alpha_max)).points
        for _, field in entries
    ]
    q = all_powers(2, args.degree).q if args.degree >= 1 else 1
    rows = []
    for alpha in alphas:
        lengths = [
            min(code_length(mass, alpha, seq_len), pts.shape[0])
            for mass, pts in zip(masses, full_codes)
        ]
        if args.degree >= 1 and min(lengths) < q:
            rows.append((alpha, None, None, None, None, "invalid"))
            continue
        related = []
        unrelated = []
        for i, (pair_i, _) in enumerate(entries):
            for j, (pair_j, _) in enumerate(entries):
                if i == j:
                    continue
                delta = delta_median(
                    full_codes[i][: lengths[i]],
                    full_codes[j][: lengths[j]],
                    args.degree,
                ).delta
                (related if pair_i == pair_j else unrelated).append(delta)
        rows.append(
            (
                alpha,
                min(related),
                max(related),
                min(unrelated),
                max(unrelated),
                "ok",
            )
        )
    lines = ["alpha,related_min,related_max,unrelated_min,unrelated_max,status"]
    for alpha, rel_min, rel_max, unrel_min, unrel_max, status in rows:
        if status == "invalid":
            lines.append(f"{alpha:.17g},,,,,invalid")
        else:
            lines.append(
                f"{alpha:.17g},{rel_min:.17g},{rel_max:.17g},"
                f"{unrel_min:.17g},{unrel_max:.17g},ok"
            )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"alphas={len(rows)} out={args.out}")
    return 0


def cmd_bench(args) -> int:
    if args.mode == "fit":
        if not args.infile:
            raise ValueError("bench fit requires --in")
        samples = []
        with open(args.infile, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                samples.append(
                    bench_mod.TimingSample(
                        H=int(row["H"]),
                        W=int(row["W"]),
                        m=int(row["m"]),
                        reps=int(row["reps"]),
                        median_ms=float(row["median_ms"]),
                    )
                )
        model = bench_mod.fit_model(samples)
        print(
            f"a={model.a:.17g} b={model.b:.17g} c={model.c:.17g} "
            f"r={model.r:.17g} rmse_ms={model.rmse_ms:.17g}"
        )
        return 0
    if not args.out:
        raise ValueError("bench requires --out")
    seed = args.seed if args.seed is not None else _env_seed()
    lam = args.lam if args.lam is not None else _env_lambda()
    samples = bench_mod.run_grid(
        _int_list(args.heights),
        _int_list(args.widths),
        _int_list(args.lengths),
        reps=args.reps,
        seed=seed,
        lam=lam,
    )
    lines = ["H,W,m,reps,median_ms"]
    for s in samples:
        lines.append(f"{s.H},{s.W},{s.m},{s.reps},{s.median_ms:.17g}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"samples={len(samples)} out={args.out}")
    return 0


def cmd_gen_corpus(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed()
    spec = CorpusSpec(
        pair_count=args.pairs,
        size=args.size,
        seed=seed,
        blur_radius=args.blur,
    )
    rows = generate_corpus(args.out, spec)
    print(f"pairs={len(rows)} out={args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="density-code",
        description="Encode grayscale images as ordered density codes and "
        "compare them with a transformation-invariant dissimilarity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode an image into a code file")
    p.add_argument("--image", required=True, help="input PGM or PNG")
    p.add_argument(
        "--polarity",
        required=True,
        choices=[pol.value for pol in Polarity],
        help="which intensity extreme is the figure",
    )
    p.add_argument("--points", type=int, default=1025, help="sequence length")
    p.add_argument(
        "--alpha",
        type=float,
        default=None,
        help="mass-proportional code length factor (default: fixed length)",
    )
    p.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=None,
        help="background lift constant (default 0.0001)",
    )
    p.add_argument("--format", choices=["pgm", "png"], default=None)
    p.add_argument("--out", required=True, help="output code CSV")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("compare", help="dissimilarity between two code files")
    p.add_argument("code_v", help="source code file")
    p.add_argument("code_w", help="target code file (sets the scale)")
    p.add_argument(
        "--degree",
        type=int,
        required=True,
        help="polynomial degree of the transformation family (0 = direct)",
    )
    p.add_argument(
        "--residuals", default=None, help="optional per-point residual CSV"
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser(
        "sweep", help="length-factor sweep over a corpus, related vs unrelated"
    )
    p.add_argument("--corpus", required=True, help="directory with manifest.csv")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--alpha-min", dest="alpha_min", type=float, default=0.01)
    p.add_argument("--alpha-max", dest="alpha_max", type=float, default=0.5)
    p.add_argument("--alpha-step", dest="alpha_step", type=float, default=0.01)
    p.add_argument(
        "--polarity",
        choices=[pol.value for pol in Polarity],
        default=Polarity.LIGHT_ON_DARK.value,
    )
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument(
        "--points",
        type=int,
        default=None,
        help="sequence length (default: longest code the sweep needs)",
    )
    p.add_argument("--out", required=True, help="output CSV of boundary curves")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="time encoding and fit the timing model")
    p.add_argument(
        "mode",
        nargs="?",
        choices=["run", "fit"],
        default="run",
        help="'run' measures a grid, 'fit' regresses a measurement CSV",
    )
    p.add_argument("--out", default=None, help="timing CSV (run mode)")
    p.add_argument("--in", dest="infile", default=None, help="timing CSV (fit mode)")
    p.add_argument("--heights", default=DEFAULT_GRID)
    p.add_argument("--widths", default=DEFAULT_GRID)
    p.add_argument("--lengths", default=DEFAULT_LENGTHS)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-corpus", help="generate the synthetic test corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--pairs", type=int, default=6)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--blur", type=float, default=None)
    p.set_defaults(func=cmd_gen_corpus)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
