"""Synthetic test corpus: plant-like figures and gentle polynomial warps.

Figures are deterministic branching skeletons rasterized with soft strokes
and Gaussian-blurred, light on dark. Each figure gets a companion produced
by a cubic "wind" warp whose Jacobian is lower-triangular with positive
diagonal over the whole image rectangle, so a pair is related by a map the
degree-3 dissimilarity can absorb.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .image_io import GrayImage, Polarity, normalize, write_pgm
from .matcher import all_powers

_CUBIC = all_powers(2, 3)
_MONO_INDEX = {vec: t for t, vec in enumerate(_CUBIC.vectors)}

# minimum normalized foreground mass, as a fraction of the pixel count
_MASS_FLOOR_FRACTION = 0.02


@dataclass(frozen=True)
class CorpusSpec:
    """Parameters of one generated corpus."""

    pair_count: int = 6
    size: int = 128
    seed: int = 42
    warp_degree: int = 3
    blur_radius: float | None = None

    def __post_init__(self):
        if self.pair_count < 2:
            raise ValueError("pair_count must be >= 2")
        if self.size < 64:
            raise ValueError("size must be >= 64")
        if self.warp_degree != 3:
            raise ValueError("only cubic warps are supported")


def _grow_skeleton(rng: np.random.Generator, size: int) -> list[tuple]:
    """Recursive trunk-and-branch segments as (x0, y0, x1, y1, width)."""
    segments: list[tuple] = []

    def grow(x, y, angle, length, width, depth):
        x2 = x + length * math.cos(angle)
        y2 = y + length * math.sin(angle)
        segments.append((x, y, x2, y2, width))
        if depth == 0 or length < 2.0:
            return
        n_children = 2 + (rng.random() < 0.45)
        side = 1.0 if rng.random() < 0.5 else -1.0
        for _ in range(n_children):
            spread = side * rng.uniform(0.25, 0.8) + rng.normal(0.0, 0.15)
            side = -side
            grow(
                x2,
                y2,
                angle + spread,
                length * rng.uniform(0.58, 0.78),
                width * 0.72,
                depth - 1,
            )

    trunk_x = size * rng.uniform(0.42, 0.58)
    grow(
        trunk_x,
        size * 0.92,
        -math.pi / 2 + rng.normal(0.0, 0.12),
        size * rng.uniform(0.2, 0.28),
        size / 34.0,
        5,
    )
    return segments


def _render_segments(segments, size: int, width_scale: float) -> np.ndarray:
    """Rasterize soft strokes into a float canvas via distance to segment."""
    canvas = np.zeros((size, size))
    for x0, y0, x1, y1, width in segments:
        hw = 0.5 * width * width_scale
        pad = hw + 1.5
        c0 = max(int(math.floor(min(x0, x1) - pad)), 0)
        c1 = min(int(math.ceil(max(x0, x1) + pad)), size - 1)
        r0 = max(int(math.floor(min(y0, y1) - pad)), 0)
        r1 = min(int(math.ceil(max(y0, y1) + pad)), size - 1)
        if c1 < c0 or r1 < r0:
            continue
        px = np.arange(c0, c1 + 1) + 0.5
        py = (np.arange(r0, r1 + 1) + 0.5)[:, None]
        dx = x1 - x0
        dy = y1 - y0
        seg_len_sq = dx * dx + dy * dy
        if seg_len_sq == 0.0:
            dist = np.hypot(px - x0, py - y0)
        else:
            t = np.clip(((px - x0) * dx + (py - y0) * dy) / seg_len_sq, 0.0, 1.0)
            dist = np.hypot(px - (x0 + t * dx), py - (y0 + t * dy))
        value = np.clip(hw + 0.5 - dist, 0.0, 1.0)
        region = canvas[r0 : r1 + 1, c0 : c1 + 1]
        np.maximum(region, value, out=region)
    return canvas


def generate_figure(seed, size: int, blur_radius: float | None = None) -> GrayImage:
    """Deterministic blurred branching figure, light on dark.

    Stroke width is grown until the normalized foreground mass clears 2% of
    the pixel count, so every figure carries enough mass to encode at small
    length factors.
    """
    if size < 64:
        raise ValueError("size must be >= 64")
    if blur_radius is None:
        blur_radius = size / 64.0
    rng = np.random.default_rng(seed)
    segments = _grow_skeleton(rng, size)
    floor = _MASS_FLOOR_FRACTION * size * size
    width_scale = 1.0
    canvas = None
    for _ in range(10):
        canvas = _render_segments(segments, size, width_scale)
        canvas = gaussian_filter(canvas, sigma=blur_radius, mode="constant")
        peak = float(canvas.max())
        if peak > 0.0 and float(canvas.sum()) / peak > floor:
            break
        width_scale *= 1.3
    else:
        raise RuntimeError("figure generator failed to reach the mass floor")
    return GrayImage(pixels=canvas * (255.0 / peak))


def _eval_poly(col, x, y):
    """Evaluate one cubic-coefficient column at arrays x, y."""
    out = np.zeros(np.broadcast(x, y).shape)
    for (a, b), coeff in zip(_CUBIC.vectors, col):
        if coeff == 0.0:
            continue
        term = coeff
        if a:
            term = term * x**a
        if b:
            term = term * y**b
        out += term
    return out


def _partial_poly(col, wrt: int):
    """Coefficient column of the partial derivative along axis wrt (0=x, 1=y)."""
    dcol = np.zeros_like(col)
    for (a, b), coeff in zip(_CUBIC.vectors, col):
        if coeff == 0.0:
            continue
        vec = (a, b)
        if vec[wrt] == 0:
            continue
        reduced = (a - 1, b) if wrt == 0 else (a, b - 1)
        dcol[_MONO_INDEX[reduced]] += coeff * vec[wrt]
    return dcol


def check_warp_family(coeffs, sx: int, sy: int) -> None:
    """Sampled 17x17 check that the map has a valid triangular Jacobian.

    Requires the y output to be independent of x and both diagonal partial
    derivatives strictly positive over the image rectangle.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (_CUBIC.q, 2):
        raise ValueError(f"coefficients must be ({_CUBIC.q}, 2)")
    xs = np.linspace(0.0, sx, 17)
    ys = np.linspace(0.0, sy, 17)
    X, Y = np.meshgrid(xs, ys)
    dyx = _eval_poly(_partial_poly(coeffs[:, 1], 0), X, Y)
    dxx = _eval_poly(_partial_poly(coeffs[:, 0], 0), X, Y)
    dyy = _eval_poly(_partial_poly(coeffs[:, 1], 1), X, Y)
    tol = 1e-9 * max(sx, sy)
    if np.max(np.abs(dyx)) > tol:
        raise ValueError("not in transformation family: y output depends on x")
    if np.min(dxx) <= 0.0 or np.min(dyy) <= 0.0:
        raise ValueError(
            "not in transformation family: Jacobian diagonal not positive"
        )


def identity_warp() -> np.ndarray:
    """Coefficients of the identity map over the cubic basis."""
    coeffs = np.zeros((_CUBIC.q, 2))
    coeffs[_MONO_INDEX[(1, 0)], 0] = 1.0
    coeffs[_MONO_INDEX[(0, 1)], 1] = 1.0
    return coeffs


def wind_warp_coefficients(
    rng: np.random.Generator, size: int, strength: float = 0.07
) -> np.ndarray:
    """Random gentle sway: x shifts by a cubic in y, y bends mildly.

    The peak x displacement over the rectangle is rescaled into
    [strength/2, strength] * size so warps are visible but never extreme.
    """
    s = float(size)
    coeffs = identity_warp()
    sway = rng.uniform(-1.0, 1.0, size=3)  # coefficients of p(y/s), no constant
    ys = np.linspace(0.0, 1.0, 65)
    peak = float(np.max(np.abs(sway[0] * ys + sway[1] * ys**2 + sway[2] * ys**3)))
    if peak == 0.0:
        sway = np.array([1.0, 0.0, 0.0])
        peak = 1.0
    target = rng.uniform(0.5 * strength, strength)
    sway *= target / peak
    coeffs[_MONO_INDEX[(0, 1)], 0] = sway[0]
    coeffs[_MONO_INDEX[(0, 2)], 0] = sway[1] / s
    coeffs[_MONO_INDEX[(0, 3)], 0] = sway[2] / s**2
    bend = rng.uniform(-0.04, 0.04, size=2)
    coeffs[_MONO_INDEX[(0, 2)], 1] = bend[0] / s
    coeffs[_MONO_INDEX[(0, 3)], 1] = bend[1] / s**2
    return coeffs


def _invert_monotone(fn, dfn, targets, lo: float, hi: float):
    """Solve fn(x) = t for strictly increasing fn on [lo, hi], vectorized.

    Bisection localizes the root, a few Newton steps polish it to machine
    precision. Targets outside [fn(lo), fn(hi)] come back NaN.
    """
    t = np.asarray(targets, dtype=np.float64)
    flo = float(fn(np.array([lo]))[0])
    fhi = float(fn(np.array([hi]))[0])
    outside = (t < flo) | (t > fhi)
    a = np.full(t.shape, lo)
    b = np.full(t.shape, hi)
    for _ in range(52):
        mid = 0.5 * (a + b)
        go_right = fn(mid) < t
        a = np.where(go_right, mid, a)
        b = np.where(go_right, b, mid)
    x = 0.5 * (a + b)
    for _ in range(3):
        d = dfn(x)
        x = x - (fn(x) - t) / np.where(d > 0.0, d, 1.0)
    x = np.clip(x, lo, hi)
    x[outside] = np.nan
    return x


def _bilinear(px: np.ndarray, x, y, fill: float):
    """Sample the image at geometric coordinates with edge replication.

    Pixel (r, c) has its center at (c + 0.5, r + 0.5). Samples outside the
    rectangle, or at NaN coordinates, return the fill value.
    """
    sy, sx = px.shape
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        ok = (
            np.isfinite(x)
            & np.isfinite(y)
            & (x >= 0.0)
            & (x <= sx)
            & (y >= 0.0)
            & (y <= sy)
        )
    xc = np.clip(np.nan_to_num(x) - 0.5, 0.0, sx - 1.0)
    yc = np.clip(np.nan_to_num(y) - 0.5, 0.0, sy - 1.0)
    j0 = np.minimum(np.floor(xc).astype(np.intp), sx - 2)
    i0 = np.minimum(np.floor(yc).astype(np.intp), sy - 2)
    fx = xc - j0
    fy = yc - i0
    top = (1.0 - fx) * px[i0, j0] + fx * px[i0, j0 + 1]
    bottom = (1.0 - fx) * px[i0 + 1, j0] + fx * px[i0 + 1, j0 + 1]
    value = (1.0 - fy) * top + fy * bottom
    return np.where(ok, value, fill)


def warp_image(img: GrayImage, coeffs) -> GrayImage:
    """Apply a forward cubic map by inverse-mapping every output pixel.

    The y component depends only on y (enforced by the family check), so
    the source y is constant along each output row; the source x is then
    found per row by inverting the x component at that y. Bilinear sampling
    with the image minimum as background fill completes the resampling.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    px = img.pixels
    sy, sx = px.shape
    check_warp_family(coeffs, sx, sy)
    fill = float(px.min())
    row_targets = np.arange(sy) + 0.5
    col_targets = np.arange(sx) + 0.5

    ycol = coeffs[:, 1]
    dycol = _partial_poly(ycol, 1)
    y_src = _invert_monotone(
        lambda y: _eval_poly(ycol, np.zeros_like(y), y),
        lambda y: _eval_poly(dycol, np.zeros_like(y), y),
        row_targets,
        0.0,
        float(sy),
    )

    xcol = coeffs[:, 0]
    dxcol = _partial_poly(xcol, 0)
    out = np.full((sy, sx), fill)
    for r in range(sy):
        y0 = y_src[r]
        if not np.isfinite(y0):
            continue
        x_src = _invert_monotone(
            lambda x: _eval_poly(xcol, x, np.full_like(x, y0)),
            lambda x: _eval_poly(dxcol, x, np.full_like(x, y0)),
            col_targets,
            0.0,
            float(sx),
        )
        out[r] = _bilinear(px, x_src, np.full(sx, y0), fill)
    return GrayImage(pixels=np.maximum(out, 0.0))


def generate_corpus(out_dir, spec: CorpusSpec | None = None) -> list[dict]:
    """Write pair<k>_A.pgm / pair<k>_B.pgm and a manifest.csv.

    Returns the manifest rows. Generation is fully reproducible from the
    spec: figure and warp randomness derive from (spec.seed, pair index).
    """
    if spec is None:
        spec = CorpusSpec()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    coeff_names = [f"{axis}_{a}{b}" for axis in ("x", "y") for a, b in _CUBIC.vectors]
    rows: list[dict] = []
    for k in range(spec.pair_count):
        figure = generate_figure([spec.seed, k], spec.size, spec.blur_radius)
        warp_rng = np.random.default_rng([spec.seed, k, 1])
        coeffs = wind_warp_coefficients(warp_rng, spec.size)
        warped = warp_image(figure, coeffs)
        file_a = f"pair{k}_A.pgm"
        file_b = f"pair{k}_B.pgm"
        for image, name in ((figure, file_a), (warped, file_b)):
            arr = image.pixels
            scaled = np.rint(arr / arr.max() * 65535.0)
            write_pgm(scaled, out_dir / name, maxval=65535, binary=True)
        row = {
            "pair": k,
            "seed": spec.seed,
            "size": spec.size,
            "file_a": file_a,
            "file_b": file_b,
        }
        flat = np.concatenate([coeffs[:, 0], coeffs[:, 1]])
        for name, value in zip(coeff_names, flat):
            row[name] = f"{value:.17g}"
        rows.append(row)
    with open(out_dir / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    return rows


def figure_mass(img: GrayImage) -> float:
    """Normalized foreground mass of a light-on-dark figure."""
    return normalize(img, Polarity.LIGHT_ON_DARK).foreground_mass
