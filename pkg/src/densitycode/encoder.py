"""Cumulative-inversion encoder producing ordered density codes.

Each quasi-uniform point in (0,1)^2 is mapped to continuous pixel
coordinates by inverting the image's row-marginal CDF along y, blending
the two bracketing pixel rows into a conditional density, and inverting
that row's CDF along x. Bin brackets come from a dichotomic search on the
discrete CDF; the fractional position inside a bin comes from linear
interpolation. Code points inherit the order of the quasi-sequence, which
is what makes two codes comparable point for point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image_io import DensityField
from .quasirandom import QuasiSequence

CODE_FORMAT_TAG = "density-code v1"


@dataclass(frozen=True)
class EncodeParams:
    """Encoding knobs: background lift, mass-proportional length, cap.

    ``alpha`` switches on mass-proportional code length; when absent the
    whole available sequence is used. ``max_points`` caps how much of the
    sequence may be consumed (defaults to its full length).
    """

    lam: float = 1e-4
    alpha: float | None = None
    max_points: int | None = None


@dataclass(frozen=True)
class DensityCode:
    """Ordered m x 2 code-point matrix, columns (x, y) in pixel-side units.

    Coordinates lie in (0, S) with 0 at the image edge; consumers needing
    array indices subtract 0.5 and clamp. Order is semantically significant:
    point j of any two codes built from the same sequence correspond.
    """

    points: np.ndarray
    sx: int
    sy: int
    lam: float
    alpha: float | None
    polarity: str | None
    seq_name: str = "halton"

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]


def code_length(
    foreground_mass: float, alpha: float | None, available: int
) -> int:
    """Number of code points: round(alpha * mass), capped by the sequence.

    Without alpha the full available sequence is used. Rounding is half
    away from zero.
    """
    if available < 1:
        raise ValueError("no sequence points available")
    if foreground_mass <= 0:
        raise ValueError("foreground mass must be > 0")
    if alpha is None:
        return available
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    m = min(available, math.floor(alpha * foreground_mass + 0.5))
    if m < 1:
        raise ValueError("empty code: alpha too small for this image")
    return m


def _invert_cdf(cdf, u: float, size: int) -> tuple[int, float]:
    """Bracket u inside a strictly increasing discrete CDF.

    ``cdf[i]`` is the mass through bin i (0-based); the last entry is 1 and
    an implicit 0 sits before the first bin. The dichotomic search moves the
    lower bound while u >= cdf value, so it terminates in ceil(log2 size)
    steps and lands on the unique bracket with C(inf) <= u < C(inf+1).

    Returns (inf, w); the continuous coordinate is inf + w.
    """
    inf = 0
    sup = size
    while sup - inf > 1:
        mid = (inf + sup) >> 1
        if u >= cdf[mid - 1]:
            inf = mid
        else:
            sup = mid
    c_inf = cdf[inf - 1] if inf > 0 else 0.0
    span = cdf[sup - 1] - c_inf
    # strictly positive cells guarantee a nonzero bracket
    assert span > 0.0, "zero-width CDF bracket"
    return inf, (u - c_inf) / span


def _invert_axes(f, row_cdf, ux: float, uy: float, sy: int, sx: int):
    """One code point from one unit-square point, given the field arrays."""
    iy, wy = _invert_cdf(row_cdf, uy, sy)
    if iy == 0:
        # below the first row's CDF: blend down toward the empty edge
        row = f[0] * wy
    else:
        lo = f[iy - 1]
        row = lo + wy * (f[iy] - lo)
    col_cdf = np.cumsum(row)
    col_cdf /= col_cdf[-1]
    ix, wx = _invert_cdf(col_cdf, ux, sx)
    return ix + wx, iy + wy


def invert_point(field: DensityField, u) -> tuple[float, float]:
    """Map a single point of (0,1)^2 to continuous pixel coordinates (x, y).

    The second coordinate of u drives the row-marginal inversion (image
    rows, y); the first drives the conditional-row inversion (columns, x).
    """
    ux = float(u[0])
    uy = float(u[1])
    if not (0.0 < ux < 1.0 and 0.0 < uy < 1.0):
        raise ValueError("u must lie strictly inside (0,1)^2")
    sy, sx = field.f.shape
    x, y = _invert_axes(field.f, field.row_cdf, ux, uy, sy, sx)
    return float(x), float(y)


def encode(
    field: DensityField, seq: QuasiSequence, params: EncodeParams | None = None
) -> DensityCode:
    """Evaluate the inverse cumulative mapping at each sequence point.

    The row-marginal CDF is reused from the field (computed once); the
    conditional row CDF is rebuilt for every code point. Points are emitted
    in sequence order, so any prefix of the output equals the code of the
    same image at the shorter length, exactly.
    """
    if params is None:
        params = EncodeParams()
    if seq.n != 2:
        raise ValueError("sequence dimension must be 2")
    if params.max_points is not None and params.max_points > len(seq):
        raise ValueError("sequence shorter than requested length")
    available = len(seq) if params.max_points is None else params.max_points
    m = code_length(field.foreground_mass, params.alpha, available)
    u = seq.points
    if not np.all((u[:m] > 0.0) & (u[:m] < 1.0)):
        raise ValueError("sequence points must lie strictly inside (0,1)^2")
    f = field.f
    row_cdf = field.row_cdf
    sy, sx = f.shape
    out = np.empty((m, 2))
    for j in range(m):
        out[j] = _invert_axes(f, row_cdf, u[j, 0], u[j, 1], sy, sx)
    polarity = field.polarity.value if field.polarity is not None else None
    return DensityCode(
        points=out,
        sx=sx,
        sy=sy,
        lam=field.lam,
        alpha=params.alpha,
        polarity=polarity,
        seq_name="halton",
    )


def write_code_csv(code: DensityCode, path) -> None:
    """Write a code file: one header line, then m lines of ``x,y``.

    Floats are formatted with 17 significant digits, enough to round-trip
    doubles exactly.
    """
    alpha_s = "none" if code.alpha is None else f"{code.alpha:.17g}"
    polarity_s = code.polarity if code.polarity is not None else "none"
    lines = [
        f"# {CODE_FORMAT_TAG}, n=2, m={code.m}, Sx={code.sx}, Sy={code.sy}, "
        f"lambda={code.lam:.17g}, alpha={alpha_s}, polarity={polarity_s}, "
        f"seq={code.seq_name}"
    ]
    for x, y in code.points:
        lines.append(f"{x:.17g},{y:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_code_csv(path) -> DensityCode:
    """Parse a code file written by :func:`write_code_csv`.

    Unknown header keys are ignored so the format can grow.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].lstrip().startswith("#"):
        raise ValueError("missing code-file header")
    header = lines[0].lstrip()[1:].strip()
    parts = [p.strip() for p in header.split(",")]
    if parts[0] != CODE_FORMAT_TAG:
        raise ValueError(f"unrecognized code-file format {parts[0]!r}")
    meta: dict[str, str] = {}
    for part in parts[1:]:
        if "=" in part:
            key, value = part.split("=", 1)
            meta[key.strip()] = value.strip()
    if int(meta.get("n", "2")) != 2:
        raise ValueError("only 2-D codes are supported")
    rows = [ln.split(",") for ln in lines[1:]]
    points = np.array([[float(a), float(b)] for a, b in rows])
    if "m" in meta and points.shape[0] != int(meta["m"]):
        raise ValueError("point count does not match header")
    alpha_s = meta.get("alpha", "none")
    polarity_s = meta.get("polarity", "none")
    return DensityCode(
        points=points,
        sx=int(meta.get("Sx", "0")),
        sy=int(meta.get("Sy", "0")),
        lam=float(meta.get("lambda", "nan")),
        alpha=None if alpha_s == "none" else float(alpha_s),
        polarity=None if polarity_s == "none" else polarity_s,
        seq_name=meta.get("seq", "halton"),
    )
