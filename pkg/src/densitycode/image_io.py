"""Grayscale image loading and the normalization / density-field pipeline.

PGM (P2/P5, maxval up to 65535) is parsed natively so pixel values are
bit-exact; PNG is optional and goes through Pillow's luminance conversion.
All arithmetic is double precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

_PNM_WHITESPACE = frozenset(b" \t\n\r\x0b\x0c")


class Polarity(Enum):
    """Which end of the intensity range counts as figure."""

    LIGHT_ON_DARK = "light-on-dark"
    DARK_ON_LIGHT = "dark-on-light"


@dataclass(frozen=True)
class GrayImage:
    """2-D array of finite, nonnegative pixel values, at least 2x2."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.shape[0] < 2 or px.shape[1] < 2:
            raise ValueError("image smaller than 2x2")
        if not np.all(np.isfinite(px)) or np.any(px < 0):
            raise ValueError("pixel values must be finite and >= 0")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class NormalizedImage:
    """Contrast-normalized image with pixels in [0, 1].

    Produced by :func:`normalize`, which guarantees the min is exactly 0 and
    the max exactly 1. ``foreground_mass`` is the plain sum of all values.
    """

    pixels: np.ndarray
    foreground_mass: float
    polarity: Polarity

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class DensityField:
    """Strictly positive discrete probability array over the image grid.

    ``f`` sums to 1 and every cell exceeds 0 thanks to the uniform
    background lift ``c``; ``row_cdf`` holds the cumulative normalized row
    sums (the marginal over image rows), computed once per field.
    """

    f: np.ndarray
    c: float
    lam: float
    row_cdf: np.ndarray
    foreground_mass: float
    polarity: Polarity | None = None

    @property
    def height(self) -> int:
        return self.f.shape[0]

    @property
    def width(self) -> int:
        return self.f.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.f.shape


def _next_token(data: bytes, i: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token at or after offset i.

    Skips '#' comments, which run to end of line. Returns the token and the
    offset one past its final byte.
    """
    n = len(data)
    while i < n:
        ch = data[i]
        if ch in _PNM_WHITESPACE:
            i += 1
        elif ch == 0x23:  # '#'
            while i < n and data[i] not in (0x0A, 0x0D):
                i += 1
        else:
            break
    start = i
    while i < n and data[i] not in _PNM_WHITESPACE and data[i] != 0x23:
        i += 1
    return data[start:i], i


def load_pgm(path) -> GrayImage:
    """Decode a P2 (ASCII) or P5 (binary) PGM file bit-exactly.

    Sample values are kept on the file's native integer scale, stored as
    doubles. maxval up to 65535 is supported; P5 samples are two bytes
    big-endian when maxval > 255, per the Netpbm convention.
    """
    data = Path(path).read_bytes()
    magic, i = _next_token(data, 0)
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"unsupported PNM magic {magic!r} (expected P2 or P5)")
    tokens = []
    for _ in range(3):
        tok, i = _next_token(data, i)
        tokens.append(tok)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ValueError("malformed PGM header") from exc
    if width < 2 or height < 2:
        raise ValueError("image smaller than 2x2")
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval {maxval} out of range [1, 65535]")
    count = width * height
    if magic == b"P2":
        values = np.empty(count, dtype=np.float64)
        j = i
        for k in range(count):
            tok, j = _next_token(data, j)
            if not tok:
                raise ValueError("truncated P2 raster")
            values[k] = int(tok)
        arr = values.reshape(height, width)
    else:
        j = i + 1  # exactly one whitespace byte separates header from raster
        bytes_per = 2 if maxval > 255 else 1
        raster = data[j : j + count * bytes_per]
        if len(raster) < count * bytes_per:
            raise ValueError("truncated P5 raster")
        dtype = ">u2" if bytes_per == 2 else "u1"
        arr = (
            np.frombuffer(raster, dtype=dtype, count=count)
            .astype(np.float64)
            .reshape(height, width)
        )
    if arr.max() > maxval:
        raise ValueError("sample value exceeds declared maxval")
    return GrayImage(pixels=arr)


def load_png(path) -> GrayImage:
    """Decode a PNG as grayscale via Pillow; color inputs use luminance."""
    try:
        from PIL import Image
    except ImportError as exc:
        raise ValueError(
            "PNG support requires pillow (pip install densitycode[png])"
        ) from exc
    with Image.open(path) as im:
        if im.mode not in ("L", "I", "I;16", "I;16B", "I;16L"):
            im = im.convert("L")
        arr = np.asarray(im, dtype=np.float64)
    return GrayImage(pixels=arr)


def load_image(path, fmt: str | None = None) -> GrayImage:
    """Load a grayscale image, sniffing PGM vs PNG from the file's magic.

    ``fmt`` forces "pgm" or "png" regardless of content.
    """
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"unreadable file: {path}")
    if fmt is None:
        with open(path, "rb") as fh:
            head = fh.read(8)
        if head[:2] in (b"P2", b"P5"):
            fmt = "pgm"
        elif head == b"\x89PNG\r\n\x1a\n":
            fmt = "png"
        else:
            raise ValueError(f"unsupported image format in {path}")
    fmt = fmt.lower()
    if fmt == "pgm":
        return load_pgm(path)
    if fmt == "png":
        return load_png(path)
    raise ValueError(f"unsupported format {fmt!r} (expected pgm or png)")


def write_pgm(pixels, path, maxval: int = 255, binary: bool = True) -> None:
    """Write integer-valued samples as P5 (binary) or P2 (ASCII) PGM."""
    arr = np.rint(np.asarray(pixels, dtype=np.float64)).astype(np.int64)
    if arr.ndim != 2:
        raise ValueError("PGM output requires a 2-D array")
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval {maxval} out of range [1, 65535]")
    if arr.min() < 0 or arr.max() > maxval:
        raise ValueError("sample values out of range for maxval")
    height, width = arr.shape
    magic = "P5" if binary else "P2"
    header = f"{magic}\n{width} {height}\n{maxval}\n".encode("ascii")
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        body = arr.astype(dtype).tobytes()
    else:
        body = "\n".join(
            " ".join(str(v) for v in row) for row in arr.tolist()
        ).encode("ascii")
        body += b"\n"
    Path(path).write_bytes(header + body)


def normalize(img: GrayImage, polarity: Polarity) -> NormalizedImage:
    """Rescale pixel values to [0, 1] with the figure mapped toward 1.

    LIGHT_ON_DARK keeps the orientation, DARK_ON_LIGHT flips it. Flat images
    (max == min) are rejected: the rescaling is undefined for them.
    """
    h = img.pixels
    lo = float(h.min())
    hi = float(h.max())
    if hi == lo:
        raise ValueError("degenerate contrast: image is flat (max == min)")
    if polarity is Polarity.LIGHT_ON_DARK:
        g = (h - lo) / (hi - lo)
    elif polarity is Polarity.DARK_ON_LIGHT:
        g = (hi - h) / (hi - lo)
    else:
        raise ValueError(f"unknown polarity {polarity!r}")
    return NormalizedImage(
        pixels=g, foreground_mass=float(g.sum()), polarity=polarity
    )


def make_density_field(nimg: NormalizedImage, lam: float = 1e-4) -> DensityField:
    """Lift the normalized image into a strictly positive probability array.

    Adds the constant c = lam * mass / (width * height) to every cell before
    renormalizing, a faint background lighting that keeps every cumulative
    sum strictly increasing and therefore invertible. The row-marginal CDF
    is computed here, once per field.
    """
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    g = np.asarray(nimg.pixels, dtype=np.float64)
    mass = float(nimg.foreground_mass)
    if mass <= 0:
        raise ValueError("foreground mass must be > 0")
    sy, sx = g.shape
    c = lam * mass / (sx * sy)
    f = g + c
    f = f / f.sum()
    row_cdf = np.cumsum(f.sum(axis=1))
    row_cdf = row_cdf / row_cdf[-1]
    return DensityField(
        f=f,
        c=c,
        lam=lam,
        row_cdf=row_cdf,
        foreground_mass=mass,
        polarity=nimg.polarity,
    )
