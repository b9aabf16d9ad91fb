"""Encoding-time measurement over (height, width, length) grids.

Each grid cell is timed on fresh random images, single-threaded, with one
warm-up run excluded; the median over repetitions resists scheduler noise.
A three-term nonnegative regression summarizes the measurements:

    t(H, W, m) ~ a*HW + b*m*(log2(HW) - 2) + c*mW

covering preprocessing, the per-point dichotomic searches, and the
per-point conditional-row work.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .encoder import EncodeParams, encode
from .image_io import GrayImage, Polarity, make_density_field, normalize
from .quasirandom import halton


@dataclass(frozen=True)
class TimingSample:
    H: int
    W: int
    m: int
    reps: int
    median_ms: float


@dataclass(frozen=True)
class TimingModel:
    a: float
    b: float
    c: float
    r: float
    rmse_ms: float

    def predict(self, H: int, W: int, m: int) -> float:
        r1, r2, r3 = _regressors(H, W, m)
        return self.a * r1 + self.b * r2 + self.c * r3


def _regressors(H: int, W: int, m: int) -> tuple[float, float, float]:
    hw = float(H) * float(W)
    return hw, m * (math.log2(hw) - 2.0), float(m) * float(W)


def run_grid(
    heights,
    widths,
    lengths,
    reps: int,
    seed: int = 0,
    lam: float = 1e-4,
) -> list[TimingSample]:
    """Time the full encode pipeline over the cartesian grid of conditions.

    Every repetition uses a fresh random image; the sequence is generated
    once outside the timed region. Cells run strictly sequentially.
    """
    heights = [int(h) for h in heights]
    widths = [int(w) for w in widths]
    lengths = [int(m) for m in lengths]
    if min(heights) < 16 or min(widths) < 16 or min(lengths) < 16:
        raise ValueError("all grid sizes must be >= 16")
    if reps < 5:
        raise ValueError("reps must be >= 5")
    seq = halton(max(lengths), 2)
    samples: list[TimingSample] = []
    for H in heights:
        for W in widths:
            for m in lengths:
                sub = seq.prefix(m)
                times = []
                for rep in range(reps + 1):
                    rng = np.random.default_rng([seed, H, W, m, rep])
                    img = GrayImage(pixels=rng.uniform(0.0, 255.0, (H, W)))
                    t0 = time.perf_counter()
                    nimg = normalize(img, Polarity.LIGHT_ON_DARK)
                    field = make_density_field(nimg, lam)
                    encode(field, sub, EncodeParams(lam=lam))
                    elapsed_ms = (time.perf_counter() - t0) * 1e3
                    if rep > 0:  # first run is warm-up
                        times.append(elapsed_ms)
                samples.append(
                    TimingSample(
                        H=H, W=W, m=m, reps=reps, median_ms=float(np.median(times))
                    )
                )
    return samples


def fit_model(samples: list[TimingSample]) -> TimingModel:
    """Nonnegative least squares over the three timing regressors."""
    if len(samples) < 10:
        raise ValueError("need at least 10 samples")
    for name in ("H", "W", "m"):
        if len({getattr(s, name) for s in samples}) < 2:
            raise ValueError(f"degenerate design: factor {name} is constant")
    A = np.array([_regressors(s.H, s.W, s.m) for s in samples])
    t = np.array([s.median_ms for s in samples])
    coeffs, _ = nnls(A, t)
    predicted = A @ coeffs
    r = float(np.corrcoef(t, predicted)[0, 1])
    rmse = float(np.sqrt(np.mean((t - predicted) ** 2)))
    return TimingModel(
        a=float(coeffs[0]), b=float(coeffs[1]), c=float(coeffs[2]), r=r, rmse_ms=rmse
    )
