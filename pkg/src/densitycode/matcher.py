"""Polynomial-map fitting between density codes and the median dissimilarity.

Two codes built from the same quasi-sequence are compared by fitting the
best degree-d polynomial map from the first onto the second (least squares
over a monomial basis, minimum-norm when rank-deficient) and summarizing
the per-point errors by their median, scaled by the spread of the target
code. Degree 0 skips the fit and compares points directly. The measure is
asymmetric by design: the target code sets the scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np


@dataclass(frozen=True)
class ExponentSet:
    """Ordered exponent n-tuples with component sum <= d."""

    n: int
    d: int
    vectors: tuple[tuple[int, ...], ...]

    @property
    def q(self) -> int:
        return len(self.vectors)


def all_powers(n: int, d: int) -> ExponentSet:
    """Enumerate exponent n-tuples of total degree 0 through d.

    Within each total degree k the leading coordinate ascends, recursively,
    so for n = 2 the order is (0,0), (0,1), (1,0), (0,2), (1,1), (2,0), ...
    The count is C(n+d, d). A degree-d set is always a prefix of the
    degree-(d+1) set, which makes higher-degree bases supersets of lower.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 0:
        raise ValueError("d must be >= 0")
    vectors: list[tuple[int, ...]] = []

    def build(prefix: tuple[int, ...], remaining: int) -> None:
        if len(prefix) == n - 1:
            vectors.append(prefix + (remaining,))
            return
        for p in range(remaining + 1):
            build(prefix + (p,), remaining - p)

    for k in range(d + 1):
        build((), k)
    assert len(vectors) == comb(n + d, d)
    return ExponentSet(n=n, d=d, vectors=tuple(vectors))


def _as_points(code) -> np.ndarray:
    """Accept a DensityCode or a plain (m, n) array."""
    pts = getattr(code, "points", code)
    return np.asarray(pts, dtype=np.float64)


def basis_matrix(code, exps: ExponentSet) -> np.ndarray:
    """Monomial design matrix: entry (j, t) = prod_i points[j,i] ** exps[t][i].

    Exponent component i applies to code coordinate i, with coordinates
    ordered (x, y). The all-zeros tuple yields a column of ones.
    """
    pts = _as_points(code)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("code must be a nonempty (m, n) matrix")
    if pts.shape[1] != exps.n:
        raise ValueError("exponent dimension does not match code dimension")
    B = np.ones((pts.shape[0], exps.q))
    for t, vec in enumerate(exps.vectors):
        col = B[:, t]
        for i, power in enumerate(vec):
            if power:
                col *= pts[:, i] ** power
    return B


@dataclass(frozen=True)
class TransformFit:
    """Least-squares polynomial-map coefficients, one column per output axis."""

    coefficients: np.ndarray  # (q, n)
    degree: int | None
    m: int
    q: int


def least_squares_fit(B, W, degree: int | None = None) -> TransformFit:
    """Minimum-norm least-squares solution T of B @ T ~ W.

    Solved by SVD with rank tolerance max(m, q) * eps relative to the
    largest singular value, so rank-deficient bases still give the
    minimum-norm coefficients. Underdetermined systems (m < q) are
    rejected: they would interpolate noise instead of fitting.
    """
    B = np.asarray(B, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if B.ndim != 2 or W.ndim != 2 or B.shape[0] != W.shape[0]:
        raise ValueError("B and W must be 2-D with matching row counts")
    m, q = B.shape
    if m < q:
        if degree is not None:
            raise ValueError(
                f"code too short for degree {degree}: m={m} < q={q}"
            )
        raise ValueError(f"underdetermined fit: m={m} < q={q}")
    rcond = max(m, q) * np.finfo(np.float64).eps
    T, _, _, _ = np.linalg.lstsq(B, W, rcond=rcond)
    return TransformFit(coefficients=T, degree=degree, m=m, q=q)


@dataclass(frozen=True)
class DissimilarityReport:
    """The dissimilarity plus its per-point diagnostics.

    delta = 100 * median(residuals) / target_scale, where target_scale is
    the median distance of the target code's points to their centroid.
    """

    delta: float
    residuals: np.ndarray
    target_scale: float
    m_used: int
    degree: int
    transform: TransformFit | None = None


def delta_median(V, W, d: int) -> DissimilarityReport:
    """Median-based dissimilarity of code V against target code W.

    Codes of different length are compared on their common prefix (the
    shorter length), since prefixes of codes from the same sequence
    correspond point for point. With d = 0 the residuals are the direct
    per-point Euclidean distances; with d >= 1 they are the errors of the
    fitted degree-d polynomial map applied to V. The median of an even
    count is the mean of the two central order statistics.
    """
    v = _as_points(V)
    w = _as_points(W)
    if v.ndim != 2 or w.ndim != 2 or v.shape[1] != 2 or w.shape[1] != 2:
        raise ValueError("codes must be (m, 2) matrices")
    if v.shape[0] == 0 or w.shape[0] == 0:
        raise ValueError("codes must be nonempty")
    if d < 0:
        raise ValueError("degree must be >= 0")
    m = min(v.shape[0], w.shape[0])
    v = v[:m]
    w = w[:m]
    fit: TransformFit | None = None
    if d == 0:
        residuals = np.sqrt(((v - w) ** 2).sum(axis=1))
    else:
        exps = all_powers(2, d)
        B = basis_matrix(v, exps)
        fit = least_squares_fit(B, w, degree=d)
        residuals = np.sqrt(((B @ fit.coefficients - w) ** 2).sum(axis=1))
    centre = w.mean(axis=0)
    target_scale = float(np.median(np.sqrt(((w - centre) ** 2).sum(axis=1))))
    if target_scale == 0.0:
        raise ValueError("degenerate target scale: target points coincide")
    delta = 100.0 * float(np.median(residuals)) / target_scale
    return DissimilarityReport(
        delta=delta,
        residuals=residuals,
        target_scale=target_scale,
        m_used=m,
        degree=d,
        transform=fit,
    )
