"""Halton quasi-uniform sequences built from radical inverses in prime bases.

Every point depends only on its index and the dimension, never on the
requested length, so sequences are identical across runs and machines and
any prefix of a longer sequence equals the shorter sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def first_primes(n: int) -> list[int]:
    """Return the first n primes (2, 3, 5, ...)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    primes: list[int] = []
    candidate = 2
    while len(primes) < n:
        if all(candidate % p for p in primes):
            primes.append(candidate)
        candidate += 1
    return primes


def radical_inverse(t: int, base: int) -> float:
    """Mirror the base-`base` digits of t across the radix point.

    The reversed digits are assembled as an exact integer ratio and divided
    once, so the result is the correctly rounded double of the true value
    for every t and base.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if base < 2:
        raise ValueError("base must be >= 2")
    reversed_digits = 0
    scale = 1
    i = t
    while i > 0:
        i, digit = divmod(i, base)
        reversed_digits = reversed_digits * base + digit
        scale *= base
    return reversed_digits / scale


@dataclass(frozen=True)
class QuasiSequence:
    """Ordered points in the open unit hypercube, one prime base per axis."""

    points: np.ndarray  # (m, n), every coordinate strictly in (0, 1)
    bases: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def prefix(self, k: int) -> "QuasiSequence":
        """The first k points as a sequence of their own."""
        if not 1 <= k <= len(self):
            raise ValueError("prefix length out of range")
        return QuasiSequence(points=self.points[:k], bases=self.bases)


def halton(m: int, n: int) -> QuasiSequence:
    """First m Halton points in (0,1)^n; point j uses integer index j + 1.

    Index 0 is skipped because its radical inverse is 0, which lies outside
    the open cube. Axis k uses the k-th prime as radix.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    bases = tuple(first_primes(n))
    points = np.empty((m, n))
    for k, base in enumerate(bases):
        col = points[:, k]
        for j in range(m):
            col[j] = radical_inverse(j + 1, base)
    return QuasiSequence(points=points, bases=bases)
