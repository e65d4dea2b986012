"""Shapes of rank-2 lattices: Gauss reduction into the right half of the SL2(Z)
fundamental domain, the Haar reference law, and x-binning.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

CONDITION_LIMIT = 1e-12
Y0 = math.sqrt(3) / 2  # lowest point of the fundamental domain


class NotPositiveDefiniteError(ValueError):
    pass


class ConditioningError(ArithmeticError):
    """Gram determinant too small relative to the diagonal to trust in double precision."""


class GramParseError(ValueError):
    """One or more CSV rows failed to parse or validate; ``errors`` lists (line, message)."""

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        lines = "; ".join(f"line {n}: {msg}" for n, msg in errors[:10])
        more = f" (+{len(errors) - 10} more)" if len(errors) > 10 else ""
        super().__init__(f"{len(errors)} bad rows: {lines}{more}")


@dataclass(frozen=True)
class GramMatrix:
    g11: float
    g12: float
    g22: float

    @property
    def det(self) -> float:
        return self.g11 * self.g22 - self.g12 * self.g12

    def validate(self) -> None:
        if not (self.g11 > 0 and self.g22 > 0 and self.det > 0):
            raise NotPositiveDefiniteError(f"Gram matrix {self} is not positive definite")

    def transform(self, a: int, b: int, c: int, d: int) -> "GramMatrix":
        """Gram matrix of the basis (aP + bQ, cP + dQ)."""
        g11 = a * a * self.g11 + 2 * a * b * self.g12 + b * b * self.g22
        g12 = a * c * self.g11 + (a * d + b * c) * self.g12 + b * d * self.g22
        g22 = c * c * self.g11 + 2 * c * d * self.g12 + d * d * self.g22
        return GramMatrix(g11, g12, g22)


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def reduce(gram: GramMatrix) -> UpperHalfPoint:
    """Reduced shape point z = x + iy with 0 <= x <= 1/2 and |z| >= 1.

    Gauss reduction: translate Q by multiples of P until |x| <= 1/2, swap when
    Q becomes shorter, and finally choose the sign of Q so that x >= 0.
    """
    gram.validate()
    a, b, c = float(gram.g11), float(gram.g12), float(gram.g22)
    det = a * c - b * b
    if det / (a * c) < CONDITION_LIMIT:
        raise ConditioningError(f"det/(g11 g22) = {det / (a * c):.3e} below {CONDITION_LIMIT}")
    if c < a:
        a, b, c = c, -b, a
    for _ in range(10_000):
        m = math.floor(b / a + 0.5)
        b, c = b - m * a, c - 2 * m * b + m * m * a
        if c < a:
            a, b, c = c, -b, a
        else:
            break
    # ties: |x| = 1/2 or |z| = 1 land on the closure of the right half
    x = min(abs(b) / a, 0.5)
    y = math.sqrt(det) / a
    return UpperHalfPoint(x, y)


def reduce_many(g11: np.ndarray, g12: np.ndarray, g22: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised reduction through the compiled kernel; invalid rows get y = -1."""
    g11 = np.ascontiguousarray(g11, dtype=np.float64)
    g12 = np.ascontiguousarray(g12, dtype=np.float64)
    g22 = np.ascontiguousarray(g22, dtype=np.float64)
    out_x = np.empty_like(g11)
    out_y = np.empty_like(g11)
    failures = kernels.reduce_batch(g11, g12, g22, out_x, out_y, 10_000)
    if failures:
        log.warning("%d Gram matrices were not positive definite", failures)
    return out_x, out_y


def reduce_brute_force(gram: GramMatrix, box: int | None = None) -> UpperHalfPoint:
    """Oracle: shortest vector and shortest complementary vector over a coefficient box.

    By Cramer's rule a vector of squared length at most max(g11, g22) has
    coefficients at most max(g11, g22) / sqrt(det), which is the default box.
    """
    gram.validate()
    if box is None:
        box = math.ceil(max(gram.g11, gram.g22) / math.sqrt(gram.det)) + 1
        if box > 300:
            raise ConditioningError(f"brute-force box {box} too large")
    vecs = [(i, j) for i in range(-box, box + 1) for j in range(-box, box + 1) if (i, j) != (0, 0)]

    def norm(v):
        i, j = v
        return i * i * gram.g11 + 2 * i * j * gram.g12 + j * j * gram.g22

    P = min(vecs, key=norm)
    partners = [w for w in vecs if abs(P[0] * w[1] - P[1] * w[0]) == 1]
    Q = min(partners, key=norm)
    a = norm(P)
    b = P[0] * Q[0] * gram.g11 + (P[0] * Q[1] + P[1] * Q[0]) * gram.g12 + P[1] * Q[1] * gram.g22
    return UpperHalfPoint(min(abs(b) / a, 0.5), math.sqrt(gram.det) / a)


# ---------------------------------------------------------------- Haar reference


def haar_fraction_y_at_least(Y: float) -> float:
    """Haar mass of {y >= Y} in the half domain, normalised by its total pi/6: 3/(pi Y)."""
    if Y < 1:
        raise ValueError("Y must be >= 1 (below 1 the region meets the unit circle)")
    return 3 / (math.pi * Y)


def sample_haar_array(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """n points of the half fundamental domain distributed as dx dy / y^2.

    Proposals: x uniform on [0, 1/2], y = Y0/U (density ~ 1/y^2 on y >= Y0),
    accepted when x^2 + y^2 >= 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    xs, ys = [], []
    have = 0
    while have < n:
        m = int((n - have) * 1.1) + 16
        x = 0.5 * rng.random(m)
        y = Y0 / (1.0 - rng.random(m))  # 1 - U lies in (0, 1]
        keep = x * x + y * y >= 1.0
        xs.append(x[keep])
        ys.append(y[keep])
        have += int(keep.sum())
    return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def sample_haar(n: int, seed: int) -> list[UpperHalfPoint]:
    x, y = sample_haar_array(n, seed)
    return [UpperHalfPoint(float(a), float(b)) for a, b in zip(x, y)]


# ---------------------------------------------------------------- binning


@dataclass(frozen=True)
class BinTable:
    edges: tuple[float, ...]
    counts: tuple[int, ...]
    total: int

    @property
    def fractions(self) -> tuple[float, ...]:
        return tuple(c / self.total for c in self.counts)

    def rows(self) -> list[dict]:
        return [{"lo": self.edges[i], "hi": self.edges[i + 1], "count": self.counts[i],
                 "fraction": self.counts[i] / self.total} for i in range(len(self.counts))]


def _xy(points) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, tuple) and len(points) == 2 and isinstance(points[0], np.ndarray):
        return points
    pts = list(points)
    return (np.array([p.x for p in pts], dtype=float), np.array([p.y for p in pts], dtype=float))


def bin_x(points: Sequence[UpperHalfPoint] | tuple[np.ndarray, np.ndarray], bins: int = 10,
          y_min: float = 1.0) -> BinTable:
    """Histogram of x over [0, 1/2] for points with y >= y_min; x = 1/2 goes in the last bin."""
    x, y = _xy(points)
    x = x[y >= y_min]
    if x.size == 0:
        raise ValueError(f"no points with y >= {y_min}")
    idx = np.minimum((x / 0.5 * bins).astype(np.int64), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    edges = tuple(0.5 * i / bins for i in range(bins + 1))
    return BinTable(edges, tuple(int(c) for c in counts), int(x.size))


def y_threshold_fractions(points, thresholds: Iterable[float] = (1, 2, 4, 8, 16)) -> dict[float, float]:
    _, y = _xy(points)
    return {float(Y): float(np.count_nonzero(y >= Y)) / y.size for Y in thresholds}


# ---------------------------------------------------------------- CSV ingest


def ingest_gram_csv(path: str | Path, strict: bool = True) -> list[GramMatrix]:
    """Read rows g11,g12,g22 (optional header). Bad rows raise, or are skipped with a warning."""
    grams: list[GramMatrix] = []
    errors: list[tuple[int, str]] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row]
            if not cells or all(not c for c in cells) or cells[0].startswith("#"):
                continue
            if lineno == 1 and cells[0].lower() == "g11":
                continue
            if len(cells) != 3:
                errors.append((lineno, f"expected 3 columns, got {len(cells)}"))
                continue
            try:
                g = GramMatrix(*(float(c) for c in cells))
            except ValueError as exc:
                errors.append((lineno, str(exc)))
                continue
            if not all(math.isfinite(v) for v in (g.g11, g.g12, g.g22)):
                errors.append((lineno, "non-finite entry"))
                continue
            try:
                g.validate()
            except NotPositiveDefiniteError as exc:
                errors.append((lineno, str(exc)))
                continue
            grams.append(g)
    if errors:
        if strict:
            raise GramParseError(errors)
        for n, msg in errors:
            log.warning("line %d skipped: %s", n, msg)
    return grams
