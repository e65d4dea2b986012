"""Counting minimal models by discriminant, exact local valuation laws, 2-torsion families.

Enumeration runs in (c4, c6) coordinates. For fixed c4 the condition
0 < |c4^3 - c6^2| < 1728 X cuts out at most four c6 intervals, and only
c6 residues admissible for c4 mod 576 are visited. The Delta > 0 region is
bounded; the Delta < 0 region is bounded too (c4 >= -(1728 X)^(1/3)), but both
have a thin cusp along c6^2 ~ c4^3 reaching to c4 = infinity. The sweep is
therefore cut at ``c4_max`` and the expected number of missed curves per sign
is reported as ``cusp_tail_estimate``.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable

import numpy as np

from . import kernels
from .curve import C4_MODULUS, C6_MODULUS, CongruenceClass, admissible_classes, admissible_table, is_minimal
from .special import alpha_constants

CATEGORIES = ("good", "multiplicative", "additive_nontwist", "additive_twist")
# The b = +-1 members of the 2-torsion family reach c4 = 256 |Delta| + 3.
DEFAULT_C4_FACTOR = 256
DEFAULT_C4_SLACK = 16
BUFFER_SIZE = 1 << 16

Sink = Callable[[np.ndarray, np.ndarray, np.ndarray], None]


class UnsupportedPrimeError(ValueError):
    """The closed-form local theory only covers p >= 5."""


class SweepTooLargeError(ValueError):
    """A residue sweep was requested beyond the exact-arithmetic budget."""


# ---------------------------------------------------------------- report


@dataclass
class EnumerationReport:
    x_bound: int
    c4_max: int = 0
    count_pos: int = 0
    count_neg: int = 0
    valuation_histogram: Counter = field(default_factory=Counter)
    class_histogram: Counter = field(default_factory=Counter)
    cusp_tail_estimate: float = 0.0
    backend: str = ""

    @property
    def total(self) -> int:
        return self.count_pos + self.count_neg

    def merge(self, other: "EnumerationReport") -> "EnumerationReport":
        if other.x_bound != self.x_bound:
            raise ValueError("cannot merge reports for different bounds")
        self.count_pos += other.count_pos
        self.count_neg += other.count_neg
        self.valuation_histogram.update(other.valuation_histogram)
        self.class_histogram.update(other.class_histogram)
        return self

    def prediction_ratios(self) -> dict:
        pp, pn = predicted_count(self.x_bound, 1), predicted_count(self.x_bound, -1)
        return {
            "pos_over_predicted": self.count_pos / pp if pp else math.nan,
            "neg_over_predicted": self.count_neg / pn if pn else math.nan,
            "neg_over_pos": self.count_neg / self.count_pos if self.count_pos else math.nan,
            "fraction_neg": self.count_neg / self.total if self.total else math.nan,
        }

    def to_dict(self) -> dict:
        return {
            "x_bound": self.x_bound,
            "c4_max": self.c4_max,
            "count_pos": self.count_pos,
            "count_neg": self.count_neg,
            "cusp_tail_estimate": self.cusp_tail_estimate,
            "backend": self.backend,
            "predicted_pos": predicted_count(self.x_bound, 1),
            "predicted_neg": predicted_count(self.x_bound, -1),
            **self.prediction_ratios(),
            "valuation_histogram": [
                {"p": p, "k": k, "category": cat, "count": n}
                for (p, k, cat), n in sorted(self.valuation_histogram.items())
            ],
            "class_histogram": [
                {"c4_res": c.c4_res, "c6_res": c.c6_res, "count": n}
                for c, n in sorted(self.class_histogram.items())
            ],
        }


def predicted_count(X: float, sign: int) -> float:
    """(alpha_+- / zeta(10)) X^(5/6)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if X <= 0:
        return 0.0
    c = alpha_constants()
    alpha = c.alpha_plus if sign == 1 else c.alpha_minus
    return alpha / c.zeta10 * X ** (5 / 6)


def default_c4_max(X: int) -> int:
    return DEFAULT_C4_FACTOR * int(X) + DEFAULT_C4_SLACK


def cusp_tail_estimate(X: float, c4_max: int) -> float:
    """Expected minimal models per sign with c4 > c4_max: about X / (zeta(10) sqrt(c4_max))."""
    if c4_max <= 0:
        return math.inf
    return X / (alpha_constants().zeta10 * math.sqrt(c4_max))


# ---------------------------------------------------------------- sweep


_res_lock = threading.Lock()
_res_cache: tuple[np.ndarray, np.ndarray] | None = None


def residue_index() -> tuple[np.ndarray, np.ndarray]:
    """CSR layout of admissible c6 residues per c4 residue (int32 ptr, int32 values)."""
    global _res_cache
    if _res_cache is None:
        with _res_lock:
            if _res_cache is None:
                by_c4 = [[] for _ in range(C4_MODULUS)]
                for r4, r6 in sorted(admissible_classes()):
                    by_c4[r4].append(r6)
                ptr = np.zeros(C4_MODULUS + 1, dtype=np.int32)
                ptr[1:] = np.cumsum([len(v) for v in by_c4])
                val = np.array([r for v in by_c4 for r in v], dtype=np.int32)
                _res_cache = (ptr, val)
    return _res_cache


def c4_range(X: int, c4_max: int | None = None) -> tuple[int, int]:
    """Half-open c4 range [lo, hi) covering the sweep for |Delta| < X."""
    lo = -_icbrt_ceil(1728 * (X - 1))
    if c4_max is None:
        c4_max = default_c4_max(X)
    return lo, max(lo, c4_max + 1)


def _icbrt_ceil(n: int) -> int:
    if n <= 0:
        return 0
    r = round(n ** (1 / 3))
    while r**3 < n:
        r += 1
    while (r - 1) ** 3 >= n:
        r -= 1
    return r


def _stripes(lo: int, hi: int, n: int) -> list[tuple[int, int]]:
    # Work per c4 falls off quickly with c4, so the boundaries are packed
    # towards the start of the range.
    if hi - lo <= n:
        return [(lo, hi)]
    edges = sorted({lo + int((hi - lo) * (i / n) ** 2) for i in range(n + 1)} | {hi})
    return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def _valuation(x: np.ndarray, p: int, cap: int) -> np.ndarray:
    x = np.abs(x.astype(np.int64))
    v = np.zeros(x.shape, dtype=np.int64)
    alive = x != 0
    for _ in range(cap):
        step = alive & (x % p == 0)
        if not step.any():
            break
        v[step] += 1
        x = np.where(step, x // p, x)
        alive = step
    v[~(x != 0) & (v == 0)] = cap  # only reached for x == 0
    return v


def _categorize(k: np.ndarray, v4: np.ndarray) -> np.ndarray:
    cat = np.full(k.shape, 3, dtype=np.int64)  # additive twist
    cat[k == 0] = 0
    mult = (k > 0) & (v4 == 0)
    cat[mult] = 1
    add = (k > 0) & (v4 > 0)
    cat[add & np.isin(k, (2, 3, 4))] = 2
    cat[add & (k >= 7) & (v4 >= 3)] = 2
    return cat


class _Tally:
    def __init__(self, X: int, stats_primes: tuple[int, ...], k_cap: int):
        self.report = EnumerationReport(X)
        self.classes = np.zeros(C4_MODULUS * C6_MODULUS, dtype=np.int64)
        self.stats_primes = stats_primes
        self.k_cap = k_cap

    def add(self, c4: np.ndarray, c6: np.ndarray, delta: np.ndarray) -> None:
        pos = int(np.count_nonzero(delta > 0))
        self.report.count_pos += pos
        self.report.count_neg += len(delta) - pos
        idx = (c4 % C4_MODULUS) * C6_MODULUS + (c6 % C6_MODULUS)
        self.classes += np.bincount(idx, minlength=self.classes.size)
        for p in self.stats_primes:
            k = _valuation(delta, p, 64)
            v4 = _valuation(c4, p, 64)
            cat = _categorize(k, v4)
            k = np.minimum(k, self.k_cap + 1)
            keys, counts = np.unique(k * 4 + cat, return_counts=True)
            for key, n in zip(keys.tolist(), counts.tolist()):
                self.report.valuation_histogram[(p, key // 4, CATEGORIES[key % 4])] += n

    def finish(self) -> EnumerationReport:
        for i in np.flatnonzero(self.classes).tolist():
            self.report.class_histogram[CongruenceClass(i // C6_MODULUS, i % C6_MODULUS)] += int(self.classes[i])
        return self.report


def _run_stripe(X, lo, hi, stats_primes, k_cap, sink, sink_lock, impl):
    adm = admissible_table()
    ptr, val = residue_index()
    out_c4 = np.empty(BUFFER_SIZE, dtype=np.int64)
    out_c6 = np.empty(BUFFER_SIZE, dtype=np.int64)
    out_d = np.empty(BUFFER_SIZE, dtype=np.int64)
    tally = _Tally(X, stats_primes, k_cap)
    c4 = lo
    while c4 < hi:
        n, nxt = impl.enumerate_stripe(c4, hi, X, adm, ptr, val, out_c4, out_c6, out_d)
        if n == 0 and nxt == c4:
            raise RuntimeError("output buffer too small for a single c4 row")
        if n:
            chunk = (out_c4[:n].copy(), out_c6[:n].copy(), out_d[:n].copy())
            tally.add(*chunk)
            if sink is not None:
                with sink_lock:
                    sink(*chunk)
        c4 = nxt
    return tally


def count_by_discriminant(X: int, sink: Sink | None = None, *, c4_max: int | None = None,
                          threads: int = 1, stats_primes: tuple[int, ...] = (), k_cap: int = 12,
                          backend: str | None = None) -> EnumerationReport:
    """Tally every minimal (c4, c6) with 0 < |Delta| < X and c4 <= c4_max.

    ``sink`` is called with (c4, c6, delta) int64 arrays, one call per filled
    buffer, serialised under a lock; rows arrive in c4 order within a stripe
    but stripes may interleave when ``threads > 1``. ``stats_primes`` adds
    (p, v_p(Delta), reduction category) tallies, with v_p capped at k_cap + 1.
    """
    X = int(X)
    if X < 1:
        raise ValueError("X must be >= 1")
    impl = kernels.available_backends()[backend] if backend else kernels
    for p in stats_primes:
        if p < 5:
            raise UnsupportedPrimeError(f"valuation statistics need p >= 5, got {p}")
    if c4_max is None:
        c4_max = default_c4_max(X)
    report = EnumerationReport(X, c4_max=c4_max,
                               backend=backend or kernels.BACKEND)
    if X == 1:
        return report
    lo, hi = c4_range(X, c4_max)
    threads = max(1, int(threads))
    stripes = _stripes(lo, hi, 1 if threads == 1 else 16 * threads)
    sink_lock = threading.Lock()
    args = (X,)
    if threads == 1:
        tallies = [_run_stripe(*args, a, b, tuple(stats_primes), k_cap, sink, sink_lock, impl) for a, b in stripes]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_stripe, *args, a, b, tuple(stats_primes), k_cap, sink, sink_lock, impl)
                       for a, b in stripes]
            tallies = [f.result() for f in futures]
    for t in tallies:
        report.merge(t.finish())
    report.cusp_tail_estimate = cusp_tail_estimate(X, c4_max)
    return report


def count_by_discriminant_c6_outer(X: int, c4_max: int) -> EnumerationReport:
    """Same sweep with c6 as the outer loop. Pure Python; only for small X.

    For each c6 the c4 interval is cut from c4^3 in (c6^2 - 1728X, c6^2 + 1728X)
    and c4 <= c4_max; |c6| is bounded by sqrt(c4_max^3 + 1728 X).
    """
    X = int(X)
    report = EnumerationReport(X, c4_max=c4_max, backend="python-c6-outer")
    if X <= 1:
        return report
    span = 1728 * (X - 1)
    adm = admissible_table()
    classes = np.zeros(C4_MODULUS * C6_MODULUS, dtype=np.int64)
    c6_bound = isqrt(max(c4_max, 0) ** 3 + span)
    for c6 in range(-c6_bound, c6_bound + 1):
        s = c6 * c6
        lo = -_icbrt_ceil(span - s) if s < span else _icbrt_ceil(s - span)
        hi = min(c4_max, _icbrt_floor(s + span))
        r6 = c6 % C6_MODULUS
        for c4 in range(lo, hi + 1):
            if not adm[c4 % C4_MODULUS, r6]:
                continue
            d = c4**3 - s
            if d == 0 or abs(d) > span:
                continue
            if not is_minimal(c4, c6):
                continue
            if d > 0:
                report.count_pos += 1
            else:
                report.count_neg += 1
            classes[(c4 % C4_MODULUS) * C6_MODULUS + r6] += 1
    for i in np.flatnonzero(classes).tolist():
        report.class_histogram[CongruenceClass(i // C6_MODULUS, i % C6_MODULUS)] = int(classes[i])
    return report


def _icbrt_floor(n: int) -> int:
    if n >= 0:
        r = round(n ** (1 / 3)) if n else 0
        while r**3 > n:
            r -= 1
        while (r + 1) ** 3 <= n:
            r += 1
        return r
    return -_icbrt_ceil(-n)


# ---------------------------------------------------------------- local laws by residue sweep


@dataclass(frozen=True)
class ResidueBatch:
    """Cells (c4 mod p^e4, c6 mod p^e6) on which v_p(c4^3 - c6^2) = k is constant.

    Row i has Haar measure mass[i] / p^scale[i] in Z_p^2. Every residue the
    local classification reads (Delta / p^k mod p, c4 / p^2 mod p, c6 / p^3
    mod p, ...) is fixed on the cell, so any integer lift is a valid sample.
    """
    c4: np.ndarray
    c6: np.ndarray
    k: np.ndarray
    mass: np.ndarray
    scale: np.ndarray


def _vcap(x: np.ndarray, e: np.ndarray, p: int) -> np.ndarray:
    """min(v_p(x), e) for residues x mod p^e (x == 0 gives e)."""
    v = np.zeros(x.shape, dtype=np.int64)
    y = x.copy()
    alive = (y % p == 0) & (v < e)
    while alive.any():
        v[alive] += 1
        y = np.where(alive, y // p, y)
        alive = alive & (y % p == 0) & (v < e)
    return np.minimum(v, e)


def _measure(mass: np.ndarray, scale: np.ndarray, p: int) -> Fraction:
    """Exact sum of mass / p^scale."""
    total = Fraction(0)
    for sc in np.unique(scale).tolist():
        total += Fraction(int(mass[scale == sc].sum()), p**sc)
    return total


def residue_sweep(p: int, k_max: int, hensel: bool = True, max_cells: int = 20_000_000):
    """Partition Z_p^2 in (c4, c6) by v_p(c4^3 - c6^2) up to k_max.

    A cell (c4 mod p^e4, c6 mod p^e6) fixes c4^3 mod p^t4 and c6^2 mod
    p^t6 with t4 = min(e4 + 2 v4, 3 e4), t6 = min(e6 + v6, 2 e6), so it fixes
    D = c4^3 - c6^2 mod p^L, L = min(t4, t6). If D is nonzero mod p^L the
    cell is settled; otherwise the coordinate that limits L is refined by a
    factor p. Cells that reach L > k_max unsettled are counted as overflow.

    With ``hensel`` set, the subtree below an unsettled cell with e4 = e6 = e
    and p not dividing c6 (a smooth point of c4^3 = c6^2) is summed in closed
    form by Hensel lifting; such cells are all multiplicative and every
    descendant shares c6 mod p. ``hensel=False`` runs the plain refinement
    all the way down as an independent check.

    Yields ResidueBatch objects; returns the overflow measure.
    """
    if p < 5:
        raise UnsupportedPrimeError(f"p = {p}: only p >= 5 is supported")
    if p ** (k_max + 1) >= 2**31:
        raise SweepTooLargeError("p^(k_max+1) must stay below 2^31 for exact int64 arithmetic")
    c4 = np.arange(p, dtype=np.int64)
    c6 = np.zeros(1, dtype=np.int64)
    c4, c6 = np.repeat(c4, p), np.tile(np.arange(p, dtype=np.int64), p)
    e4 = np.ones(c4.size, dtype=np.int64)
    e6 = np.ones(c4.size, dtype=np.int64)
    overflow = Fraction(0)
    while c4.size:
        if c4.size > max_cells:
            raise SweepTooLargeError(f"residue sweep would need {c4.size} cells")
        v4 = _vcap(c4, e4, p)
        v6 = _vcap(c6, e6, p)
        t4 = np.minimum(e4 + 2 * v4, 3 * e4)
        t6 = np.minimum(e6 + v6, 2 * e6)
        L = np.minimum(t4, t6)
        Lc = np.minimum(L, k_max + 1)
        ML = p**Lc
        a = c4 % ML
        d = ((a * a) % ML * a - (c6 % ML) ** 2) % ML
        done = d != 0
        if done.any():
            k = _vcap(d[done], Lc[done], p)
            yield ResidueBatch(c4[done], c6[done], k, np.ones(k.size, dtype=np.int64), e4[done] + e6[done])
        over = ~done & (L > k_max)
        if over.any():
            overflow += _measure(np.ones(int(over.sum()), dtype=np.int64), e4[over] + e6[over], p)
        done = done | over
        rest = ~done
        c4, c6, e4, e6, t4, t6, d = (z[rest] for z in (c4, c6, e4, e6, t4, t6, d))
        new4, new6, newe4, newe6 = [], [], [], []
        if hensel:
            unit = (c6 % p != 0) & (e4 == e6)
            if unit.any():
                # Hensel: of the p^2 children of such a cell exactly p (one c6
                # lift per c4 lift) stay unsettled, each again a unit cell of
                # the same kind, and the other p^2 - p have valuation exactly e.
                # Unrolled, the cell's mass p^-2e splits as (p-1)/p^(2e+i+1)
                # at k = e + i, with p^-(e+1+k_max-e) p^-e left over past k_max.
                u4, u6, ue = c4[unit], c6[unit], e4[unit]
                for i in range(int(k_max - ue.min()) + 1):
                    live = ue + i <= k_max
                    if live.any():
                        yield ResidueBatch(u4[live], u6[live], ue[live] + i,
                                           np.full(int(live.sum()), p - 1, dtype=np.int64), 2 * ue[live] + i + 1)
                overflow += _measure(np.ones(ue.size, dtype=np.int64), ue + k_max + 1, p)
                c4, c6, e4, e6, t4, t6 = (z[~unit] for z in (c4, c6, e4, e6, t4, t6))
        shift = np.arange(p, dtype=np.int64)
        r4 = t4 <= t6
        if r4.any():
            m = p ** e4[r4]
            new4.append((c4[r4][:, None] + shift[None, :] * m[:, None]).ravel())
            new6.append(np.repeat(c6[r4], p))
            newe4.append(np.repeat(e4[r4] + 1, p))
            newe6.append(np.repeat(e6[r4], p))
        r6 = ~r4
        if r6.any():
            m = p ** e6[r6]
            new4.append(np.repeat(c4[r6], p))
            new6.append((c6[r6][:, None] + shift[None, :] * m[:, None]).ravel())
            newe4.append(np.repeat(e4[r6], p))
            newe6.append(np.repeat(e6[r6] + 1, p))
        if not new4:
            break
        c4, c6 = np.concatenate(new4), np.concatenate(new6)
        e4, e6 = np.concatenate(newe4), np.concatenate(newe6)
    return overflow


def sweep_batches(p: int, k_max: int, hensel: bool = True) -> tuple[list, Fraction]:
    """Run residue_sweep to completion: (batches, overflow measure)."""
    batches = []
    gen = residue_sweep(p, k_max, hensel=hensel)
    while True:
        try:
            batches.append(next(gen))
        except StopIteration as stop:
            return batches, stop.value


def empirical_valuation_stats(p: int, k_max: int, hensel: bool = True) -> dict:
    """Exact frequencies of p^k || Delta by reduction category, conditioned on minimality at p.

    Measure is Haar measure on Z_p^2 in (c4, c6) from the residue sweep.
    Non-minimal pairs (p^4 | c4, p^6 | c6, measure p^-10) all have
    v_p(Delta) >= 12, so for k <= 11 conditioning is division by 1 - p^-10.
    Returns (k, category) -> Fraction for 0 <= k <= k_max.
    """
    if k_max > 11:
        raise SweepTooLargeError("k_max > 11 reaches the non-minimal locus")
    batches, overflow = sweep_batches(p, k_max, hensel)
    mass = Counter()
    total = overflow
    for b in batches:
        v4 = _valuation(np.where(b.c4 == 0, p ** (k_max + 2), b.c4), p, k_max + 2)
        keys = b.k * 4 + _categorize(b.k, v4)
        for key in np.unique(keys).tolist():
            sel = keys == key
            w = _measure(b.mass[sel], b.scale[sel], p)
            mass[(key // 4, CATEGORIES[key % 4])] += w
            total += w
    if total != 1:
        raise RuntimeError(f"residue sweep measure sums to {total}, not 1")
    norm = 1 - Fraction(1, p**10)
    out = {}
    for k in range(k_max + 1):
        for cat in CATEGORIES:
            if (k == 0) != (cat == "good"):
                continue
            out[(k, cat)] = mass.get((k, cat), Fraction(0)) / norm
    return out


# ---------------------------------------------------------------- 2-torsion family


def _squares_upto(m: int) -> int:
    """Number of integers a with a^2 <= m."""
    return 2 * isqrt(m) + 1 if m >= 0 else 0


def count_two_torsion_models(X: int) -> int:
    """Number of (a, b), b != 0, a^2 != 4b, with |16 b^2 (a^2 - 4b)| < X.

    These are the models y^2 = x^3 + a x^2 + b x; the count grows like sqrt(X)
    up to a logarithm.
    """
    X = int(X)
    total = 0
    b = 1
    while 16 * b * b < X:
        bound = (X - 1) // (16 * b * b)  # |a^2 - 4b| <= bound
        # b > 0: a^2 in [4b - bound, 4b + bound], a^2 != 4b
        total += _squares_upto(4 * b + bound) - _squares_upto(4 * b - bound - 1)
        r = isqrt(b)
        if r * r == b:
            total -= 2
        # -b < 0: a^2 + 4b <= bound
        total += _squares_upto(bound - 4 * b)
        b += 1
    return total
