"""Random-matrix model for vanishing central values.

Frobenius traces by point counting, the arithmetic Euler factors F(p),
the discretised vanishing probability, the lattice-point integral in
(delta, shape) coordinates, and the closed-form growth shapes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy import special as sps
from sympy import factorint, primerange

from . import kernels
from .curve import C4C6Model, Curve, curve_from_c4c6
from .enumeration import UnsupportedPrimeError
from .local import kappa, tamagawa
from .period import profile_neg, profile_pos, real_period
from .special import agm, alpha_constants, complex_step, quadrature

log = logging.getLogger(__name__)

DEFAULT_P_BUDGET = 10_000
DEFAULT_ALPHA_A_PMAX = 1000


class BudgetError(ValueError):
    """Requested prime is beyond the point-counting budget."""


CurveLike = Curve | C4C6Model


def _as_curve(curve: CurveLike) -> Curve:
    return curve if isinstance(curve, Curve) else curve_from_c4c6(curve.c4, curve.c6)


def _minimal_at(c4: int, c6: int, p: int) -> tuple[int, int]:
    while c4 % p**4 == 0 and c6 % p**6 == 0 and (c4 or c6):
        c4 //= p**4
        c6 //= p**6
    return c4, c6


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class LocalFactor:
    p: int
    a_p: int
    good_reduction: bool
    F_p: float


def _reduction_data(curve: CurveLike, p: int) -> tuple[tuple[int, ...], bool]:
    """a-invariants mod p of a model that is minimal at p, and whether p is good."""
    if p >= 5:
        c4, c6 = _minimal_at(curve.c4, curve.c6, p)
        good = (c4**3 - c6**2) % p != 0
        return (0, 0, 0, (-27 * c4) % p, (-54 * c6) % p), good
    E = _as_curve(curve)
    return tuple(a % p for a in E.ainvs), E.delta % p != 0


def trace_of_frobenius(curve: CurveLike, p: int, budget: int = DEFAULT_P_BUDGET) -> int:
    """a_p = p + 1 - #E(F_p), counting the singular point when there is one.

    With the singular point included the count gives 1 (split node),
    -1 (non-split node) or 0 (cusp) at bad primes. At 2 and 3 the
    supplied model is assumed minimal.
    """
    if p > budget:
        raise BudgetError(f"p = {p} exceeds the point-counting budget {budget}")
    a, _ = _reduction_data(curve, p)
    return int(kernels.frobenius_trace(*a, p))


def factor_F(p: int, a_p: int, good: bool) -> float:
    """(1-1/p)^(3/8) (p/(p+1)) (1/p + L_p(1/p)^(-1/2)/2 + L_p(-1/p)^(-1/2)/2)."""
    if good:
        lp = 1 - a_p / p + 1 / p
        lm = 1 + a_p / p + 1 / p
    else:
        lp = 1 - a_p / p
        lm = 1 + a_p / p
    bracket = 1 / p + 0.5 * math.sqrt(lp) + 0.5 * math.sqrt(lm)
    return (1 - 1 / p) ** 0.375 * (p / (p + 1)) * bracket


def local_factor(curve: CurveLike, p: int, budget: int = DEFAULT_P_BUDGET) -> LocalFactor:
    a_p = trace_of_frobenius(curve, p, budget)
    _, good = _reduction_data(curve, p)
    return LocalFactor(p, a_p, good, factor_F(p, a_p, good))


def local_factors(curve: CurveLike, p_max: int, budget: int = DEFAULT_P_BUDGET) -> list[LocalFactor]:
    if p_max > budget:
        raise BudgetError(f"p_max = {p_max} exceeds the point-counting budget {budget}")
    return [local_factor(curve, int(p), budget) for p in primerange(2, p_max + 1)]


def alpha_A(curve: CurveLike, p_max: int = DEFAULT_ALPHA_A_PMAX, budget: int = DEFAULT_P_BUDGET) -> float:
    """Truncated product of F(p) over p <= p_max."""
    factors = local_factors(curve, p_max, budget)
    logs = [math.log(f.F_p) for f in factors]
    value = math.exp(math.fsum(logs))
    tail_logs = [lg for f, lg in zip(factors, logs) if f.p > p_max // 2]
    log.info("alpha_A truncated at p <= %d; log-contribution of (p_max/2, p_max] = %.3e",
             p_max, math.fsum(tail_logs))
    return value


# ---------------------------------------------------------------- average F(p)


def _legendre_table(p: int) -> np.ndarray:
    chi = -np.ones(p, dtype=np.int64)
    chi[0] = 0
    chi[(np.arange(1, p) ** 2) % p] = 1
    return chi


def _trace_grid_by_character(p: int) -> np.ndarray:
    # c4 outer: a_p(c4, c6) = -sum_x chi(x^3 - 27 c4 x - 54 c6)
    chi = _legendre_table(p)
    x = np.arange(p, dtype=np.int64)
    out = np.empty((p, p), dtype=np.int64)
    for c4 in range(p):
        base = (x * x % p * x - 27 * c4 * x) % p
        vals = (base[None, :] - 54 * np.arange(p, dtype=np.int64)[:, None]) % p
        out[c4] = -chi[vals].sum(axis=1)
    return out


def _trace_grid_by_points(p: int) -> np.ndarray:
    # c6 outer, counting (x, y) pairs from the table of square roots
    nroots = np.zeros(p, dtype=np.int64)
    np.add.at(nroots, (np.arange(p, dtype=np.int64) ** 2) % p, 1)
    x = np.arange(p, dtype=np.int64)
    out = np.empty((p, p), dtype=np.int64)
    for c6 in range(p):
        vals = (x[None, :] ** 3 - 27 * np.arange(p, dtype=np.int64)[:, None] * x[None, :] - 54 * c6) % p
        points = nroots[vals].sum(axis=1) + 1
        out[:, c6] = p + 1 - points
    return out


def average_F(p: int, route: str = "character") -> float:
    """Mean of F(p) over minimal models, from all p^2 residue pairs (c4, c6).

    Each pair has weight 1/p^2. The pair (0, 0) contains the non-minimal
    models (measure p^-10), which all have additive reduction there, so the
    conditioned mean is kappa * (sum F / p^2 - p^-10 F_additive).
    """
    if p < 5:
        raise UnsupportedPrimeError("average_F covers p >= 5; the sweep at 2, 3 needs the 2-, 3-adic classes")
    grid = _trace_grid_by_character(p) if route == "character" else _trace_grid_by_points(p)
    c4 = np.arange(p, dtype=np.int64)[:, None]
    c6 = np.arange(p, dtype=np.int64)[None, :]
    good = (c4**3 - c6**2) % p != 0
    total = math.fsum(factor_F(p, int(grid[i, j]), bool(good[i, j])) for i in range(p) for j in range(p))
    f_add = factor_F(p, 0, False)
    k = float(kappa(p))
    return k * (total / p**2 - f_add / p**10)


def trace_histogram(p: int) -> dict[tuple[int, bool], Fraction]:
    """Exact law of (a_p, good) over residue pairs, before minimality conditioning."""
    grid = _trace_grid_by_character(p)
    c4 = np.arange(p, dtype=np.int64)[:, None]
    c6 = np.arange(p, dtype=np.int64)[None, :]
    good = (c4**3 - c6**2) % p != 0
    out: dict[tuple[int, bool], Fraction] = {}
    for a, g in zip(grid.ravel().tolist(), good.ravel().tolist()):
        out[(a, g)] = out.get((a, g), Fraction(0)) + Fraction(1, p * p)
    return out


# ---------------------------------------------------------------- vanishing probability


@dataclass(frozen=True)
class VanishingModel:
    M: int
    alpha_R: float
    alpha_A_trunc: float
    threshold: float
    omega: float
    tau: int
    torsion: int
    probability: float


def rmt_probability(omega: float, tau: float, torsion: int, M: int, alpha_A_value: float,
                    alpha_R: float | None = None) -> float:
    """min(1, alpha_R alpha_A sqrt(omega tau / T^2) M^(3/8))."""
    if alpha_R is None:
        alpha_R = alpha_constants().alpha_R_hat
    M = max(1, int(M))
    value = alpha_R * alpha_A_value * math.sqrt(omega * tau / torsion**2) * M**0.375
    return min(1.0, value)


def tamagawa_product(curve: CurveLike, overrides: Mapping[int, int] | None = None) -> int:
    """Product of local Tamagawa numbers at p >= 5, the infinite-place factor, and overrides.

    Primes 2 and 3 contribute 1 unless given in ``overrides``.
    """
    overrides = dict(overrides or {})
    c4, c6, delta = curve.c4, curve.c6, curve.delta
    tau = 1 if delta < 0 else 2
    for p in factorint(abs(delta)):
        if p in overrides:
            continue
        if p >= 5:
            tau *= tamagawa(p, c4, c6, delta)
    for p, t in overrides.items():
        tau *= int(t)
    return tau


def vanishing_probability(curve: CurveLike, assume_T: int = 1, p_max: int = DEFAULT_ALPHA_A_PMAX,
                          M: int | None = None, tau_overrides: Mapping[int, int] | None = None) -> VanishingModel:
    """Modelled probability that the central value is forced to zero.

    M defaults to floor(log |delta|), clamped to at least 1.
    """
    delta = curve.delta
    if M is None:
        M = max(1, int(math.floor(math.log(abs(delta))))) if abs(delta) > 1 else 1
    omega = real_period(curve)
    tau = tamagawa_product(curve, tau_overrides)
    aA = alpha_A(curve, p_max)
    aR = alpha_constants().alpha_R_hat
    prob = rmt_probability(omega, tau, assume_T, M, aA, aR)
    return VanishingModel(M, aR, aA, omega * tau / assume_T**2, omega, tau, assume_T, prob)


# ---------------------------------------------------------------- the W-hat integral


def delta_integral(X: float) -> float:
    """int_1^X (log D)^(3/8) D^(-5/24) dD = L^(11/8)/(11/8) 1F1(11/8; 19/8; 19L/24), L = log X."""
    if X < 1:
        raise ValueError("X must be >= 1")
    L = math.log(X)
    return L**1.375 / 1.375 * float(sps.hyp1f1(1.375, 2.375, 19 * L / 24))


def delta_integral_quadrature(X: float) -> float:
    L = math.log(X)
    return quadrature(lambda u: u**0.375 * math.exp(19 * u / 24), 0.0, L, tol=0.0, rtol=1e-12).value


def _shape_pos_mu(mu: float) -> float:
    lam = 0.5 / (math.sqrt(mu**4 + mu) + mu * mu)
    return 432.0 / (math.sqrt(agm(math.sqrt(lam), math.sqrt(lam + mu))) * math.sqrt(mu**4 + mu))


def _neg_shape(c):
    # c4 = |D|^(1/3) A(c), c6 = |D|^(1/2) B(c) for the delta < 0 family
    g = 0.5 * (1 + 9 * c * c / 4) ** (-1 / 3)
    A = g * g * (36 * c * c - 48)
    B = 216 * g**3 * c * (c * c + 4)
    return A, B


def _pos_shape_t(t):
    # same for delta > 0 in the root quotient t (gaps t s and s, s^3 t(1-t) = 1/4)
    A = 16 * (1 - t + t * t) / (4 * t * (1 - t)) ** (2 / 3)
    B = -8 * (1 + t) * (1 - 2 * t) * (2 - t) / (t * (1 - t))
    return A, B


def _pos_shape_mu(mu):
    lam = 0.5 / ((mu**4 + mu) ** 0.5 + mu * mu)
    A = 16 * (mu * mu + lam * mu + lam * lam)
    B = -32 * (mu + 2 * lam) * (mu - lam) * (2 * mu + lam)
    return A, B


def shape_jacobian(shape, s: float) -> float:
    """|d(c4, c6)/d(|D|, s)| * |D|^(1/6) for c4 = |D|^(1/3) A(s), c6 = |D|^(1/2) B(s).

    The raw form |A B'/3 - A' B/2| cancels badly near degenerate shapes.
    Since A^3 - B^2 = +-1728 is constant it equals 576 |B'| / A^2 and also
    864 |A'| / |B|; the better conditioned of the two is used.
    """
    A, B = shape(s)
    if A * A >= abs(B):
        return 576 * abs(complex_step(lambda z: shape(z)[1])(s)) / (A * A)
    return 864 * abs(complex_step(lambda z: shape(z)[0])(s)) / abs(B)


def jacobian_neg(c: float) -> float:
    return shape_jacobian(_neg_shape, c)


def shape_integral(sign: int, cutoff: float | None = None) -> float:
    """The convergent shape factor of the W-hat integral.

    sign +1: int_0^inf 432 / (sqrt(agm(sqrt lam, sqrt(lam+mu))) sqrt(mu^4+mu)) dmu.
    sign -1: int over c of sqrt(Omega|D|^(1/12)/pi) times the (D, c) Jacobian,
    the same normalisation as the positive case.
    ``cutoff`` truncates mu (or |c|) for convergence checks.
    """
    if sign > 0:
        # mu = e^u over the whole line
        def f(u):
            if abs(u) > 150:  # integrand below e^(-90) at either end
                return 0.0
            mu = math.exp(u)
            return mu * _shape_pos_mu(mu)
        hi = math.log(cutoff) if cutoff else math.inf
        right = quadrature(f, 0.0, hi, tol=1e-13, rtol=1e-11).value
        left = quadrature(lambda u: f(-u), 0.0, tol=1e-13, rtol=1e-11).value
        return left + right

    def g(v):
        # c = sinh(v)
        if abs(v) > 300:
            return 0.0
        c = math.sinh(v)
        return math.sqrt(profile_neg(c) / math.pi) * jacobian_neg(c) * math.cosh(v)
    hi = math.asinh(cutoff) if cutoff else math.inf
    opts = dict(tol=1e-13, rtol=1e-11)
    return quadrature(g, 0.0, hi, **opts).value + quadrature(lambda v: g(-v), 0.0, hi, **opts).value


def shape_integral_pos_t() -> float:
    """Positive-discriminant shape factor via the root quotient t (independent route)."""
    def h(v):
        # t = 1/(1 + e^-v) spreads both endpoint singularities over the line
        if abs(v) > 150:
            return 0.0
        t = 1 / (1 + math.exp(-v))
        if not 0 < t < 1:
            return 0.0
        return math.sqrt(profile_pos(t) / math.pi) * shape_jacobian(_pos_shape_t, t) * t * (1 - t)
    opts = dict(tol=1e-10, rtol=1e-8, limit=400)
    return quadrature(h, 0.0, **opts).value + quadrature(lambda v: h(-v), 0.0, **opts).value


@dataclass(frozen=True)
class WHat:
    X: float
    sign: int
    delta_part: float
    shape_part: float

    @property
    def value(self) -> float:
        """Unnormalised: the leading constant bundle is set to 1."""
        return self.delta_part * self.shape_part


def w_hat_integral(X: float, sign: int = 1) -> WHat:
    if X < 2:
        raise ValueError("X must be >= 2")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return WHat(X, sign, delta_integral(X), shape_integral(sign))


# ---------------------------------------------------------------- growth shapes


def predicted_R(X: float) -> float:
    """Unnormalised X^(19/24) (log X)^(3/8) (curves ordered by discriminant)."""
    return X ** (19 / 24) * math.log(X) ** 0.375


def predicted_R_conductor(X: float) -> float:
    """Same shape for curves ordered by conductor; the constant is left unspecified."""
    return predicted_R(X)


def rank_two_fraction(X: float) -> float:
    """Shape of the proportion of even-parity curves with a forced zero: X^(-1/24)(log X)^(3/8)."""
    return predicted_R(X) / X ** (5 / 6)


@dataclass(frozen=True)
class ExponentShape:
    exponent: float
    finitely_many: bool
    log_power: bool = False


def sym_power_exponent(k: int) -> ExponentShape:
    """Exponent 5/6 - k^2/24 for extra vanishing of the (2k-1)st symmetric power."""
    if k < 1:
        raise ValueError("k must be >= 1")
    e = 5 / 6 - k * k / 24
    return ExponentShape(e, e <= 0)


def twist_exponent(k: int, cm: bool) -> ExponentShape:
    """Growth in D of the count of quadratic twists d < D with a forced zero of Sym^(2k-1).

    Non-CM: each twist contributes d^(-k^2/4), so k = 2 gives a log power.
    CM: the Hecke character contributes d^(-(2k-1)/4), so k = 2 gives D^(1/4).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    e = 1 - ((2 * k - 1) / 4 if cm else k * k / 4)
    if e == 0:
        return ExponentShape(0.0, False, log_power=True)
    return ExponentShape(e, e < 0)


def cm_twist_count(D: float) -> float:
    return D**0.25


def sym_cube_twist_count(D: float, b: float) -> float:
    return math.log(D) ** b
