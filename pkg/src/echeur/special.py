"""Numerical kernel: AGM, Beta, zeta, the Barnes G constant, quadrature, 1-D maximisation.

Double precision throughout. Where a constant has a closed form it is
computed two ways and the residual is kept so callers can report it.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from scipy import integrate, optimize

DEFAULT_TOL = 1e-12
DEFAULT_RTOL = 1e-10


class QuadratureError(ArithmeticError):
    """Quadrature did not reach the requested tolerance within its budget."""

    def __init__(self, message: str, result: "QuadratureResult"):
        super().__init__(message)
        self.result = result


class ConsistencyError(ArithmeticError):
    """Two independent evaluations of the same constant disagree."""


# ---------------------------------------------------------------- AGM


def agm(a: float, b: float, rtol: float = 1e-15) -> float:
    """Arithmetic-geometric mean of two positive reals."""
    if not (a > 0 and b > 0):
        raise ValueError(f"agm needs positive arguments, got ({a}, {b})")
    a, b = float(a), float(b)
    for _ in range(64):
        if abs(a - b) <= rtol * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def agm_complex(a: complex, b: complex) -> complex:
    """AGM with principal square roots; only meant for arguments near the positive axis."""
    a, b = complex(a), complex(b)
    for _ in range(64):
        if abs(a - b) <= 1e-16 * abs(a):
            break
        a, b = 0.5 * (a + b), cmath.sqrt(a * b)
    return 0.5 * (a + b)


# ---------------------------------------------------------------- Gamma / Beta


def beta(u: float, v: float) -> float:
    if not (u > 0 and v > 0):
        raise ValueError(f"beta needs positive arguments, got ({u}, {v})")
    return math.exp(math.lgamma(u) + math.lgamma(v) - math.lgamma(u + v))


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2) from the standard recursion."""
    B = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(math.comb(m + 1, j) * B[j] for j in range(m))
        B.append(-s / (m + 1))
    return B[n]


def zeta(s: float, n_terms: int = 20, n_corrections: int = 12) -> float:
    """Riemann zeta for real s > 1 by Euler-Maclaurin summation."""
    if s <= 1:
        raise ValueError("zeta implemented for s > 1 only")
    N = n_terms
    head = math.fsum(k ** (-s) for k in range(1, N))
    tail = [N ** (1 - s) / (s - 1), 0.5 * N ** (-s)]
    rising = s  # s (s+1) ... (s+2j-2)
    for j in range(1, n_corrections + 1):
        tail.append(float(bernoulli(2 * j)) / math.factorial(2 * j) * rising * N ** (-s - 2 * j + 1))
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + math.fsum(tail)


def euler_gamma(n: int = 20, n_corrections: int = 10) -> float:
    h = math.fsum(1.0 / k for k in range(1, n + 1))
    corr = math.fsum(float(bernoulli(2 * j)) / (2 * j * n ** (2 * j)) for j in range(1, n_corrections + 1))
    return h - math.log(n) - 1.0 / (2 * n) + corr


def glaisher(n: int = 6, n_corrections: int = 12) -> float:
    """Glaisher-Kinkelin constant A from the asymptotic expansion of log prod k^k."""
    log_h = math.fsum(k * math.log(k) for k in range(2, n + 1))
    main = (n * n / 2 + n / 2 + 1 / 12) * math.log(n) - n * n / 4
    corr = math.fsum(
        float(bernoulli(2 * j)) / ((2 * j) * (2 * j - 1) * (2 * j - 2)) * n ** (2 - 2 * j)
        for j in range(2, n_corrections + 2)
    )
    return math.exp(log_h - main + corr)


def barnes_g_half() -> float:
    """G(1/2) = 2^(1/24) e^(1/8) pi^(-1/4) A^(-3/2)."""
    return 2 ** (1 / 24) * math.exp(1 / 8) * math.pi ** (-0.25) * glaisher() ** (-1.5)


def barnes_g_half_series(n_terms: int = 60) -> float:
    """G(1/2) from the Taylor series of log G(1+z) at z = -1/2 (independent route)."""
    z = -0.5
    g = euler_gamma()
    terms = [z / 2 * math.log(2 * math.pi), -((1 + g) * z * z + z) / 2]
    for k in range(2, n_terms):
        terms.append((-1) ** k * zeta(k) * z ** (k + 1) / (k + 1))
    # log G(1/2) = log G(1 + z)
    return math.exp(math.fsum(terms))


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool


def quadrature(f: Callable[[float], float], a: float, b: float = math.inf,
               tol: float = DEFAULT_TOL, rtol: float = DEFAULT_RTOL,
               limit: int = 200) -> QuadratureResult:
    """Adaptive Gauss-Kronrod quadrature on [a, b]; b may be +inf.

    An infinite upper limit is mapped to [0, 1) by x = a + t/(1-t).
    Raises QuadratureError (carrying the best estimate) if the error
    estimate stays above max(tol, rtol*|value|).
    """
    count = 0

    if math.isinf(b):
        def g(t):
            nonlocal count
            count += 1
            if t >= 1.0:
                return 0.0
            s = 1.0 - t
            return f(a + t / s) / (s * s)
        lo, hi = 0.0, 1.0
    else:
        def g(x):
            nonlocal count
            count += 1
            return f(x)
        lo, hi = a, b

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(g, lo, hi, epsabs=tol, epsrel=rtol, limit=limit)
            ok = True
        except integrate.IntegrationWarning:
            ok = False
    if not ok:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            value, err = integrate.quad(g, lo, hi, epsabs=tol, epsrel=rtol, limit=limit)
    converged = ok and err <= max(tol, rtol * abs(value))
    result = QuadratureResult(value, abs(err), count, converged)
    if not converged:
        raise QuadratureError(f"quadrature budget exceeded (estimate {value}, error {err})", result)
    return result


# ---------------------------------------------------------------- maximisation


def maximize_1d(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10,
                fprime: Callable[[float], float] | None = None) -> tuple[float, float]:
    """Maximise a unimodal f on [lo, hi].

    Bounded Brent search first. If ``fprime`` is given the argmax is then
    polished as a root of f', which resolves flat maxima far below the
    sqrt(machine epsilon) limit of any comparison-based search.
    """
    res = optimize.minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol, "maxiter": 500})
    x = float(res.x)
    if fprime is not None:
        w = max(1e3 * tol, 1e-6 * max(1.0, abs(x)))
        a, b = max(lo, x - w), min(hi, x + w)
        for _ in range(20):
            if fprime(a) > 0 > fprime(b):
                x = optimize.brentq(fprime, a, b, xtol=1e-15 * max(1.0, abs(x)), rtol=1e-15, maxiter=200)
                break
            w *= 4
            a, b = max(lo, x - w), min(hi, x + w)
    return x, f(x)


def complex_step(f: Callable[[complex], complex], h: float = 1e-30) -> Callable[[float], float]:
    """Derivative of a real-analytic f via Im f(x + ih) / h."""
    return lambda x: f(complex(x, h)).imag / h


# ---------------------------------------------------------------- constants


def w_integral_pos() -> QuadratureResult:
    """Integral over w >= 0 of (w^2+1)^(1/3) - w^(2/3)."""
    def f(w):
        a = (w * w + 1.0) ** (1 / 3)
        b = w ** (2 / 3)
        return 1.0 / (a * a + a * b + b * b)
    return quadrature(f, 0.0)


def w_integral_neg() -> QuadratureResult:
    """Integral over w >= 0 of w^(2/3) - cbrt(w^2 - 1), real cube root."""
    def f(w):
        b = w ** (2 / 3)
        a = math.copysign(abs(w * w - 1.0) ** (1 / 3), w * w - 1.0)
        return 1.0 / (a * a + a * b + b * b)
    # integrand has a kink at w = 1
    head = quadrature(f, 0.0, 1.0)
    tail = quadrature(f, 1.0)
    return QuadratureResult(head.value + tail.value, head.error_estimate + tail.error_estimate,
                            head.evaluations + tail.evaluations, True)


@dataclass(frozen=True)
class Constants:
    zeta10: float
    alpha_plus: float
    alpha_minus: float
    alpha_R_hat: float
    residuals: dict = field(default_factory=dict)


@lru_cache(maxsize=1)
def alpha_constants(check_tol: float = 1e-9) -> Constants:
    """Area constants for the two discriminant signs, zeta(10), and alpha_R_hat.

    alpha_+ = (sqrt3/10) int_1^inf dx/sqrt(x^3-1) = (sqrt3/30) B(1/2,1/6)
    alpha_- = (sqrt3/10) int_-1^inf dx/sqrt(x^3+1) = (sqrt3/10) B(1/2,1/3)
    """
    s = math.sqrt(3) / 10
    a_plus = s * beta(0.5, 1 / 6) / 3
    a_minus = s * beta(0.5, 1 / 3)
    q_plus = s * (quadrature(lambda x: 1.0 / math.sqrt(x**3 - 1.0), 1.0, 2.0).value
                  + quadrature(lambda x: 1.0 / math.sqrt(x**3 - 1.0), 2.0).value)
    q_minus = s * (quadrature(lambda x: 1.0 / math.sqrt(x**3 + 1.0), -1.0, 0.0).value
                   + quadrature(lambda x: 1.0 / math.sqrt(x**3 + 1.0), 0.0).value)
    z10 = zeta(10)
    g_half = barnes_g_half()
    residuals = {
        "alpha_plus_quadrature": abs(a_plus - q_plus) / a_plus,
        "alpha_minus_quadrature": abs(a_minus - q_minus) / a_minus,
        "zeta10_closed_form": abs(z10 - math.pi**10 / 93555) / z10,
        "barnes_g_half_series": abs(g_half - barnes_g_half_series()) / g_half,
    }
    for name, r in residuals.items():
        if r > check_tol:
            raise ConsistencyError(f"{name} residual {r:.3e} exceeds {check_tol:.1e}")
    a_r = 2 ** (1 / 8) * g_half * math.pi ** (-0.25)
    return Constants(z10, a_plus, a_minus, a_r, residuals)
