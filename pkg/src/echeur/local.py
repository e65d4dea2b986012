"""Local theory at primes p >= 5: Kodaira types, Tamagawa numbers, and the exact reduction laws.

Probabilities are exact ``Fraction`` values for Haar measure on minimal
(c4, c6) in Z_p^2, i.e. conditioned on minimality via
kappa_p = (1 - p^-10)^-1. Quantities involving square roots of Tamagawa
numbers are floats.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, NamedTuple, Union

import numpy as np
from sympy import factorint, isprime, primerange

from .enumeration import UnsupportedPrimeError
from .special import alpha_constants, quadrature

log = logging.getLogger(__name__)

FactoredInteger = Union[int, Mapping[int, int]]

# Kodaira tags
GOOD, I_N, II, III, IV, I0_STAR, I_N_STAR, IV_STAR, III_STAR, II_STAR = (
    "Good", "I", "II", "III", "IV", "I0*", "I*", "IV*", "III*", "II*")


class NonMinimalError(ValueError):
    """The model is not minimal at p."""


@dataclass(frozen=True)
class KodairaClass:
    tag: str
    k: int | None = None

    def __post_init__(self):
        if self.tag in (I_N, I_N_STAR) and (self.k is None or self.k < 1):
            raise ValueError(f"{self.tag} needs k >= 1")

    def __str__(self) -> str:
        if self.tag == I_N:
            return f"I{self.k}"
        if self.tag == I_N_STAR:
            return f"I{self.k}*"
        return self.tag


@dataclass(frozen=True)
class LocalDatum:
    p: int
    kodaira: KodairaClass
    delta_valuation: int
    tamagawa: int


class TaggedRational(NamedTuple):
    """rational * tag_value, with the transcendental factor kept symbolic."""
    rational: Fraction
    tag: str
    tag_value: float

    def __float__(self) -> float:
        return float(self.rational) * self.tag_value


# ---------------------------------------------------------------- helpers


def _check_prime(p: int) -> None:
    if p in (2, 3):
        raise UnsupportedPrimeError(f"p = {p}: closed forms cover p >= 5 only")
    if p < 5 or not isprime(p):
        raise ValueError(f"{p} is not a prime >= 5")


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def is_square_mod(a: int, p: int) -> bool:
    """True for nonzero squares mod p (Euler's criterion)."""
    a %= p
    if a == 0:
        raise ValueError("residue is 0 mod p")
    return pow(a, (p - 1) // 2, p) == 1


def factored(q: FactoredInteger) -> dict[int, int]:
    if isinstance(q, Mapping):
        return {int(p): int(e) for p, e in q.items() if e}
    q = int(q)
    if q < 1:
        raise ValueError("q must be >= 1")
    return {int(p): int(e) for p, e in factorint(q).items()}


def _delta_p_unit(p: int, c4: int, c6: int, delta: int | None, k: int) -> int:
    """Delta / p^k mod p."""
    if delta is not None:
        return (delta // p**k) % p
    d = c4**3 - c6**2
    return (d // p**k) * pow(1728, -1, p) % p


def _valuations(p: int, c4: int, c6: int, delta: int | None) -> tuple[int, int, int]:
    _check_prime(p)
    d = c4**3 - c6**2
    if delta is not None and 1728 * delta != d:
        raise ValueError("delta does not satisfy 1728 delta = c4^3 - c6^2")
    if d == 0:
        raise ValueError("singular model (delta = 0)")
    k = valuation(d, p)
    v4 = valuation(c4, p) if c4 else 10**9
    v6 = valuation(c6, p) if c6 else 10**9
    if v4 >= 4 and v6 >= 6:
        raise NonMinimalError(f"model is not minimal at {p}")
    return v4, v6, k


# ---------------------------------------------------------------- classification


def classify(p: int, c4: int, c6: int, delta: int | None = None) -> KodairaClass:
    """Kodaira type at p >= 5 read off from v_p(c4), v_p(c6), v_p(Delta)."""
    v4, v6, k = _valuations(p, c4, c6, delta)
    if k == 0:
        return KodairaClass(GOOD)
    if v4 == 0:
        return KodairaClass(I_N, k)
    if k == 2:
        return KodairaClass(II)
    if k == 3:
        return KodairaClass(III)
    if k == 4:
        return KodairaClass(IV)
    if k == 6:
        return KodairaClass(I0_STAR)
    if k >= 7 and v4 == 2 and v6 == 3:
        return KodairaClass(I_N_STAR, k - 6)
    if v4 >= 3 and v6 >= 4:
        if k == 8:
            return KodairaClass(IV_STAR)
        if k == 9:
            return KodairaClass(III_STAR)
        if k == 10:
            return KodairaClass(II_STAR)
    raise ValueError(f"valuations (v4, v6, vD) = ({v4}, {v6}, {k}) do not occur for a minimal model")


def _cubic_roots_mod_p(a: int, b: int, p: int) -> int:
    """Number of roots of x^3 - a x - b in F_p."""
    x = np.arange(p, dtype=np.int64)
    return int(np.count_nonzero(((x * x % p) * x - a * x - b) % p == 0))


def tamagawa(p: int, c4: int, c6: int, delta: int | None = None) -> int:
    kod = classify(p, c4, c6, delta)
    t, k = kod.tag, kod.k
    if t == GOOD:
        return 1
    if t == I_N:
        if is_square_mod(-c6, p):
            return k
        return 1 if k % 2 else 2
    if t in (II, II_STAR):
        return 1
    if t in (III, III_STAR):
        return 2
    if t == IV:
        return 3 if is_square_mod(-6 * (c6 // p**2), p) else 1
    if t == IV_STAR:
        return 3 if is_square_mod(-6 * (c6 // p**4), p) else 1
    if t == I0_STAR:
        roots = _cubic_roots_mod_p(27 * (c4 // p**2) % p, 54 * (c6 // p**3) % p, p)
        return {0: 1, 1: 2, 3: 4}[roots]
    # I*_{m}, v_p(Delta) = m + 6
    vd = k + 6
    u = _delta_p_unit(p, c4, c6, delta, vd)
    if vd % 2:
        return 4 if is_square_mod((c6 // p**3) * u, p) else 2
    return 4 if is_square_mod(u, p) else 2


def local_datum(p: int, c4: int, c6: int, delta: int | None = None) -> LocalDatum:
    kod = classify(p, c4, c6, delta)
    k = valuation(c4**3 - c6**2, p)
    return LocalDatum(p, kod, k, tamagawa(p, c4, c6, delta))


# ---------------------------------------------------------------- reduction laws


def kappa(p: int) -> Fraction:
    return Fraction(p**10, p**10 - 1)


def prob_m(p: int, k: int) -> Fraction:
    """Multiplicative reduction with p^k || Delta (k >= 1)."""
    _check_prime(p)
    if k < 1:
        return Fraction(0)
    q = Fraction(1, p)
    return kappa(p) * (1 - q) ** 2 * q**k


def prob_a_n(p: int, k: int) -> Fraction:
    """Additive, not a quadratic twist of multiplicative/good: types II, III, IV, IV*, III*, II*."""
    _check_prime(p)
    q = Fraction(1, p)
    if k in (2, 3, 4):
        return kappa(p) * (1 - q) * q**k
    if k in (8, 9, 10):
        return kappa(p) * (1 - q) * q ** (k - 1)
    return Fraction(0)


def prob_a_t(p: int, k: int) -> Fraction:
    """Additive twist types: I0* (k = 6) and I*_{k-6} (k >= 7)."""
    _check_prime(p)
    q = Fraction(1, p)
    if k == 6:
        return kappa(p) * (1 - q) * q**5
    if k >= 7:
        return kappa(p) * (1 - q) ** 2 * q ** (k - 1)
    return Fraction(0)


def prob_a(p: int, k: int) -> Fraction:
    return prob_a_n(p, k) + prob_a_t(p, k)


def prob_0(p: int, k: int) -> Fraction:
    """Good reduction (only k = 0)."""
    _check_prime(p)
    return kappa(p) * (1 - Fraction(1, p)) if k == 0 else Fraction(0)


# Beyond this k only the I_k and I*_k families contribute, each geometric in 1/p.
_FINITE_K = 11


def _row(p: int, k: int) -> Fraction:
    return prob_m(p, k) + prob_a_n(p, k) + prob_a_t(p, k) + prob_0(p, k)


def completeness_check(p: int) -> Fraction:
    """Sum over all k of P_m + P_a^n + P_a^t + P_0, geometric tails summed exactly."""
    _check_prime(p)
    head = sum((_row(p, k) for k in range(_FINITE_K)), Fraction(0))
    first, second = _row(p, _FINITE_K), _row(p, _FINITE_K + 1)
    ratio = second / first
    if ratio != Fraction(1, p) or _row(p, _FINITE_K + 2) != second * ratio:
        raise ArithmeticError("tail is not geometric")
    return head + first / (1 - ratio)


# ---------------------------------------------------------------- sqrt-Tamagawa averages


def epsilon_m(k: int) -> float:
    if k < 1:
        return 0.0
    return (1 + math.sqrt(k)) / 2 if k % 2 else (math.sqrt(2) + math.sqrt(k)) / 2


_EPS_AN = {2: 1.0, 3: math.sqrt(2), 4: (1 + math.sqrt(3)) / 2,
           8: (1 + math.sqrt(3)) / 2, 9: math.sqrt(2), 10: 1.0}


def epsilon_a_n(k: int) -> float:
    return _EPS_AN.get(k, 0.0)


def epsilon_a_t(p: int, k: int) -> float:
    if k == 6:
        return 2 / 3 + math.sqrt(2) / 2 - 1 / (3 * p)
    if k >= 7:
        return (math.sqrt(2) + 2) / 2
    return 0.0


def i0_star_root_census(p: int) -> dict[int, int]:
    """Count depressed cubics x^3 - a x - b over F_p with nonzero discriminant, by number of roots.

    These are exactly the reductions seen on I0* fibres.
    """
    _check_prime(p)
    x = np.arange(p, dtype=np.int64)
    cubes = x * x % p * x % p
    counts = {0: 0, 1: 0, 3: 0}
    for a in range(p):
        roots_per_b = np.bincount((cubes - a * x) % p, minlength=p)
        for b in range(p):
            if (4 * a**3 - 27 * b * b) % p:
                counts[int(roots_per_b[b])] += 1
    return counts


def i0_star_sqrt_tamagawa_average(p: int) -> tuple[Fraction, Fraction]:
    """Average of sqrt(t) over I0* fibres as (rational part, coefficient of sqrt 2).

    t = 1, 2, 4 for 0, 1, 3 roots of the cubic.
    """
    c = i0_star_root_census(p)
    n = sum(c.values())
    return Fraction(c[0] + 2 * c[3], n), Fraction(c[1], n)


def _sqrt_k_series(p: int, start: int, parity: int | None = None, tol: float = 1e-18) -> float:
    """Sum over k >= start (optionally of one parity) of sqrt(k) p^-k, summed until negligible."""
    total, k = 0.0, start
    step = 1 if parity is None else 2
    if parity is not None and k % 2 != parity:
        k += 1
    terms = []
    while True:
        t = math.sqrt(k) * float(p) ** (-k)
        terms.append(t)
        # remaining terms are bounded by a geometric series with ratio sqrt((k+step)/k) p^-step
        r = math.sqrt((k + step) / k) * float(p) ** (-step)
        if t * r / (1 - r) < tol * max(total, 1e-300) or t == 0.0:
            break
        total += t
        k += step
    return math.fsum(terms)


@lru_cache(maxsize=None)
def expected_sqrt_tamagawa_local(p: int) -> float:
    """K(p): expected sqrt of the Tamagawa number at p.

    The I*_k family is geometric and summed in closed form. The I_k family
    carries sqrt(k), whose series has no elementary closed form; it is summed
    directly until the remaining terms are below double precision.
    """
    _check_prime(p)
    q = 1.0 / p
    kap = float(kappa(p))
    terms = [float(prob_0(p, 0))]
    for k in range(2, 11):
        terms.append(float(prob_a_n(p, k)) * epsilon_a_n(k))
    terms.append(float(prob_a_t(p, 6)) * epsilon_a_t(p, 6))
    # I*_{k-6}, k >= 7: kappa (1-q)^2 q^(k-1) (2+sqrt2)/2, geometric from q^6
    terms.append(kap * (1 - q) ** 2 * (math.sqrt(2) + 2) / 2 * q**6 / (1 - q))
    # I_k: kappa (1-q)^2 q^k (c_k + sqrt k)/2, c_k = 1 (k odd), sqrt2 (k even)
    odd = q / (1 - q * q)
    even = q * q / (1 - q * q)
    terms.append(kap * (1 - q) ** 2 * 0.5 * (odd + math.sqrt(2) * even + _sqrt_k_series(p, 1)))
    return math.fsum(terms)


def primes_from_5(p_max: int) -> list[int]:
    return [int(p) for p in primerange(5, p_max + 1)]


def beta_tau(p_max: int) -> float:
    """Product of K(p) over 5 <= p <= p_max."""
    if p_max < 5:
        raise ValueError("p_max must be >= 5")
    logs = [math.log(expected_sqrt_tamagawa_local(p)) for p in primes_from_5(p_max)]
    value = math.exp(math.fsum(logs))
    log.debug("beta_tau(%d) = %.15g, tail estimate %.3g", p_max, value, beta_tau_tail(p_max))
    return value


def beta_tau_tail(p_max: int) -> float:
    """Estimate of log(beta_tau(inf) / beta_tau(p_max)) from K(p) - 1 ~ C / p^2.

    C is taken as the largest p^2 (K(p) - 1) seen on primes up to p_max
    (at most 1000 of them); the sum over p > p_max of 1/p^2 is bounded by
    the sum over integers, 1/p_max.
    """
    ps = primes_from_5(min(p_max, 10_000))[-1000:]
    C = max(p * p * (expected_sqrt_tamagawa_local(p) - 1) for p in ps)
    return C / p_max


# ---------------------------------------------------------------- D/N law


def e_factor(p: int, v: int) -> Fraction:
    """E_p(v) = P_m(p, v+1) + P_a(p, v+2) + P_0(p, v)."""
    return prob_m(p, v + 1) + prob_a(p, v + 2) + prob_0(p, v)


@lru_cache(maxsize=1)
def ratio_constant() -> TaggedRational:
    """Product over p >= 5 of E_p(0) = kappa_p (1 - p^-2), in closed form.

    prod_{p>=5} (1-p^-2) / (1-p^-10) = [zeta(10)/zeta(2)] / [(1-2^-2)(1-3^-2)] * [(1-2^-10)(1-3^-10)]
                                     = pi^8 * 9 * 1023 * 59048 / (93555 * 1024 * 59049).
    """
    r = Fraction(9, 93555) * Fraction(1023, 1024) * Fraction(59048, 59049)
    return TaggedRational(r, "pi^8", math.pi**8)


def _check_rough(fq: dict[int, int]) -> None:
    for p in fq:
        if p in (2, 3):
            raise UnsupportedPrimeError(f"q has prime factor {p}; D/N law is for p >= 5")


def prob_ratio(q: FactoredInteger) -> TaggedRational:
    """f_hat(q) = Prob[D/N = q] = prod_p E_p(v_p(q)), exact up to the pi^8 factor."""
    fq = factored(q)
    _check_rough(fq)
    base = ratio_constant()
    r = base.rational
    for p, v in fq.items():
        r *= e_factor(p, v) / e_factor(p, 0)
    return TaggedRational(r, base.tag, base.tag_value)


def prob_ratio_truncated(q: FactoredInteger, p_max: int) -> float:
    """Direct product of E_p(v_p(q)) over 5 <= p <= p_max (independent of the closed form)."""
    fq = factored(q)
    _check_rough(fq)
    logs = [math.log(float(e_factor(p, fq.get(p, 0)))) for p in primes_from_5(p_max)]
    for p, v in fq.items():
        if p > p_max:
            logs.append(math.log(float(e_factor(p, v))))
    return math.exp(math.fsum(logs))


def eta_factor(p: int, v: int) -> float:
    v1, v2 = v + 1, v + 2
    num = (epsilon_m(v1) * float(prob_m(p, v1)) + epsilon_a_n(v2) * float(prob_a_n(p, v2))
           + epsilon_a_t(p, v2) * float(prob_a_t(p, v2)) + float(prob_0(p, v)))
    return num / float(e_factor(p, v))


def eta(q: FactoredInteger) -> float:
    """Expected sqrt of the Tamagawa product given D/N = q.

    The factor at a prime not dividing q is exactly 1 (epsilon_m(1) =
    epsilon_a^n(2) = 1), so the product is finite.
    """
    fq = factored(q)
    _check_rough(fq)
    return math.prod(eta_factor(p, v) for p, v in fq.items())


def rough_numbers(q_max: int) -> list[int]:
    """Integers 1 <= q <= q_max coprime to 6."""
    return [q for q in range(1, q_max + 1) if q % 2 and q % 3]


@dataclass(frozen=True)
class ConductorConstant:
    c: float
    q_sum: float
    q_max: int
    euler_product: float
    euler_tail_log: float
    p_max: int
    comparison_bound: float
    c_euler: float


def _euler_factor_56(p: int) -> float:
    """sum_v p^(5v/6) E_p(v) / E_p(0).

    For v >= 9 only I_{v+1} and I*_{v-4} contribute, E_p(v) = 2 kappa (1-1/p)^2 p^(-v-1),
    so the tail is geometric with ratio p^(-1/6) and is summed in closed form.
    """
    e0 = float(e_factor(p, 0))
    terms = [p ** (5 * v / 6) * float(e_factor(p, v)) / e0 for v in range(9)]
    r = p ** (-1 / 6)
    first = p ** (5 * 9 / 6) * 2 * float(kappa(p)) * (1 - 1 / p) ** 2 * float(p) ** (-10) / e0
    terms.append(first / (1 - r))
    return math.fsum(terms)


def comparison_bound(p_max: int = 100_000) -> float:
    """Upper bound prod_{p>=5} (1 + (3/p)/(p^(1/6) - 1)) for sum_q q^(5/6) f_hat(q).

    Primes beyond p_max are over-counted by all integers coprime to 6, so the
    result is a rigorous (if loose) bound.
    """
    f = lambda x: 3.0 / (x * (x ** (1 / 6) - 1))
    logs = [math.log1p(f(p)) for p in primes_from_5(p_max)]
    # two integers coprime to 6 per block of six, f decreasing
    # x = p_max e^u tames the slow x^(-7/6) decay
    r = p_max ** (1 / 6)
    tail = 2 * f(p_max) + quadrature(lambda u: 3 * math.exp(-u / 6) / (r - math.exp(-u / 6)), 0.0).value / 3
    return math.exp(math.fsum(logs) + tail)


def conductor_count_constant(p_max: int = 100_000, q_max: int = 1000) -> ConductorConstant:
    """c in B(X) ~ c X^(5/6), counted over minimal models.

    Two routes: the partial sum alpha/zeta(10) sum_{q<=q_max} q^(5/6) f_hat(q),
    and the Euler product prod_p sum_v p^(5v/6) E_p(v) truncated at p_max with
    an estimate of the remaining log-mass (terms ~ p^(-7/6)). The partial
    q-sum converges slowly, like q_max^(-1/6) / log q_max.
    """
    k = alpha_constants()
    alpha = (k.alpha_plus + k.alpha_minus) / k.zeta10
    base = ratio_constant()
    q_terms = [q ** (5 / 6) * float(prob_ratio(q).rational) for q in rough_numbers(q_max)]
    q_sum = math.fsum(q_terms) * base.tag_value
    logs = [math.log(_euler_factor_56(p)) for p in primes_from_5(p_max)]
    # leading term of log(factor) is p^(5/6) E_p(1)/E_p(0) ~ p^(-7/6); primes have density 1/log x
    # log factor ~ x^(-7/6) (1-1/x)^2 / ((1-x^-2)(1-x^(-1/6))); with x = p_max e^u
    # and prime density 1/log x the integrand below is that times x / log x
    lp = math.log(p_max)
    def g(u):
        w = math.exp(-u) / p_max
        s = p_max ** (-1 / 6) * math.exp(-u / 6)
        return s * (1 - w) / ((1 + w) * (1 - s) * (lp + u))
    tail = quadrature(g, 0.0).value
    euler = float(base) * math.exp(math.fsum(logs))
    return ConductorConstant(alpha * q_sum, q_sum, q_max, euler, tail, p_max, comparison_bound(),
                             alpha * euler * math.exp(tail))


def predicted_B(X: float, constant: ConductorConstant | None = None) -> float:
    if constant is None:
        constant = conductor_count_constant()
    return constant.c * X ** (5 / 6)


def tail_probability_bound(Y: float, grid: int = 99, p_max: int = 100_000) -> tuple[float, float]:
    """Rankin bound on Prob[D/N >= Y]; returns (bound, best alpha).

    For each alpha on a grid in (0, 1): Y^(alpha-1) prod_{p>=5} (1 + (3/p)/(p^alpha - 1)),
    with the primes beyond p_max over-counted by integers coprime to 6.
    """
    if Y < 2:
        raise ValueError("Y must be >= 2")
    best = (math.inf, math.nan)
    for a in np.linspace(0.01, 0.99, grid):
        b = rankin_value(Y, float(a), p_max)
        if b < best[0]:
            best = (b, float(a))
    return best


@lru_cache(maxsize=4096)
def _rankin_log_product(alpha: float, p_max: int) -> float:
    ps = np.array(primes_from_5(p_max), dtype=float)
    head = float(np.sum(np.log1p(3.0 / (ps * (ps**alpha - 1)))))
    P = float(p_max)
    f_P = 3.0 / (P * (P**alpha - 1))
    # integral of 3/(x (x^a - 1)) from P to inf = (3/a) log(1 / (1 - P^-a))
    integral = 3.0 / alpha * -math.log1p(-(P ** -alpha))
    return head + 2 * f_P + integral / 3


def rankin_value(Y: float, alpha: float, p_max: int = 100_000) -> float:
    return Y ** (alpha - 1) * math.exp(_rankin_log_product(round(alpha, 12), p_max))


# ---------------------------------------------------------------- squarefree kernel law


def sqfree_ratio_prob(q: FactoredInteger) -> TaggedRational:
    """Prob[n / sqfree(n) = q] = (6/pi^2) (1/q) prod_{p | q} 1/(p+1)."""
    fq = factored(q)
    n = math.prod(p**e for p, e in fq.items())
    r = Fraction(1, n)
    for p in fq:
        r /= p + 1
    return TaggedRational(r, "6/pi^2", 6 / math.pi**2)


def sqfree_ratio_frequencies(N: int, qs) -> dict[int, Fraction]:
    """Empirical frequency of n / rad(n) = q over 1 <= n <= N, by sieve."""
    rad = np.ones(N + 1, dtype=np.int64)
    sieve = np.ones(N + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, N + 1):
        if sieve[p]:
            sieve[p * p::p] = False
            rad[p::p] *= p
    ratio = np.arange(N + 1, dtype=np.int64)[1:] // rad[1:]
    return {q: Fraction(int(np.count_nonzero(ratio == q)), N) for q in qs}
