"""Real periods by AGM, root-quotient coordinates, and the scale-free period profiles.

The cubic is always the centred one, 4x^3 - (c4/12) x - c6/216, whose roots
are the roots of 4x^3 + b2 x^2 + 2 b4 x + b6 shifted by b2/12. For that
cubic 16 * prod (e_i - e_j)^2 = delta.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext

from .curve import C4C6Model, Curve
from .special import agm, agm_complex, complex_step, maximize_1d, quadrature

CurveLike = Curve | C4C6Model


class SingularCurveError(ValueError):
    """delta = 0: no period."""


class SignError(ValueError):
    """Operation defined only for the other sign of the discriminant."""


@dataclass(frozen=True)
class RootData:
    """Roots of the centred cubic.

    For delta > 0, e1 > e2 > e3, with the gaps g12 = e1-e2 and g13 = e1-e3
    carried separately because they are computed before rounding to double.
    For delta < 0, r is the real root and -r/2 +- iZ the complex pair.
    """

    sign: int
    delta: int
    e1: float | None = None
    e2: float | None = None
    e3: float | None = None
    g12: float | None = None
    g13: float | None = None
    r: float | None = None
    Z: float | None = None

    @property
    def c(self) -> float:
        if self.sign > 0:
            raise SignError("c is defined for delta < 0")
        return self.r / self.Z

    @property
    def C(self) -> float:
        return 0.5 + math.atan(self.c) / math.pi

    @property
    def t(self) -> float:
        if self.sign < 0:
            raise SignError("t is defined for delta > 0")
        return self.g12 / self.g13


def _c4c6(curve: CurveLike) -> tuple[int, int, int]:
    c4, c6 = curve.c4, curve.c6
    delta = curve.delta
    if delta == 0:
        raise SingularCurveError(f"singular model (c4, c6) = ({c4}, {c6})")
    return c4, c6, delta


_WORK_DIGITS = 50


def _polish(x: float, p: Decimal, q: Decimal) -> Decimal:
    # Newton on x^3 + p x + q in 50-digit decimal; the double start is
    # already within a few ulps, so three steps reach full working precision
    # unless two roots are closer than ~1e-20 relative.
    x = Decimal(x)
    for _ in range(3):
        d = 3 * x * x + p
        if d == 0:
            break
        x -= ((x * x + p) * x + q) / d
    return x


def _float_roots(p: float, q: float, positive: bool) -> list[float]:
    if positive:
        m = 2 * math.sqrt(-p / 3)
        arg = 3 * q / (p * m)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3
        return [m * math.cos(theta - 2 * math.pi * k / 3) for k in range(3)]
    # one real root: Cardano arranged so the two cube roots do not cancel
    s = math.sqrt(q * q / 4 + p**3 / 27)
    w = -q / 2 - math.copysign(s, q)
    A = math.copysign(abs(w) ** (1 / 3), w)
    return [A - p / (3 * A) if A != 0 else 0.0]


def real_roots(curve: CurveLike) -> RootData:
    c4, c6, delta = _c4c6(curve)
    with localcontext() as ctx:
        ctx.prec = _WORK_DIGITS
        # monic form x^3 + p x + q of 4x^3 - (c4/12)x - c6/216
        p = Decimal(-c4) / 48
        q = Decimal(-c6) / 864
        approx = _float_roots(float(p), float(q), delta > 0)
        roots = sorted((_polish(x, p, q) for x in approx), reverse=True)
        if delta > 0:
            e1, e2, e3 = roots
            return RootData(1, delta, e1=float(e1), e2=float(e2), e3=float(e3),
                            g12=float(e1 - e2), g13=float(e1 - e3))
        r = roots[0]
        # complex pair -r/2 +- iZ; Z^2 = 3r^2/4 + p (exact enough at 50 digits)
        z2 = 3 * r * r / 4 + p
        return RootData(-1, delta, r=float(r), Z=float(z2.sqrt()))


def _agm_period_pos(rd: RootData) -> float:
    return math.pi / agm(math.sqrt(rd.g12), math.sqrt(rd.g13))


def real_period(curve: CurveLike) -> float:
    """Least positive real period of the invariant differential.

    delta > 0: pi / agm(sqrt(e1-e2), sqrt(e1-e3)).
    delta < 0: the closed form in c = r/Z, divided by |delta|^(1/12).
    """
    rd = real_roots(curve)
    if rd.sign > 0:
        return _agm_period_pos(rd)
    return profile_neg(rd.c) / abs(rd.delta) ** (1 / 12)


def real_period_quadrature(curve: CurveLike) -> float:
    """Independent route: 2 * int_{e_max}^inf dx / sqrt(4x^3 - (c4/12)x - c6/216).

    With x = e_max + s^2 the endpoint singularity disappears and the
    integrand is 2 / sqrt(Q(e_max + s^2)) for the quadratic cofactor Q.
    """
    rd = real_roots(curve)
    if rd.sign > 0:
        g12, g13 = rd.g12, rd.g13

        def f(s):
            u = s * s
            return 2.0 / math.sqrt((u + g12) * (u + g13))
    else:
        r, Z = rd.r, rd.Z

        def f(s):
            # (x + r/2)^2 + Z^2 at x = r + s^2
            d = s * s + 1.5 * r
            return 2.0 / math.sqrt(d * d + Z * Z)
    if rd.sign > 0:
        cuts = [0.0, math.sqrt(rd.g13)]
    elif rd.r < 0:
        # sharp peak of height 2/Z where s^2 = -3r/2; put a breakpoint on it
        peak = math.sqrt(-1.5 * rd.r)
        cuts = [0.0, peak, 2 * peak]
    else:
        cuts = [0.0, math.sqrt(math.hypot(1.5 * rd.r, rd.Z))]
    pieces = [quadrature(f, a, b, tol=0.0, rtol=1e-11, limit=400) for a, b in zip(cuts, cuts[1:])]
    pieces.append(quadrature(f, cuts[-1], tol=0.0, rtol=1e-11, limit=400))
    return math.fsum(p.value for p in pieces)


def root_quotient(curve: CurveLike) -> float:
    rd = real_roots(curve)
    if rd.sign < 0:
        raise SignError("root quotient t needs delta > 0")
    return rd.t


def c_param(curve: CurveLike) -> float:
    """C = 1/2 + arctan(c)/pi in (0, 1) for delta < 0."""
    rd = real_roots(curve)
    if rd.sign > 0:
        raise SignError("C parameter needs delta < 0")
    return rd.C


# ---------------------------------------------------------------- profiles


def _profile_pos(t):
    sq = cmath.sqrt(t) if isinstance(t, complex) else math.sqrt(t)
    m = agm_complex(1, sq) if isinstance(t, complex) else agm(1.0, sq)
    return 2 ** (1 / 3) * math.pi * (t - t * t) ** (1 / 6) / m


def profile_pos(t: float) -> float:
    """Omega * delta^(1/12) as a function of the root quotient t in (0, 1)."""
    if not 0 < t < 1:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    return _profile_pos(float(t))


def _profile_neg(c):
    cplx = isinstance(c, complex)
    sqrt = cmath.sqrt if cplx else math.sqrt
    s = sqrt(1 + 9 * c * c / 4)
    # 1/2 + 3c/(4s), rewritten for c < 0 where the two terms cancel
    if c.real < 0:
        inner = 1 / (s * (2 * s - 3 * c))
    else:
        inner = 0.5 + 3 * c / (4 * s)
    m = agm_complex(1, sqrt(inner)) if cplx else agm(1.0, sqrt(inner))
    return math.pi * math.sqrt(2) / ((1 + 9 * c * c / 4) ** (1 / 12) * m)


def profile_neg(c: float) -> float:
    """Omega * |delta|^(1/12) as a function of c = r/Z for delta < 0."""
    if not math.isfinite(c):
        raise ValueError("profile_neg needs finite c")
    return _profile_neg(float(c))


@dataclass(frozen=True)
class ProfileMaximum:
    argmax: float
    value: float


def profile_pos_maximum(tol: float = 1e-12) -> ProfileMaximum:
    x, v = maximize_1d(profile_pos, 1e-6, 0.5, tol=tol, fprime=complex_step(_profile_pos))
    return ProfileMaximum(x, v)


def profile_neg_maximum(tol: float = 1e-12) -> ProfileMaximum:
    x, v = maximize_1d(profile_neg, -200.0, 0.0, tol=tol, fprime=complex_step(_profile_neg))
    return ProfileMaximum(x, v)


# ---------------------------------------------------------------- (lambda, mu)


def lambda_of_mu(mu: float) -> float:
    """Positive root of mu*lam*(lam+mu) = 1/4, in a cancellation-free form."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    return 0.5 / (math.sqrt(mu**4 + mu) + mu * mu)


def lambda_of_mu_direct(mu: float) -> float:
    """The same root written as (sqrt(mu^4+mu) - mu^2) / (2mu)."""
    return (math.sqrt(mu**4 + mu) - mu * mu) / (2 * mu)


def mu_coordinates(curve: CurveLike) -> tuple[float, float]:
    """(lam, mu) with e1-e2 = delta^(1/6) lam and e2-e3 = delta^(1/6) mu."""
    rd = real_roots(curve)
    if rd.sign < 0:
        raise SignError("mu coordinates need delta > 0")
    s = rd.delta ** (1 / 6)
    return rd.g12 / s, (rd.g13 - rd.g12) / s


def c4_from_mu(delta: float, lam: float, mu: float) -> float:
    return 16 * delta ** (1 / 3) * (mu * mu + lam * mu + lam * lam)


def c6_from_mu(delta: float, lam: float, mu: float) -> float:
    return -32 * math.sqrt(delta) * (mu + 2 * lam) * (mu - lam) * (2 * mu + lam)
