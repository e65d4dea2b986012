"""Integral Weierstrass models, c-invariants, and the 288 admissible classes.

Everything here is exact integer arithmetic. The admissible (c4 mod 576,
c6 mod 1728) classes are generated by brute force from a-invariants rather
than copied from a table.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from math import gcd
from typing import NamedTuple

import numpy as np

C4_MODULUS = 576
C6_MODULUS = 1728


class InadmissibleError(ValueError):
    """(c4, c6) is not the pair of c-invariants of any integral model."""


class CongruenceClass(NamedTuple):
    c4_res: int
    c6_res: int


@dataclass(frozen=True)
class Curve:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    b2: int = field(init=False)
    b4: int = field(init=False)
    b6: int = field(init=False)
    b8: int = field(init=False)
    c4: int = field(init=False)
    c6: int = field(init=False)
    delta: int = field(init=False)

    def __post_init__(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        c4 = b2 * b2 - 24 * b4
        c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
        delta = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        for name, value in (("b2", b2), ("b4", b4), ("b6", b6), ("b8", b8),
                            ("c4", c4), ("c6", c6), ("delta", delta)):
            object.__setattr__(self, name, value)

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def singular(self) -> bool:
        return self.delta == 0

    @property
    def c_model(self) -> "C4C6Model":
        return C4C6Model(self.c4, self.c6)

    def to_csv(self) -> str:
        return ",".join(str(a) for a in self.ainvs)

    @classmethod
    def parse(cls, text: str) -> "Curve":
        """Parse ``"a1,a2,a3,a4,a6"`` (brackets and spaces tolerated)."""
        parts = [s for s in text.strip().strip("[]").replace(" ", "").split(",") if s]
        if len(parts) != 5:
            raise ValueError(f"expected 5 a-invariants, got {text!r}")
        return cls(*(int(s) for s in parts))


def from_a_invariants(a1: int, a2: int, a3: int, a4: int, a6: int) -> Curve:
    """Build a curve; singular models are allowed and flagged via ``.singular``."""
    return Curve(int(a1), int(a2), int(a3), int(a4), int(a6))


def discriminant_of(c4: int, c6: int) -> int:
    num = c4**3 - c6**2
    if num % 1728:
        raise InadmissibleError(f"1728 does not divide c4^3 - c6^2 for ({c4}, {c6})")
    return num // 1728


@dataclass(frozen=True)
class C4C6Model:
    c4: int
    c6: int

    @property
    def delta(self) -> int:
        return discriminant_of(self.c4, self.c6)

    @property
    def congruence_class(self) -> CongruenceClass:
        return CongruenceClass(self.c4 % C4_MODULUS, self.c6 % C6_MODULUS)

    def scaled(self, u: int) -> "C4C6Model":
        return C4C6Model(u**4 * self.c4, u**6 * self.c6)


_lock = threading.Lock()
_classes: frozenset[CongruenceClass] | None = None
_table: np.ndarray | None = None


def _brute_force_classes() -> frozenset[CongruenceClass]:
    # a4 mod 24 and a6 mod 2 already fix c4 mod 576 and c6 mod 1728; a6 mod 8
    # is swept anyway to keep the ranges generous.
    found = set()
    for a1 in (0, 1):
        for a2 in (-1, 0, 1):
            for a3 in (0, 1):
                for a4 in range(24):
                    for a6 in range(8):
                        E = Curve(a1, a2, a3, a4, a6)
                        found.add(CongruenceClass(E.c4 % C4_MODULUS, E.c6 % C6_MODULUS))
    return frozenset(found)


def admissible_classes() -> frozenset[CongruenceClass]:
    global _classes, _table
    if _classes is None:
        with _lock:
            if _classes is None:
                classes = _brute_force_classes()
                table = np.zeros((C4_MODULUS, C6_MODULUS), dtype=np.uint8)
                for r4, r6 in classes:
                    table[r4, r6] = 1
                table.setflags(write=False)
                _table = table
                _classes = classes
    return _classes


def admissible_table() -> np.ndarray:
    """Read-only 576 x 1728 uint8 membership table."""
    admissible_classes()
    return _table


def is_admissible(c4: int, c6: int) -> bool:
    return CongruenceClass(c4 % C4_MODULUS, c6 % C6_MODULUS) in admissible_classes()


def _divisible(x: int, m: int) -> bool:
    return x % m == 0


def is_minimal(c4: int, c6: int) -> bool:
    """True iff no u > 1 makes (c4/u^4, c6/u^6) the invariants of an integral model.

    It suffices to test primes: for p >= 5 the condition is p^4 | c4 and
    p^6 | c6; for p = 2, 3 the quotient pair must itself be admissible.
    """
    if not is_admissible(c4, c6):
        raise InadmissibleError(f"({c4}, {c6}) is not an admissible pair")
    if c4**3 == c6**2:
        raise InadmissibleError("singular pair (delta = 0)")
    for p in (2, 3):
        if _divisible(c4, p**4) and _divisible(c6, p**6) and is_admissible(c4 // p**4, c6 // p**6):
            return False
    g = gcd(c4, c6)
    while g % 2 == 0:
        g //= 2
    while g % 3 == 0:
        g //= 3
    p = 5
    while p**4 <= g:
        if g % p == 0:
            if _divisible(c4, p**4) and _divisible(c6, p**6):
                return False
            while g % p == 0:
                g //= p
        p += 2
    return True


def curve_from_c4c6(c4: int, c6: int) -> Curve:
    """An integral model with the given c-invariants (the usual reduced a1, a3 in {0, 1} choice)."""
    if not is_admissible(c4, c6):
        raise InadmissibleError(f"({c4}, {c6}) is not an admissible pair")
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    b4 = (b2 * b2 - c4) // 24
    b6 = (-(b2**3) + 36 * b2 * b4 - c6) // 216
    a1 = b2 % 2
    a3 = b6 % 2
    E = Curve(a1, (b2 - a1) // 4, a3, (b4 - a1 * a3) // 2, (b6 - a3) // 4)
    if (E.c4, E.c6) != (c4, c6):
        raise InadmissibleError(f"no integral model found for ({c4}, {c6})")
    return E
