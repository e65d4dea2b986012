"""Pure-Python versions of the compiled kernels (same signatures, same results)."""

import math
from math import gcd, isqrt


def _isqrt_ceil(n):
    if n <= 0:
        return 0
    s = isqrt(n)
    return s if s * s == n else s + 1


def _divides_power(x, p, e):
    return x % p**e == 0


def is_minimal_c(c4, c6, adm):
    g = gcd(c4, c6)
    if g < 16:
        return True
    if c4 % 16 == 0 and c6 % 64 == 0 and adm[(c4 // 16) % 576, (c6 // 64) % 1728]:
        return False
    if c4 % 81 == 0 and c6 % 729 == 0 and adm[(c4 // 81) % 576, (c6 // 729) % 1728]:
        return False
    while g % 2 == 0:
        g //= 2
    while g % 3 == 0:
        g //= 3
    p = 5
    while p**4 <= g:
        if g % p == 0:
            if _divides_power(c4, p, 4) and _divides_power(c6, p, 6):
                return False
            while g % p == 0:
                g //= p
        p += 2
    return True


def enumerate_stripe(c4_lo, c4_hi, x_bound, adm, res_ptr, res_val, out_c4, out_c6, out_delta):
    cap = len(out_c4)
    n = 0
    span = 1728 * (x_bound - 1)
    c4 = c4_lo
    while c4 < c4_hi:
        r4 = c4 % 576
        j0, j1 = int(res_ptr[r4]), int(res_ptr[r4 + 1])
        if j0 == j1:
            c4 += 1
            continue
        residues = [int(r) for r in res_val[j0:j1]]
        found = []
        c3 = c4 * c4 * c4
        for sgn in (1, -1):
            if sgn == 1:
                if c3 < 1728:
                    continue
                hi = isqrt(c3 - 1728)
                lo = _isqrt_ceil(c3 - span)
            else:
                t = c3 + span
                if t < 0:
                    continue
                hi = isqrt(t)
                lo = _isqrt_ceil(c3 + 1728)
            if lo > hi:
                continue
            for r in residues:
                for c6 in range(lo + (r - lo) % 1728, hi + 1, 1728):
                    if is_minimal_c(c4, c6, adm):
                        found.append(c6)
                for c6 in range(-hi + (r + hi) % 1728, -lo + 1, 1728):
                    if c6 != 0 and is_minimal_c(c4, c6, adm):
                        found.append(c6)
        if n + len(found) > cap:
            return n, c4
        for c6 in found:
            out_c4[n] = c4
            out_c6[n] = c6
            out_delta[n] = (c3 - c6 * c6) // 1728
            n += 1
        c4 += 1
    return n, c4


def frobenius_trace(a1, a2, a3, a4, a6, p):
    if p == 2:
        count = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                    count += 1
        return p + 1 - count
    b2 = (a1 * a1 + 4 * a2) % p
    b4 = (2 * a4 + a1 * a3) % p
    b6 = (a3 * a3 + 4 * a6) % p
    chi = [-1] * p
    chi[0] = 0
    for x in range(1, p):
        chi[x * x % p] = 1
    total = 0
    for x in range(p):
        total += chi[(((4 * x + b2) * x + 2 * b4) * x + b6) % p]
    return -total


def reduce_batch(g11, g12, g22, out_x, out_y, max_iter=10000):
    failures = 0
    for i in range(len(g11)):
        a, b, c = float(g11[i]), float(g12[i]), float(g22[i])
        det = a * c - b * b
        if a <= 0 or c <= 0 or det <= 0:
            out_x[i] = 0.0
            out_y[i] = -1.0
            failures += 1
            continue
        if c < a:
            a, b, c = c, -b, a
        for _ in range(max_iter):
            m = math.floor(b / a + 0.5)
            b, c = b - m * a, c - 2.0 * m * b + m * m * a
            if c < a:
                a, b, c = c, -b, a
            else:
                break
        if abs(b) > 0.5 * a:
            m = math.floor(b / a + 0.5)
            b, c = b - m * a, c - 2.0 * m * b + m * m * a
        out_x[i] = abs(b) / a
        out_y[i] = math.sqrt(det) / a
    return failures
