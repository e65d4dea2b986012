# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Behaviour must match ``_pykernels`` exactly."""

from libc.math cimport sqrtl, sqrt, floor
from libc.stdlib cimport malloc, free

cdef extern from *:
    ctypedef long long i128 "__int128"

ctypedef long long i64


cdef inline i64 _pmod(i64 a, i64 m) noexcept nogil:
    cdef i64 r = a % m
    if r < 0:
        r += m
    return r


cdef inline i64 _abs(i64 a) noexcept nogil:
    return -a if a < 0 else a


cdef inline i64 _gcd(i64 a, i64 b) noexcept nogil:
    cdef i64 t
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef inline i64 _isqrt(i128 n) noexcept nogil:
    # floor(sqrt(n)) for n >= 0
    cdef i64 s
    if n <= 0:
        return 0
    s = <i64> sqrtl(<long double> n)
    while (<i128> s) * s > n:
        s -= 1
    while (<i128> (s + 1)) * (s + 1) <= n:
        s += 1
    return s


cdef inline i64 _isqrt_ceil(i128 n) noexcept nogil:
    cdef i64 s
    if n <= 0:
        return 0
    s = _isqrt(n)
    if (<i128> s) * s < n:
        s += 1
    return s


cdef inline bint _divides_power(i64 x, i64 p, int e) noexcept nogil:
    cdef int i
    if x == 0:
        return True
    for i in range(e):
        if x % p:
            return False
        x = x // p
    return True


cdef bint _is_minimal(i64 c4, i64 c6, const unsigned char[:, ::1] adm) noexcept nogil:
    cdef i64 g = _gcd(_abs(c4), _abs(c6))
    cdef i64 p
    if g < 16:
        return True
    if c4 % 16 == 0 and c6 % 64 == 0:
        if adm[_pmod(c4 // 16, 576), _pmod(c6 // 64, 1728)]:
            return False
    if c4 % 81 == 0 and c6 % 729 == 0:
        if adm[_pmod(c4 // 81, 576), _pmod(c6 // 729, 1728)]:
            return False
    while g % 2 == 0:
        g = g // 2
    while g % 3 == 0:
        g = g // 3
    p = 5
    while p * p * p * p <= g:
        if g % p == 0:
            if _divides_power(c4, p, 4) and _divides_power(c6, p, 6):
                return False
            while g % p == 0:
                g = g // p
        p += 2
    return True


def is_minimal_c(i64 c4, i64 c6, const unsigned char[:, ::1] adm):
    return bool(_is_minimal(c4, c6, adm))


def enumerate_stripe(i64 c4_lo, i64 c4_hi, i64 x_bound,
                     const unsigned char[:, ::1] adm,
                     const int[::1] res_ptr, const int[::1] res_val,
                     i64[::1] out_c4, i64[::1] out_c6, i64[::1] out_delta):
    """Emit minimal (c4, c6) with c4_lo <= c4 < c4_hi and 0 < |delta| < x_bound.

    Returns ``(n_written, next_c4)``; ``next_c4 < c4_hi`` means the output
    buffers filled up and the caller must resume from ``next_c4``.
    """
    cdef i64 cap = out_c4.shape[0]
    cdef i64 n = 0, n_start
    cdef i64 c4 = c4_lo, c6, lo, hi, r
    cdef i128 c3, t, span
    cdef int sgn, j, r4
    cdef bint full = False
    span = (<i128> 1728) * (x_bound - 1)
    with nogil:
        while c4 < c4_hi:
            r4 = <int> _pmod(c4, 576)
            if res_ptr[r4] == res_ptr[r4 + 1]:
                c4 += 1
                continue
            n_start = n
            c3 = (<i128> c4) * c4 * c4
            for sgn in range(2):
                if sgn == 0:
                    # delta > 0: c3 - span <= c6^2 <= c3 - 1728
                    if c3 < 1728:
                        continue
                    hi = _isqrt(c3 - 1728)
                    t = c3 - span
                    lo = _isqrt_ceil(t)
                else:
                    # delta < 0: c3 + 1728 <= c6^2 <= c3 + span
                    t = c3 + span
                    if t < 0:
                        continue
                    hi = _isqrt(t)
                    lo = _isqrt_ceil(c3 + 1728)
                if lo > hi:
                    continue
                for j in range(res_ptr[r4], res_ptr[r4 + 1]):
                    r = res_val[j]
                    c6 = lo + _pmod(r - lo, 1728)
                    while c6 <= hi:
                        if _is_minimal(c4, c6, adm):
                            if n >= cap:
                                full = True
                                break
                            out_c4[n] = c4
                            out_c6[n] = c6
                            out_delta[n] = <i64> ((c3 - (<i128> c6) * c6) / 1728)
                            n += 1
                        c6 += 1728
                    if full:
                        break
                    c6 = -hi + _pmod(r + hi, 1728)
                    while c6 <= -lo:
                        if c6 != 0 and _is_minimal(c4, c6, adm):
                            if n >= cap:
                                full = True
                                break
                            out_c4[n] = c4
                            out_c6[n] = c6
                            out_delta[n] = <i64> ((c3 - (<i128> c6) * c6) / 1728)
                            n += 1
                        c6 += 1728
                    if full:
                        break
                if full:
                    break
            if full:
                n = n_start
                break
            c4 += 1
    return n, c4


def frobenius_trace(i64 a1, i64 a2, i64 a3, i64 a4, i64 a6, i64 p):
    """p + 1 - #E(F_p), singular points of the reduction included."""
    cdef i64 x, y, count, g, b2, b4, b6, lhs, rhs
    cdef signed char *chi
    if p == 2:
        count = 1
        for x in range(2):
            for y in range(2):
                lhs = y * y + a1 * x * y + a3 * y
                rhs = x * x * x + a2 * x * x + a4 * x + a6
                if _pmod(lhs - rhs, 2) == 0:
                    count += 1
        return p + 1 - count
    b2 = _pmod(a1 * a1 + 4 * a2, p)
    b4 = _pmod(2 * a4 + a1 * a3, p)
    b6 = _pmod(a3 * a3 + 4 * a6, p)
    chi = <signed char *> malloc(p * sizeof(signed char))
    if chi == NULL:
        raise MemoryError()
    try:
        with nogil:
            for x in range(p):
                chi[x] = -1
            chi[0] = 0
            for x in range(1, p):
                chi[(x * x) % p] = 1
            count = 0
            for x in range(p):
                g = (((4 * x + b2) % p) * x % p + 2 * b4) % p
                g = (g * x + b6) % p
                count += chi[g]
    finally:
        free(chi)
    return -count


def reduce_batch(const double[::1] g11, const double[::1] g12, const double[::1] g22,
                 double[::1] out_x, double[::1] out_y, int max_iter=10000):
    """Lagrange-reduce each positive definite form; returns the number of failures."""
    cdef Py_ssize_t i, n = g11.shape[0]
    cdef double a, b, c, m, det, bn, cn
    cdef int it, failures = 0
    with nogil:
        for i in range(n):
            a = g11[i]
            b = g12[i]
            c = g22[i]
            det = a * c - b * b
            if a <= 0 or c <= 0 or det <= 0:
                out_x[i] = 0.0
                out_y[i] = -1.0
                failures += 1
                continue
            if c < a:
                a, b, c = c, -b, a
            for it in range(max_iter):
                m = floor(b / a + 0.5)
                bn = b - m * a
                cn = c - 2.0 * m * b + m * m * a
                b = bn
                c = cn
                if c < a:
                    a, b, c = c, -b, a
                else:
                    break
            if b > 0.5 * a or b < -0.5 * a:
                m = floor(b / a + 0.5)
                c = c - 2.0 * m * b + m * m * a
                b = b - m * a
            out_x[i] = b / a if b >= 0 else -b / a
            out_y[i] = sqrt(det) / a
    return failures
