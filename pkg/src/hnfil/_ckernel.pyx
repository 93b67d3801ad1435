# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled chain-ring kernel; same contract as ``_pykernel.smith_image``.

Coefficients live in int64 with 128-bit intermediate products, so callers
must keep ``p**N < 2**62`` (checked in ``hnfil.kernel``).
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memset, memcpy

cdef extern from *:
    ctypedef long long int128 "__int128"

ctypedef long long i64


cdef inline i64 mulmod(i64 a, i64 b, i64 q) nogil:
    return <i64>((<int128>a * <int128>b) % q)


cdef inline i64 vp(i64 c, i64 p, i64 cap) nogil:
    cdef i64 v = 0
    if c == 0:
        return cap
    while c % p == 0:
        c //= p
        v += 1
    return v


cdef inline i64 valuation(i64* x, i64 p, int k, i64 N) nogil:
    cdef i64 cap = k * N
    cdef i64 best = cap
    cdef i64 v
    cdef int i
    for i in range(k):
        if x[i] != 0:
            v = k * vp(x[i], p, N) + i
            if v < best:
                best = v
    return best


cdef void mul(i64* a, i64* b, i64* out, i64 p, int k, i64 q) nogil:
    cdef int i, j, t
    cdef int128 acc[64]
    for i in range(k):
        acc[i] = 0
    for i in range(k):
        if a[i] == 0:
            continue
        for j in range(k):
            if b[j] == 0:
                continue
            t = i + j
            if t >= k:
                acc[t - k] += (<int128>mulmod(a[i], b[j], q)) * p
            else:
                acc[t] += <int128>mulmod(a[i], b[j], q)
    for i in range(k):
        out[i] = <i64>(acc[i] % q)


cdef void div_pi_power(i64* x, i64 v, i64* out, i64 p, int k) nogil:
    cdef i64 s = v // k
    cdef i64 t = v % k
    cdef i64 ps = 1
    cdef i64 first
    cdef int i, rep
    for i in range(s):
        ps *= p
    for i in range(k):
        out[i] = x[i] // ps
    for rep in range(t):
        first = out[0]
        for i in range(k - 1):
            out[i] = out[i + 1]
        out[k - 1] = first // p


cdef void shift(i64* x, i64 s, i64 p, int k, i64 q) nogil:
    cdef i64 last
    cdef int i, rep
    for rep in range(s):
        last = x[k - 1]
        for i in range(k - 1, 0, -1):
            x[i] = x[i - 1]
        x[0] = mulmod(last, p, q)


cdef i64 modinv(i64 a, i64 q) nogil:
    cdef i64 t = 0, newt = 1, r = q, newr = a % q, quo, tmp
    while newr != 0:
        quo = r // newr
        tmp = t - quo * newt
        t = newt
        newt = tmp
        tmp = r - quo * newr
        r = newr
        newr = tmp
    if t < 0:
        t += q
    return t


cdef void unit_inverse(i64* u, i64* y, i64 p, int k, i64 N, i64 q) nogil:
    cdef i64 uy[64]
    cdef i64 corr[64]
    cdef i64 tmp[64]
    cdef i64 prec = 1
    cdef int i
    for i in range(k):
        y[i] = 0
    y[0] = modinv(u[0], q)
    while prec < k * N:
        mul(u, y, uy, p, k, q)
        for i in range(k):
            corr[i] = (q - uy[i]) % q
        corr[0] = (corr[0] + 2) % q
        mul(y, corr, tmp, p, k, q)
        for i in range(k):
            y[i] = tmp[i]
        prec *= 2


def smith_image(i64[:, :, ::1] A, i64[:, ::1] V, i64[::1] shifts,
                i64 p, int k, i64 N):
    cdef Py_ssize_t r = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t m = V.shape[0]
    cdef i64 q = 1
    cdef i64 cap = k * N
    cdef Py_ssize_t i, j, g, t, bi, bj
    cdef i64 best, v, vb
    cdef i64* M
    cdef i64 acc[64]
    cdef i64 ua[64]
    cdef i64 ua_inv[64]
    cdef i64 bb[64]
    cdef i64 f[64]
    cdef i64 fx[64]
    cdef int128 wide[64]
    cdef char* row_alive
    cdef char* col_alive
    if k > 64:
        raise ValueError("ramification index too large for the compiled kernel")
    for i in range(N):
        q *= p
    pivots = []
    if r == 0 or m == 0:
        return pivots
    M = <i64*>malloc(r * m * k * sizeof(i64))
    row_alive = <char*>malloc(r)
    col_alive = <char*>malloc(m)
    try:
        with nogil:
            for i in range(r):
                for g in range(m):
                    for t in range(k):
                        wide[t] = 0
                    for j in range(n):
                        if V[g, j] != 0:
                            for t in range(k):
                                wide[t] += <int128>mulmod(V[g, j], A[i, j, t], q)
                    for t in range(k):
                        M[(i * m + g) * k + t] = <i64>(wide[t] % q)
                    if shifts[i]:
                        shift(&M[(i * m + g) * k], shifts[i], p, k, q)
            memset(row_alive, 1, r)
            memset(col_alive, 1, m)
        while True:
            best = cap
            bi = -1
            bj = -1
            with nogil:
                for i in range(r):
                    if not row_alive[i]:
                        continue
                    for j in range(m):
                        if not col_alive[j]:
                            continue
                        v = valuation(&M[(i * m + j) * k], p, k, N)
                        if v < best:
                            best = v
                            bi = i
                            bj = j
                            if v == 0:
                                break
                    if best == 0:
                        break
                if bi >= 0:
                    div_pi_power(&M[(bi * m + bj) * k], best, ua, p, k)
                    unit_inverse(ua, ua_inv, p, k, N, q)
                    for i in range(r):
                        if i == bi or not row_alive[i]:
                            continue
                        vb = valuation(&M[(i * m + bj) * k], p, k, N)
                        if vb >= cap:
                            continue
                        div_pi_power(&M[(i * m + bj) * k], vb, bb, p, k)
                        shift(bb, vb - best, p, k, q)
                        mul(bb, ua_inv, f, p, k, q)
                        for j in range(m):
                            if not col_alive[j]:
                                continue
                            if j == bj:
                                for t in range(k):
                                    M[(i * m + j) * k + t] = 0
                                continue
                            mul(f, &M[(bi * m + j) * k], fx, p, k, q)
                            for t in range(k):
                                M[(i * m + j) * k + t] = (M[(i * m + j) * k + t] - fx[t] + q) % q
                    row_alive[bi] = 0
                    col_alive[bj] = 0
            if bi < 0:
                break
            pivots.append(best)
    finally:
        free(M)
        free(row_alive)
        free(col_alive)
    pivots.sort()
    return pivots
