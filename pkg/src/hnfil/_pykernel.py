"""Pure-Python chain-ring kernel.

Elements of ``R = (Z/p^N)[pi]/(pi^k - p)`` are lists of ``k`` ints in
``[0, p^N)``; ``R`` is the quotient of the valuation ring of ``Q(p^(1/k))``
by ``p^N``, a chain ring of length ``k*N`` with uniformizer ``pi``.

Valuations are counted in units of ``1/k`` (so ``v(pi) = 1``, ``v(p) = k``)
and capped at ``k*N`` for the zero element.

This module mirrors ``_ckernel.pyx`` line for line; keep them in sync.
"""

__all__ = ["smith_image", "element_valuation"]


def _vp(c, p, cap):
    if c == 0:
        return cap
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


def element_valuation(x, p, k, N):
    cap = k * N
    best = cap
    for i in range(k):
        c = x[i]
        if c:
            v = k * _vp(c, p, N) + i
            if v < best:
                best = v
    return best


def _mul(a, b, p, k, q):
    out = [0] * k
    for i in range(k):
        ai = a[i]
        if not ai:
            continue
        for j in range(k):
            bj = b[j]
            if not bj:
                continue
            t = i + j
            if t >= k:
                out[t - k] += ai * bj * p
            else:
                out[t] += ai * bj
    return [c % q for c in out]


def _div_pi_power(x, v, p, k):
    # exact division by pi^v; caller guarantees valuation(x) >= v
    s, t = divmod(v, k)
    ps = p ** s
    y = [c // ps for c in x]
    for _ in range(t):
        y = y[1:] + [y[0] // p]
    return y


def _unit_inverse(u, p, k, N, q):
    c0 = u[0] % q
    y = [0] * k
    y[0] = pow(c0, -1, q)
    prec = 1
    two = [0] * k
    two[0] = 2
    while prec < k * N:
        uy = _mul(u, y, p, k, q)
        corr = [(two[i] - uy[i]) % q for i in range(k)]
        y = _mul(y, corr, p, k, q)
        prec *= 2
    return y


def _shift(x, s, p, k, q):
    # multiply by pi^s
    y = list(x)
    for _ in range(s):
        y = [(y[-1] * p) % q] + y[:-1]
    return y


def smith_image(A, V, shifts, p, k, N):
    """Smith valuations of ``diag(pi^shifts) * A * V^T`` over ``R``.

    ``A`` is an ``r x n`` nested list of elements, ``V`` an ``m x n`` list of
    integer rows.  Returns the sorted pivot valuations (each ``< k*N``);
    zero pivots are omitted.
    """
    q = p ** N
    cap = k * N
    r = len(A)
    m = len(V)
    M = []
    for i in range(r):
        row_i = A[i]
        out_row = []
        for g in range(m):
            vec = V[g]
            acc = [0] * k
            for j, coeff in enumerate(vec):
                if coeff:
                    e = row_i[j]
                    for t in range(k):
                        acc[t] += coeff * e[t]
            acc = [c % q for c in acc]
            if shifts[i]:
                acc = _shift(acc, shifts[i], p, k, q)
            out_row.append(acc)
        M.append(out_row)

    rows = list(range(r))
    cols = list(range(m))
    pivots = []
    while rows and cols:
        best = cap
        bi = bj = -1
        for i in rows:
            Mi = M[i]
            for j in cols:
                v = element_valuation(Mi[j], p, k, N)
                if v < best:
                    best, bi, bj = v, i, j
                    if v == 0:
                        break
            if best == 0:
                break
        if bi < 0:
            break
        a = M[bi][bj]
        ua_inv = _unit_inverse(_div_pi_power(a, best, p, k), p, k, N, q)
        prow = M[bi]
        for i in rows:
            if i == bi:
                continue
            b = M[i][bj]
            vb = element_valuation(b, p, k, N)
            if vb >= cap:
                continue
            f = _mul(_shift(_div_pi_power(b, vb, p, k), vb - best, p, k, q), ua_inv, p, k, q)
            Mi = M[i]
            for j in cols:
                if j == bj:
                    Mi[j] = [0] * k
                    continue
                fx = _mul(f, prow[j], p, k, q)
                Mi[j] = [(Mi[j][t] - fx[t]) % q for t in range(k)]
        rows.remove(bi)
        cols.remove(bj)
        pivots.append(best)
    pivots.sort()
    return pivots
