# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``.

Complex numbers are carried as separate real/imaginary doubles.  Loop
orders and tie-breaking follow the numpy implementation so that the two
backends agree up to rounding.
"""
import numpy as np

from libc.math cimport cos, sin, sqrt, fabs, M_PI, INFINITY

cdef enum:
    MAXM = 16
    MAXD = 8
    MAXQ = 9
    MAXS = 64

cdef double DET_EPS = 1e-14


cdef int _solve(double* M, double* rhs, int t) noexcept nogil:
    """Gaussian elimination with partial pivoting on a row-major t x t system.

    Solution overwrites ``rhs``.  Returns 0 when ``|det M| <= DET_EPS``.
    """
    cdef int i, j, r, piv
    cdef double det = 1.0, best, tmp, f
    for i in range(t):
        piv = i
        best = fabs(M[i * t + i])
        for r in range(i + 1, t):
            if fabs(M[r * t + i]) > best:
                best = fabs(M[r * t + i])
                piv = r
        if piv != i:
            det = -det
            for j in range(t):
                tmp = M[i * t + j]
                M[i * t + j] = M[piv * t + j]
                M[piv * t + j] = tmp
            tmp = rhs[i]
            rhs[i] = rhs[piv]
            rhs[piv] = tmp
        det *= M[i * t + i]
        if M[i * t + i] == 0.0:
            return 0
        for r in range(i + 1, t):
            f = M[r * t + i] / M[i * t + i]
            for j in range(i, t):
                M[r * t + j] -= f * M[i * t + j]
            rhs[r] -= f * rhs[i]
    if fabs(det) <= DET_EPS:
        return 0
    for i in range(t - 1, -1, -1):
        tmp = rhs[i]
        for j in range(i + 1, t):
            tmp -= M[i * t + j] * rhs[j]
        rhs[i] = tmp / M[i * t + i]
    return 1


cdef double _lambda_search(int m, int d, double* v, double* s, double* h, int* order,
                           const unsigned char[:, ::1] cT, const unsigned char[:, ::1] cK,
                           double* best_lam) noexcept nogil:
    cdef int C = cT.shape[0], q = cT.shape[1]
    cdef int c, i, j, k, r, t, nk
    cdef int tpos[MAXQ]
    cdef int kidx[MAXD]
    cdef double lam[MAXM]
    cdef double M[MAXQ * MAXQ]
    cdef double rhs[MAXQ]
    cdef double best = -INFINITY, obj, tot, sig
    for i in range(m):
        best_lam[i] = 0.0
    for c in range(C):
        t = 0
        for j in range(q):
            if cT[c, j]:
                tpos[t] = j
                t += 1
        nk = 0
        for k in range(d):
            if cK[c, k]:
                kidx[nk] = k
                nk += 1
        for i in range(m):
            lam[i] = 0.0
        if t == 1:
            lam[order[tpos[0]]] = 1.0
        else:
            for j in range(t):
                M[j] = 1.0
                rhs[j] = 0.0
            rhs[0] = 1.0
            for r in range(1, t):
                for j in range(t):
                    M[r * t + j] = s[order[tpos[j]] * d + kidx[r - 1]]
            if not _solve(M, rhs, t):
                continue
            tot = 0.0
            for j in range(t):
                if rhs[j] < 0.0:
                    rhs[j] = 0.0
                tot += rhs[j]
            if not tot > 0.0:
                continue
            for j in range(t):
                lam[order[tpos[j]]] = rhs[j] / tot
        obj = 0.0
        for i in range(m):
            obj += lam[i] * v[i]
        for k in range(d):
            sig = 0.0
            for i in range(m):
                sig += lam[i] * s[i * d + k]
            obj -= h[k] * fabs(sig)
        if obj > best:
            best = obj
            for i in range(m):
                best_lam[i] = lam[i]
    return best


cdef void _stable_order(int m, double* key, int* out) noexcept nogil:
    """Indices sorted by ascending key, ties by index (insertion sort)."""
    cdef int i, j, cur
    for i in range(m):
        out[i] = i
    for i in range(1, m):
        cur = out[i]
        j = i - 1
        while j >= 0 and key[out[j]] > key[cur]:
            out[j + 1] = out[j]
            j -= 1
        out[j + 1] = cur


def cell_bounds(coef, kinds, centers, halfw, int mode, cand_T, cand_K):
    coef = np.ascontiguousarray(coef, dtype=complex)
    cdef double[:, ::1] cre = np.ascontiguousarray(coef.real)
    cdef double[:, ::1] cim = np.ascontiguousarray(coef.imag)
    cdef long[::1] kd = np.ascontiguousarray(kinds, dtype=np.int64)
    cdef double[:, ::1] cen = np.ascontiguousarray(centers, dtype=float)
    cdef double[:, ::1] hw = np.ascontiguousarray(halfw, dtype=float)
    cdef const unsigned char[:, ::1] cT = np.ascontiguousarray(cand_T, dtype=np.uint8)
    cdef const unsigned char[:, ::1] cK = np.ascontiguousarray(cand_K, dtype=np.uint8)
    cdef int N = cen.shape[0], m = cre.shape[0], d = kd.shape[0]
    cdef int q = cT.shape[1]
    if m > MAXM or d > MAXD or q > MAXQ:
        raise ValueError("form family too large for the compiled kernel")
    if mode < 0 or mode > 2:
        raise ValueError(f"unknown mode {mode}")
    vals_a = np.empty(N)
    bnds_a = np.empty(N)
    scores_a = np.zeros((N, d))
    cdef double[::1] vals = vals_a
    cdef double[::1] bnds = bnds_a
    cdef double[:, ::1] scores = scores_a

    cdef double absC[MAXM * MAXD]
    cdef double zr[MAXM]
    cdef double zi[MAXM]
    cdef double Wr[MAXM * MAXD]
    cdef double Wi[MAXM * MAXD]
    cdef double lip[MAXM * MAXD]
    cdef double rho[MAXM * MAXD]
    cdef double P[MAXM]
    cdef double R[MAXM]
    cdef double az[MAXM]
    cdef double s[MAXM * MAXD]
    cdef double v[MAXM]
    cdef double key[MAXM]
    cdef double lam[MAXM]
    cdef double inv[MAXM]
    cdef double quad[MAXM]
    cdef int smooth[MAXM]
    cdef int order[MAXM]
    cdef double h[MAXD]
    cdef double lin[MAXD]
    cdef double phr, phi_, dpr, dpi, cr, ci, hk
    cdef double ub1, ub2, lb1, lb2, tot, sig, x, best1, ur, ui
    cdef int n, i, k, i1

    for i in range(m):
        for k in range(d):
            cr = cre[i, k + 1]
            ci = cim[i, k + 1]
            absC[i * d + k] = sqrt(cr * cr + ci * ci)

    with nogil:
        for n in range(N):
            for i in range(m):
                zr[i] = cre[i, 0]
                zi[i] = cim[i, 0]
                P[i] = 0.0
                R[i] = 0.0
            for k in range(d):
                hk = hw[n, k]
                h[k] = hk
                if kd[k] == 0:
                    phr = cos(cen[n, k])
                    phi_ = sin(cen[n, k])
                    dpr = -phi_
                    dpi = phr
                else:
                    phr = cen[n, k]
                    phi_ = 0.0
                    dpr = 1.0
                    dpi = 0.0
                for i in range(m):
                    cr = cre[i, k + 1]
                    ci = cim[i, k + 1]
                    zr[i] += cr * phr - ci * phi_
                    zi[i] += cr * phi_ + ci * phr
                    Wr[i * d + k] = dpr * cr - dpi * ci
                    Wi[i * d + k] = dpr * ci + dpi * cr
                    lip[i * d + k] = hk * absC[i * d + k]
                    if kd[k] == 0:
                        rho[i * d + k] = 0.5 * hk * hk * absC[i * d + k]
                    else:
                        rho[i * d + k] = 0.0
                    P[i] += lip[i * d + k]
                    R[i] += rho[i * d + k]
            for i in range(m):
                az[i] = sqrt(zr[i] * zr[i] + zi[i] * zi[i])

            if mode == 0:
                vals[n] = 0.0
                ub1 = 0.0
                for i in range(m):
                    vals[n] += az[i]
                    ub1 += P[i]
                ub1 += vals[n]
                ub2 = vals[n]
                for i in range(m):
                    if az[i] > 0.0:
                        inv[i] = 1.0 / az[i]
                    else:
                        inv[i] = 0.0
                    quad[i] = 0.5 * P[i] * P[i] * inv[i] + R[i]
                    smooth[i] = az[i] > 0.0 and quad[i] < P[i]
                for k in range(d):
                    sig = 0.0
                    for i in range(m):
                        if smooth[i]:
                            sig += (zr[i] * Wr[i * d + k] + zi[i] * Wi[i * d + k]) * inv[i]
                    lin[k] = h[k] * fabs(sig)
                    ub2 += lin[k]
                for i in range(m):
                    if smooth[i]:
                        ub2 += quad[i]
                    else:
                        ub2 += P[i]
                if ub2 < ub1:
                    bnds[n] = ub2
                    for k in range(d):
                        x = lin[k]
                        for i in range(m):
                            if smooth[i]:
                                x += 0.5 * P[i] * lip[i * d + k] * inv[i] + rho[i * d + k]
                            else:
                                x += lip[i * d + k]
                        scores[n, k] = x
                else:
                    bnds[n] = ub1
                    for k in range(d):
                        x = 0.0
                        for i in range(m):
                            x += lip[i * d + k]
                        scores[n, k] = x

            elif mode == 1:
                vals[n] = 0.0
                i1 = 0
                best1 = -INFINITY
                for i in range(m):
                    if az[i] > vals[n]:
                        vals[n] = az[i]
                    if az[i] - P[i] > best1:
                        best1 = az[i] - P[i]
                        i1 = i
                lb1 = best1
                for i in range(m):
                    if az[i] > 0.0:
                        ur = zr[i] / az[i]
                        ui = zi[i] / az[i]
                    else:
                        ur = 1.0
                        ui = 0.0
                    for k in range(d):
                        s[i * d + k] = ur * Wr[i * d + k] + ui * Wi[i * d + k]
                    v[i] = az[i] - R[i]
                    key[i] = -v[i]
                _stable_order(m, key, order)
                lb2 = _lambda_search(m, d, v, s, h, order, cT, cK, lam)
                if lb2 > lb1:
                    bnds[n] = lb2
                    for k in range(d):
                        sig = 0.0
                        x = 0.0
                        for i in range(m):
                            sig += lam[i] * s[i * d + k]
                            x += lam[i] * rho[i * d + k]
                        scores[n, k] = h[k] * fabs(sig) + x
                else:
                    bnds[n] = lb1
                    for k in range(d):
                        scores[n, k] = lip[i1 * d + k]

            else:
                vals[n] = INFINITY
                i1 = 0
                best1 = INFINITY
                for i in range(m):
                    if az[i] * az[i] < vals[n]:
                        vals[n] = az[i] * az[i]
                    x = (az[i] + P[i]) * (az[i] + P[i])
                    if x < best1:
                        best1 = x
                        i1 = i
                ub1 = best1
                for i in range(m):
                    for k in range(d):
                        s[i * d + k] = 2.0 * (zr[i] * Wr[i * d + k] + zi[i] * Wi[i * d + k])
                    v[i] = az[i] * az[i] + 2.0 * az[i] * R[i] + (P[i] + R[i]) * (P[i] + R[i])
                    key[i] = v[i]
                    v[i] = -v[i]
                _stable_order(m, key, order)
                ub2 = -_lambda_search(m, d, v, s, h, order, cT, cK, lam)
                if ub2 < ub1:
                    bnds[n] = ub2
                    for k in range(d):
                        sig = 0.0
                        x = 0.0
                        for i in range(m):
                            sig += lam[i] * s[i * d + k]
                            x += lam[i] * (2.0 * az[i] * rho[i * d + k]
                                           + (lip[i * d + k] + rho[i * d + k]) * (P[i] + R[i]))
                        scores[n, k] = h[k] * fabs(sig) + x
                else:
                    bnds[n] = ub1
                    for k in range(d):
                        scores[n, k] = lip[i1 * d + k] * (2.0 * az[i1] + P[i1])
    return vals_a, bnds_a, scores_a


def trig_sweep(bs, rs, gammas, double eps):
    cdef double[::1] b_ = np.ascontiguousarray(bs, dtype=float)
    cdef double[::1] r_ = np.ascontiguousarray(rs, dtype=float)
    cdef double[::1] g_ = np.ascontiguousarray(gammas, dtype=float)
    cdef long opposite = 0, violations = 0
    cdef double max_excess = -INFINITY
    cdef double x, y, b, r, q1, q2, lo
    cdef int ib, ir, ig
    with nogil:
        for ig in range(g_.shape[0]):
            x = cos(g_[ig])
            y = cos(g_[ig] - 2.0 * M_PI / 3.0)
            if not x * y < 0:
                continue
            for ib in range(b_.shape[0]):
                b = b_[ib]
                for ir in range(r_.shape[0]):
                    r = r_[ir]
                    opposite += 1
                    q1 = 4.0 * x * x + 4.0 * b * r * x + b * b
                    q2 = 4.0 * y * y + 4.0 * b * r * y + b * b
                    if q1 > 3.0 + eps and q2 > 3.0 + eps:
                        violations += 1
                    lo = q1 if q1 < q2 else q2
                    if lo - 3.0 > max_excess:
                        max_excess = lo - 3.0
    return int(opposite), int(violations), float(max_excess)


cdef double _l1(int n, int d, double* ar, double* ai, double* ang) noexcept nogil:
    cdef double tot = 0.0, yr, yi, c, s_
    cdef int i, k
    cdef double cs[MAXD]
    cdef double sn[MAXD]
    for k in range(d):
        cs[k] = cos(ang[k])
        sn[k] = sin(ang[k])
    for i in range(n):
        yr = ar[i * n]
        yi = ai[i * n]
        for k in range(d):
            c = ar[i * n + k + 1]
            s_ = ai[i * n + k + 1]
            yr += c * cs[k] - s_ * sn[k]
            yi += c * sn[k] + s_ * cs[k]
        tot += sqrt(yr * yr + yi * yi)
    return tot


def inf1_estimate_batch(mats, int grid, int iters, int starts=1):
    mats = np.ascontiguousarray(mats, dtype=complex)
    cdef int N = mats.shape[0], n = mats.shape[1]
    cdef int d = n - 1
    if d == 0:
        return np.abs(mats[:, 0, 0]), np.zeros((N, 0))
    if d > MAXD:
        raise ValueError("matrix too large for the compiled kernel")
    cdef long total = 1
    for _ in range(d):
        total *= grid
    if starts < 1:
        starts = 1
    if starts > total:
        starts = total
    if starts > MAXS:
        raise ValueError(f"at most {MAXS} refinement starts")
    cdef double[:, ::1] re = np.ascontiguousarray(mats.real.reshape(N, n * n))
    cdef double[:, ::1] im = np.ascontiguousarray(mats.imag.reshape(N, n * n))
    values_a = np.empty(N)
    angles_a = np.empty((N, d))
    cdef double[::1] values = values_a
    cdef double[:, ::1] angles = angles_a
    cdef double[::1] tg = -M_PI + (np.arange(grid) + 0.5) * (2.0 * M_PI / grid)
    cdef double[::1] cg = np.cos(np.asarray(tg))
    cdef double[::1] sg = np.sin(np.asarray(tg))
    cdef int idx[MAXD]
    cdef double ang[MAXD]
    cdef double top_v[MAXS]
    cdef double top_a[MAXS * MAXD]
    cdef double best, f, yr, yi, c, s_, step, old, cur
    cdef int a, i, k, it, sgn, improved, done, st, ntop, pos
    with nogil:
        for a in range(N):
            for k in range(d):
                idx[k] = 0
            ntop = 0
            done = 0
            while not done:
                f = 0.0
                for i in range(n):
                    yr = re[a, i * n]
                    yi = im[a, i * n]
                    for k in range(d):
                        c = re[a, i * n + k + 1]
                        s_ = im[a, i * n + k + 1]
                        yr += c * cg[idx[k]] - s_ * sg[idx[k]]
                        yi += c * sg[idx[k]] + s_ * cg[idx[k]]
                    f += sqrt(yr * yr + yi * yi)
                # keep the best `starts` values, earlier index first on ties
                if ntop < starts or f > top_v[ntop - 1]:
                    pos = ntop if ntop < starts else starts - 1
                    while pos > 0 and f > top_v[pos - 1]:
                        if pos < starts:
                            top_v[pos] = top_v[pos - 1]
                            for k in range(d):
                                top_a[pos * MAXD + k] = top_a[(pos - 1) * MAXD + k]
                        pos -= 1
                    top_v[pos] = f
                    for k in range(d):
                        top_a[pos * MAXD + k] = tg[idx[k]]
                    if ntop < starts:
                        ntop += 1
                k = d - 1
                while k >= 0:
                    idx[k] += 1
                    if idx[k] < grid:
                        break
                    idx[k] = 0
                    k -= 1
                if k < 0:
                    done = 1
            best = -INFINITY
            for st in range(ntop):
                for k in range(d):
                    ang[k] = top_a[st * MAXD + k]
                cur = _l1(n, d, &re[a, 0], &im[a, 0], ang)
                step = M_PI / grid
                for it in range(iters):
                    improved = 0
                    for k in range(d):
                        for sgn in range(2):
                            old = ang[k]
                            ang[k] = old + (step if sgn == 0 else -step)
                            f = _l1(n, d, &re[a, 0], &im[a, 0], ang)
                            if f > cur:
                                cur = f
                                improved = 1
                            else:
                                ang[k] = old
                    if not improved:
                        step *= 0.5
                if cur > best:
                    best = cur
                    for k in range(d):
                        angles[a, k] = ang[k]
            values[a] = best
    return values_a, angles_a
