"""Pure numpy implementation of the hot kernels.

Used when the compiled extension is unavailable (or disabled with
``CSPENCER_PURE_PYTHON=1``).  Semantics must match ``_ckernels.pyx``
exactly; ``tests/test_kernels.py`` cross-checks the two.

Every kernel works on a *linear-form family*: ``m`` complex forms

    G_i(p) = coef[i, 0] + sum_k coef[i, k + 1] * phi_k(p_k)

where ``phi_k(t) = exp(i t)`` for a phase coordinate (``kinds[k] == 0``)
and ``phi_k(t) = t`` for a linear coordinate (``kinds[k] == 1``).
"""
import math

import numpy as np

MODE_SUM_MAX = 0    # maximise sum_i |G_i|
MODE_MAX_MIN = 1    # minimise max_i |G_i|
MODE_SQMIN_MAX = 2  # maximise min_i |G_i|^2

DET_EPS = 1e-14


def _expand(coef, kinds, centers, halfw):
    phase = kinds == 0
    C = coef[:, 1:]
    absC = np.abs(C)
    phi = np.where(phase, np.exp(1j * centers), centers + 0j)
    dphi = np.where(phase, 1j * phi, 1.0 + 0j)
    z = coef[:, 0][None, :] + phi @ C.T
    W = dphi[:, None, :] * C[None, :, :]
    lip = halfw[:, None, :] * absC[None]
    rho = np.where(phase, 0.5 * halfw * halfw, 0.0)[:, None, :] * absC[None]
    return z, W, lip, rho


def _lambda_search(v, s, halfw, order, cand_T, cand_K):
    """Maximise ``lam.v - sum_k h_k |sum_i lam_i s_ik|`` over candidate simplex vertices."""
    N, m, d = s.shape
    rows = np.arange(N)
    best = np.full(N, -np.inf)
    best_lam = np.zeros((N, m))
    for T, K in zip(cand_T, cand_K):
        tpos = np.flatnonzero(T)
        kidx = np.flatnonzero(K)
        t = tpos.size
        idx = order[:, tpos]
        ok = np.ones(N, dtype=bool)
        if t == 1:
            lam_T = np.ones((N, 1))
        else:
            sT = s[rows[:, None], idx][:, :, kidx]
            M = np.empty((N, t, t))
            M[:, 0, :] = 1.0
            M[:, 1:, :] = sT.transpose(0, 2, 1)
            ok = np.abs(np.linalg.det(M)) > DET_EPS
            M[~ok] = np.eye(t)
            rhs = np.zeros((N, t, 1))
            rhs[:, 0, 0] = 1.0
            lam_T = np.linalg.solve(M, rhs)[:, :, 0]
            lam_T = np.maximum(lam_T, 0.0)
            tot = lam_T.sum(1)
            ok &= tot > 0
            lam_T /= np.where(tot > 0, tot, 1.0)[:, None]
        lam = np.zeros((N, m))
        lam[rows[:, None], idx] = lam_T
        sigma = np.einsum("nm,nmd->nd", lam, s)
        obj = (lam * v).sum(1) - (halfw * np.abs(sigma)).sum(1)
        obj = np.where(ok, obj, -np.inf)
        better = obj > best
        best = np.where(better, obj, best)
        best_lam[better] = lam[better]
    return best, best_lam


def cell_bounds(coef, kinds, centers, halfw, mode, cand_T, cand_K):
    """Objective at cell centres, a rigorous cell bound, and per-axis split scores.

    For maximisation modes the bound is an upper bound of the objective over
    the closed cell, for ``MODE_MAX_MIN`` a lower bound.  ``scores[:, k]``
    is the share of the bound slack attributable to axis ``k``.
    """
    coef = np.ascontiguousarray(coef, dtype=complex)
    kinds = np.asarray(kinds)
    centers = np.ascontiguousarray(centers, dtype=float)
    halfw = np.ascontiguousarray(halfw, dtype=float)
    N = centers.shape[0]
    m = coef.shape[0]
    d = kinds.size
    rows = np.arange(N)
    z, W, lip, rho = _expand(coef, kinds, centers, halfw)
    az = np.abs(z)
    P = lip.sum(2)
    R = rho.sum(2)
    q = cand_T.shape[1]

    if mode == MODE_SUM_MAX:
        vals = az.sum(1)
        ub1 = vals + P.sum(1)
        safe = az > 0
        inv = np.where(safe, 1.0 / np.where(safe, az, 1.0), 0.0)
        s = np.real(np.conj(z)[:, :, None] * W) * inv[:, :, None]
        quad = 0.5 * P * P * inv + R
        smooth = safe & (quad < P)
        lin = halfw * np.abs((s * smooth[:, :, None]).sum(1))
        ub2 = vals + lin.sum(1) + np.where(smooth, quad, P).sum(1)
        use2 = ub2 < ub1
        bnds = np.where(use2, ub2, ub1)
        sc2 = lin + np.where(
            smooth[:, :, None], 0.5 * P[:, :, None] * lip * inv[:, :, None] + rho, lip
        ).sum(1)
        scores = np.where(use2[:, None], sc2, lip.sum(1))
        return vals, bnds, scores

    if mode == MODE_MAX_MIN:
        vals = az.max(1)
        lb_l = az - P
        i1 = lb_l.argmax(1)
        lb1 = lb_l[rows, i1]
        sc1 = lip[rows, i1, :]
        safe = az > 0
        ur = np.where(safe, z.real / np.where(safe, az, 1.0), 1.0)
        ui = np.where(safe, z.imag / np.where(safe, az, 1.0), 0.0)
        s = ur[:, :, None] * W.real + ui[:, :, None] * W.imag
        v = az - R
        order = np.argsort(-v, axis=1, kind="stable")[:, :q]
        lb2, lam = _lambda_search(v, s, halfw, order, cand_T, cand_K)
        sigma = np.einsum("nm,nmd->nd", lam, s)
        sc2 = halfw * np.abs(sigma) + np.einsum("nm,nmd->nd", lam, rho)
        use2 = lb2 > lb1
        bnds = np.where(use2, lb2, lb1)
        scores = np.where(use2[:, None], sc2, sc1)
        return vals, bnds, scores

    if mode == MODE_SQMIN_MAX:
        vals = (az * az).min(1)
        ub_l = (az + P) ** 2
        i1 = ub_l.argmin(1)
        ub1 = ub_l[rows, i1]
        sc1 = lip[rows, i1, :] * (2.0 * az[rows, i1] + P[rows, i1])[:, None]
        g = 2.0 * (z.real[:, :, None] * W.real + z.imag[:, :, None] * W.imag)
        v = az * az + 2.0 * az * R + (P + R) ** 2
        order = np.argsort(v, axis=1, kind="stable")[:, :q]
        neg, lam = _lambda_search(-v, g, halfw, order, cand_T, cand_K)
        ub2 = -neg
        sigma = np.einsum("nm,nmd->nd", lam, g)
        sc2 = halfw * np.abs(sigma) + np.einsum(
            "nm,nmd->nd", lam, 2.0 * az[:, :, None] * rho + (lip + rho) * (P + R)[:, :, None]
        )
        use2 = ub2 < ub1
        bnds = np.where(use2, ub2, ub1)
        scores = np.where(use2[:, None], sc2, sc1)
        return vals, bnds, scores

    raise ValueError(f"unknown mode {mode}")


def trig_sweep(bs, rs, gammas, eps):
    """Count angles violating the two-quadratic trigonometric inequality lemma.

    Returns ``(opposite, violations, max_excess)``: the number of
    ``(b, r, gamma)`` triples whose cosines ``x = cos(gamma)``,
    ``y = cos(gamma - 120 deg)`` have opposite signs, how many of those satisfy
    both quadratics above ``3 + eps``, and the largest value of
    ``min(q1, q2) - 3`` seen among opposite-sign triples.
    """
    bs = np.asarray(bs, dtype=float)
    rs = np.asarray(rs, dtype=float)
    gammas = np.asarray(gammas, dtype=float)
    x = np.cos(gammas)
    y = np.cos(gammas - 2.0 * math.pi / 3.0)
    opp = x * y < 0
    x = x[opp]
    y = y[opp]
    opposite = int(opp.sum()) * bs.size * rs.size
    violations = 0
    max_excess = -np.inf
    if x.size == 0:
        return opposite, 0, float(max_excess)
    for b in bs:
        q1 = 4.0 * x[None, :] ** 2 + 4.0 * b * rs[:, None] * x[None, :] + b * b
        q2 = 4.0 * y[None, :] ** 2 + 4.0 * b * rs[:, None] * y[None, :] + b * b
        violations += int(np.count_nonzero((q1 > 3.0 + eps) & (q2 > 3.0 + eps)))
        max_excess = max(max_excess, float(np.minimum(q1, q2).max() - 3.0))
    return opposite, violations, float(max_excess)


def _l1_values(mats, angles):
    X = np.exp(1j * angles)
    y = mats[:, :, 0] + np.einsum("nik,nk->ni", mats[:, :, 1:], X)
    return np.abs(y).sum(1)


def inf1_estimate_batch(mats, grid, iters, starts=1):
    """Grid-plus-pattern-search maximisation of ``||A x||_1`` over phase vectors.

    ``mats`` has shape ``(N, n, n)``.  The ``starts`` best grid points (ties
    to the lower index) are each refined by a pattern search.  Returns
    ``(values, angles)`` where each value is the objective evaluated at the
    returned angles (so a valid lower bound on the norm).
    """
    mats = np.ascontiguousarray(mats, dtype=complex)
    N, n, _ = mats.shape
    d = n - 1
    if d == 0:
        return np.abs(mats[:, 0, 0]), np.zeros((N, 0))
    t = -math.pi + (np.arange(grid) + 0.5) * (2.0 * math.pi / grid)
    pts = np.stack(np.meshgrid(*([t] * d), indexing="ij"), axis=-1).reshape(-1, d)
    starts = max(1, min(int(starts), pts.shape[0]))
    X = np.exp(1j * pts)
    cand = np.empty((N, starts, d))
    chunk = max(1, 2_000_000 // max(1, pts.shape[0] * n))
    for lo in range(0, N, chunk):
        A = mats[lo:lo + chunk]
        y = A[:, :, 0][:, :, None] + A[:, :, 1:] @ X.T
        f = np.abs(y).sum(1)
        top = np.argsort(-f, axis=1, kind="stable")[:, :starts]
        cand[lo:lo + chunk] = pts[top]
    values = np.full(N, -np.inf)
    angles = np.empty((N, d))
    for s in range(starts):
        ang = cand[:, s, :].copy()
        val = _l1_values(mats, ang)
        step = np.full(N, math.pi / grid)
        for _ in range(iters):
            improved = np.zeros(N, dtype=bool)
            for k in range(d):
                for sgn in (1.0, -1.0):
                    trial = ang.copy()
                    trial[:, k] += sgn * step
                    f = _l1_values(mats, trial)
                    better = f > val
                    val = np.where(better, f, val)
                    ang[better] = trial[better]
                    improved |= better
            step = np.where(improved, step, 0.5 * step)
        better = val > values
        values = np.where(better, val, values)
        angles[better] = ang[better]
    return values, angles
