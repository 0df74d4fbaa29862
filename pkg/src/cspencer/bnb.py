"""Certified branch-and-bound over boxes for families of linear forms.

A :class:`FormFamily` describes ``m`` complex forms in ``d`` real parameters
(angles or bounded linear coordinates).  :func:`search` optimises one of
three objectives of the moduli ``|G_i|`` and returns a witness together with
a rigorous bound on the optimum:

* ``MODE_SUM_MAX``: maximise ``sum_i |G_i|`` (upper bound returned),
* ``MODE_MAX_MIN``: minimise ``max_i |G_i|`` (lower bound returned),
* ``MODE_SQMIN_MAX``: maximise ``min_i |G_i|^2`` (upper bound returned).

Cells are processed one level at a time; every live cell is bisected along
the axis with the largest share of its bound slack.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import config, kernels
from .kernels import MODE_MAX_MIN, MODE_SQMIN_MAX, MODE_SUM_MAX

PHASE = 0
LINEAR = 1

# total initial cells aimed for when the per-angle default would be too many
INITIAL_BUDGET = 1 << 18
MAX_LEVELS = 80


@dataclass
class FormFamily:
    coef: np.ndarray
    kinds: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.coef = np.ascontiguousarray(self.coef, dtype=complex)
        self.kinds = np.asarray(self.kinds, dtype=np.int64)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        d = self.kinds.size
        if self.coef.ndim != 2 or self.coef.shape[1] != d + 1:
            raise ValueError(f"coef must have shape (m, {d + 1}), got {self.coef.shape}")
        if self.lo.shape != (d,) or self.hi.shape != (d,) or np.any(self.hi < self.lo):
            raise ValueError("bad parameter box")

    @classmethod
    def phases(cls, coef):
        """Forms in ``d`` free angles, each ranging over ``[-pi, pi)``."""
        coef = np.asarray(coef, dtype=complex)
        d = coef.shape[1] - 1
        return cls(coef, np.zeros(d, dtype=np.int64), np.full(d, -math.pi), np.full(d, math.pi))

    @property
    def d(self):
        return self.kinds.size

    @property
    def m(self):
        return self.coef.shape[0]

    def moduli(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        phi = np.where(self.kinds == PHASE, np.exp(1j * p), p + 0j)
        return np.abs(self.coef[:, 0][None, :] + phi @ self.coef[:, 1:].T)

    def objective(self, mode, points):
        return objective(mode, self.moduli(points))


def objective(mode, moduli):
    if mode == MODE_SUM_MAX:
        return moduli.sum(-1)
    if mode == MODE_MAX_MIN:
        return moduli.max(-1)
    if mode == MODE_SQMIN_MAX:
        return (moduli * moduli).min(-1)
    raise ValueError(f"unknown mode {mode}")


@dataclass
class SearchResult:
    mode: int
    value: float          # objective at the witness
    witness: np.ndarray   # parameters attaining ``value``
    bound: float          # rigorous bound on the optimum (upper for max modes, lower for MAX_MIN)
    certified: bool       # the search finished within budget
    reason: str           # "converged", "target" or "budget"
    cells: int
    levels: int
    grid_resolution: float
    wall_time: float

    @property
    def gap(self):
        return abs(self.bound - self.value)


def initial_cells(family, per_angle=None, per_linear=None):
    """Uniform product grid of cells, lexicographic order (last axis fastest)."""
    d = family.d
    per_angle = per_angle or config.INITIAL_CELLS
    per_linear = per_linear or config.INITIAL_LINEAR_CELLS
    n_lin = int(np.sum(family.kinds == LINEAR))
    n_ang = d - n_lin
    if n_ang and per_angle ** n_ang * per_linear ** n_lin > INITIAL_BUDGET:
        per_angle = max(2, int((INITIAL_BUDGET / per_linear ** n_lin) ** (1.0 / n_ang)))
    axes, halves = [], []
    for k in range(d):
        cnt = per_angle if family.kinds[k] == PHASE else per_linear
        w = (family.hi[k] - family.lo[k]) / cnt
        axes.append(family.lo[k] + (np.arange(cnt) + 0.5) * w)
        halves.append(0.5 * w)
    if d == 0:
        return np.zeros((1, 0)), np.zeros((1, 0))
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    halfw = np.broadcast_to(np.array(halves), centers.shape).copy()
    return centers, halfw


def polish(family, mode, x, width, sweeps=3):
    sgn = -1.0 if mode == MODE_MAX_MIN else 1.0
    x = np.array(x, dtype=float)
    cur = sgn * float(family.objective(mode, x)[0])
    for _ in range(sweeps):
        start = cur
        for k in range(family.d):
            a, b = x[k] - width[k], x[k] + width[k]
            if family.kinds[k] == LINEAR:
                a, b = max(a, family.lo[k]), min(b, family.hi[k])
            if b <= a:
                continue
            y = x.copy()

            def neg(t, k=k, y=y):
                y[k] = t
                return -sgn * float(family.objective(mode, y)[0])

            res = minimize_scalar(neg, bounds=(a, b), method="bounded", options={"xatol": 1e-13})
            if -res.fun > cur:
                x[k] = res.x
                cur = -float(res.fun)
        if cur - start <= 1e-15 * (1.0 + abs(cur)):
            break
    if mode != MODE_SUM_MAX and family.d:
        y, v = _epigraph_polish(family, mode, x)
        if v > cur:
            x, cur = y, v
    return x, cur


def _epigraph_polish(family, mode, x0):
    """SLSQP on the epigraph form; handles the kinks of max/min objectives.

    MAX_MIN: minimise ``t`` subject to ``|G_i|^2 <= t``.
    SQMIN_MAX: maximise ``t`` subject to ``|G_i|^2 >= t``.
    Returns ``(x, signed value)`` in the same convention as :func:`polish`.
    """
    C = family.coef[:, 1:]
    phase = family.kinds == PHASE
    sgn = -1.0 if mode == MODE_MAX_MIN else 1.0

    def forms(p):
        phi = np.where(phase, np.exp(1j * p), p + 0j)
        dphi = np.where(phase, 1j * phi, 1.0 + 0j)
        return family.coef[:, 0] + C @ phi, C * dphi[None, :]

    def cons(v):
        g, _ = forms(v[:-1])
        sq = g.real ** 2 + g.imag ** 2
        return sgn * (sq - v[-1])

    def cons_jac(v):
        g, W = forms(v[:-1])
        J = np.empty((family.m, family.d + 1))
        J[:, :-1] = 2.0 * (g.real[:, None] * W.real + g.imag[:, None] * W.imag)
        J[:, -1] = -1.0
        return sgn * J

    t0 = float(family.objective(MODE_SQMIN_MAX if mode == MODE_SQMIN_MAX else MODE_MAX_MIN, x0)[0])
    if mode == MODE_MAX_MIN:
        t0 = t0 * t0
    lin = ~phase
    bounds = [(family.lo[k], family.hi[k]) if lin[k] else (None, None) for k in range(family.d)]
    bounds.append((None, None))
    try:
        res = minimize(
            lambda v: -sgn * v[-1],
            np.append(x0, t0),
            jac=lambda v: np.append(np.zeros(family.d), -sgn),
            method="SLSQP",
            constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
            bounds=bounds,
            options={"ftol": 1e-16, "maxiter": 200},
        )
        y = np.array(res.x[:-1])
    except (ValueError, np.linalg.LinAlgError):
        return x0, -math.inf
    y[lin] = np.clip(y[lin], family.lo[lin], family.hi[lin])
    if not np.all(np.isfinite(y)):
        return x0, -math.inf
    return y, sgn * float(family.objective(mode, y)[0])


def _normalize(family, x):
    x = np.array(x, dtype=float)
    ph = family.kinds == PHASE
    x[ph] = np.mod(x[ph] + math.pi, 2.0 * math.pi) - math.pi
    return x


def search(family, mode, tol=1e-6, threshold=None, stop_above=None, max_cells=None,
           max_levels=MAX_LEVELS, per_angle=None, refine=True, impl=None):
    """Branch-and-bound for ``family`` under ``mode``.

    ``tol`` is the target gap between witness value and bound.  With a
    ``threshold`` (given in the objective's own units) cells whose bound lies
    on the far side of the threshold are discarded and the search answers
    "does the optimum pass the threshold?" instead.  ``stop_above`` stops as
    soon as a witness beats the given value.  A result that ran out of
    budget still carries a valid, if loose, bound.
    """
    t0 = time.perf_counter()
    max_cells = max_cells or config.MAX_CELLS
    sgn = -1.0 if mode == MODE_MAX_MIN else 1.0
    scale = 1.0 + float(np.abs(family.coef).sum())
    slack = 1e-12 * (scale * scale if mode == MODE_SQMIN_MAX else scale)
    thr = None if threshold is None else sgn * threshold
    target = None if stop_above is None else sgn * stop_above

    centers, halfw = initial_cells(family, per_angle=per_angle)
    width0 = 2.0 * halfw[0].copy()
    best = -math.inf
    best_x = centers[0].copy()
    settled = -math.inf
    total = 0
    level = 0
    min_h = math.inf
    reason = "converged"
    live_upper = -math.inf
    while centers.shape[0]:
        vals, bnds, scores = kernels.cell_bounds(family.coef, family.kinds, centers, halfw, mode, impl=impl)
        F = sgn * vals
        U = sgn * bnds + slack
        total += centers.shape[0]
        if family.d:
            min_h = min(min_h, float(halfw.min()))
        j = int(np.argmax(F))
        if F[j] > best:
            best, best_x = float(F[j]), centers[j].copy()
            if refine and family.d:
                px, pv = polish(family, mode, best_x, np.maximum(2.0 * halfw[j], 1e-3 * width0))
                if pv > best:
                    best, best_x = pv, px
        if target is not None and best > target:
            reason = "target"
            live_upper = float(U.max())
            break
        cut = best + tol if thr is None else thr
        keep = U > cut
        if np.any(~keep):
            settled = max(settled, float(U[~keep].max()))
        centers, halfw, scores = centers[keep], halfw[keep], scores[keep]
        n_live = centers.shape[0]
        if n_live == 0:
            break
        if 2 * n_live > max_cells or level >= max_levels or family.d == 0:
            reason = "budget"
            live_upper = float(U[keep].max())
            break
        ax = np.argmax(scores, axis=1)
        rows = np.arange(n_live)
        halfw = halfw.copy()
        halfw[rows, ax] *= 0.5
        lo_c = centers.copy()
        hi_c = centers.copy()
        lo_c[rows, ax] -= halfw[rows, ax]
        hi_c[rows, ax] += halfw[rows, ax]
        centers = np.stack([lo_c, hi_c], axis=1).reshape(-1, family.d)
        halfw = np.repeat(halfw, 2, axis=0)
        level += 1

    best_x = _normalize(family, best_x)
    value = float(family.objective(mode, best_x)[0])
    upper = max(sgn * value, settled, live_upper)
    certified = reason != "budget"
    return SearchResult(
        mode=mode,
        value=value,
        witness=best_x,
        bound=sgn * upper,
        certified=certified,
        reason=reason,
        cells=total,
        levels=level,
        grid_resolution=(math.pi / min_h) if math.isfinite(min_h) and min_h > 0 else 0.0,
        wall_time=time.perf_counter() - t0,
    )
