"""Unimodular discrepancy: ``min_x max_i |<x, a_i>|`` over phase vectors ``x``.

For ``n <= 3`` the minimum is bracketed by the certified branch-and-bound,
otherwise a multi-start local search reports the best value it finds.  For
``n <= 3`` every instance with ``||a_i||_inf <= 1`` has value at most
``sqrt(n)``; :func:`check_instance` treats anything else as a bug.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import bnb
from .config import EPS
from .core import PhaseVector, as_matrix, inner
from .errors import DomainError, TheoremViolation

log = logging.getLogger(__name__)

CERTIFY_MAX_N = 3
ROW_BOUND_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class DiscrepancyInstance:
    rows: np.ndarray

    def __post_init__(self):
        r = as_matrix(self.rows).copy()
        if np.max(np.abs(r)) > 1.0 + ROW_BOUND_SLACK:
            raise DomainError("every row must satisfy ||a_i||_inf <= 1")
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)

    @property
    def n(self):
        return self.rows.shape[0]

    @classmethod
    def random(cls, n, rng):
        """Entries uniform on the closed unit disk (rejection sampling)."""
        out = np.empty(n * n, dtype=complex)
        filled = 0
        while filled < out.size:
            z = rng.uniform(-1.0, 1.0, size=(2 * (out.size - filled), 2))
            z = z[(z ** 2).sum(1) <= 1.0]
            take = min(len(z), out.size - filled)
            out[filled:filled + take] = z[:take, 0] + 1j * z[:take, 1]
            filled += take
        return cls(out.reshape(n, n))


@dataclass
class DiscrepancyResult:
    witness: PhaseVector
    value: float
    certified_min_upper: float | None
    certified_lower: float | None
    restarts_used: int
    certified: bool
    candidate_counterexample: bool = False


def _rows(instance):
    return instance.rows if isinstance(instance, DiscrepancyInstance) else DiscrepancyInstance(instance).rows


def max_inner(rows, x) -> float:
    """``max_i |<x, a_i>|`` evaluated through the inner product."""
    if isinstance(x, PhaseVector):
        x = x.realize()
    return max(abs(inner(x, a)) for a in rows)


def _family(rows):
    # <x, a_i> = sum_k x_k conj(a_ik) with x_1 = 1
    return bnb.FormFamily.phases(np.conj(rows))


def solve(instance, tol: float = 1e-6, certify=None, restarts: int = 16, seed: int = 0) -> DiscrepancyResult:
    if not tol > 0:
        raise DomainError("tol must be positive")
    rows = _rows(instance)
    n = rows.shape[0]
    if n == 1:
        v = float(abs(rows[0, 0]))
        return DiscrepancyResult(PhaseVector(()), v, v, v, 0, True)
    if certify is None:
        certify = n <= CERTIFY_MAX_N
    if certify:
        res = bnb.search(_family(rows), bnb.MODE_MAX_MIN, tol=tol)
        w = PhaseVector(tuple(res.witness))
        value = max_inner(rows, w)
        lower = min(res.bound, value)
        return DiscrepancyResult(w, value, value, lower, 0, res.certified and value - lower <= tol)
    w, value = _multistart(rows, restarts, seed)
    flagged = value > math.sqrt(n) + tol
    if flagged:
        log.warning("n=%d instance with heuristic value %.9f > sqrt(n): candidate counterexample", n, value)
    return DiscrepancyResult(w, value, None, None, restarts, False, flagged)


def _multistart(rows, restarts, seed):
    fam = _family(rows)
    n = rows.shape[0]
    rng = np.random.default_rng(seed)
    pool = rng.uniform(-math.pi, math.pi, size=(64 * max(1, restarts), n - 1))
    f = fam.objective(bnb.MODE_MAX_MIN, pool)
    starts = pool[np.argsort(f, kind="stable")[:max(1, restarts)]]
    best_v, best_x = math.inf, None
    for x0 in starts:
        r = minimize(lambda t: float(fam.objective(bnb.MODE_MAX_MIN, t)[0]), x0, method="Nelder-Mead",
                     options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 400 * n})
        x, v = bnb.polish(fam, bnb.MODE_MAX_MIN, r.x, np.full(n - 1, 0.05))
        v = -v
        if v < best_v:
            best_v, best_x = v, x
    w = PhaseVector(tuple(best_x))
    return w, max_inner(rows, w)


@dataclass
class CheckResult:
    ok: bool
    witness: PhaseVector
    value: float
    bound: float

    def __bool__(self):
        return self.ok


def check_instance(instance, tol: float = 1e-6) -> CheckResult:
    """Find ``x`` with ``max_i |<x, a_i>| <= sqrt(n) + EPS`` for ``n`` in {2, 3}.

    Such an ``x`` always exists; failing to find one raises
    :class:`TheoremViolation`.
    """
    rows = _rows(instance)
    n = rows.shape[0]
    if n not in (2, 3):
        raise DomainError(f"check_instance needs n in {{2, 3}}, got {n}")
    limit = math.sqrt(n) + EPS
    for t in (tol, 1e-3 * tol):
        res = solve(rows, tol=t, certify=True)
        if res.value <= limit:
            return CheckResult(True, res.witness, res.value, limit)
        if res.certified_lower is not None and res.certified_lower > limit:
            break
    raise TheoremViolation(
        f"no x with max |<x, a_i>| <= sqrt({n}) found (best {res.value:.12f}, lower {res.certified_lower})"
    )


def equality_gap(instance, tol: float = 1e-6) -> float:
    """``sqrt(n)`` minus the certified lower bound on the min-max value."""
    rows = _rows(instance)
    n = rows.shape[0]
    if n > CERTIFY_MAX_N:
        raise DomainError(f"equality_gap needs n <= {CERTIFY_MAX_N}")
    res = solve(rows, tol=tol, certify=True)
    return math.sqrt(n) - res.certified_lower
