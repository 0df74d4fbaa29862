"""Operator norms ``||A||_{q->p}`` of small complex matrices.

``||A||_{1->inf}`` and ``||A||_{2->2}`` are computed exactly.
``||A||_{inf->1}`` (the supremum of ``||A x||_1`` over unimodular ``x``) is
bracketed by a certified branch-and-bound for ``n <= 4``; larger sizes get a
heuristic lower bound and the cheap upper bound ``min(sum |A_ij|, n ||A||_2)``.
Other ``q->p`` norms get heuristic lower bounds only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bnb, kernels
from .core import PhaseVector, as_matrix, pnorm
from .errors import DomainError

CERTIFY_MAX_N = 4


@dataclass(frozen=True)
class LpPair:
    """Exponents of a map ``l_q -> l_p``; ``alpha`` is recomputed on access."""

    p: float
    q: float

    def __post_init__(self):
        for v in (self.p, self.q):
            if not v >= 1:
                raise DomainError(f"exponents must lie in [1, inf], got {v}")

    @property
    def alpha(self):
        return max(0.5 - 1.0 / self.p, 1.0 / self.q - 0.5)

    @property
    def dual(self):
        """The pair ``(q*, p*)`` of the adjoint map."""
        return LpPair(conjugate_exponent(self.q), conjugate_exponent(self.p))


def conjugate_exponent(p):
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass
class NormBracket:
    lower: float
    upper: float
    witness: PhaseVector
    grid_resolution: int
    certified: bool
    method: str = "branch-and-bound"
    cells: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value):
        return self.lower <= value <= self.upper


def norm_1_to_inf(A) -> float:
    """Largest entry modulus (extreme points of the l1 ball are basis vectors)."""
    return float(np.max(np.abs(as_matrix(A, square=False))))


def norm_2_to_2(A) -> float:
    """Largest singular value, from the Hermitian eigenproblem of ``A* A``."""
    A = as_matrix(A, square=False)
    w = np.linalg.eigvalsh(A.conj().T @ A)
    return float(math.sqrt(max(w[-1], 0.0)))


def inf_to_1_value(A, x) -> float:
    """``||A x||_1`` for a unimodular vector or PhaseVector ``x``."""
    if isinstance(x, PhaseVector):
        x = x.realize()
    return float(np.abs(np.asarray(A) @ np.asarray(x)).sum())


def norm_inf_to_1_certified(A, tol: float = 1e-6, certify=None, max_cells=None) -> NormBracket:
    """Bracket ``[lower, upper]`` for ``sup ||A x||_1`` over unimodular ``x``.

    The first coordinate of ``x`` is fixed to 1.  ``lower`` is attained by the
    returned witness.  ``certify`` defaults to ``n <= 4``; otherwise the
    bracket comes from a multi-start search and is flagged uncertified.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    A = as_matrix(A)
    n = A.shape[0]
    if n == 1:
        v = float(abs(A[0, 0]))
        return NormBracket(v, v, PhaseVector(()), 1, True, method="exact")
    if certify is None:
        certify = n <= CERTIFY_MAX_N
    if certify:
        res = bnb.search(bnb.FormFamily.phases(A), bnb.MODE_SUM_MAX, tol=tol, max_cells=max_cells)
        w = PhaseVector(tuple(res.witness))
        lower = inf_to_1_value(A, w)
        upper = max(res.bound, lower)
        return NormBracket(
            lower, upper, w, int(round(res.grid_resolution)), res.certified and upper - lower <= tol,
            cells=res.cells,
        )
    vals, ang = kernels.inf1_estimate_batch(A[None], grid=_heuristic_grid(n), iters=60)
    w = PhaseVector(tuple(ang[0]))
    lower = inf_to_1_value(A, w)
    upper = min(float(np.abs(A).sum()), n * norm_2_to_2(A))
    return NormBracket(lower, max(upper, lower), w, _heuristic_grid(n), False, method="multistart")


def _heuristic_grid(n):
    # keep grid**(n-1) around 1e5 points
    return max(4, int(1e5 ** (1.0 / (n - 1))))


def riesz_thorin_bound(n: int, q: float) -> float:
    """``n^{1 - 1/q}``: bound on ``||H||_{q->q*}`` for an n x n complex Hadamard ``H``."""
    if not 1 <= q <= 2:
        raise DomainError(f"q must lie in [1, 2], got {q}")
    return float(n ** (1.0 - 1.0 / q))


def _dual_vector(y, r):
    """Unit vector in ``l_{r*}`` norming ``y`` in ``l_r``: ``<y, out> = ||y||_r``."""
    a = np.abs(y)
    # entries this small carry no usable phase
    live = a > 1e-280
    a = np.where(live, a, 0.0)
    ph = np.where(live, y / np.where(live, a, 1.0), 0.0)
    if math.isinf(r):
        out = np.zeros_like(y)
        j = int(np.argmax(a))
        out[j] = ph[j]
        return out
    if r == 1:
        return ph
    s = pnorm(y, r)
    if s == 0:
        return np.zeros_like(y)
    return ph * (a / s) ** (r - 1.0)


def _power_iteration(A, p, q, x, iters):
    """Boyd's nonlinear power method for ``||A||_{q->p}`` from start ``x``."""
    qs = conjugate_exponent(q)
    best, best_x = pnorm(A @ x, p), x
    for _ in range(iters):
        z = A.conj().T @ _dual_vector(A @ x, p)
        if not np.any(z):
            break
        x_new = _dual_vector(z, qs)
        x_new = x_new / pnorm(x_new, q)
        val = pnorm(A @ x_new, p)
        if val > best:
            best, best_x = val, x_new
        if np.allclose(x_new, x, rtol=0, atol=1e-14):
            break
        x = x_new
    return best, best_x


def norm_q_to_p_lower(A, pair: LpPair, restarts: int = 20, seed: int = 0, iters: int = 500):
    """Lower bound for ``||A||_{q->p}`` with a witness on the unit ``l_q`` sphere.

    Exact for ``q = 1`` (largest column ``p``-norm) and ``p = inf`` (largest
    row ``q*``-norm); otherwise the best of seeded power-iteration restarts.
    Returns ``(value, witness)``; ``value == ||A witness||_p``.
    """
    A = as_matrix(A, square=False)
    p, q = pair.p, pair.q
    n = A.shape[1]
    if q == 1:
        cols = [pnorm(A[:, j], p) for j in range(n)]
        j = int(np.argmax(cols))
        x = np.zeros(n, dtype=complex)
        x[j] = 1.0
        return pnorm(A @ x, p), x
    if math.isinf(p):
        qs = conjugate_exponent(q)
        rows = [pnorm(A[i], qs) for i in range(A.shape[0])]
        i = int(np.argmax(rows))
        x = np.conj(_dual_vector(A[i], qs))
        x = x / pnorm(x, q) if np.any(x) else x
        if not np.any(x):
            x = np.zeros(n, dtype=complex)
            x[0] = 1.0
        return pnorm(A @ x, p), x
    rng = np.random.default_rng(seed)
    starts = [np.ones(n, dtype=complex)]
    starts += list(np.eye(n, dtype=complex))
    for _ in range(restarts):
        starts.append(rng.normal(size=n) + 1j * rng.normal(size=n))
    best, best_x = -1.0, None
    for x0 in starts:
        x0 = x0 / pnorm(x0, q)
        val, x = _power_iteration(A, p, q, x0, iters)
        if val > best:
            best, best_x = val, x
    return float(pnorm(A @ best_x, p)), best_x
