"""Complex Hadamard matrices and flat-image witnesses.

A complex Hadamard matrix has unimodular entries and pairwise orthogonal
columns, so ``H / sqrt(n)`` is unitary.  A *flat-image witness* for ``H``
is a unimodular ``x`` whose image ``H x / sqrt(n)`` is unimodular again.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import MAX_N, PhaseVector, as_matrix, inner
from .errors import DimensionError, DomainError, NotFoundError

FAMILY_TAGS = ("dft", "f4_param", "user")


@dataclass(frozen=True)
class HadamardCheck:
    ok: bool
    modulus_defect: float
    orthogonality_defect: float

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    matrix: np.ndarray
    family_tag: str = "user"

    def __post_init__(self):
        if self.family_tag not in FAMILY_TAGS:
            raise ValueError(f"unknown family tag {self.family_tag!r}")
        m = as_matrix(self.matrix).copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def _mat(H):
    return H.matrix if isinstance(H, HadamardMatrix) else as_matrix(H)


def dft(n: int) -> HadamardMatrix:
    """``F[j, k] = exp(2 pi i j k / n)`` with indices ``j, k = 1..n``."""
    if not 1 <= n <= MAX_N:
        raise DimensionError(f"dft size must be in 1..{MAX_N}, got {n}")
    idx = np.arange(1, n + 1)
    # reduce j*k mod n before scaling so entries like -1 come out exactly
    ph = np.outer(idx, idx) % n
    F = np.exp(2j * np.pi * ph / n)
    F.real[np.abs(F.real) < 1e-15] = 0.0
    F.imag[np.abs(F.imag) < 1e-15] = 0.0
    return HadamardMatrix(F, "dft")


def f4_family(t: float) -> HadamardMatrix:
    """One-parameter family of 4x4 complex Hadamard matrices.

    Rows 2 and 4 of the order-4 Fourier pattern carry the extra phase
    ``e^{it}`` on their even columns; ``t = 0`` gives a matrix equivalent
    to ``dft(4)`` (rows and columns permuted).
    """
    e = 1j * np.exp(1j * t)
    F = np.array(
        [
            [1, 1, 1, 1],
            [1, e, -1, -e],
            [1, -1, 1, -1],
            [1, -e, -1, e],
        ],
        dtype=complex,
    )
    return HadamardMatrix(F, "f4_param")


def is_hadamard(A, tol: float = 1e-10) -> HadamardCheck:
    if not tol > 0:
        raise DomainError("tol must be positive")
    A = _mat(A)
    mod = float(np.max(np.abs(np.abs(A) - 1.0)))
    G = A.conj().T @ A
    off = G - np.diag(np.diag(G))
    orth = float(np.max(np.abs(off))) if A.shape[0] > 1 else 0.0
    return HadamardCheck(mod <= tol and orth <= tol, mod, orth)


def quadratic_phase_vector(n: int) -> np.ndarray:
    """Chirp ``x_k = exp(pi i (n+1) k^2 / n)``, ``k = 1..n``.

    For the Fourier matrix this is a flat-image witness for every ``n``:
    ``F x`` is a multiple of a generalised Gauss sum in each coordinate.
    """
    k = np.arange(1, n + 1)
    # (n+1) k^2 mod 2n keeps the phase argument small and exact
    return np.exp(1j * np.pi * (((n + 1) * k * k) % (2 * n)) / n)


def image(H, x) -> np.ndarray:
    """``H x`` evaluated row by row through the inner product."""
    H = _mat(H)
    x = np.asarray(x, dtype=complex)
    return np.array([inner(row, np.conj(x)) for row in H])


def flatness_defect(H, x) -> float:
    """``max_k | |(H x)_k| / sqrt(n) - 1 |`` for a vector (or PhaseVector) ``x``."""
    if isinstance(x, PhaseVector):
        x = x.realize()
    H = _mat(H)
    y = image(H, x)
    return float(np.max(np.abs(np.abs(y) / math.sqrt(H.shape[0]) - 1.0)))


def _phases(angles):
    return np.concatenate([[1.0 + 0j], np.exp(1j * angles)])


def flat_image_witness(H, tol: float = 1e-6, restarts: int = 16, seed: int = 0) -> PhaseVector:
    """Unimodular ``x`` with ``H x / sqrt(n)`` unimodular to within ``tol``.

    Starts from the quadratic-phase chirp and refines by least squares on
    ``|(H x)_k|^2 / n - 1``; if that fails, seeded random restarts follow.
    Raises :class:`NotFoundError` (carrying the best defect) when no restart
    reaches ``tol``.
    """
    H = _mat(H)
    n = H.shape[0]
    if not is_hadamard(H, 1e-8):
        raise DomainError("input is not a complex Hadamard matrix")
    if n == 1:
        return PhaseVector(())

    def residual(phi):
        y = H @ _phases(phi)
        return (y.real ** 2 + y.imag ** 2) / n - 1.0

    x0 = quadratic_phase_vector(n)
    starts = [np.angle(x0[1:] / x0[0])]
    rng = np.random.default_rng(seed)
    starts += [rng.uniform(-np.pi, np.pi, n - 1) for _ in range(restarts)]

    best_defect, best = math.inf, None
    for phi0 in starts:
        cand = [phi0]
        if flatness_defect(H, _phases(phi0)) > tol:
            sol = least_squares(residual, phi0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
            cand.append(sol.x)
        for phi in cand:
            dft_ = flatness_defect(H, _phases(phi))
            if dft_ < best_defect:
                best_defect, best = dft_, phi
        if best_defect <= tol:
            return PhaseVector(tuple(best))
    raise NotFoundError(f"no flat-image witness within {tol:g} (best defect {best_defect:.3e})", best_defect)
