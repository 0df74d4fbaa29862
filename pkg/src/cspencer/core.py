"""Complex scalars, vectors and small matrices, torus points and phase vectors.

Vectors and matrices are plain ``numpy`` complex arrays; the helpers here
validate shapes and implement the few operations every other module needs.
Matrices are limited to ``n <= MAX_N``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, DomainError, ParseError

MAX_N = 9

OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)  # e^{2 pi i / 3}


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector has non-finite entries")
    return v


def as_matrix(a, square=True) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if max(m.shape) > MAX_N:
        raise DimensionError(f"matrices are limited to n <= {MAX_N}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def inner(x, y) -> complex:
    """Standard inner product ``sum_i x_i * conj(y_i)`` (linear in ``x``)."""
    x = as_vector(x)
    y = as_vector(y)
    if x.shape != y.shape:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    return complex(np.sum(x * np.conj(y)))


def pnorm(x, p) -> float:
    """``l_p`` norm for ``1 <= p <= inf``."""
    x = as_vector(x)
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    a = np.abs(x)
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(math.sqrt(np.sum(a * a)))
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * np.sum((a / scale) ** p) ** (1.0 / p))


def det(a) -> complex:
    """Determinant by LU factorisation with partial pivoting."""
    return complex(np.linalg.det(as_matrix(a)))


def adjoint(a) -> np.ndarray:
    return np.conj(as_matrix(a, square=False)).T.copy()


def normalize_angle(theta: float) -> float:
    """Map an angle to the fundamental interval ``[-pi, pi)``."""
    t = math.fmod(float(theta) + math.pi, 2.0 * math.pi)
    if t < 0.0:
        t += 2.0 * math.pi
    t -= math.pi
    # fmod can land exactly on +pi after the shift
    if t >= math.pi:
        t -= 2.0 * math.pi
    return t


@dataclass(frozen=True)
class TorusPoint:
    """Point ``(theta1, theta2)`` of the 2-torus, stored normalised to ``[-pi, pi)``."""

    theta1: float
    theta2: float

    def __post_init__(self):
        object.__setattr__(self, "theta1", normalize_angle(self.theta1))
        object.__setattr__(self, "theta2", normalize_angle(self.theta2))

    def vector(self) -> np.ndarray:
        """The unimodular vector ``(1, e^{i theta1}, e^{i theta2})``."""
        return np.array([1.0, np.exp(1j * self.theta1), np.exp(1j * self.theta2)])

    def shifted(self, d1: float, d2: float) -> "TorusPoint":
        return TorusPoint(self.theta1 + d1, self.theta2 + d2)

    def to_list(self):
        return [self.theta1, self.theta2]


@dataclass(frozen=True)
class PhaseVector:
    """Unimodular vector ``(1, e^{i phi_1}, ..., e^{i phi_{n-1}})``.

    The global phase is quotiented out by fixing the first coordinate to 1.
    """

    free_angles: tuple

    def __post_init__(self):
        angles = tuple(normalize_angle(a) for a in np.atleast_1d(np.asarray(self.free_angles, dtype=float)))
        object.__setattr__(self, "free_angles", angles)

    @property
    def n(self) -> int:
        return len(self.free_angles) + 1

    @classmethod
    def from_vector(cls, x) -> "PhaseVector":
        """Phase vector proportional to a vector with non-zero entries."""
        x = as_vector(x)
        if np.any(x == 0):
            raise DomainError("cannot extract phases from a vector with zero entries")
        rel = x[1:] / x[0]
        return cls(tuple(np.angle(rel)))

    def realize(self) -> np.ndarray:
        return phase_vector_realize(self)

    def to_list(self):
        return list(self.free_angles)


def phase_vector_realize(p: PhaseVector) -> np.ndarray:
    out = np.empty(p.n, dtype=complex)
    out[0] = 1.0
    if p.n > 1:
        out[1:] = np.exp(1j * np.asarray(p.free_angles))
    return out


# --- .cmat.json -------------------------------------------------------------

def _to_nested(a):
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_to_nested(v) for v in a]


def to_json_array(a) -> list:
    """Nested lists with complex scalars written as ``[re, im]``."""
    return _to_nested(np.asarray(a, dtype=complex))


def _scalar(obj, where):
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if (
        isinstance(obj, list)
        and len(obj) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
    ):
        return complex(obj[0], obj[1])
    raise ParseError(f"{where}: expected a complex scalar [re, im], got {obj!r}")


def from_json_array(obj, where="$") -> np.ndarray:
    """Inverse of :func:`to_json_array` for vectors and matrices."""
    if isinstance(obj, dict):
        if "matrix" in obj:
            return from_json_array(obj["matrix"], where + ".matrix")
        if "vector" in obj:
            return from_json_array(obj["vector"], where + ".vector")
        raise ParseError(f"{where}: object needs a 'matrix' or 'vector' key")
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"{where}: expected a non-empty array")
    # a vector is a list of scalars, a matrix a list of vectors
    is_matrix = isinstance(obj[0], list) and obj[0] and isinstance(obj[0][0], list)
    if not is_matrix:
        return np.array([_scalar(v, f"{where}[{i}]") for i, v in enumerate(obj)])
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list):
            raise ParseError(f"{where}[{i}]: expected a row array")
        rows.append([_scalar(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"{where}[{i}]: ragged matrix (row length {len(row)} != {width})")
    return np.array(rows, dtype=complex)


def loads_cmat(text: str, source="<string>") -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg} (offset {exc.pos})") from exc
    try:
        return from_json_array(obj)
    except ParseError as exc:
        raise ParseError(f"{source}: {exc}") from None


def load_cmat(path) -> np.ndarray:
    path = Path(path)
    return loads_cmat(path.read_text(), source=str(path))


def dumps_cmat(a) -> str:
    return json.dumps(to_json_array(a))


def save_cmat(path, a):
    Path(path).write_text(dumps_cmat(a) + "\n")
