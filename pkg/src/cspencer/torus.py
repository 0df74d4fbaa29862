"""Toric bodies on the 2-torus and the combinatorics of the 3x3 grid.

The toric body of a centre ``a`` in C^3 is the open set of torus points
``(t1, t2)`` with ``|<a, (1, e^{i t1}, e^{i t2})>| > sqrt(3)``.  Three such
bodies never cover the torus when ``||a_i||_inf <= 1``; this module holds
the pieces of that argument in executable form: the grid of nine points,
the six grid symmetries and their orbits on 4-subsets, certified
coverability of grid subsets by a single body, and the extraction of an
uncovered point for a given triple of centres.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import bnb
from .config import COVER_MARGIN, EPS
from .core import OMEGA, TorusPoint, as_vector
from .errors import DimensionError, DomainError, LemmaViolation

SQRT3 = math.sqrt(3.0)

# grid points (j, k) in row-major order; bit index (j + 1) * 3 + (k + 1)
GRID = tuple((j, k) for j in (-1, 0, 1) for k in (-1, 0, 1))
FULL_MASK = (1 << 9) - 1


def grid_index(j, k):
    return (j + 1) * 3 + (k + 1)


def grid_vector(j, k) -> np.ndarray:
    """``(1, omega^j, omega^k)``: the unimodular vector of grid point ``(j, k)``."""
    return np.array([1.0, OMEGA ** j, OMEGA ** k], dtype=complex)


GRID_VECTORS = np.array([grid_vector(j, k) for j, k in GRID])


def grid_torus_point(j, k) -> TorusPoint:
    return TorusPoint(2.0 * math.pi * j / 3.0, 2.0 * math.pi * k / 3.0)


# --- toric bodies -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ToricCenter:
    a: np.ndarray

    def __post_init__(self):
        a = as_vector(self.a).copy()
        if a.size != 3:
            raise DimensionError("toric centres live in C^3")
        if np.max(np.abs(a)) > 1.0 + 1e-12:
            raise DomainError("toric centres need ||a||_inf <= 1")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def types(self) -> frozenset:
        """Indices (1-based) of the coordinates of minimal modulus."""
        m = np.abs(self.a)
        return frozenset(int(i) + 1 for i in np.flatnonzero(m <= m.min() + 1e-12))


def _center(a):
    return a.a if isinstance(a, ToricCenter) else as_vector(a)


def toric_value(a, p) -> float:
    """``|<a, (1, e^{i theta1}, e^{i theta2})>|``."""
    a = _center(a)
    x = p.vector() if isinstance(p, TorusPoint) else np.asarray(p, dtype=complex)
    return float(abs(np.sum(a * np.conj(x))))


def toric_membership(a, p, closed=False) -> bool:
    """Membership in the open body (value > sqrt3 + EPS) or closed body (>= sqrt3 - EPS)."""
    v = toric_value(a, p)
    return v >= SQRT3 - EPS if closed else v > SQRT3 + EPS


def rotate_center(a, d1, d2) -> np.ndarray:
    """Centre whose body is the body of ``a`` translated by ``(d1, d2)``."""
    a = _center(a)
    return a * np.array([1.0, np.exp(1j * d1), np.exp(1j * d2)])


def blob_expand(a) -> np.ndarray:
    """Centre ``v`` with at most one coordinate of modulus < 1 and ``B(a)`` inside ``B(v)``.

    ``a`` is scaled to ``||a||_inf = 1`` and the middle modulus (by a stable
    sort of the coordinate moduli) is lifted to 1 keeping its phase.
    """
    a = _center(a)
    top = float(np.max(np.abs(a)))
    if top == 0.0:
        raise DomainError("blob_expand needs a non-zero centre")
    v = a / top
    order = np.argsort(np.abs(v), kind="stable")
    mid = order[1]
    v = v.copy()
    # a zero coordinate has no phase to keep; any unit value works
    v[mid] = v[mid] / abs(v[mid]) if v[mid] != 0 else 1.0
    return v


def _unit(z):
    return z / abs(z) if z != 0 else 1.0 + 0j


def grid_multiplier(a) -> np.ndarray:
    """Unimodular ``x`` such that the body of ``a * x`` holds at most one grid point.

    After blob expansion the smallest coordinate ``b`` goes to the front and
    the other two are rotated to ``u`` and ``conj(u)`` with
    ``u = exp(i (arccos(b/2) - pi/3))``.  The grid is invariant under
    coordinate permutations, so the slot of ``b`` does not matter.
    """
    a = _center(a)
    v = blob_expand(a)
    p = int(np.argmin(np.abs(v)))
    b = float(abs(v[p]))
    u = np.exp(1j * (math.acos(b / 2.0) - math.pi / 3.0))
    target = np.empty(3, dtype=complex)
    others = [i for i in range(3) if i != p]
    target[p] = b
    target[others[0]] = u
    target[others[1]] = np.conj(u)
    x = np.array([_unit(target[i]) * np.conj(_unit(a[i])) for i in range(3)])
    inside = grid_members(a * x)
    if len(inside) > 1:  # pragma: no cover - would contradict the placement lemma
        raise LemmaViolation(f"rotated body contains {len(inside)} grid points")
    return x


def grid_members(a, closed=False):
    """Grid points ``(j, k)`` inside the (open or closed) body of ``a``."""
    vals = np.abs(GRID_VECTORS.conj() @ _center(a))
    if closed:
        return [GRID[i] for i in np.flatnonzero(vals >= SQRT3 - EPS)]
    return [GRID[i] for i in np.flatnonzero(vals > SQRT3 + EPS)]


# case representatives (k, l) for the placement inequality
PLACEMENT_CASES = ((1, 2), (1, 0), (2, 0), (1, 1), (2, 2))


def grid_placement_case_values(b) -> np.ndarray:
    """``b^2 + 2b Re(u (w^k + w^l)) + 2 Re(u^2 w^k w^l)`` for the five case representatives."""
    if not 0.0 <= b <= 1.0:
        raise DomainError("b must lie in [0, 1]")
    u = np.exp(1j * (math.acos(b / 2.0) - math.pi / 3.0))
    out = []
    for k, l in PLACEMENT_CASES:
        wk, wl = OMEGA ** k, OMEGA ** l
        out.append(b * b + 2.0 * b * (u * (wk + wl)).real + 2.0 * (u * u * wk * wl).real)
    return np.array(out)


def grid_placement_closed_forms(b) -> np.ndarray:
    return np.array([1.0, 3.0 * b * b - 2.0, 1.0, 1.5 * b * (b - math.sqrt(12.0 - 3.0 * b * b)) + 1.0, -2.0])


# --- grid subsets and their symmetries ----------------------------------------

def _m3(v):
    return (v + 1) % 3 - 1


TRANSFORMS = {
    1: lambda j, k: (_m3(j + 1), k),
    2: lambda j, k: (j, _m3(k + 1)),
    3: lambda j, k: (k, j),
    4: lambda j, k: (_m3(-j), _m3(-k)),
    5: lambda j, k: (_m3(-j), _m3(k - j)),
    6: lambda j, k: (_m3(j - k), _m3(-k)),
}

# permutation of bit positions for each transform
_PERMS = {t: tuple(grid_index(*f(j, k)) for j, k in GRID) for t, f in TRANSFORMS.items()}


@dataclass(frozen=True, order=True)
class GridSubset:
    mask: int

    def __post_init__(self):
        if not 0 <= self.mask <= FULL_MASK:
            raise DomainError(f"grid mask out of range: {self.mask}")

    @classmethod
    def from_points(cls, points):
        m = 0
        for j, k in points:
            if j not in (-1, 0, 1) or k not in (-1, 0, 1):
                raise DomainError(f"({j}, {k}) is not a grid point")
            m |= 1 << grid_index(j, k)
        return cls(m)

    @property
    def points(self):
        return [GRID[i] for i in range(9) if self.mask >> i & 1]

    @property
    def size(self):
        return bin(self.mask).count("1")

    def vectors(self):
        return GRID_VECTORS[[i for i in range(9) if self.mask >> i & 1]]

    def canonical(self) -> "GridSubset":
        return GridSubset(min(orbit_masks(self.mask)))

    def __str__(self):
        return format(self.mask, "#011b")


def parse_subset(text: str) -> GridSubset:
    """Accepts ``0b...`` binary, a decimal mask, or ``j,k;j,k;...`` pairs."""
    s = text.strip()
    if s.startswith(("0b", "0B")):
        return GridSubset(int(s, 2))
    if s.isdigit():
        return GridSubset(int(s))
    pts = []
    for part in s.replace("(", "").replace(")", "").replace(" ", "").split(";"):
        if not part:
            continue
        j, k = part.split(",")
        pts.append((int(j), int(k)))
    return GridSubset.from_points(pts)


def transform_mask(mask: int, tau: int) -> int:
    if tau not in _PERMS:
        raise DomainError(f"tau must be in 1..6, got {tau}")
    perm = _PERMS[tau]
    out = 0
    for i in range(9):
        if mask >> i & 1:
            out |= 1 << perm[i]
    return out


def transform_subset(S: GridSubset, tau: int) -> GridSubset:
    return GridSubset(transform_mask(S.mask, tau))


def orbit_masks(mask: int) -> set:
    """Closure of ``mask`` under the six transformations (breadth first)."""
    seen = {mask}
    frontier = [mask]
    while frontier:
        nxt = []
        for m in frontier:
            for t in TRANSFORMS:
                y = transform_mask(m, t)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def _masks_of_size(r):
    return [sum(1 << i for i in c) for c in itertools.combinations(range(9), r)]


def _lines():
    """All 12 three-point lines of the grid, keyed by direction."""
    out = {"horizontal": [], "vertical": [], "diagonal": [], "antidiagonal": []}
    for c in range(3):
        c0 = c - 1
        out["horizontal"].append([(j, c0) for j in (-1, 0, 1)])
        out["vertical"].append([(c0, k) for k in (-1, 0, 1)])
        out["diagonal"].append([(j, _m3(j - c0)) for j in (-1, 0, 1)])
        out["antidiagonal"].append([(j, _m3(c0 - j)) for j in (-1, 0, 1)])
    return {d: [GridSubset.from_points(l).mask for l in ls] for d, ls in out.items()}


LINES = _lines()

CLASS1_SQUARE = GridSubset.from_points([(-1, -1), (0, -1), (-1, 0), (0, 0)])
CLASS4_CROSS = GridSubset.from_points([(1, 0), (-1, 0), (0, 1), (0, -1)])


def _contains_line(mask, directions):
    return any(mask & l == l for d in directions for l in LINES[d])


@dataclass
class Orbit:
    canonical: int
    members: list
    label: int

    @property
    def size(self):
        return len(self.members)


def _class_label(members: set) -> int:
    rep = min(members)
    if _contains_line(rep, ["antidiagonal"]):
        return 2
    if _contains_line(rep, ["horizontal", "vertical", "diagonal"]):
        return 3
    if CLASS1_SQUARE.mask in members:
        return 1
    if CLASS4_CROSS.mask in members:
        return 4
    return 0


def enumerate_orbits(size: int = 4) -> list:
    """Partition of all ``size``-subsets of the grid into orbits, sorted by canonical mask.

    For 4-subsets each orbit carries a class label: 2 (contains an
    anti-diagonal line), 3 (contains a horizontal, vertical or diagonal
    line), 1 (orbit of the 2x2 square) or 4 (orbit of the plus shape).
    """
    remaining = set(_masks_of_size(size))
    orbits = []
    while remaining:
        start = min(remaining)
        orb = orbit_masks(start)
        remaining -= orb
        label = _class_label(orb) if size == 4 else 0
        orbits.append(Orbit(min(orb), sorted(orb), label))
    orbits.sort(key=lambda o: o.canonical)
    return orbits


def class_of(S: GridSubset) -> int:
    if S.size != 4:
        raise DomainError("classes are defined for 4-subsets")
    for o in enumerate_orbits(4):
        if S.mask in o.members:
            return o.label
    raise AssertionError("unreachable")  # pragma: no cover


def class_masks(label: int) -> list:
    return [m for o in enumerate_orbits(4) if o.label == label for m in o.members]


def check_class1_intersections():
    """Pairs of class-1 subsets that share no point (expected: none)."""
    c1 = class_masks(1)
    bad = [(a, b) for a, b in itertools.combinations(c1, 2) if a & b == 0]
    return {"pairs": len(c1) * (len(c1) - 1) // 2, "violations": len(bad), "examples": bad[:5]}


def _has_non_class1_quad(mask5, class1):
    bits = [i for i in range(9) if mask5 >> i & 1]
    return any(sum(1 << i for i in c) not in class1 for c in itertools.combinations(bits, 4))


def check_five_point_obstruction():
    """5-subsets all of whose 4-subsets are class 1 (expected: none)."""
    class1 = set(class_masks(1))
    fives = _masks_of_size(5)
    bad = [m for m in fives if not _has_non_class1_quad(m, class1)]
    return {"subsets": len(fives), "violations": len(bad), "examples": bad[:5]}


def square_extension_choices():
    """Extensions of the 2x2 square by one grid point, and how many escape class 1."""
    class1 = set(class_masks(1))
    sq = CLASS1_SQUARE.mask
    ext = [sq | 1 << i for i in range(9) if not sq >> i & 1]
    return {"choices": len(ext), "obstructed": sum(_has_non_class1_quad(m, class1) for m in ext)}


# --- coverability -------------------------------------------------------------

@dataclass
class CoverageVerdict:
    status: str                      # "coverable", "not_coverable" or "inconclusive"
    witness_center: ToricCenter | None
    certified_sup: float | None      # bound on sup_a min_s |<a, x_s>|^2
    best_value: float                # best min_s |<a, x_s>|^2 found
    families: list = field(default_factory=list)

    @property
    def coverable(self):
        return {"coverable": True, "not_coverable": False}.get(self.status)

    @property
    def margin(self):
        return self.best_value - 3.0


def type_family(S: GridSubset, typ: int) -> bnb.FormFamily:
    """Centres ``a`` with ``a_typ = b`` in [0, 1] and the other two coordinates unimodular.

    Forms are ``<a, x_s>`` for the points of ``S``; the global phase is
    fixed by making ``a_typ`` real.
    """
    X = S.vectors()
    coef = np.zeros((len(X), 4), dtype=complex)
    coef[:, 1:] = np.conj(X)
    kinds = np.zeros(3, dtype=np.int64)
    kinds[typ - 1] = bnb.LINEAR
    lo = np.full(3, -math.pi)
    hi = np.full(3, math.pi)
    lo[typ - 1], hi[typ - 1] = 0.0, 1.0
    return bnb.FormFamily(coef, kinds, lo, hi)


def _center_from_params(params, typ):
    a = np.exp(1j * np.asarray(params, dtype=float))
    a[typ - 1] = params[typ - 1]
    return a


def coverability(S: GridSubset, tol: float = 1e-6, margin: float = COVER_MARGIN, max_cells=None) -> CoverageVerdict:
    """Can one open toric body contain every point of ``S``?

    Maximises ``g(a) = min_s |<a, x_s>|^2`` over the three typed families of
    centres.  A centre with ``g > 3 + margin`` proves coverability; a
    certified bound ``sup g <= 3 + margin`` on all three families disproves
    it; anything else is inconclusive.
    """
    if not 1 <= S.size <= 9:
        raise DomainError("subset must have between 1 and 9 points")
    threshold = 3.0 + margin
    fams = []
    best_v, best_c = -math.inf, None
    sup = -math.inf
    all_certified = True
    for typ in (1, 2, 3):
        fam = type_family(S, typ)
        res = bnb.search(fam, bnb.MODE_SQMIN_MAX, tol=tol, threshold=threshold,
                         stop_above=threshold, max_cells=max_cells)
        fams.append({"type": typ, "value": res.value, "bound": res.bound, "reason": res.reason,
                     "cells": res.cells, "levels": res.levels})
        if res.value > best_v:
            best_v, best_c = res.value, _center_from_params(res.witness, typ)
        sup = max(sup, res.bound)
        all_certified &= res.certified
        if res.value > threshold:
            # sharpen the witness so the reported margin is a local optimum
            full = bnb.search(fam, bnb.MODE_SQMIN_MAX, tol=1e-4, max_cells=max_cells or 1_000_000)
            if full.value > best_v:
                best_v, best_c = full.value, _center_from_params(full.witness, typ)
            fams[-1]["refined_value"] = full.value
            return CoverageVerdict("coverable", ToricCenter(best_c), None, best_v, fams)
    if all_certified and sup <= threshold:
        return CoverageVerdict("not_coverable", None, sup, best_v, fams)
    return CoverageVerdict("inconclusive", ToricCenter(best_c) if best_c is not None else None,
                           sup, best_v, fams)


# --- uncovered points for triples of bodies ------------------------------------

@dataclass
class UncoveredPoint:
    point: TorusPoint
    value: float      # max_i |<a_i, x>| at the point
    source: str       # "grid" or "solver"


def triple_value(rows, p: TorusPoint) -> float:
    return max(toric_value(a, p) for a in rows)


def uncovered_witness(a1, a2, a3) -> TorusPoint:
    """A torus point outside all three open bodies (see :func:`uncovered_witness_report`)."""
    return uncovered_witness_report(a1, a2, a3).point


def uncovered_witness_report(a1, a2, a3) -> UncoveredPoint:
    """Rotate the grid so that the third body holds at most one grid point and
    pick the grid point with the smallest ``max_i |<a_i, x>|``; fall back to
    the certified discrepancy solver if that value exceeds ``sqrt3``.
    """
    rows = np.array([_center(a) for a in (a1, a2, a3)])
    if rows.shape != (3, 3):
        raise DimensionError("expected three centres in C^3")
    if np.max(np.abs(rows)) > 1.0 + 1e-12:
        raise DomainError("centres need ||a_i||_inf <= 1")
    if np.any(rows[2] != 0):
        x = grid_multiplier(rows[2])
    else:
        x = np.ones(3, dtype=complex)
    # y = conj(x) * g rescaled so that y_1 = 1
    ys = np.conj(x)[None, :] * GRID_VECTORS
    ys = ys / ys[:, :1]
    vals = np.abs(ys @ np.conj(rows).T).max(1)
    i = int(np.argmin(vals))
    pt = TorusPoint(float(np.angle(ys[i, 1])), float(np.angle(ys[i, 2])))
    v = triple_value(rows, pt)
    if v <= SQRT3 + EPS:
        return UncoveredPoint(pt, v, "grid")
    from .discrepancy import solve

    res = solve(rows, tol=1e-9, certify=True)
    pt2 = TorusPoint(*res.witness.free_angles)
    v2 = triple_value(rows, pt2)
    return UncoveredPoint(pt2, v2, "solver") if v2 < v else UncoveredPoint(pt, v, "grid")


# --- lemma sweeps ---------------------------------------------------------------

@dataclass
class SweepReport:
    checked: int
    violations: int
    worst: float
    detail: dict = field(default_factory=dict)


def trig_lemma_grids(resolution: int, r_points=None, gamma_points=None):
    """Uniform grids for ``b`` in [0, 1], ``r`` in [-1, -1/2] u [1/2, 1] and ``gamma`` in [0, 2 pi)."""
    r_points = r_points or resolution
    gamma_points = gamma_points or 2 * resolution
    bs = np.linspace(0.0, 1.0, resolution)
    half = np.linspace(0.5, 1.0, r_points // 2 + r_points % 2)
    rs = np.concatenate([-half[::-1], half])[:r_points]
    gammas = 2.0 * math.pi * np.arange(gamma_points) / gamma_points
    return bs, rs, gammas


def verify_trig_lemma(resolution: int = 200, r_points=None, gamma_points=None) -> SweepReport:
    """Sweep the two-quadratic lemma: no opposite-sign pair passes both strict inequalities."""
    from . import kernels

    if resolution < 50:
        raise DomainError("resolution must be at least 50")
    bs, rs, gammas = trig_lemma_grids(resolution, r_points, gamma_points)
    opposite, violations, excess = kernels.trig_sweep(bs, rs, gammas, EPS)
    rep = SweepReport(opposite, violations, excess,
                      {"b": len(bs), "r": len(rs), "gamma": len(gammas), "grid": len(bs) * len(rs) * len(gammas)})
    if violations:
        raise LemmaViolation(f"trig lemma: {violations} violating grid triples")
    return rep


def verify_line_lemma(samples: int = 100_000, seed: int = 0) -> SweepReport:
    """Contrapositive check: with ``|a_2| = 1`` some horizontal grid point is not strictly inside."""
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0, 1, size=(samples, 2)))
    t = rng.uniform(-math.pi, math.pi, size=(samples, 3))
    a = np.empty((samples, 3), dtype=complex)
    a[:, 0] = r[:, 0] * np.exp(1j * t[:, 0])
    a[:, 1] = np.exp(1j * t[:, 1])
    a[:, 2] = r[:, 1] * np.exp(1j * t[:, 2])
    xs = np.array([[1.0, OMEGA ** k, 1.0] for k in range(3)])
    vals = np.abs(a @ xs.conj().T) ** 2
    mins = vals.min(1)
    worst = float(mins.max())
    bad = int(np.count_nonzero(mins > 3.0 + 1e-12))
    if bad:
        raise LemmaViolation(f"line lemma: {bad} violating samples")
    return SweepReport(samples, 0, worst)


def verify_grid_placement(b_points: int = 1001, samples: int = 2000, seed: int = 0) -> SweepReport:
    """Case formulas against their closed forms, plus random multiplier checks."""
    bs = np.linspace(0.0, 1.0, b_points)
    err = max(float(np.max(np.abs(grid_placement_case_values(b) - grid_placement_closed_forms(b)))) for b in bs)
    rng = np.random.default_rng(seed)
    worst_count = 0
    for _ in range(samples):
        a = rng.normal(size=3) + 1j * rng.normal(size=3)
        a = a / np.max(np.abs(a)) * rng.uniform(0.2, 1.0)
        worst_count = max(worst_count, len(grid_members(a * grid_multiplier(a))))
    bad = int(err > 1e-12) + int(worst_count > 1)
    if bad:
        raise LemmaViolation(f"grid placement: formula error {err:.3e}, max grid points {worst_count}")
    return SweepReport(b_points + samples, 0, err, {"max_grid_points": worst_count})
