import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cspencer import torus
from cspencer.core import OMEGA, TorusPoint
from cspencer.errors import DimensionError, DomainError
from cspencer.torus import GRID, GridSubset, SQRT3

import oracles
from strategies import angles, disk_points

# [DERIVED] orbit sizes of the 126 four-subsets, from the affine-group oracle
ORBIT_SIZES = [54, 27, 27, 18]
# [DERIVED] orbit canonical masks with their class labels
ORBIT_LABELS = {0b000001111: 3, 0b000011011: 1, 0b000011110: 4, 0b001010101: 2}

centers3 = st.lists(disk_points(), min_size=3, max_size=3).map(lambda v: np.array(v, dtype=complex))


def test_grid_layout():
    assert len(GRID) == 9
    assert torus.grid_index(-1, -1) == 0 and torus.grid_index(1, 1) == 8
    assert np.allclose(torus.grid_vector(1, -1), [1, OMEGA, OMEGA ** 2])
    p = torus.grid_torus_point(1, 1)
    assert np.allclose(p.vector(), [1, OMEGA, OMEGA])


def test_toric_center_validation_and_types():
    with pytest.raises(DimensionError):
        torus.ToricCenter([1, 1])
    with pytest.raises(DomainError):
        torus.ToricCenter([1, 1.5, 0])
    assert torus.ToricCenter([0.2, 1, 1]).types == frozenset({1})
    assert torus.ToricCenter([1, 1, 1]).types == frozenset({1, 2, 3})


def test_membership_open_and_closed():
    a = np.array([1, 1, 1])
    # at the grid point (1, 1) the value is |1 + 2 conj(omega)| = sqrt3: boundary
    p = torus.grid_torus_point(1, 1)
    assert torus.toric_value(a, p) == pytest.approx(SQRT3)
    assert not torus.toric_membership(a, p)
    assert torus.toric_membership(a, p, closed=True)
    assert torus.toric_membership(a, TorusPoint(0, 0))


@given(centers3, angles(2), angles(2))
def test_rotation_translates_body(a, d, p):
    rot = torus.rotate_center(a, *d)
    here = TorusPoint(*p)
    assert torus.toric_value(rot, here.shifted(*d)) == pytest.approx(torus.toric_value(a, here), abs=1e-12)


@given(centers3.filter(lambda a: np.abs(a).max() > 1e-3), angles(2))
def test_blob_expansion_contains_body(a, p):
    v = torus.blob_expand(a)
    assert np.count_nonzero(np.abs(v) < 1 - 1e-12) <= 1
    x = TorusPoint(*p)
    if torus.toric_membership(a, x):
        assert torus.toric_value(v, x) >= torus.toric_value(a, x) - 1e-12


@given(centers3.filter(lambda a: np.abs(a).max() > 1e-3))
def test_grid_multiplier_leaves_one_grid_point(a):
    x = torus.grid_multiplier(a)
    assert np.allclose(np.abs(x), 1)
    assert len(torus.grid_members(a * x)) <= 1


def test_placement_formulas():
    bs = np.linspace(0, 1, 101)
    for b in bs:
        assert np.allclose(torus.grid_placement_case_values(b), torus.grid_placement_closed_forms(b), atol=1e-12)


def test_placement_closed_forms_at_zero():
    assert np.allclose(torus.grid_placement_closed_forms(0.0), [1, -2, 1, 1, -2])


@pytest.mark.parametrize("tau", range(1, 7))
def test_transforms_are_involutive_or_order_three(tau):
    for m in range(512):
        img = m
        for _ in range(6):
            img = torus.transform_mask(img, tau)
        assert img == m
        assert bin(torus.transform_mask(m, tau)).count("1") == bin(m).count("1")


def test_transforms_preserve_grid_geometry():
    # every transform maps lines of three points to lines
    lines = {m for masks in torus.LINES.values() for m in masks}
    for tau in range(1, 7):
        assert {torus.transform_mask(m, tau) for m in lines} == lines


def test_orbits_match_oracle():
    orbits = torus.enumerate_orbits(4)
    assert sum(o.size for o in orbits) == 126
    assert sorted((o.size for o in orbits), reverse=True) == ORBIT_SIZES == oracles.orbit_sizes(4)
    assert {o.canonical: o.label for o in orbits} == ORBIT_LABELS


@pytest.mark.parametrize("size", [1, 2, 3, 5])
def test_orbits_for_other_sizes_match_oracle(size):
    sizes = sorted((o.size for o in torus.enumerate_orbits(size)), reverse=True)
    assert sizes == oracles.orbit_sizes(size)


def test_class_representatives():
    assert torus.class_of(torus.CLASS1_SQUARE) == 1
    assert torus.class_of(torus.CLASS4_CROSS) == 4
    assert torus.class_of(GridSubset.from_points([(-1, 1), (0, 0), (1, -1), (0, 1)])) == 2
    assert torus.class_of(GridSubset.from_points([(-1, 0), (0, 0), (1, 0), (1, 1)])) == 3


def test_parse_subset_forms():
    a = torus.parse_subset("0b000011011")
    assert a == torus.parse_subset("27") == torus.parse_subset("(-1,-1);(0,-1);(-1,0);(0,0)")
    assert str(a) == "0b000011011"
    with pytest.raises(DomainError):
        torus.parse_subset("2,0")


@given(st.integers(0, 511), st.integers(1, 6))
def test_canonical_is_orbit_invariant(mask, tau):
    S = GridSubset(mask)
    assert torus.transform_subset(S, tau).canonical() == S.canonical()


def test_combinatorial_checks():
    c1 = torus.check_class1_intersections()
    five = torus.check_five_point_obstruction()
    assert c1["pairs"] == 351 and c1["violations"] == 0
    assert five["subsets"] == 126 and five["violations"] == 0
    assert torus.square_extension_choices() == {"choices": 5, "obstructed": 5}


def test_type_family_geometry():
    fam = torus.type_family(torus.CLASS1_SQUARE, 2)
    assert fam.m == 4 and list(fam.kinds) == [0, 1, 0]
    assert fam.lo[1] == 0 and fam.hi[1] == 1


def test_square_is_coverable():
    v = torus.coverability(torus.CLASS1_SQUARE)
    assert v.status == "coverable" and v.coverable
    assert v.margin >= 1e-4
    a = v.witness_center.a
    assert all(torus.toric_value(a, torus.grid_torus_point(j, k)) > SQRT3 for j, k in torus.CLASS1_SQUARE.points)


def test_cross_is_not_coverable():
    v = torus.coverability(torus.CLASS4_CROSS)
    assert v.status == "not_coverable" and v.coverable is False
    assert v.certified_sup <= 3 + 1e-6 + 1e-9


def test_coverability_validates_size():
    with pytest.raises(DomainError):
        torus.coverability(GridSubset(0))


def test_single_points_are_coverable():
    assert torus.coverability(GridSubset(1)).coverable


@given(centers3, centers3, centers3)
def test_uncovered_witness_property(a1, a2, a3):
    rep = torus.uncovered_witness_report(a1, a2, a3)
    assert rep.value <= SQRT3 + 1e-9
    assert rep.value == pytest.approx(torus.triple_value([a1, a2, a3], rep.point))


def test_uncovered_witness_strips():
    rows = [np.array([1, OMEGA ** j, 0]) for j in range(3)]
    p = torus.uncovered_witness(*rows)
    assert torus.triple_value(rows, p) == pytest.approx(SQRT3, abs=1e-9)


def test_trig_lemma_small_sweep():
    rep = torus.verify_trig_lemma(60)
    assert rep.violations == 0 and rep.worst <= 1e-12
    assert rep.detail["grid"] == 60 * 60 * 120


def test_trig_lemma_needs_opposite_signs():
    # same-sign cosine pairs can pass both quadratics, so the sign condition matters
    g = np.linspace(0, 2 * math.pi, 3600, endpoint=False)
    x, y = np.cos(g), np.cos(g - 2 * math.pi / 3)
    b, r = 1.0, 1.0
    both = (4 * x * x + 4 * b * r * x + b * b > 3) & (4 * y * y + 4 * b * r * y + b * b > 3)
    assert np.any(both & (x * y > 0))
    assert not np.any(both & (x * y < 0))


def test_line_lemma_sweep():
    rep = torus.verify_line_lemma(20000, seed=1)
    assert rep.violations == 0 and rep.worst <= 3.0


def test_grid_placement_sweep():
    rep = torus.verify_grid_placement(b_points=101, samples=200)
    assert rep.violations == 0 and rep.detail["max_grid_points"] <= 1
