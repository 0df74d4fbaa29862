import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cspencer import core
from cspencer.core import OMEGA, PhaseVector, TorusPoint
from cspencer.errors import DimensionError, DomainError, ParseError

from strategies import angles, complex_matrices


def test_omega_is_primitive_cube_root():
    assert abs(OMEGA ** 3 - 1) < 1e-15
    assert abs(OMEGA - 1) > 1


def test_inner_is_linear_in_first_argument():
    x = np.array([1, 1j])
    y = np.array([1j, 2])
    assert core.inner(x, y) == pytest.approx(1 * (-1j) + 1j * 2)
    assert core.inner(2j * x, y) == pytest.approx(2j * core.inner(x, y))


def test_inner_length_mismatch():
    with pytest.raises(DimensionError):
        core.inner([1, 2], [1, 2, 3])


@pytest.mark.parametrize("p, expected", [(1, 7.0), (2, 5.0), (math.inf, 4.0)])
def test_pnorm_exact(p, expected):
    assert core.pnorm([3, 4j], p) == pytest.approx(expected)


def test_pnorm_rejects_small_exponent():
    with pytest.raises(DomainError):
        core.pnorm([1, 2], 0.5)


@given(st.floats(1.0, 50.0), complex_matrices(1, bound=1e3).map(lambda m: m[0]))
def test_pnorm_between_inf_and_one_norm(p, x):
    v = core.pnorm(x, p)
    assert core.pnorm(x, math.inf) * (1 - 1e-12) <= v <= core.pnorm(x, 1) * (1 + 1e-12)


def test_as_matrix_limits():
    with pytest.raises(DimensionError):
        core.as_matrix(np.eye(10))
    with pytest.raises(DimensionError):
        core.as_matrix(np.ones((2, 3)))
    with pytest.raises(DomainError):
        core.as_matrix([[np.nan, 0], [0, 1]])


@given(st.floats(-1e4, 1e4))
def test_normalize_angle_range_and_class(t):
    u = core.normalize_angle(t)
    assert -math.pi <= u < math.pi
    assert abs(np.exp(1j * u) - np.exp(1j * t)) < 1e-9


def test_torus_point_normalises():
    p = TorusPoint(math.pi, 3 * math.pi)
    assert p.theta1 == -math.pi and p.theta2 == pytest.approx(-math.pi)
    assert np.allclose(p.vector(), [1, -1, -1])


@given(angles(3))
def test_phase_vector_roundtrip(a):
    pv = PhaseVector(tuple(a))
    x = pv.realize()
    assert x[0] == 1 and np.allclose(np.abs(x), 1)
    back = PhaseVector.from_vector(3j * x)
    assert np.allclose(back.realize(), x)


def test_phase_vector_from_vector_rejects_zero():
    with pytest.raises(DomainError):
        PhaseVector.from_vector([1, 0])


@given(complex_matrices(3))
def test_cmat_roundtrip(m):
    assert np.array_equal(core.loads_cmat(core.dumps_cmat(m)), m)


def test_cmat_accepts_real_scalars_and_wrappers():
    assert np.array_equal(core.loads_cmat("[[[1, 0], [0, 2]], [[3, 0], 4]]"), np.array([[1, 2j], [3, 4]]))
    assert np.array_equal(core.loads_cmat(json.dumps({"vector": [[1, 1], 2]})), np.array([1 + 1j, 2]))


@pytest.mark.parametrize("text, fragment", [
    ("[[1, 2],\n [3 4]]", ":2:5:"),
    ("[[[1, 0], [2, 0]], [[3, 0]]]", "ragged"),
    ("[[[1, 0], [1, 2, 3]], [[1, 0], [1, 0]]]", "[0][1]"),
    ("{}", "'matrix' or 'vector'"),
])
def test_cmat_parse_errors_locate_problem(text, fragment):
    with pytest.raises(ParseError) as exc:
        core.loads_cmat(text, source="m.cmat.json")
    assert fragment in str(exc.value)
    assert "m.cmat.json" in str(exc.value)


def test_cmat_syntax_error_reports_offset():
    with pytest.raises(ParseError, match=r"offset 13"):
        core.loads_cmat("[[1, 2],\n [3 4]]")


def test_save_and_load(tmp_path):
    p = tmp_path / "a.cmat.json"
    core.save_cmat(p, np.eye(2) * 1j)
    assert np.array_equal(core.load_cmat(p), np.eye(2) * 1j)
