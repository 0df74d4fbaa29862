import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cspencer import hadamard
from cspencer.errors import DimensionError, DomainError, NotFoundError


@pytest.mark.parametrize("n", range(1, 10))
def test_dft_is_hadamard(n):
    H = hadamard.dft(n)
    assert H.family_tag == "dft"
    assert hadamard.is_hadamard(H)
    assert np.allclose(H.matrix.conj().T @ H.matrix, n * np.eye(n))


def test_dft2_exact_entries():
    assert np.array_equal(hadamard.dft(2).matrix, np.array([[-1, 1], [1, 1]], dtype=complex))


def test_dft_rejects_size():
    with pytest.raises(DimensionError):
        hadamard.dft(10)


@given(st.floats(-math.pi, math.pi))
def test_f4_family_members_are_hadamard(t):
    H = hadamard.f4_family(t)
    assert H.family_tag == "f4_param"
    assert hadamard.is_hadamard(H)
    assert abs(np.linalg.det(H.matrix)) == pytest.approx(16.0)


def test_is_hadamard_reports_defects():
    A = np.array([[1, 1], [1, 1]], dtype=complex)
    chk = hadamard.is_hadamard(A)
    assert not chk and chk.modulus_defect == 0 and chk.orthogonality_defect == pytest.approx(2.0)


def test_matrix_is_read_only():
    H = hadamard.dft(3)
    with pytest.raises(ValueError):
        H.matrix[0, 0] = 2


@pytest.mark.parametrize("n", range(1, 10))
def test_quadratic_phase_vector_is_flat_for_dft(n):
    x = hadamard.quadratic_phase_vector(n)
    assert np.allclose(np.abs(x), 1)
    assert hadamard.flatness_defect(hadamard.dft(n), x) <= 1e-12


def test_image_matches_matrix_product(rng):
    H = hadamard.dft(5)
    x = np.exp(1j * rng.uniform(-3, 3, 5))
    assert np.allclose(hadamard.image(H, x), H.matrix @ x)


@pytest.mark.parametrize("H", [hadamard.dft(4), hadamard.f4_family(0.7), hadamard.f4_family(-2.0), hadamard.dft(6)])
def test_flat_image_witness_found(H):
    w = hadamard.flat_image_witness(H, tol=1e-9)
    assert hadamard.flatness_defect(H, w) <= 1e-9


def test_flat_image_witness_rejects_non_hadamard():
    with pytest.raises(DomainError):
        hadamard.flat_image_witness(np.eye(3))


def test_flat_image_witness_not_found_carries_best(monkeypatch):
    # an impossible tolerance exhausts the restarts
    with pytest.raises(NotFoundError) as exc:
        hadamard.flat_image_witness(hadamard.f4_family(0.3), tol=0.0, restarts=1)
    assert exc.value.best is not None and exc.value.best < 1e-6
