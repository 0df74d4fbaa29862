import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cspencer import bnb, kernels
from cspencer.kernels import MODE_MAX_MIN, MODE_SQMIN_MAX, MODE_SUM_MAX

from strategies import complex_matrices

MODES = [MODE_SUM_MAX, MODE_MAX_MIN, MODE_SQMIN_MAX]

try:
    CY = kernels.backend("cython")
except ImportError:  # pragma: no cover - build without the extension
    CY = None
PY = kernels.backend("python")
needs_cython = pytest.mark.skipif(CY is None, reason="compiled extension not built")


def _mixed_family(rng, m=3, d=3):
    coef = rng.normal(size=(m, d + 1)) + 1j * rng.normal(size=(m, d + 1))
    kinds = np.array([0, 1, 0][:d])
    lo = np.where(kinds == 1, 0.0, -math.pi)
    hi = np.where(kinds == 1, 1.0, math.pi)
    return bnb.FormFamily(coef, kinds, lo, hi)


def _random_cells(rng, fam, count, width):
    c = rng.uniform(fam.lo, fam.hi, size=(count, fam.d))
    h = rng.uniform(0.1, 1.0, size=(count, fam.d)) * width * (fam.hi - fam.lo)
    return c, h


def test_candidate_table_shape():
    T, K = kernels.candidate_table(3, 2)
    assert T.shape[1] == 3 and K.shape[1] == 2
    # each candidate cancels |T| - 1 first-order terms
    assert np.all(T.sum(1) - 1 == K.sum(1))
    assert not T.flags.writeable


def test_candidate_table_caps_active_forms():
    T, _ = kernels.candidate_table(9, 8)
    assert T.shape[1] == kernels.MAX_ACTIVE


@pytest.mark.parametrize("mode", MODES)
def test_bounds_are_sound_on_samples(mode, rng):
    fam = _mixed_family(rng)
    centers, halfw = _random_cells(rng, fam, 400, 0.2)
    vals, bnds, _ = kernels.cell_bounds(fam.coef, fam.kinds, centers, halfw, mode)
    u = rng.uniform(-1, 1, size=(400, 64, fam.d))
    pts = centers[:, None, :] + u * halfw[:, None, :]
    obj = fam.objective(mode, pts.reshape(-1, fam.d)).reshape(400, 64)
    assert np.allclose(vals, fam.objective(mode, centers))
    if mode == MODE_MAX_MIN:
        assert np.all(obj.min(1) >= bnds - 1e-12)
    else:
        assert np.all(obj.max(1) <= bnds + 1e-12)


@given(complex_matrices(3), st.floats(1e-4, 0.5), st.sampled_from(MODES))
def test_bound_sound_at_cell_corners(A, h, mode):
    fam = bnb.FormFamily.phases(A)
    c = np.array([[0.3, -1.1]])
    hw = np.full((1, 2), h)
    _, bnd, _ = kernels.cell_bounds(fam.coef, fam.kinds, c, hw, mode)
    corners = c + hw * np.array([[1, 1], [1, -1], [-1, 1], [-1, -1], [0, 0]])
    obj = fam.objective(mode, corners)
    if mode == MODE_MAX_MIN:
        assert obj.min() >= bnd[0] - 1e-12
    else:
        assert obj.max() <= bnd[0] + 1e-12


def test_bounds_tighten_quadratically(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    fam = bnb.FormFamily.phases(A)
    c = np.array([[0.4, 0.9]])
    gaps = []
    for h in (1e-2, 1e-3):
        v, b, _ = kernels.cell_bounds(fam.coef, fam.kinds, c, np.full((1, 2), h), MODE_SUM_MAX)
        gaps.append(b[0] - v[0])
    assert gaps[1] < gaps[0] / 5


@needs_cython
@pytest.mark.parametrize("mode", MODES)
def test_backends_agree_on_cell_bounds(mode, rng):
    fam = _mixed_family(rng, m=4, d=3)
    centers, halfw = _random_cells(rng, fam, 2000, 0.05)
    a = kernels.cell_bounds(fam.coef, fam.kinds, centers, halfw, mode, impl=PY)
    b = kernels.cell_bounds(fam.coef, fam.kinds, centers, halfw, mode, impl=CY)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-12, atol=1e-12)


@needs_cython
@pytest.mark.parametrize("starts", [1, 5])
def test_backends_agree_on_inf1_estimates(starts, rng):
    mats = rng.normal(size=(40, 3, 3)) + 1j * rng.normal(size=(40, 3, 3))
    va, aa = kernels.inf1_estimate_batch(mats, grid=12, iters=20, starts=starts, impl=PY)
    vb, ab = kernels.inf1_estimate_batch(mats, grid=12, iters=20, starts=starts, impl=CY)
    assert np.allclose(va, vb, rtol=1e-12)
    assert np.allclose(aa, ab, atol=1e-9)


@needs_cython
def test_backends_agree_on_trig_sweep():
    bs = np.linspace(0, 1, 30)
    rs = np.concatenate([np.linspace(-1, -0.5, 15), np.linspace(0.5, 1, 15)])
    gs = np.linspace(0, 2 * math.pi, 90, endpoint=False)
    assert kernels.trig_sweep(bs, rs, gs, 1e-9, impl=PY) == kernels.trig_sweep(bs, rs, gs, 1e-9, impl=CY)


def test_inf1_estimate_is_attained_at_angles(rng):
    mats = rng.normal(size=(10, 3, 3)) + 1j * rng.normal(size=(10, 3, 3))
    vals, ang = kernels.inf1_estimate_batch(mats, grid=16, iters=20, starts=3)
    for A, v, t in zip(mats, vals, ang):
        x = np.concatenate([[1], np.exp(1j * t)])
        assert v == pytest.approx(np.abs(A @ x).sum(), rel=1e-12)


def test_more_starts_never_hurt(rng):
    mats = rng.normal(size=(50, 3, 3)) + 1j * rng.normal(size=(50, 3, 3))
    one, _ = kernels.inf1_estimate_batch(mats, grid=8, iters=20, starts=1)
    four, _ = kernels.inf1_estimate_batch(mats, grid=8, iters=20, starts=4)
    assert np.all(four >= one - 1e-12)


def test_pure_python_fallback_selected_by_env():
    env = dict(os.environ, CSPENCER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import cspencer.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
