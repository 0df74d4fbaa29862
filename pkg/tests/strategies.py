"""Hypothesis strategies shared by the property tests."""
import math

import numpy as np
from hypothesis import strategies as st


def disk_points():
    """Complex numbers in the closed unit disk."""
    return st.tuples(st.floats(0.0, 1.0), st.floats(-math.pi, math.pi)).map(
        lambda rt: rt[0] * complex(math.cos(rt[1]), math.sin(rt[1])))


def disk_matrices(n):
    return st.lists(disk_points(), min_size=n * n, max_size=n * n).map(
        lambda v: np.array(v, dtype=complex).reshape(n, n))


def complex_matrices(n, bound=3.0):
    f = st.floats(-bound, bound)
    return st.lists(st.tuples(f, f), min_size=n * n, max_size=n * n).map(
        lambda v: np.array([complex(a, b) for a, b in v]).reshape(n, n))


def angles(k):
    return st.lists(st.floats(-math.pi, math.pi, exclude_max=True), min_size=k, max_size=k)
