import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from nhfloquet import kernels

finite = st.floats(-1e3, 1e3, allow_nan=False)
cvec = hnp.arrays(complex, st.integers(1, 50),
                  elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(complex, st.tuples(st.integers(1, 20), st.integers(1, 10)),
                  elements=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)))
def test_ipr_columns_agree(v):
    np.testing.assert_allclose(kernels.ipr_columns_nb(v), kernels.ipr_columns_np(v),
                               rtol=1e-12, atol=1e-300)


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(float, st.integers(3, 60), elements=finite))
def test_gap_ratios_agree_and_bounded(x):
    x = np.sort(x)
    a = kernels.gap_ratios_nb(x)
    b = kernels.gap_ratios_np(x)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)
    assert a.shape == (x.size - 2,)
    assert np.all((a >= 0) & (a <= 1))


def test_gap_ratio_degenerate_pairs():
    x = np.array([0.0, 0.0, 0.0, 1.0, 3.0])
    np.testing.assert_array_equal(kernels.gap_ratios_np(x), [1.0, 0.0, 0.5])
    np.testing.assert_array_equal(kernels.gap_ratios_nb(x), [1.0, 0.0, 0.5])


@settings(max_examples=50, deadline=None)
@given(cvec, st.floats(-30, 30))
def test_moment_kernels_agree(psi, center):
    L = psi.size
    pos = np.arange(1, L + 1, dtype=float) - L // 2
    np.testing.assert_allclose(kernels.moments_nb(psi, pos), kernels.moments_np(psi, pos),
                               rtol=1e-10, atol=1e-6)
    np.testing.assert_allclose(kernels.lifted_moments_nb(psi, pos, center, L),
                               kernels.lifted_moments_np(psi, pos, center, L),
                               rtol=1e-10, atol=1e-6)


def test_lifted_displacements_are_nearest_images():
    L = 10
    pos = np.arange(1, L + 1, dtype=float) - 5
    psi = np.zeros(L, complex)
    psi[0] = 1.0  # fixed coordinate -4
    # seen from center 4.5 the nearest image of -4 is +6
    s0, d1, d2 = kernels.lifted_moments(psi, pos, 4.5, L)
    assert (s0, d1, d2) == (1.0, 1.5, 2.25)


@settings(max_examples=30, deadline=None)
@given(cvec)
def test_circulant_agree(c):
    X = kernels.circulant_nb(c)
    np.testing.assert_array_equal(X, kernels.circulant_np(c))
    L = c.size
    for n in range(min(L, 5)):
        assert X[n, 0] == c[n] and X[(n + 1) % L, 1 % L] == c[n if L > 1 else 0]


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, NHFLOQUET_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from nhfloquet import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
