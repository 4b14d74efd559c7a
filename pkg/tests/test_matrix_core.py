import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from burstyx.matrix_core import (
    complement_in,
    dof_slope,
    gaussian_entropy,
    null_basis,
    numeric_rank,
    orth_basis,
    sample_channel,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_sample_channel_deterministic_and_distinct():
    a, b, c = sample_channel(3, 2, 4), sample_channel(3, 2, 4), sample_channel(3, 2, 5)
    for rx in (1, 2):
        for tx in (1, 2):
            assert np.array_equal(a.H(rx, tx), b.H(rx, tx))
    assert not np.array_equal(a.H11, c.H11)
    assert a.shape == (2, 3)


def test_sample_channel_full_rank():
    assert all(numeric_rank(sample_channel(3, 2, s).H11) == 2 for s in range(100))


def test_sample_channel_rejects_empty():
    with pytest.raises(ValueError):
        sample_channel(0, 2, 1)


def test_null_basis_examples():
    B = null_basis(np.array([[1.0, 0, 0], [0, 1, 0]]))
    assert B.shape == (3, 1) and abs(abs(B[2, 0]) - 1) < 1e-15
    assert null_basis(np.eye(3)).shape == (3, 0)
    L = null_basis(np.array([[1.0, 0], [0, 0], [0, 1]]), side="left")
    assert L.shape == (3, 1) and abs(abs(L[1, 0]) - 1) < 1e-15
    with pytest.raises(ValueError):
        null_basis(np.eye(2), side="up")


@settings(max_examples=60)
@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite))
def test_null_basis_properties(H):
    for side in ("right", "left"):
        B = null_basis(H, side)
        X = H @ B if side == "right" else B.T @ H
        n = H.shape[1] if side == "right" else H.shape[0]
        assert B.shape[1] == n - numeric_rank(H)
        assert np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10)
        scale = max(1.0, np.abs(H).max())
        assert np.abs(X).max(initial=0) <= 1e-10 * scale


def test_numeric_rank_examples():
    assert numeric_rank(np.zeros((3, 3))) == 0
    rng = np.random.default_rng(0)
    assert numeric_rank(rng.standard_normal((4, 4))) == 4
    v = rng.standard_normal((5, 1))
    assert numeric_rank(np.hstack([v, 2 * v])) == 1


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 6), st.integers(0, 2**31))
def test_numeric_rank_of_product(m, n, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, m, n)
    X = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    assert numeric_rank(X) == r


def test_orth_and_complement():
    rng = np.random.default_rng(1)
    space = rng.standard_normal((5, 3))
    sub = space[:, :1]
    C = complement_in(sub, space)
    assert C.shape == (5, 2)
    assert np.abs(C.T @ sub).max() < 1e-12
    assert numeric_rank(np.hstack([orth_basis(space), C])) == 3
    assert complement_in(np.zeros((5, 0)), space).shape == (5, 3)


def test_gaussian_entropy_examples():
    assert gaussian_entropy(np.eye(1)) == pytest.approx(0.5 * math.log(2 * math.pi * math.e))
    assert gaussian_entropy(np.eye(1)) == pytest.approx(1.4189, abs=1e-4)
    rng = np.random.default_rng(2)
    A = rng.standard_normal((2, 2))
    B = rng.standard_normal((3, 3))
    K1, K2 = A @ A.T + np.eye(2), B @ B.T + np.eye(3)
    K = np.zeros((5, 5))
    K[:2, :2], K[2:, 2:] = K1, K2
    assert gaussian_entropy(K) == pytest.approx(gaussian_entropy(K1) + gaussian_entropy(K2), abs=1e-9)
    with pytest.raises(ValueError):
        gaussian_entropy(np.zeros((2, 2)))
    assert gaussian_entropy(np.zeros((0, 0))) == 0.0


def test_dof_slope_examples():
    ladder = (1e4, 1e6, 1e8, 1e10)
    est = dof_slope([(P, 3 * 0.5 * math.log(P) + 7) for P in ladder])
    assert est.slope == pytest.approx(3, abs=1e-12) and est.residual == pytest.approx(0, abs=1e-12)
    est = dof_slope([(P, 0.5 * math.log(2 * math.pi * math.e * (1 + P))) for P in (1e6, 1e8, 1e10)])
    assert est.slope == pytest.approx(1, abs=1e-5)
    assert dof_slope([(1e6, 2.0), (1e8, 2.0)]).slope == 0.0
    with pytest.raises(ValueError):
        dof_slope([(1e8, 1.0), (1e6, 2.0)])
    with pytest.raises(ValueError):
        dof_slope([(1e8, 1.0)])


def test_scalar_capacity_slope():
    vals = [(P, gaussian_entropy(np.array([[1.0 + P]]))) for P in (1e6, 1e8, 1e10)]
    assert dof_slope(vals).slope == pytest.approx(1, abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 5), st.integers(0, 2**31))
def test_entropy_slope_equals_rank(n, m, r, seed):
    # h(HX + Z) grows like rank(H) * (1/2) log P for a fixed Q > 0
    rng = np.random.default_rng(seed)
    r = min(r, n, m)
    H = rng.standard_normal((n, r)) @ rng.standard_normal((r, m))
    A = rng.standard_normal((m, m))
    Q = A @ A.T + 0.1 * np.eye(m)
    vals = [(P, gaussian_entropy(np.eye(n) + P * H @ Q @ H.T)) for P in (1e6, 1e8, 1e10)]
    assert dof_slope(vals).slope == pytest.approx(numeric_rank(H), abs=0.02)
