import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colprob.errors import NonPSDError, SingularMatrixError
from colprob.linalg import eig_sym2, eig_sym2_batch, inv_sym3, sqrt_sym3, sqrt_sym3_batch, std_normal_cdf


def test_eig_sym2_identity():
    vals, vecs = eig_sym2(np.eye(2))
    np.testing.assert_array_equal(vals, [1.0, 1.0])
    np.testing.assert_array_equal(vecs, np.eye(2))


def test_eig_sym2_diagonal():
    vals, vecs = eig_sym2(np.diag([4.0, 1.0]))
    np.testing.assert_allclose(vals, [4.0, 1.0])
    np.testing.assert_allclose(vecs, np.eye(2), atol=1e-15)


def test_eig_sym2_hand_solution():
    # (2-l)^2 - 1 = 0  ->  l = 3, 1
    vals, vecs = eig_sym2(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(vals, [3.0, 1.0], atol=1e-15)
    s = 1 / math.sqrt(2)
    assert abs(abs(vecs[:, 0] @ [s, s]) - 1) < 1e-12
    assert abs(abs(vecs[:, 1] @ [s, -s]) - 1) < 1e-12


def test_eig_sym2_random_invariants():
    rng = np.random.default_rng(0)
    mats = rng.normal(size=(10_000, 2, 2)) * rng.uniform(1e-3, 1e3, size=(10_000, 1, 1))
    mats = mats + np.swapaxes(mats, 1, 2)
    for m in mats[:2000]:
        vals, v = eig_sym2(m)
        assert vals[0] >= vals[1]
        assert np.abs(v.T @ v - np.eye(2)).max() <= 1e-12
        assert np.abs(v @ np.diag(vals) @ v.T - m).max() <= 1e-9 * (1 + np.abs(m).max())
    vals, v = eig_sym2_batch(mats)
    assert np.all(vals[:, 0] >= vals[:, 1])
    recon = v @ (vals[:, :, None] * np.swapaxes(v, 1, 2))
    scale = 1 + np.abs(mats).max(axis=(1, 2))
    assert np.all(np.abs(recon - mats).max(axis=(1, 2)) <= 1e-9 * scale)


def test_sqrt_sym3_trivial():
    np.testing.assert_array_equal(sqrt_sym3(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(sqrt_sym3(np.diag([4.0, 9.0, 1.0])), np.diag([2.0, 3.0, 1.0]), atol=1e-15)


def test_sqrt_sym3_clamps_rounding_negatives():
    m = np.diag([1.0, 1.0, -5e-10])
    s = sqrt_sym3(m)
    assert s[2, 2] == 0.0


def test_sqrt_sym3_rejects_non_psd():
    with pytest.raises(NonPSDError):
        sqrt_sym3(np.diag([1.0, -1e-3, 1.0]))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=9, max_size=9), st.integers(0, 3))
def test_sqrt_sym3_reconstructs(entries, rank_drop):
    a = np.array(entries).reshape(3, 3)
    m = a @ a.T
    if rank_drop:
        vals, vecs = np.linalg.eigh(m)
        vals[:rank_drop] = 0.0
        m = (vecs * vals) @ vecs.T
        m = 0.5 * (m + m.T)
    s = sqrt_sym3(m)
    np.testing.assert_allclose(s, s.T, atol=0)
    assert np.linalg.eigvalsh(s).min() >= -1e-9
    assert np.linalg.norm(s @ s - m) <= 1e-9 * (1 + np.linalg.norm(m))


def test_sqrt_batch_matches_single():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(20, 3, 3))
    m = a @ np.swapaxes(a, 1, 2)
    batch = sqrt_sym3_batch(m)
    for k in range(20):
        np.testing.assert_allclose(batch[k], sqrt_sym3(m[k]), atol=1e-12)


def test_inv_sym3():
    np.testing.assert_array_equal(inv_sym3(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(inv_sym3(np.diag([2.0, 4.0, 8.0])), np.diag([0.5, 0.25, 0.125]))
    rng = np.random.default_rng(2)
    for _ in range(100):
        a = rng.normal(size=(3, 3))
        m = a @ a.T + 0.1 * np.eye(3)
        np.testing.assert_allclose(m @ inv_sym3(m), np.eye(3), atol=1e-9)
    with pytest.raises(SingularMatrixError):
        inv_sym3(np.diag([1.0, 1.0, 0.0]))


def test_std_normal_cdf_values():
    assert std_normal_cdf(0.0) == 0.5
    assert 0.0 < 1.0 - std_normal_cdf(8.0) < 1e-14
    # mpmath.ncdf(1) at 40 digits: 0.8413447460685429485852325456320379224779
    assert abs(std_normal_cdf(1.0) - 0.8413447460685429) < 1e-15


def test_std_normal_cdf_symmetry_and_monotone():
    z = np.linspace(-8, 8, 20_001)
    vals = np.array([std_normal_cdf(v) for v in z])
    assert np.all(np.diff(vals) >= 0.0)
    sym = np.array([std_normal_cdf(-v) for v in z])
    assert np.abs(sym - (1.0 - vals)).max() <= 1e-14
