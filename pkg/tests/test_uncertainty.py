import numpy as np
import pytest

from colprob.errors import LengthMismatchError, SingularCovarianceError, TimeMismatchError
from colprob.geometry import Pose2D
from colprob.uncertainty import (
    GaussianPose,
    GaussianTrajectory,
    RelativeGaussian,
    RelativeTrajectory,
    realize,
    relative_distribution,
    standardize,
)


def _random_spd(rng, scale=1.0):
    a = rng.normal(size=(3, 3)) * scale
    return a @ a.T + 1e-3 * np.eye(3)


def _traj(rng, k=3, times=None, zero_cov=False):
    times = np.arange(k) * 0.1 if times is None else times
    return GaussianTrajectory(
        tuple(
            GaussianPose(
                Pose2D(*rng.normal(size=3)),
                np.zeros((3, 3)) if zero_cov else _random_spd(rng, 0.15),
                float(t),
            )
            for t in times
        )
    )


def test_identical_trajectories():
    rng = np.random.default_rng(0)
    a = _traj(rng)
    rel = relative_distribution(a, a)
    np.testing.assert_array_equal(rel.mean, 0.0)
    np.testing.assert_array_equal(rel.cov, 2 * a.covs)


def test_deterministic_other_agent():
    rng = np.random.default_rng(1)
    a, b = _traj(rng), _traj(rng, zero_cov=True)
    rel = relative_distribution(a, b)
    np.testing.assert_array_equal(rel.cov, a.covs)
    np.testing.assert_array_equal(rel.anchor, b.means)


def test_covariances_add_entrywise():
    rng = np.random.default_rng(2)
    a, b = _traj(rng), _traj(rng)
    rel = relative_distribution(a, b)
    for k in range(3):
        np.testing.assert_array_equal(rel[k].cov, a.poses[k].cov + b.poses[k].cov)
        np.testing.assert_allclose(rel[k].sqrt_cov @ rel[k].sqrt_cov, rel[k].cov, atol=1e-9)
        assert rel[k].mean == Pose2D(*(np.array(a.poses[k].mean) - np.array(b.poses[k].mean)))


def test_mismatches_raise():
    rng = np.random.default_rng(3)
    with pytest.raises(LengthMismatchError):
        relative_distribution(_traj(rng, 3), _traj(rng, 4))
    with pytest.raises(TimeMismatchError):
        relative_distribution(_traj(rng, 3), _traj(rng, times=[0.0, 0.1, 0.3]))
    with pytest.raises(TimeMismatchError):
        _traj(rng, times=[0.0, 0.0, 0.1])


def test_realize_examples():
    rel = RelativeGaussian.from_moments((1.5, -2.0, 0.3), np.diag([4.0, 1.0, 0.01]))
    assert realize(rel, np.zeros(3)) == rel.mean
    ident = RelativeGaussian.from_moments((0, 0, 0), np.eye(3))
    np.testing.assert_allclose(realize(ident, (1.0, 2.0, 0.5)), (1.0, 2.0, 0.5))
    rel = RelativeGaussian.from_moments((10.0, 0.0, 0.0), np.diag([4.0, 1.0, 0.01]))
    np.testing.assert_allclose(realize(rel, (1.0, 0.0, 0.0)), (12.0, 0.0, 0.0), atol=1e-15)


def test_standardize_examples():
    rng = np.random.default_rng(4)
    rel = RelativeGaussian.from_moments((1.0, 2.0, 3.0), _random_spd(rng))
    np.testing.assert_allclose(standardize(rel, rel.mean), 0.0, atol=1e-15)
    ident = RelativeGaussian.from_moments((1.0, 2.0, 3.0), np.eye(3))
    np.testing.assert_allclose(standardize(ident, (2.0, 2.0, 5.0)), (1.0, 0.0, 2.0))
    with pytest.raises(SingularCovarianceError):
        standardize(RelativeGaussian.from_moments((0, 0, 0), np.diag([1.0, 1.0, 0.0])), (1, 1, 1))


def test_round_trip_and_temporal_association():
    rng = np.random.default_rng(5)
    rels = [RelativeGaussian.from_moments(rng.normal(size=3) * 5, _random_spd(rng, s)) for s in (0.1, 1.0, 3.0)]
    for _ in range(200):
        z = rng.normal(size=3)
        for rel in rels:
            np.testing.assert_allclose(standardize(rel, realize(rel, z)), z, atol=1e-8)


def test_realize_distribution():
    rng = np.random.default_rng(6)
    cov = _random_spd(rng)
    rel = RelativeGaussian.from_moments((3.0, -1.0, 0.2), cov)
    z = rng.standard_normal((100_000, 3))
    x = z @ rel.sqrt_cov.T + np.array(rel.mean)
    # spot-check that the vectorised form matches realize()
    for i in range(0, 100_000, 10_000):
        np.testing.assert_allclose(x[i], realize(rel, z[i]), atol=1e-12)
    se = np.sqrt(np.diag(cov) / len(z))
    assert np.all(np.abs(x.mean(axis=0) - np.array(rel.mean)) <= 4 * se)
    assert np.linalg.norm(np.cov(x.T) - cov) <= 0.05 * np.linalg.norm(cov)


def test_relative_trajectory_indexing():
    rng = np.random.default_rng(7)
    rel = relative_distribution(_traj(rng, 5), _traj(rng, 5))
    assert len(rel) == 5
    assert isinstance(rel[2], RelativeGaussian)
    assert len(rel[1:3]) == 2
    again = RelativeTrajectory.from_list(list(rel))
    np.testing.assert_array_equal(again.sqrt_cov, rel.sqrt_cov)


def test_large_yaw_std_warns():
    big = np.diag([0.1, 0.1, 0.6**2])
    traj = GaussianTrajectory((GaussianPose(Pose2D(0, 0, 0), big, 0.0),))
    with pytest.warns(UserWarning, match="yaw"):
        relative_distribution(traj, traj)
