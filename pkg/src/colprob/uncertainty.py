"""Gaussian pose trajectories and the relative-pose distribution.

Relative poses at different timesteps are tied together through a shared
standardized vector ``z``: the pose at step ``k`` is ``sqrt(cov_k) @ z +
mean_k``.  Covariances may be singular here; only :func:`standardize`
needs an inverse.
"""

from __future__ import annotations

import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyTrajectoryError,
    LengthMismatchError,
    NonPSDError,
    SingularCovarianceError,
    TimeMismatchError,
)
from .geometry import Pose2D
from .linalg import sqrt_sym3, sqrt_sym3_batch

TIME_TOL = 1e-6
YAW_STD_WARN = 0.5


@dataclass(frozen=True, eq=False)
class GaussianPose:
    mean: Pose2D
    cov: np.ndarray
    time: float

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (3, 3):
            raise ValueError(f"pose covariance must be 3x3, got {cov.shape}")
        cov = 0.5 * (cov + cov.T)
        if np.linalg.eigvalsh(cov).min() < -1e-12 * max(1.0, np.abs(cov).max()):
            raise NonPSDError("pose covariance is not positive semi-definite")
        cov.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", Pose2D(*map(float, self.mean)))


@dataclass(frozen=True, eq=False)
class GaussianTrajectory:
    poses: tuple[GaussianPose, ...]

    def __post_init__(self):
        poses = tuple(self.poses)
        if not poses:
            raise EmptyTrajectoryError("trajectory needs at least one pose")
        times = np.array([p.time for p in poses])
        if np.any(np.diff(times) <= 0.0):
            raise TimeMismatchError("trajectory times must be strictly increasing")
        object.__setattr__(self, "poses", poses)

    def __len__(self) -> int:
        return len(self.poses)

    @property
    def times(self) -> np.ndarray:
        return np.array([p.time for p in self.poses])

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.poses], dtype=float)

    @property
    def covs(self) -> np.ndarray:
        return np.array([p.cov for p in self.poses])

    def max_yaw_std(self) -> float:
        return float(np.sqrt(self.covs[:, 2, 2].max()))


@dataclass(frozen=True, eq=False)
class RelativeGaussian:
    mean: Pose2D
    cov: np.ndarray
    sqrt_cov: np.ndarray
    anchor2: Pose2D

    @classmethod
    def from_moments(cls, mean, cov, anchor2=(0.0, 0.0, 0.0)) -> RelativeGaussian:
        cov = np.asarray(cov, dtype=float)
        return cls(Pose2D(*map(float, mean)), cov, sqrt_sym3(cov), Pose2D(*map(float, anchor2)))


class RelativeTrajectory(Sequence):
    """Per-timestep relative distributions, also exposed as stacked arrays.

    ``mean``, ``anchor`` are ``(K, 3)``; ``cov`` and ``sqrt_cov`` are
    ``(K, 3, 3)``.  Indexing yields :class:`RelativeGaussian`.
    """

    def __init__(self, mean, cov, sqrt_cov=None, anchor=None, times=None):
        mean = np.ascontiguousarray(mean, dtype=float).reshape(-1, 3)
        cov = np.ascontiguousarray(cov, dtype=float).reshape(-1, 3, 3)
        if len(mean) != len(cov):
            raise LengthMismatchError("mean and covariance stacks differ in length")
        if sqrt_cov is None:
            sqrt_cov = sqrt_sym3_batch(cov) if len(cov) else np.zeros((0, 3, 3))
        if anchor is None:
            anchor = np.zeros_like(mean)
        if times is None:
            times = np.arange(len(mean), dtype=float)
        self.mean = mean
        self.cov = cov
        self.sqrt_cov = np.ascontiguousarray(sqrt_cov, dtype=float)
        self.anchor = np.ascontiguousarray(anchor, dtype=float).reshape(-1, 3)
        self.times = np.asarray(times, dtype=float)
        for arr in (self.mean, self.cov, self.sqrt_cov, self.anchor, self.times):
            arr.setflags(write=False)

    @classmethod
    def from_list(cls, rels: Sequence[RelativeGaussian]) -> RelativeTrajectory:
        if isinstance(rels, RelativeTrajectory):
            return rels
        return cls(
            [r.mean for r in rels],
            [r.cov for r in rels],
            [r.sqrt_cov for r in rels],
            [r.anchor2 for r in rels],
        )

    def __len__(self) -> int:
        return len(self.mean)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return RelativeTrajectory(
                self.mean[k], self.cov[k], self.sqrt_cov[k], self.anchor[k], self.times[k]
            )
        return RelativeGaussian(
            Pose2D(*self.mean[k].tolist()),
            self.cov[k],
            self.sqrt_cov[k],
            Pose2D(*self.anchor[k].tolist()),
        )


def relative_distribution(a: GaussianTrajectory, b: GaussianTrajectory) -> RelativeTrajectory:
    """Relative pose ``a - b`` at each shared timestep.

    Means subtract and covariances add; ``b``'s mean pose is kept as the
    indicator anchor.
    """
    if len(a) != len(b):
        raise LengthMismatchError(f"trajectory lengths differ: {len(a)} vs {len(b)}")
    ta, tb = a.times, b.times
    if np.any(np.abs(ta - tb) > TIME_TOL):
        k = int(np.argmax(np.abs(ta - tb)))
        raise TimeMismatchError(f"timestamps differ at step {k}: {ta[k]} vs {tb[k]}")
    for traj in (a, b):
        if traj.max_yaw_std() > YAW_STD_WARN:
            warnings.warn(
                "yaw standard deviation above 0.5 rad; yaw is not wrapped",
                stacklevel=2,
            )
    mb = b.means
    return RelativeTrajectory(a.means - mb, a.covs + b.covs, anchor=mb, times=ta)


def realize(rel: RelativeGaussian, z) -> Pose2D:
    z = np.asarray(z, dtype=float)
    x = np.asarray(rel.mean, dtype=float) + rel.sqrt_cov @ z
    return Pose2D(*x.tolist())


def standardize(rel: RelativeGaussian, x) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rel.cov)
    if vals.min() <= 1e-12:
        raise SingularCovarianceError("covariance is singular; cannot standardize")
    inv_root = (vecs / np.sqrt(vals)) @ vecs.T
    return inv_root @ (np.asarray(x, dtype=float) - np.asarray(rel.mean, dtype=float))
