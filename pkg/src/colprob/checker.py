"""Trajectory collision probability by a forward sweep over weighted samples.

Every sample is a standardized vector shared by all timesteps.  The sweep
keeps the samples that have been collision-free so far; the collision-free
probability after step ``k`` is their total weight plus the tail mass that
no sample represents.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import EmptyTrajectoryError, InvalidParamsError
from .geometry import Polygon2D, free_mask
from .linalg import eig_sym2, eig_sym2_batch
from .sigma import (
    P_MAX_LIMIT,
    WeightedSampleSet,
    build_sigma_tree,
    cut_at_orders,
    gauss_hermite_set,
    monte_carlo_set,
    split_axis,
    unscented_set,
)
from .uncertainty import RelativeTrajectory, relative_distribution

SCHEMES = ("adaptive", "unscented", "gauss_hermite", "monte_carlo")


@dataclass(frozen=True)
class CheckerConfig:
    sigma_max: float = 3.8
    w_min: float = 0.01
    d_max: float = 1.625
    p_max: int = 4
    scheme: str = "adaptive"
    gh_degree: int = 8
    mc_n: int = 2000
    mc_seed: int = 0
    kappa: float = 1.0
    prefilters_enabled: bool = True
    literal_spacing_rule: bool = False
    initial_orders: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if not self.sigma_max > 0.0:
            raise InvalidParamsError("sigma_max must be positive")
        if not 0.0 <= self.w_min < 1.0:
            raise InvalidParamsError("w_min must lie in [0, 1)")
        if not self.d_max > 0.0:
            raise InvalidParamsError("d_max must be positive")
        if not 0 <= self.p_max <= P_MAX_LIMIT:
            raise InvalidParamsError(f"p_max must lie in [0, {P_MAX_LIMIT}]")
        if self.scheme not in SCHEMES:
            raise InvalidParamsError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if any(not 0 <= p <= self.p_max for p in self.initial_orders):
            raise InvalidParamsError("initial orders must lie in [0, p_max]")

    def sample_set(self) -> WeightedSampleSet:
        """Initial sample set for the configured scheme (cached upstream)."""
        if self.scheme == "adaptive":
            tree = build_sigma_tree(self.sigma_max, self.w_min, self.p_max)
            return cut_at_orders(tree, tree, *self.initial_orders)
        if self.scheme == "unscented":
            return unscented_set(self.kappa)
        if self.scheme == "gauss_hermite":
            return gauss_hermite_set(self.gh_degree)
        return monte_carlo_set(self.mc_n, self.mc_seed)

    def label(self) -> str:
        if self.scheme == "gauss_hermite":
            return f"gauss_hermite({self.gh_degree})"
        if self.scheme == "monte_carlo":
            return f"monte_carlo({self.mc_n},{self.mc_seed})"
        return self.scheme


@dataclass
class CollisionResult:
    p_collision_final: float
    p_collision_curve: np.ndarray
    samples_evaluated: int
    prefilter_skips: int
    elapsed: float
    final_orders: tuple[int, int] | None = None
    split_drift: float = 0.0


def ellipse_prefilter(rel, r1: float, r2: float, sigma_max: float) -> bool:
    """True when the inflated ``sigma_max`` ellipse excludes every contact.

    The position covariance ellipse is scaled to ``sigma_max`` standard
    deviations and grown by ``r1 + r2`` along its principal axes; a relative
    mean position outside it means no sample within ``sigma_max`` can bring
    the footprints into contact.
    """
    vals, vecs = eig_sym2(np.asarray(rel.cov)[:2, :2])
    p = np.asarray(rel.mean, dtype=float)[:2]
    scale = sigma_max * np.sqrt(np.clip(vals, 0.0, None)) + (r1 + r2)
    if np.any(scale <= 0.0):
        return bool(np.any(p != 0.0))
    return bool(np.linalg.norm((vecs.T @ p) / scale) > 1.0)


def ellipse_skip_mask(rels: RelativeTrajectory, reach: float, radius: float) -> np.ndarray:
    """Vectorised :func:`ellipse_prefilter` over all timesteps."""
    vals, vecs = eig_sym2_batch(rels.cov[:, :2, :2])
    scale = radius * np.sqrt(np.clip(vals, 0.0, None)) + reach
    proj = np.einsum("kji,kj->ki", vecs, rels.mean[:, :2])
    with np.errstate(divide="ignore", invalid="ignore"):
        norm2 = np.sum((proj / scale) ** 2, axis=1)
    norm2 = np.where(np.all(scale > 0.0, axis=1), norm2, np.inf)
    return norm2 > 1.0


def radius_prefilter(sample_pose, r1: float, r2: float) -> bool:
    """True when the sampled relative position is beyond both bounding radii."""
    return math.hypot(float(sample_pose[0]), float(sample_pose[1])) > r1 + r2


def required_orders(var: np.ndarray, cfg: CheckerConfig) -> np.ndarray:
    """Order reached by repeatedly applying the upsample rule from order 0.

    Matches iterating :func:`colprob.sigma.needs_upsample` until it returns
    False, for each variance in ``var``.
    """
    var = np.clip(np.asarray(var, dtype=float), 0.0, None)
    base = var if cfg.literal_spacing_rule else 2.0 * cfg.sigma_max * np.sqrt(var)
    req = np.zeros(var.shape, dtype=np.int64)
    for p in range(cfg.p_max):
        req += (base / 2**p) > cfg.d_max
    return req


@njit(cache=True)
def _split(nodes, axis, child):
    n = nodes.shape[0]
    count = 0
    for i in range(n):
        count += 2 if child[nodes[i, axis]] >= 0 else 1
    out = np.empty((count, 2), dtype=nodes.dtype)
    j = 0
    for i in range(n):
        c = child[nodes[i, axis]]
        out[j, 0], out[j, 1] = nodes[i, 0], nodes[i, 1]
        if c >= 0:
            out[j, axis] = c
            j += 1
            out[j, 0], out[j, 1] = nodes[i, 0], nodes[i, 1]
            out[j, axis] = c + 1
        j += 1
    return out


@njit(cache=True)
def _sweep(
    z, weights, nodes, orders, child_x, z_x, w_x, child_y, z_y, w_y, req_x, req_y,
    skip, use_prefilter, sqrt_cov, mean, anchor, body1, body2, reach, tail, degenerate,
):
    """Forward sweep; returns (curve, evaluated, skips, orders, split drift)."""
    adaptive = nodes.shape[0] > 0
    n_steps = mean.shape[0]
    curve = np.empty(n_steps)
    free = 1.0
    evaluated = 0
    skips = 0
    drift = 0.0
    origin = np.zeros((1, 3))
    for k in range(n_steps):
        if use_prefilter and skip[k]:
            skips += 1
            curve[k] = 1.0 - free
            continue
        if adaptive:
            for axis in range(2):
                req = req_x[k] if axis == 0 else req_y[k]
                if orders[axis] >= req:
                    continue
                before = weights.sum()
                while orders[axis] < req:
                    nodes = _split(nodes, axis, child_x if axis == 0 else child_y)
                    orders[axis] += 1
                z = np.zeros((nodes.shape[0], 3))
                weights = np.empty(nodes.shape[0])
                for i in range(nodes.shape[0]):
                    z[i, 0] = z_x[nodes[i, 0]]
                    z[i, 1] = z_y[nodes[i, 1]]
                    weights[i] = w_x[nodes[i, 0]] * w_y[nodes[i, 1]]
                drift = max(drift, abs(weights.sum() - before))
        n = z.shape[0]
        if n > 0:
            alive = free_mask(z, sqrt_cov[k], mean[k], anchor[k], body1, body2, reach, use_prefilter)
            evaluated += n
            removed = 0.0
            kept = 0
            for i in range(n):
                if alive[i]:
                    kept += 1
                else:
                    removed += weights[i]
            if kept < n:
                free -= removed
                z = z[alive]
                weights = weights[alive]
                if adaptive:
                    nodes = nodes[alive]
        if tail > 0.0 and degenerate[k]:
            # zero covariance: every realisation, tail included, sits on the mean
            if not free_mask(origin, sqrt_cov[k], mean[k], anchor[k], body1, body2, reach, False)[0]:
                free -= tail
                tail = 0.0
        if z.shape[0] == 0 and tail == 0.0:
            free = 0.0
        free = max(free, 0.0)
        curve[k] = 1.0 - free
    return curve, evaluated, skips, orders, drift


_NO_TREE_INT = np.zeros(0, dtype=np.int64)
_NO_TREE_FLOAT = np.zeros(0)


def check_trajectory(
    poly1: Polygon2D,
    poly2: Polygon2D,
    rels,
    cfg: CheckerConfig | None = None,
) -> CollisionResult:
    """Probability that the two agents collide at any timestep.

    ``rels`` holds the relative pose distribution per timestep (agent 1
    minus agent 2), e.g. from :func:`relative_distribution`.
    """
    start = time.perf_counter()
    cfg = cfg or CheckerConfig()
    rels = RelativeTrajectory.from_list(rels)
    n_steps = len(rels)
    if n_steps == 0:
        raise EmptyTrajectoryError("relative trajectory is empty")

    samples = cfg.sample_set()
    reach = poly1.bounding_radius + poly2.bounding_radius
    prefilter = cfg.prefilters_enabled
    if prefilter:
        skip = ellipse_skip_mask(rels, reach, samples.coverage_radius)
    else:
        skip = np.zeros(n_steps, dtype=np.bool_)
    tail = samples.tail_mass
    degenerate = ~np.any(rels.cov != 0.0, axis=(1, 2))

    if samples.nodes is not None:
        tx, ty = samples.trees
        nodes = samples.nodes
        orders = np.array(samples.orders, dtype=np.int64)
        trees = (tx.child, tx.z, tx.weight, ty.child, ty.z, ty.weight)
        req_x = required_orders(rels.cov[:, 0, 0], cfg)
        req_y = required_orders(rels.cov[:, 1, 1], cfg)
    else:
        nodes = np.zeros((0, 2), dtype=np.int64)
        orders = np.zeros(2, dtype=np.int64)
        trees = (_NO_TREE_INT, _NO_TREE_FLOAT, _NO_TREE_FLOAT) * 2
        req_x = req_y = np.zeros(n_steps, dtype=np.int64)

    curve, evaluated, skips, orders, drift = _sweep(
        samples.z, samples.weights, nodes, orders, *trees, req_x, req_y,
        skip, prefilter, rels.sqrt_cov, rels.mean, rels.anchor,
        poly1.vertices, poly2.vertices, reach, tail, degenerate,
    )
    return CollisionResult(
        p_collision_final=float(curve[-1]),
        p_collision_curve=curve,
        samples_evaluated=int(evaluated),
        prefilter_skips=int(skips),
        elapsed=time.perf_counter() - start,
        final_orders=(int(orders[0]), int(orders[1])) if samples.nodes is not None else None,
        split_drift=float(drift),
    )


def check_pair(ego, other, cfg: CheckerConfig | None = None) -> CollisionResult:
    rels = relative_distribution(ego.trajectory, other.trajectory)
    return check_trajectory(ego.polygon, other.polygon, rels, cfg)


def check_all_pairs(ego, others, cfg: CheckerConfig | None = None) -> list[CollisionResult]:
    """Independent ego-vs-other checks, in input order."""
    return [check_pair(ego, other, cfg) for other in others]
