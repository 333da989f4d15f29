"""Weighted standardized-sample sets.

The adaptive scheme splits ``[-sigma_max, sigma_max]`` into a binary tree of
equal-width intervals per position axis.  Each node sits at its interval
centre and carries the interval's Gaussian probability mass, so a node's
two children always sum to the parent and a set can be refined mid-sweep
without changing its total mass.  Yaw gets no sigma-points of its own
(the third standardized component is always zero).

Monte Carlo, unscented and Gauss-Hermite sets are provided as baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import InvalidParamsError
from .linalg import std_normal_cdf

P_MAX_LIMIT = 16
AXES = {"x": 0, "y": 1}


def _interval_mass(lo: float, hi: float) -> float:
    # evaluate in the tail nearest the interval to avoid cancellation near 1
    if lo >= 0.0:
        return std_normal_cdf(-lo) - std_normal_cdf(-hi)
    return std_normal_cdf(hi) - std_normal_cdf(lo)


def node_value(sigma_max: float, order: int, index: int) -> float:
    return sigma_max * ((2 * index + 1) / 2**order - 1.0)


@dataclass(frozen=True)
class SigmaNode1D:
    order: int
    index: int
    z: float
    weight: float
    halted: bool


class SigmaTree1D:
    """Precomputed 1D sigma-point tree, stored as flat arrays.

    Node 0 is the root.  ``child[i]`` is the id of the lower child of node
    ``i`` (the upper child is ``child[i] + 1``) or -1 when the node does not
    split, either because it is at ``p_max`` or because a child would weigh
    less than ``w_min``.
    """

    def __init__(self, sigma_max: float, w_min: float, p_max: int):
        self.sigma_max = float(sigma_max)
        self.w_min = float(w_min)
        self.p_max = int(p_max)
        self.tail_mass = 2.0 * std_normal_cdf(-self.sigma_max)

        orders, indices, zs, weights, children = [], [], [], [], []

        def add(order, index, weight):
            orders.append(order)
            indices.append(index)
            zs.append(node_value(self.sigma_max, order, index))
            weights.append(weight)
            children.append(-1)
            return len(orders) - 1

        add(0, 0, _interval_mass(-self.sigma_max, self.sigma_max))
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                p = orders[i]
                if p >= self.p_max:
                    continue
                z, h = zs[i], self.sigma_max / 2**p
                w_lo = _interval_mass(z - h, z)
                w_hi = _interval_mass(z, z + h)
                if w_lo < self.w_min or w_hi < self.w_min:
                    continue
                lo = add(p + 1, 2 * indices[i], w_lo)
                add(p + 1, 2 * indices[i] + 1, w_hi)
                children[i] = lo
                nxt.extend((lo, lo + 1))
            frontier = nxt

        self.order = np.array(orders, dtype=np.int64)
        self.index = np.array(indices, dtype=np.int64)
        self.z = np.array(zs)
        self.weight = np.array(weights)
        self.child = np.array(children, dtype=np.int64)
        for arr in (self.order, self.index, self.z, self.weight, self.child):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.z)

    def __repr__(self) -> str:
        return (
            f"SigmaTree1D(sigma_max={self.sigma_max}, w_min={self.w_min}, "
            f"p_max={self.p_max}, nodes={len(self)})"
        )

    @property
    def halted(self) -> np.ndarray:
        return self.child < 0

    def node(self, i: int) -> SigmaNode1D:
        return SigmaNode1D(
            int(self.order[i]), int(self.index[i]), float(self.z[i]),
            float(self.weight[i]), bool(self.child[i] < 0),
        )

    @property
    def nodes(self) -> list[SigmaNode1D]:
        return [self.node(i) for i in range(len(self))]

    def half_width(self, i: int) -> float:
        return self.sigma_max / 2 ** int(self.order[i])

    def cut(self, p: int) -> np.ndarray:
        """Node ids of the depth-``p`` cut, in ascending ``z`` order."""
        ids = [0]
        for _ in range(p):
            nxt = []
            for i in ids:
                c = self.child[i]
                if c >= 0:
                    nxt.extend((c, c + 1))
                else:
                    nxt.append(i)
            ids = nxt
        return np.array(ids, dtype=np.int64)


def build_sigma_tree(sigma_max: float, w_min: float, p_max: int) -> SigmaTree1D:
    if not (sigma_max > 0.0 and math.isfinite(sigma_max)):
        raise InvalidParamsError(f"sigma_max must be positive, got {sigma_max}")
    if not 0.0 <= w_min < 1.0:
        raise InvalidParamsError(f"w_min must lie in [0, 1), got {w_min}")
    if int(p_max) != p_max or not 0 <= p_max <= P_MAX_LIMIT:
        raise InvalidParamsError(f"p_max must be an integer in [0, {P_MAX_LIMIT}], got {p_max}")
    return _cached_tree(float(sigma_max), float(w_min), int(p_max))


@lru_cache(maxsize=64)
def _cached_tree(sigma_max: float, w_min: float, p_max: int) -> SigmaTree1D:
    return SigmaTree1D(sigma_max, w_min, p_max)


@dataclass(frozen=True, eq=False)
class WeightedSampleSet:
    """Weighted standardized samples ``(weights[i], z[i])``.

    ``tail_mass`` is the probability not represented by any sample.  Adaptive
    sets also carry the per-axis tree node of every entry in ``nodes`` so
    they can be refined with :func:`split_axis`.  ``coverage_radius`` bounds
    ``|z|`` over this set and every refinement of it.
    """

    weights: np.ndarray
    z: np.ndarray
    scheme: str
    tail_mass: float = 0.0
    coverage_radius: float = 0.0
    orders: tuple[int, int] | None = None
    nodes: np.ndarray | None = None
    trees: tuple[SigmaTree1D, SigmaTree1D] | None = None

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def subset(self, keep) -> WeightedSampleSet:
        keep = np.asarray(keep)
        return replace(
            self,
            weights=self.weights[keep],
            z=self.z[keep],
            nodes=None if self.nodes is None else self.nodes[keep],
        )

    def moments(self) -> tuple[float, np.ndarray, np.ndarray]:
        """Zeroth, first and second raw moments of the set."""
        w = self.weights
        return float(w.sum()), w @ self.z, (self.z * w[:, None]).T @ self.z


def _fixed_set(weights, z, scheme) -> WeightedSampleSet:
    weights = np.ascontiguousarray(weights, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    weights.setflags(write=False)
    z.setflags(write=False)
    radius = float(np.sqrt((z * z).sum(axis=1)).max()) if len(z) else 0.0
    return WeightedSampleSet(weights, z, scheme, coverage_radius=radius)


def _adaptive_from_nodes(tree_x, tree_y, nodes, orders) -> WeightedSampleSet:
    nodes = np.ascontiguousarray(nodes, dtype=np.int64).reshape(-1, 2)
    weights = tree_x.weight[nodes[:, 0]] * tree_y.weight[nodes[:, 1]]
    z = np.zeros((len(nodes), 3))
    z[:, 0] = tree_x.z[nodes[:, 0]]
    z[:, 1] = tree_y.z[nodes[:, 1]]
    cover_x = tree_x.sigma_max * (1.0 - 0.5**tree_x.p_max)
    cover_y = tree_y.sigma_max * (1.0 - 0.5**tree_y.p_max)
    covered = (1.0 - tree_x.tail_mass) * (1.0 - tree_y.tail_mass)
    return WeightedSampleSet(
        weights,
        z,
        "adaptive",
        tail_mass=1.0 - covered,
        coverage_radius=math.hypot(cover_x, cover_y),
        orders=(int(orders[0]), int(orders[1])),
        nodes=nodes,
        trees=(tree_x, tree_y),
    )


def cut_at_orders(tree_x: SigmaTree1D, tree_y: SigmaTree1D, p_x: int, p_y: int) -> WeightedSampleSet:
    """Cartesian product of the depth-``p_x`` and depth-``p_y`` cuts."""
    if p_x > tree_x.p_max or p_y > tree_y.p_max or p_x < 0 or p_y < 0:
        raise InvalidParamsError(f"orders ({p_x}, {p_y}) outside tree range")
    ix, iy = tree_x.cut(p_x), tree_y.cut(p_y)
    nodes = np.stack(np.meshgrid(ix, iy, indexing="ij"), axis=-1).reshape(-1, 2)
    return _adaptive_from_nodes(tree_x, tree_y, nodes, (p_x, p_y))


def split_axis(samples: WeightedSampleSet, axis: str | int, survivors=None) -> WeightedSampleSet:
    """Raise the order along ``axis`` by one.

    Non-survivors are dropped; every surviving entry whose node on ``axis``
    has children is replaced by both children, halted nodes pass through.
    """
    if samples.nodes is None or samples.trees is None:
        raise InvalidParamsError("only adaptive sample sets can be split")
    ax = AXES[axis] if isinstance(axis, str) else int(axis)
    tree = samples.trees[ax]
    orders = list(samples.orders)
    if orders[ax] >= tree.p_max:
        raise InvalidParamsError(f"axis {ax} already at p_max={tree.p_max}")
    nodes = samples.nodes if survivors is None else samples.nodes[np.asarray(survivors)]
    child = tree.child[nodes[:, ax]]
    counts = np.where(child >= 0, 2, 1)
    new_nodes = np.repeat(nodes, counts, axis=0)
    start = np.cumsum(counts) - counts
    split = child >= 0
    new_nodes[start[split], ax] = child[split]
    new_nodes[start[split] + 1, ax] = child[split] + 1
    orders[ax] += 1
    return _adaptive_from_nodes(samples.trees[0], samples.trees[1], new_nodes, orders)


def needs_upsample(
    cov,
    axis: str | int,
    current_order: int,
    d_max: float,
    sigma_max: float,
    p_max: int = 4,
    literal_spacing_rule: bool = False,
) -> bool:
    """Whether sigma-points along ``axis`` are spaced wider than ``d_max``.

    The default compares the physical spacing ``2 sigma_max std / 2**p`` in
    metres against ``d_max``.  ``literal_spacing_rule`` compares the raw
    variance ``cov[a, a] / 2**p`` instead.
    """
    if current_order >= p_max:
        return False
    ax = AXES[axis] if isinstance(axis, str) else int(axis)
    var = max(float(cov[ax][ax]), 0.0)
    if literal_spacing_rule:
        spacing = var / 2**current_order
    else:
        spacing = 2.0 * sigma_max * math.sqrt(var) / 2**current_order
    return spacing > d_max


@lru_cache(maxsize=16)
def monte_carlo_set(n: int, seed: int) -> WeightedSampleSet:
    if n < 1:
        raise InvalidParamsError("Monte Carlo set needs n >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 3))
    return _fixed_set(np.full(n, 1.0 / n), z, "monte_carlo")


@lru_cache(maxsize=16)
def unscented_set(kappa: float = 1.0) -> WeightedSampleSet:
    """Symmetric 7-point unscented set for a 3D standard normal."""
    dim = 3
    if kappa <= -dim:
        raise InvalidParamsError("kappa must exceed -3")
    spread = math.sqrt(dim + kappa)
    z = np.zeros((2 * dim + 1, dim))
    z[1 : dim + 1] = spread * np.eye(dim)
    z[dim + 1 :] = -spread * np.eye(dim)
    weights = np.full(2 * dim + 1, 1.0 / (2.0 * (dim + kappa)))
    weights[0] = kappa / (dim + kappa)
    return _fixed_set(weights, z, "unscented")


def hermite_gauss_1d(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Probabilists' Gauss-Hermite nodes and weights (Golub-Welsch).

    Weights are normalised to sum to one, i.e. quadrature against N(0, 1).
    """
    off = np.sqrt(np.arange(1, degree, dtype=float))
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    nodes, vecs = np.linalg.eigh(jacobi)
    weights = vecs[0] ** 2
    # symmetrise away rounding so odd moments vanish exactly
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights / weights.sum()


@lru_cache(maxsize=16)
def gauss_hermite_set(degree: int) -> WeightedSampleSet:
    if not 1 <= degree <= 10:
        raise InvalidParamsError("Gauss-Hermite degree must be in [1, 10]")
    nodes, weights = hermite_gauss_1d(degree)
    grid = np.stack(np.meshgrid(nodes, nodes, nodes, indexing="ij"), axis=-1).reshape(-1, 3)
    wgrid = np.einsum("i,j,k->ijk", weights, weights, weights).reshape(-1)
    return _fixed_set(wgrid, grid, "gauss_hermite")
