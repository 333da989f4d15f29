"""Polygon footprints, rigid placement and the collision-free indicator.

Boundary contact counts as intersection throughout, so the indicator is
conservative: touching footprints are reported as colliding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import InvalidPolygonError


class Pose2D(NamedTuple):
    x: float
    y: float
    theta: float


@njit(cache=True)
def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@njit(cache=True)
def _within_box(ax, ay, bx, by, px, py):
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


@njit(cache=True)
def _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and (
        (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)
    ):
        return True
    if d1 == 0.0 and _within_box(cx, cy, dx, dy, ax, ay):
        return True
    if d2 == 0.0 and _within_box(cx, cy, dx, dy, bx, by):
        return True
    if d3 == 0.0 and _within_box(ax, ay, bx, by, cx, cy):
        return True
    if d4 == 0.0 and _within_box(ax, ay, bx, by, dx, dy):
        return True
    return False


@njit(cache=True)
def _point_in_polygon(px, py, verts):
    n = verts.shape[0]
    inside = False
    j = n - 1
    for i in range(n):
        xi, yi = verts[i, 0], verts[i, 1]
        xj, yj = verts[j, 0], verts[j, 1]
        if _orient(xj, yj, xi, yi, px, py) == 0.0 and _within_box(xj, yj, xi, yi, px, py):
            return True
        # half-open crossing rule: a vertex lying exactly on the ray is treated
        # as below it, i.e. the point is nudged up by an infinitesimal epsilon
        if (yi > py) != (yj > py):
            x_cross = xi + (py - yi) * (xj - xi) / (yj - yi)
            if px < x_cross:
                inside = not inside
        j = i
    return inside


@njit(cache=True)
def _polygons_intersect(pa, pb):
    # bounding boxes first; disjoint boxes cannot touch
    if (
        pa[:, 0].max() < pb[:, 0].min()
        or pb[:, 0].max() < pa[:, 0].min()
        or pa[:, 1].max() < pb[:, 1].min()
        or pb[:, 1].max() < pa[:, 1].min()
    ):
        return False
    na, nb = pa.shape[0], pb.shape[0]
    for i in range(na):
        i2 = (i + 1) % na
        for j in range(nb):
            j2 = (j + 1) % nb
            if _segments_intersect(
                pa[i, 0], pa[i, 1], pa[i2, 0], pa[i2, 1],
                pb[j, 0], pb[j, 1], pb[j2, 0], pb[j2, 1],
            ):
                return True
    if _point_in_polygon(pa[0, 0], pa[0, 1], pb):
        return True
    return _point_in_polygon(pb[0, 0], pb[0, 1], pa)


@njit(cache=True)
def _place(body, x, y, theta, out):
    c, s = math.cos(theta), math.sin(theta)
    for i in range(body.shape[0]):
        bx, by = body[i, 0], body[i, 1]
        out[i, 0] = c * bx - s * by + x
        out[i, 1] = s * bx + c * by + y


@njit(cache=True)
def free_mask(z, sqrt_cov, mean, anchor, body1, body2, reach, use_radius):
    """Collision-free flag for each standardized sample at one timestep.

    Sample ``i`` realises the relative pose ``sqrt_cov @ z[i] + mean``; agent 2
    sits at ``anchor`` and agent 1 at ``anchor + relative pose``.  With
    ``use_radius`` set, samples whose relative position is farther than
    ``reach`` (sum of bounding radii) skip the polygon test.
    """
    n = z.shape[0]
    out = np.empty(n, dtype=np.bool_)
    world2 = np.empty_like(body2)
    _place(body2, anchor[0], anchor[1], anchor[2], world2)
    world1 = np.empty_like(body1)
    for i in range(n):
        z0, z1, z2 = z[i, 0], z[i, 1], z[i, 2]
        rx = sqrt_cov[0, 0] * z0 + sqrt_cov[0, 1] * z1 + sqrt_cov[0, 2] * z2 + mean[0]
        ry = sqrt_cov[1, 0] * z0 + sqrt_cov[1, 1] * z1 + sqrt_cov[1, 2] * z2 + mean[1]
        if use_radius and math.sqrt(rx * rx + ry * ry) > reach:
            out[i] = True
            continue
        rt = sqrt_cov[2, 0] * z0 + sqrt_cov[2, 1] * z1 + sqrt_cov[2, 2] * z2 + mean[2]
        _place(body1, anchor[0] + rx, anchor[1] + ry, anchor[2] + rt, world1)
        out[i] = not _polygons_intersect(world1, world2)
    return out


def _as_points(verts) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(verts, dtype=float).reshape(-1, 2))


def _signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _is_simple(verts: np.ndarray) -> bool:
    n = len(verts)
    for i in range(n):
        a1, a2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            b1, b2 = verts[j], verts[(j + 1) % n]
            if _segments_intersect(a1[0], a1[1], a2[0], a2[1], b1[0], b1[1], b2[0], b2[1]):
                return False
    return True


@dataclass(frozen=True, eq=False)
class Polygon2D:
    """Body-frame footprint, stored counter-clockwise.

    Build with :meth:`from_vertices`, which validates simplicity and flips
    clockwise input.
    """

    vertices: np.ndarray
    bounding_radius: float

    @classmethod
    def from_vertices(cls, vertices) -> Polygon2D:
        verts = _as_points(vertices)
        if len(verts) < 3:
            raise InvalidPolygonError("polygon needs at least 3 vertices")
        if not np.all(np.isfinite(verts)):
            raise InvalidPolygonError("polygon vertices must be finite")
        if np.any(np.all(verts == np.roll(verts, -1, axis=0), axis=1)):
            raise InvalidPolygonError("polygon has repeated consecutive vertices")
        area = _signed_area(verts)
        if area == 0.0:
            raise InvalidPolygonError("polygon has zero area")
        if not _is_simple(verts):
            raise InvalidPolygonError("polygon edges self-intersect")
        if area < 0.0:
            verts = np.ascontiguousarray(verts[::-1])
        verts.setflags(write=False)
        radius = float(np.max(np.hypot(verts[:, 0], verts[:, 1])))
        return cls(verts, radius)

    @classmethod
    def rectangle(cls, length: float, width: float) -> Polygon2D:
        hl, hw = 0.5 * length, 0.5 * width
        return cls.from_vertices([(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)])

    def __len__(self) -> int:
        return len(self.vertices)


def place(poly, pose) -> np.ndarray:
    """World-frame vertices of ``poly`` at ``pose`` (order preserved)."""
    body = poly.vertices if isinstance(poly, Polygon2D) else _as_points(poly)
    out = np.empty_like(body)
    _place(body, float(pose[0]), float(pose[1]), float(pose[2]), out)
    return out


def point_in_polygon(pt, verts) -> bool:
    """Even-odd ray cast; points on the boundary count as inside."""
    return bool(_point_in_polygon(float(pt[0]), float(pt[1]), _as_points(verts)))


def segments_intersect(a1, a2, b1, b2) -> bool:
    """True iff the closed segments share at least one point."""
    return bool(
        _segments_intersect(
            float(a1[0]), float(a1[1]), float(a2[0]), float(a2[1]),
            float(b1[0]), float(b1[1]), float(b2[0]), float(b2[1]),
        )
    )


def polygons_intersect(pa, pb) -> bool:
    """True iff the polygons overlap, touch, or one contains the other."""
    return bool(_polygons_intersect(_as_points(pa), _as_points(pb)))


def collision_indicator(poly1: Polygon2D, poly2: Polygon2D, relative_pose, anchor_pose2) -> int:
    """1 if the configuration is collision-free, 0 otherwise.

    Agent 2 is placed at ``anchor_pose2`` and agent 1 at
    ``anchor_pose2 + relative_pose`` (componentwise, yaw included).
    """
    a = [float(v) for v in anchor_pose2]
    r = [float(v) for v in relative_pose]
    w2 = place(poly2, a)
    w1 = place(poly1, (a[0] + r[0], a[1] + r[1], a[2] + r[2]))
    return 0 if _polygons_intersect(w1, w2) else 1
