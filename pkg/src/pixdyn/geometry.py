"""Planar shapes, poses, and exact shape/cell intersection tests.

World coordinates live in [0, 1]^2 with the y axis pointing up.  A shape is
described in its reference placement together with an anchor point; placing it
rotates the shape about the anchor and then translates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Raised for invalid shape definitions or unsupported placements."""


@dataclass(frozen=True)
class Pose:
    """Rigid placement: translation (2-vector, world units) and rotation angle."""

    translation: tuple[float, float] = (0.0, 0.0)
    angle: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.translation) or not math.isfinite(self.angle):
            raise ShapeError(f"non-finite pose: {self}")


@dataclass(frozen=True)
class Shape:
    """A disc or a convex polygon, plus the anchor the rotation pivots on.

    kind "disc": ``center`` and ``radius`` are set.
    kind "polygon": ``vertices`` is an (n, 2) counterclockwise convex ring.
    ``half_open`` marks an axis-aligned rectangle whose min-x/min-y edges are
    excluded from the set, e.g. the sliding bar (x, x+w] x (0, 1].  Such shapes
    only admit poses with angle 0.
    """

    kind: str
    center: tuple[float, float] | None = None
    radius: float | None = None
    vertices: tuple[tuple[float, float], ...] | None = None
    anchor: tuple[float, float] = (0.0, 0.0)
    half_open: bool = False
    color: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind == "disc":
            if self.center is None or self.radius is None:
                raise ShapeError("disc needs center and radius")
            if not self.radius > 0:
                raise ShapeError(f"disc radius must be positive, got {self.radius}")
            if self.half_open:
                raise ShapeError("half_open only applies to axis-aligned rectangles")
        elif self.kind == "polygon":
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
                raise ShapeError("polygon needs at least 3 planar vertices")
            _check_ccw_convex(v)
            if self.half_open and not _is_axis_aligned_rectangle(v):
                raise ShapeError("half_open only applies to axis-aligned rectangles")
        else:
            raise ShapeError(f"unknown shape kind {self.kind!r}")

    @staticmethod
    def disc(center, radius, anchor=None, color=None) -> "Shape":
        anchor = tuple(anchor) if anchor is not None else tuple(center)
        return Shape(kind="disc", center=tuple(center), radius=float(radius),
                     anchor=anchor, color=color)

    @staticmethod
    def polygon(vertices, anchor=None, color=None) -> "Shape":
        verts = tuple(tuple(map(float, v)) for v in vertices)
        if anchor is None:
            anchor = tuple(np.mean(np.asarray(verts), axis=0))
        return Shape(kind="polygon", vertices=verts, anchor=tuple(anchor), color=color)

    @staticmethod
    def rectangle(xmin, ymin, xmax, ymax, anchor=None, half_open=False, color=None) -> "Shape":
        if not (xmax > xmin and ymax > ymin):
            raise ShapeError("rectangle needs xmax > xmin and ymax > ymin")
        verts = ((xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax))
        if anchor is None:
            anchor = ((xmin + xmax) / 2.0, (ymin + ymax) / 2.0)
        return Shape(kind="polygon", vertices=verts, anchor=tuple(anchor),
                     half_open=half_open, color=color)


def _check_ccw_convex(v: np.ndarray):
    n = v.shape[0]
    for i in range(n):
        a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if cross <= 0:
            raise ShapeError("polygon vertices must be counterclockwise and strictly convex")


def _is_axis_aligned_rectangle(v: np.ndarray) -> bool:
    if v.shape[0] != 4:
        return False
    xs, ys = sorted(set(v[:, 0])), sorted(set(v[:, 1]))
    return len(xs) == 2 and len(ys) == 2


def place(shape: Shape, pose: Pose) -> "PlacedShape":
    """Realize a shape under a pose: rotate about the anchor, then translate.

    Returns a descriptor supporting point membership and closed-cell
    intersection queries.
    """
    if shape.kind == "disc":
        c = _rotate_about(np.asarray(shape.center, float), shape.anchor, pose.angle)
        c = c + np.asarray(pose.translation, float)
        return PlacedDisc(center=(float(c[0]), float(c[1])), radius=float(shape.radius),
                          color=shape.color)
    verts = np.asarray(shape.vertices, dtype=float)
    if shape.half_open:
        if pose.angle % (2.0 * math.pi) != 0.0:
            raise ShapeError("half-open rectangles only support angle 0")
        moved = verts + np.asarray(pose.translation, float)
        return PlacedBox(xmin=moved[:, 0].min(), xmax=moved[:, 0].max(),
                         ymin=moved[:, 1].min(), ymax=moved[:, 1].max(),
                         open_min=True, color=shape.color)
    rotated = _rotate_about(verts, shape.anchor, pose.angle) + np.asarray(pose.translation, float)
    return PlacedPolygon(vertices=rotated, color=shape.color)


def _rotate_about(points: np.ndarray, anchor, angle: float) -> np.ndarray:
    a = np.asarray(anchor, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return (points - a) @ rot.T + a


@dataclass
class PlacedDisc:
    center: tuple[float, float]
    radius: float
    color: tuple[float, float, float] | None = None

    def bounds(self):
        cx, cy = self.center
        r = self.radius
        return cx - r, cy - r, cx + r, cy + r

    def contains(self, pts: np.ndarray) -> np.ndarray:
        d = pts - np.asarray(self.center)
        return (d * d).sum(axis=-1) <= self.radius * self.radius

    def intersects_cells(self, x0, x1, y0, y1) -> np.ndarray:
        """Closed-cell test against arrays of cell extents (broadcastable)."""
        cx, cy = self.center
        dx = np.clip(cx, x0, x1) - cx
        dy = np.clip(cy, y0, y1) - cy
        return dx * dx + dy * dy <= self.radius * self.radius

    def boundary_band_cells(self, x0, x1, y0, y1, tol) -> np.ndarray:
        """Cells whose distance to the circle boundary is at most tol."""
        cx, cy = self.center
        dx_in = np.clip(cx, x0, x1) - cx
        dy_in = np.clip(cy, y0, y1) - cy
        dmin = np.sqrt(dx_in * dx_in + dy_in * dy_in)
        dx_out = np.maximum(np.abs(x0 - cx), np.abs(x1 - cx))
        dy_out = np.maximum(np.abs(y0 - cy), np.abs(y1 - cy))
        dmax = np.sqrt(dx_out * dx_out + dy_out * dy_out)
        return (dmin <= self.radius + tol) & (dmax >= self.radius - tol)


@dataclass
class PlacedPolygon:
    vertices: np.ndarray  # (n, 2), counterclockwise

    color: tuple[float, float, float] | None = None

    def bounds(self):
        v = self.vertices
        return v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max()

    def _edge_normals(self):
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        # inward-left normals for a ccw ring; points inside satisfy n.(p - v) >= 0
        return np.stack([-e[:, 1], e[:, 0]], axis=1), v

    def contains(self, pts: np.ndarray) -> np.ndarray:
        normals, origins = self._edge_normals()
        rel = pts[..., None, :] - origins  # (..., n_edges, 2)
        side = (rel * normals).sum(axis=-1)
        return (side >= 0).all(axis=-1)

    def intersects_cells(self, x0, x1, y0, y1, margin: float = 0.0) -> np.ndarray:
        """Separating-axis test of the convex ring against closed cells.

        ``margin`` inflates (positive) or deflates (negative) the polygon by
        shifting every edge along its normal; used for boundary-band queries.
        """
        v = self.vertices
        out = np.ones(np.broadcast(x0, x1).shape, dtype=bool)
        # cell axes: x and y projections of the polygon vs the cell interval
        out &= v[:, 0].min() - margin <= x1
        out &= v[:, 0].max() + margin >= x0
        out &= v[:, 1].min() - margin <= y1
        out &= v[:, 1].max() + margin >= y0
        normals, origins = self._edge_normals()
        norms = np.linalg.norm(normals, axis=1)
        for k in range(v.shape[0]):
            n, nn = normals[k], norms[k]
            poly_max = ((v - origins[k]) @ n).max()  # 0 is the edge itself
            # cell projection interval onto n, relative to the edge origin
            px = np.stack([x0 - origins[k][0], x1 - origins[k][0]])
            py = np.stack([y0 - origins[k][1], y1 - origins[k][1]])
            cands = [px[i] * n[0] + py[j] * n[1] for i in (0, 1) for j in (0, 1)]
            cell_max = np.maximum.reduce(cands)
            cell_min = np.minimum.reduce(cands)
            out &= cell_max >= -margin * nn
            out &= cell_min <= poly_max + margin * nn
        return out

    def contains_cells(self, x0, x1, y0, y1, margin: float = 0.0) -> np.ndarray:
        """True where the whole cell lies inside the polygon deflated by margin."""
        normals, origins = self._edge_normals()
        norms = np.linalg.norm(normals, axis=1)
        out = np.ones(np.broadcast(x0, x1).shape, dtype=bool)
        for k in range(self.vertices.shape[0]):
            n, nn = normals[k], norms[k]
            px = np.stack([x0 - origins[k][0], x1 - origins[k][0]])
            py = np.stack([y0 - origins[k][1], y1 - origins[k][1]])
            cands = [px[i] * n[0] + py[j] * n[1] for i in (0, 1) for j in (0, 1)]
            cell_min = np.minimum.reduce(cands)
            out &= cell_min >= margin * nn
        return out

    def boundary_band_cells(self, x0, x1, y0, y1, tol) -> np.ndarray:
        near = self.intersects_cells(x0, x1, y0, y1, margin=tol)
        deep = self.contains_cells(x0, x1, y0, y1, margin=tol)
        return near & ~deep


@dataclass
class PlacedBox:
    """Axis-aligned rectangle, optionally open on its min-x/min-y edges."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    open_min: bool = False
    color: tuple[float, float, float] | None = None

    def bounds(self):
        return self.xmin, self.ymin, self.xmax, self.ymax

    def contains(self, pts: np.ndarray) -> np.ndarray:
        x, y = pts[..., 0], pts[..., 1]
        if self.open_min:
            return (x > self.xmin) & (x <= self.xmax) & (y > self.ymin) & (y <= self.ymax)
        return (x >= self.xmin) & (x <= self.xmax) & (y >= self.ymin) & (y <= self.ymax)

    def intersects_cells(self, x0, x1, y0, y1) -> np.ndarray:
        if self.open_min:
            ok_x = (x1 > self.xmin) & (x0 <= self.xmax)
            ok_y = (y1 > self.ymin) & (y0 <= self.ymax)
        else:
            ok_x = (x1 >= self.xmin) & (x0 <= self.xmax)
            ok_y = (y1 >= self.ymin) & (y0 <= self.ymax)
        return ok_x & ok_y

    def boundary_band_cells(self, x0, x1, y0, y1, tol) -> np.ndarray:
        near = ((x1 >= self.xmin - tol) & (x0 <= self.xmax + tol)
                & (y1 >= self.ymin - tol) & (y0 <= self.ymax + tol))
        deep = ((x0 >= self.xmin + tol) & (x1 <= self.xmax - tol)
                & (y0 >= self.ymin + tol) & (y1 <= self.ymax - tol))
        return near & ~deep


def placed_shapes_disjoint(a, b) -> bool:
    """Exact disjointness test between two placed shapes (closed sets)."""
    ax0, ay0, ax1, ay1 = a.bounds()
    bx0, by0, bx1, by1 = b.bounds()
    if ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0:
        return True
    if isinstance(a, PlacedDisc) and isinstance(b, PlacedDisc):
        d = np.hypot(a.center[0] - b.center[0], a.center[1] - b.center[1])
        return d > a.radius + b.radius
    if isinstance(a, PlacedDisc):
        a, b = b, a
    if isinstance(b, PlacedDisc):
        # polygon/box vs disc: distance from the center to the convex set
        if isinstance(a, PlacedBox):
            dx = max(a.xmin - b.center[0], 0.0, b.center[0] - a.xmax)
            dy = max(a.ymin - b.center[1], 0.0, b.center[1] - a.ymax)
            return dx * dx + dy * dy > b.radius * b.radius
        return _poly_disc_disjoint(a, b)
    return _convex_disjoint(a, b)


def _poly_disc_disjoint(poly: PlacedPolygon, disc: PlacedDisc) -> bool:
    c = np.asarray(disc.center)
    v = poly.vertices
    n = v.shape[0]
    if bool(poly.contains(c[None])[0]):
        return False
    best = np.inf
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        ab = b - a
        t = np.clip(np.dot(c - a, ab) / np.dot(ab, ab), 0.0, 1.0)
        best = min(best, float(np.linalg.norm(a + t * ab - c)))
    return best > disc.radius


def _convex_disjoint(a, b) -> bool:
    va = a.vertices if isinstance(a, PlacedPolygon) else _box_vertices(a)
    vb = b.vertices if isinstance(b, PlacedPolygon) else _box_vertices(b)
    for verts, other in ((va, vb), (vb, va)):
        n = verts.shape[0]
        edges = np.roll(verts, -1, axis=0) - verts
        normals = np.stack([-edges[:, 1], edges[:, 0]], axis=1)
        for k in range(n):
            own = (verts - verts[k]) @ normals[k]
            oth = (other - verts[k]) @ normals[k]
            if own.max() < oth.min() or oth.max() < own.min():
                return True
    return False


def _box_vertices(b: PlacedBox) -> np.ndarray:
    return np.array([[b.xmin, b.ymin], [b.xmax, b.ymin], [b.xmax, b.ymax], [b.xmin, b.ymax]])
