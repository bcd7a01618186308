"""Convex polygon machinery: hulls, Hausdorff distance, vertex cones,
admissibility checks and the decaying direction used by CGO probes."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class GeometryError(ValueError):
    """Invalid or degenerate geometric input."""


class DegenerateGeometryError(GeometryError):
    pass


class UnsupportedConeError(GeometryError):
    pass


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _wrap_angle(a):
    """Normalise angles to (-pi, pi]."""
    a = np.mod(np.asarray(a, dtype=float) + math.pi, 2 * math.pi) - math.pi
    return np.where(a == -math.pi, math.pi, a)


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("vertices must be an (n, 2) array")
        if len(v) < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        diffs = v[:, None, :] - v[None, :, :]
        dist = np.hypot(diffs[..., 0], diffs[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < 1e-12:
            raise GeometryError("duplicate vertices")
        e = np.roll(v, -1, axis=0) - v
        turns = _cross(e, np.roll(e, -1, axis=0))
        if np.any(turns <= 0):
            raise GeometryError("vertices are not a strictly convex counter-clockwise traversal")
        area = 0.5 * np.sum(_cross(v, np.roll(v, -1, axis=0)))
        if area < 1e-12:
            raise DegenerateGeometryError("polygon area below 1e-12")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    # -- basic quantities ---------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        v = self.vertices
        return float(0.5 * np.sum(_cross(v, np.roll(v, -1, axis=0))))

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = _cross(v, w)
        return np.sum((v + w) * c[:, None], axis=0) / (6.0 * self.area)

    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % self.n]) for i in range(self.n)]

    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        return np.hypot(e[:, 0], e[:, 1])

    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])

    def opening_angles(self) -> np.ndarray:
        """Interior angle at each vertex, in (0, pi)."""
        v = self.vertices
        a = np.roll(v, 1, axis=0) - v
        b = np.roll(v, -1, axis=0) - v
        return np.arctan2(np.abs(_cross(b, a)), np.sum(a * b, axis=1))

    def outward_normals(self) -> np.ndarray:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        nrm = np.stack([e[:, 1], -e[:, 0]], axis=1)
        return nrm / np.hypot(nrm[:, 0], nrm[:, 1])[:, None]

    # -- point queries --------------------------------------------------------
    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        """Closed-set membership (boundary counts as inside)."""
        p = np.asarray(points, dtype=float)
        v = self.vertices
        inside = np.ones(p.shape[:-1], dtype=bool)
        for i in range(self.n):
            a, b = v[i], v[(i + 1) % self.n]
            inside &= _cross(b - a, p - a) >= -tol * np.hypot(*(b - a))
        return inside

    def distance(self, points) -> np.ndarray:
        """Euclidean distance to the closed polygon (zero inside)."""
        p = np.asarray(points, dtype=float)
        d = np.full(p.shape[:-1], np.inf)
        for a, b in self.edges():
            d = np.minimum(d, segment_distance(p, a, b))
        return np.where(self.contains(p), 0.0, d)

    def boundary_distance(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        d = np.full(p.shape[:-1], np.inf)
        for a, b in self.edges():
            d = np.minimum(d, segment_distance(p, a, b))
        return d

    # -- transforms -----------------------------------------------------------
    def translated(self, shift) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(shift, dtype=float))

    def rotated(self, angle: float, about=(0.0, 0.0)) -> "ConvexPolygon":
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        o = np.asarray(about, dtype=float)
        return ConvexPolygon((self.vertices - o) @ rot.T + o)

    def clip_box(self, xmin: float, xmax: float, ymin: float, ymax: float):
        """Intersection with an axis-aligned box: returns (area, centroid or None)."""
        pts = [tuple(p) for p in self.vertices]
        for axis, bound, keep_ge in ((0, xmin, True), (0, xmax, False), (1, ymin, True), (1, ymax, False)):
            pts = _clip_halfplane(pts, axis, bound, keep_ge)
            if len(pts) < 3:
                return 0.0, None
        arr = np.array(pts)
        w = np.roll(arr, -1, axis=0)
        c = _cross(arr, w)
        area = 0.5 * c.sum()
        if area <= 0:
            return 0.0, None
        cen = np.sum((arr + w) * c[:, None], axis=0) / (6.0 * area)
        return float(area), cen

    # -- serialisation --------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(self.vertices.tolist())

    @classmethod
    def from_json(cls, text: str) -> "ConvexPolygon":
        return cls(np.array(json.loads(text), dtype=float))


def _clip_halfplane(pts, axis, bound, keep_ge):
    def inside(p):
        return p[axis] >= bound if keep_ge else p[axis] <= bound

    out = []
    n = len(pts)
    for i in range(n):
        cur, nxt = pts[i], pts[(i + 1) % n]
        cin, nin = inside(cur), inside(nxt)
        if cin:
            out.append(cur)
        if cin != nin:
            t = (bound - cur[axis]) / (nxt[axis] - cur[axis])
            out.append((cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])))
    return out


def segment_distance(points, a, b) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    a = np.asarray(a, dtype=float)
    ab = np.asarray(b, dtype=float) - a
    t = np.clip(np.sum((p - a) * ab, axis=-1) / np.dot(ab, ab), 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.hypot(p[..., 0] - proj[..., 0], p[..., 1] - proj[..., 1])


def square(side: float = 1.0, center=(0.0, 0.0)) -> ConvexPolygon:
    h = 0.5 * side
    cx, cy = center
    return ConvexPolygon([[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]])


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> ConvexPolygon:
    t = phase + 2 * math.pi * np.arange(n) / n
    return ConvexPolygon(np.stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)], axis=1))


def convex_hull(points) -> ConvexPolygon:
    """Andrew's monotone chain.  Collinear points on the hull are dropped."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)  # lexicographic sort
    if len(pts) < 3:
        raise DegenerateGeometryError("need at least 3 distinct points")

    def half(seq):
        chain: list[np.ndarray] = []
        for p in seq:
            while len(chain) >= 2 and _cross(chain[-1] - chain[-2], p - chain[-2]) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise DegenerateGeometryError("all points are collinear")
    return ConvexPolygon(hull)


def hausdorff_distance(P: ConvexPolygon, P2: ConvexPolygon) -> float:
    """Hausdorff distance between two convex polygons.

    ``dist(., P2)`` is convex, so its supremum over ``P`` is attained at a
    vertex; checking vertices of each polygon against the other is exact.
    """
    return float(max(P2.distance(P.vertices).max(), P.distance(P2.vertices).max()))


@dataclass(frozen=True)
class FarthestVertex:
    index: int
    vertex: np.ndarray
    distance: float
    realizes_hausdorff: bool
    is_joint_hull_vertex: bool | None  # None when the distance is below d_H


def farthest_vertex(P: ConvexPolygon, P2: ConvexPolygon, tol: float = 1e-12) -> FarthestVertex:
    """Vertex of ``P`` farthest from ``P2`` (ties broken by lowest index)."""
    d = P2.distance(P.vertices)
    i = int(np.argmax(d))  # argmax returns the first maximiser
    dist = float(d[i])
    realizes = dist > 0 and abs(dist - hausdorff_distance(P, P2)) <= tol
    on_hull = None
    if realizes:
        hull = convex_hull(np.vstack([P.vertices, P2.vertices]))
        on_hull = bool(np.any(np.hypot(*(hull.vertices - P.vertices[i]).T) < 1e-12))
    return FarthestVertex(i, P.vertices[i].copy(), dist, realizes, on_hull)


def opening_angle_at(P: ConvexPolygon, point, tol: float = 1e-12) -> float:
    """Opening angle of ``P`` at a vertex given by coordinates."""
    d = np.hypot(*(P.vertices - np.asarray(point, dtype=float)).T)
    i = int(np.argmin(d))
    if d[i] > tol:
        raise GeometryError("point is not a vertex of the polygon")
    return float(P.opening_angles()[i])


# ---------------------------------------------------------------------------
# Cones
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cone2D:
    apex: np.ndarray
    bisector: np.ndarray
    half_angle: float

    def __post_init__(self):
        b = np.asarray(self.bisector, dtype=float)
        object.__setattr__(self, "bisector", b / np.hypot(*b))
        object.__setattr__(self, "apex", np.asarray(self.apex, dtype=float))
        if not (0 < self.half_angle < math.pi):
            raise GeometryError("half_angle must lie in (0, pi)")

    @property
    def angle_range(self) -> tuple[float, float]:
        """Polar angles (theta1, theta2) bounding the cone, theta1 < theta2."""
        c = math.atan2(self.bisector[1], self.bisector[0])
        return c - self.half_angle, c + self.half_angle

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        d = np.asarray(points, dtype=float) - self.apex
        r = np.hypot(d[..., 0], d[..., 1])
        cosang = np.sum(d * self.bisector, axis=-1) / np.where(r > 0, r, 1.0)
        return (r == 0) | (cosang >= math.cos(self.half_angle) - tol)

    def edge_directions(self) -> tuple[np.ndarray, np.ndarray]:
        t1, t2 = self.angle_range
        return np.array([math.cos(t1), math.sin(t1)]), np.array([math.cos(t2), math.sin(t2)])


def vertex_cone(P: ConvexPolygon, vertex_index: int) -> Cone2D:
    """The cone generated by ``P`` at one of its vertices."""
    if not 0 <= vertex_index < P.n:
        raise IndexError(f"vertex index {vertex_index} out of range for {P.n} vertices")
    v = P.vertices[vertex_index]
    a = P.vertices[vertex_index - 1] - v
    b = P.vertices[(vertex_index + 1) % P.n] - v
    a /= np.hypot(*a)
    b /= np.hypot(*b)
    bis = a + b
    return Cone2D(v.copy(), bis / np.hypot(*bis), 0.5 * float(P.opening_angles()[vertex_index]))


def direction_and_delta0(cone: Cone2D) -> tuple[np.ndarray, float]:
    """Direction ``p`` with ``p.(x - x0) <= -delta0 |x - x0|`` on the cone."""
    if cone.half_angle >= 0.5 * math.pi:
        raise UnsupportedConeError("cone opening must be below pi for a decaying direction")
    return -cone.bisector.copy(), math.cos(cone.half_angle)


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityBounds:
    alpha_m: float
    alpha_M: float
    l0: float
    eps0: float


@dataclass
class AdmissibilityReport:
    is_admissible: bool
    opening_angles: list[float]
    min_vertex_edge_distance: float
    vertex_contrasts: list[float]
    violations: list[str] = field(default_factory=list)


def vertex_to_nonadjacent_edge_distances(P: ConvexPolygon) -> np.ndarray:
    """For each vertex, distance to the nearest edge not incident to it."""
    out = np.empty(P.n)
    edges = P.edges()
    for i, v in enumerate(P.vertices):
        ds = [float(segment_distance(v, a, b)) for j, (a, b) in enumerate(edges) if j not in (i, (i - 1) % P.n)]
        out[i] = min(ds)
    return out


def check_admissible(P: ConvexPolygon, density, bounds: AdmissibilityBounds, holder_pairs: int = 2000, seed: int = 0) -> AdmissibilityReport:
    """Check the admissible-class conditions and report every violation."""
    violations: list[str] = []
    if not bounds.alpha_m > 0:
        violations.append("alpha_m must be positive")
    if not bounds.alpha_M < 0.5 * math.pi:
        violations.append("alpha_M must be below pi/2")
    if not 0 < bounds.l0 <= 1:
        violations.append("l0 must lie in (0, 1]")

    angles = P.opening_angles()
    for i, a in enumerate(angles):
        if not (2 * bounds.alpha_m < a < 2 * bounds.alpha_M):
            violations.append(f"vertex {i}: opening angle {a:.6g} outside ({2 * bounds.alpha_m:.6g}, {2 * bounds.alpha_M:.6g})")

    dist = vertex_to_nonadjacent_edge_distances(P)
    for i, d in enumerate(dist):
        if d < bounds.l0:
            violations.append(f"vertex {i}: distance {d:.6g} to non-adjacent edges below l0={bounds.l0:.6g}")

    contrasts: list[float] = []
    if density is not None:
        if not np.allclose(density.support.vertices, P.vertices):
            violations.append("density support differs from the polygon")
        rho_v = density(P.vertices)
        contrasts = [float(c) for c in np.abs(rho_v - 1.0)]
        for i, c in enumerate(contrasts):
            if c < bounds.eps0:
                violations.append(f"vertex {i}: contrast |rho-1|={c:.6g} below eps0={bounds.eps0:.6g}")
        worst = density.holder_check(holder_pairs, seed)
        if worst > density.holder_norm_bound * (1 + 1e-9):
            violations.append(f"sampled Hoelder quotient {worst:.6g} exceeds bound {density.holder_norm_bound:.6g}")

    return AdmissibilityReport(
        is_admissible=not violations,
        opening_angles=[float(a) for a in angles],
        min_vertex_edge_distance=float(dist.min()),
        vertex_contrasts=contrasts,
        violations=violations,
    )


def random_convex_polygon(rng: np.random.Generator, n_points: int = 12, radius: float = 1.0, center=(0.0, 0.0)) -> ConvexPolygon:
    """Hull of random points in a disk (test-data helper)."""
    r = radius * np.sqrt(rng.random(n_points))
    t = 2 * math.pi * rng.random(n_points)
    pts = np.stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)], axis=1)
    return convex_hull(pts)


def polygon_from_list(vertices: Sequence[Sequence[float]]) -> ConvexPolygon:
    """Build a polygon from a vertex list, fixing clockwise orientation."""
    v = np.asarray(vertices, dtype=float)
    if 0.5 * np.sum(_cross(v, np.roll(v, -1, axis=0))) < 0:
        v = v[::-1]
    return ConvexPolygon(v)
