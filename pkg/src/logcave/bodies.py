"""Convex bodies in one and two dimensions.

A body is either an interval ``[a, b]`` or a convex polygon with
counter-clockwise vertices. Support functions, gauges (support function of
the polar body), volumes and surface area measures are exact for both.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull

__all__ = ["ConvexBody", "psum_body"]


class ConvexBody:
    """An interval or a strictly convex counter-clockwise polygon."""

    def __init__(self, interval=None, polygon=None):
        if (interval is None) == (polygon is None):
            raise ValueError("give exactly one of interval or polygon")
        if interval is not None:
            a, b = (float(v) for v in interval)
            if not a < b:
                raise ValueError(f"interval needs a < b, got [{a}, {b}]")
            self._interval = (a, b)
            self._vertices = None
        else:
            v = np.asarray(polygon, dtype=float)
            if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
                raise ValueError("polygon needs at least 3 vertices in the plane")
            e = np.roll(v, -1, axis=0) - v
            cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
            if np.any(cross <= 0):
                raise ValueError("polygon vertices must be strictly convex and counter-clockwise")
            self._interval = None
            self._vertices = v
            v.setflags(write=False)

    @classmethod
    def from_points(cls, points):
        """Convex hull of a 2-D point cloud (collinear points dropped)."""
        pts = np.asarray(points, dtype=float)
        hull = ConvexHull(pts)
        return cls(polygon=pts[hull.vertices])  # qhull returns 2-D hulls ccw

    @classmethod
    def disc(cls, radius=1.0, n=2048, center=(0.0, 0.0)):
        th = 2 * np.pi * np.arange(n) / n
        return cls(polygon=np.c_[center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)])

    # -- basic geometry --------------------------------------------------

    @property
    def dim(self):
        return 1 if self._interval is not None else 2

    @property
    def interval(self):
        return self._interval

    @property
    def vertices(self):
        return self._vertices

    def __repr__(self):
        if self.dim == 1:
            return f"ConvexBody(interval={self._interval})"
        return f"ConvexBody(polygon with {len(self._vertices)} vertices)"

    def _edges(self):
        v = self._vertices
        w = np.roll(v, -1, axis=0)
        e = w - v
        length = np.hypot(e[:, 0], e[:, 1])
        normal = np.c_[e[:, 1], -e[:, 0]] / length[:, None]
        return v, w, length, normal

    def volume(self):
        if self.dim == 1:
            a, b = self._interval
            return b - a
        v = self._vertices
        return 0.5 * float(np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]))

    def boundary_measure(self):
        """Total (n-1)-dimensional measure of the boundary."""
        if self.dim == 1:
            return 2.0
        return float(self._edges()[2].sum())

    def support(self, directions):
        """Support function ``h_K(d) = max_{x in K} <x, d>``."""
        d = np.asarray(directions, dtype=float)
        if self.dim == 1:
            a, b = self._interval
            return np.maximum(a * d, b * d)
        return np.max(d @ self._vertices.T, axis=-1)

    def contains_origin_interior(self):
        if self.dim == 1:
            a, b = self._interval
            return a < 0.0 < b
        _, _, _, n = self._edges()
        return bool(np.all(np.einsum("ij,ij->i", n, self._vertices) > 0))

    def gauge(self, points):
        """Gauge of the body, equal to the support function of its polar."""
        if not self.contains_origin_interior():
            raise ValueError("gauge requires the origin in the interior of the body")
        x = np.asarray(points, dtype=float)
        if self.dim == 1:
            a, b = self._interval
            return np.where(x >= 0, x / b, x / a)
        _, _, _, n = self._edges()
        h = np.einsum("ij,ij->i", n, self._vertices)
        return np.max((x @ n.T) / h, axis=-1)

    def contains(self, points, tol=1e-9):
        x = np.asarray(points, dtype=float)
        if self.dim == 1:
            a, b = self._interval
            s = tol * max(1.0, abs(a), abs(b))
            return (x >= a - s) & (x <= b + s)
        v, _, _, n = self._edges()
        s = tol * max(1.0, float(np.abs(v).max()))
        off = x @ n.T - np.einsum("ij,ij->i", n, v)
        return np.all(off <= s, axis=-1)

    def bounding_box(self):
        if self.dim == 1:
            a, b = self._interval
            return np.array([a]), np.array([b])
        return self._vertices.min(axis=0), self._vertices.max(axis=0)

    def surface_area_measure(self):
        """Atoms ``(normals, weights)`` of the surface area measure on the sphere."""
        if self.dim == 1:
            return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
        _, _, length, normal = self._edges()
        return normal, length

    # -- transformations ---------------------------------------------------

    def scaled(self, alpha):
        alpha = float(alpha)
        if alpha <= 0:
            raise ValueError("scale factor must be positive")
        if self.dim == 1:
            a, b = self._interval
            return ConvexBody(interval=(alpha * a, alpha * b))
        return ConvexBody(polygon=alpha * self._vertices)

    def translated(self, shift):
        if self.dim == 1:
            s = float(np.ravel(shift)[0])
            a, b = self._interval
            return ConvexBody(interval=(a + s, b + s))
        return ConvexBody(polygon=self._vertices + np.asarray(shift, dtype=float))

    def minkowski_sum(self, other, alpha=1.0, beta=1.0):
        """``alpha K + beta L`` (exact)."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        if alpha == 0:
            return other.scaled(beta)
        if beta == 0:
            return self.scaled(alpha)
        if self.dim == 1:
            a, b = self._interval
            c, d = other._interval
            return ConvexBody(interval=(alpha * a + beta * c, alpha * b + beta * d))
        pts = (alpha * self._vertices[:, None, :] + beta * other._vertices[None, :, :]).reshape(-1, 2)
        return ConvexBody.from_points(pts)

    def to_json(self):
        if self.dim == 1:
            return {"interval": list(self._interval)}
        return {"polygon": self._vertices.tolist()}

    @classmethod
    def from_json(cls, obj):
        if "interval" in obj:
            return cls(interval=obj["interval"])
        if "polygon" in obj:
            return cls(polygon=obj["polygon"])
        raise ValueError("body JSON needs an 'interval' or 'polygon' key")


def _polygon_from_support(theta, h):
    """Intersection of the half-planes ``<x, u(theta)> <= h(theta)``."""
    u = np.c_[np.cos(theta), np.sin(theta)]
    u2, h2 = np.roll(u, -1, axis=0), np.roll(h, -1)
    det = u[:, 0] * u2[:, 1] - u[:, 1] * u2[:, 0]
    px = (h * u2[:, 1] - h2 * u[:, 1]) / det
    py = (u[:, 0] * h2 - u2[:, 0] * h) / det
    return ConvexBody.from_points(np.c_[px, py])


def psum_body(K, L, alpha=1.0, beta=1.0, p=1.0, n_angles=720):
    """The body whose support function is ``(alpha h_K^p + beta h_L^p)^(1/p)``.

    ``p = 1`` is the Minkowski combination and is exact for polygons. For
    ``p > 1`` polygons are rebuilt from the support function sampled on
    ``n_angles`` directions.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if alpha < 0 or beta < 0:
        raise ValueError("coefficients must be nonnegative")
    if p == 1:
        return K.minkowski_sum(L, alpha, beta)
    if not (K.contains_origin_interior() and L.contains_origin_interior()):
        raise ValueError("p-sums with p > 1 need the origin inside both bodies")
    if beta == 0:
        return K.scaled(alpha ** (1 / p)) if alpha != 1 else K
    if alpha == 0:
        return L.scaled(beta ** (1 / p))
    if K.dim == 1:
        d = np.array([-1.0, 1.0])
        h = (alpha * K.support(d) ** p + beta * L.support(d) ** p) ** (1 / p)
        return ConvexBody(interval=(-h[0], h[1]))
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    d = np.c_[np.cos(theta), np.sin(theta)]
    h = (alpha * K.support(d) ** p + beta * L.support(d) ** p) ** (1 / p)
    return _polygon_from_support(theta, h)
