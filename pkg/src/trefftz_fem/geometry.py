"""Element geometry: local frames, isoparametric mapping and quadrature.

Every quadrilateral element carries a Cartesian frame anchored at its true
(area-weighted) centroid.  The frame axes are taken from the covariant base
vector g1 of the bilinear map and the contravariant base vector g^2, both
evaluated at the element centre of the biunit square.  Since g^2 is by
construction perpendicular to g1, the pair yields an orthonormal frame that
rotates rigidly with the element, which is what makes the element matrices
invariant under rotations of the global axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class DegenerateGeometryError(ValueError):
    """Raised for zero-area, concave-collapsed or zero-length geometry."""


def validate_corners(corners) -> np.ndarray:
    """Return corners as a (4, 2) float array, checked for CCW orientation.

    Corners must be distinct and enclose a positive signed area
    (counter-clockwise node order 1-2-3-4).
    """
    xy = np.asarray(corners, dtype=float)
    if xy.shape != (4, 2):
        raise ValueError(f"expected 4 corner points in the plane, got shape {xy.shape}")
    if not np.all(np.isfinite(xy)):
        raise ValueError("corner coordinates must be finite")
    area = signed_area(xy)
    scale = max(np.ptp(xy[:, 0]), np.ptp(xy[:, 1]), 1e-300)
    if area <= 1e-12 * scale**2:
        raise DegenerateGeometryError(
            f"corners must be distinct and counter-clockwise (signed area {area:g})"
        )
    return xy


def signed_area(xy: np.ndarray) -> float:
    """Shoelace signed area of the polygon with vertices in given order."""
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def is_convex(xy: np.ndarray, tol: float = 1e-12) -> bool:
    """True if all cross products of consecutive edges are positive (CCW convex)."""
    scale = max(np.ptp(xy[:, 0]), np.ptp(xy[:, 1]))
    for i in range(4):
        a = xy[(i + 1) % 4] - xy[i]
        b = xy[(i + 2) % 4] - xy[(i + 1) % 4]
        if a[0] * b[1] - a[1] * b[0] <= tol * scale**2:
            return False
    return True


@dataclass(frozen=True)
class GaussRule:
    """Gauss-Legendre rule on [-1, +1] with a tensor-product accessor."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray

    def squared(self):
        """Nodes (m, 2) and weights (m,) of the tensor-product rule on [-1,1]^2."""
        t1, t2 = np.meshgrid(self.nodes, self.nodes, indexing="ij")
        pts = np.column_stack([t1.ravel(), t2.ravel()])
        wts = np.outer(self.weights, self.weights).ravel()
        return pts, wts


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> GaussRule:
    """Standard n-point Gauss-Legendre rule, 1 <= n <= 10."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"node count must be an integer, got {n!r}")
    if not 1 <= n <= 10:
        raise ValueError(f"node count must be in [1, 10], got {n}")
    nodes, weights = np.polynomial.legendre.leggauss(int(n))
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return GaussRule(int(n), nodes, weights)


def shape_bilinear(theta):
    """Bilinear shape functions of the 4-node quad at natural point theta."""
    t1, t2 = theta
    return 0.25 * np.array(
        [(1 - t1) * (1 - t2), (1 + t1) * (1 - t2), (1 + t1) * (1 + t2), (1 - t1) * (1 + t2)]
    )


def shape_bilinear_deriv(theta):
    """Derivatives (2, 4) of the bilinear shape functions wrt (theta1, theta2)."""
    t1, t2 = theta
    return 0.25 * np.array(
        [
            [-(1 - t2), (1 - t2), (1 + t2), -(1 + t2)],
            [-(1 - t1), -(1 + t1), (1 + t1), (1 - t1)],
        ]
    )


def isoparametric_eval(corners, theta):
    """Evaluate the bilinear map at a natural point.

    Returns (point, g, det) where ``g`` holds the covariant base vectors as
    rows (g[a] = d x / d theta^a) and ``det`` is the Jacobian determinant.
    """
    xy = np.asarray(corners, dtype=float)
    point = shape_bilinear(theta) @ xy
    g = shape_bilinear_deriv(theta) @ xy
    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    return point, g, det


def compute_centroid(corners) -> np.ndarray:
    """Area-weighted centroid of the bilinear cell, exact for straight edges.

    Integrates x * detJ over the biunit square with a rule that is exact for
    the biquadratic integrand of the bilinear map.
    """
    xy = validate_corners(corners)
    rule = gauss_rule(3)
    pts, wts = rule.squared()
    area = 0.0
    moment = np.zeros(2)
    for theta, w in zip(pts, wts):
        point, _, det = isoparametric_eval(xy, theta)
        area += w * det
        moment += w * det * point
    if area <= 0.0:
        raise DegenerateGeometryError("cell has non-positive area")
    return moment / area


@dataclass(frozen=True)
class LocalFrame:
    """Centroid-anchored orthonormal frame of a quadrilateral element."""

    centroid: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    alpha: float

    @property
    def rotation(self) -> np.ndarray:
        """Columns e1, e2: maps local vector components to global ones."""
        return np.column_stack([self.e1, self.e2])


def compute_local_frame(corners) -> LocalFrame:
    """Local frame with e1 along g1(0,0) and e2 along the contravariant g^2(0,0).

    The covariant metric is inverted to obtain the contravariant base
    vectors; g^2 is perpendicular to g1, so normalizing the pair gives an
    orthonormal right-handed frame.
    """
    xy = validate_corners(corners)
    _, g, det = isoparametric_eval(xy, (0.0, 0.0))
    metric = g @ g.T
    if abs(np.linalg.det(metric)) < 1e-24 * max(metric[0, 0], metric[1, 1]) ** 2:
        raise DegenerateGeometryError("covariant metric is singular (collinear edges)")
    metric_inv = np.linalg.inv(metric)
    g_contra = metric_inv @ g  # rows: g^1, g^2
    e1 = g[0] / np.linalg.norm(g[0])
    e2 = g_contra[1] / np.linalg.norm(g_contra[1])
    alpha = float(np.arctan2(e1[1], e1[0]))
    return LocalFrame(compute_centroid(xy), e1, e2, alpha)


def to_local(corners, frame: LocalFrame) -> np.ndarray:
    """Corner coordinates in the element frame: shift to centroid, rotate by -alpha."""
    xy = np.asarray(corners, dtype=float)
    return (xy - frame.centroid) @ frame.rotation


def local_geometry(corners):
    """Convenience: (frame, local corners) for one validated element."""
    xy = validate_corners(corners)
    frame = compute_local_frame(xy)
    return frame, to_local(xy, frame)
