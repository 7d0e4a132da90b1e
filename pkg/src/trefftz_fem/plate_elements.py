"""Kirchhoff plate quadrilaterals: displacement, hybrid and boundary variants.

Three element pipelines share one Trefftz basis:

* ZDEQ - displacement element; parameters eliminated through the nodal
  interpolation (B = A^-1), matrices from domain integrals.
* TFEQ - hybrid element; parameters eliminated by the Gauss-divergence
  identity against an independently interpolated boundary frame field.
* JFEQ - boundary element; same elimination but with the domain flexibility
  matrix replaced by a (symmetrized) boundary integral of basis traces
  against basis tractions.

All element matrices are produced in the element-local frame with DOF order
node-major (w, w,1, w,2); the model layer rotates them to global axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import plate_basis as pb
from .plate_basis import (
    D_W, D_X, D_Y, D_XX, D_XY, D_YY, D_XXX, D_XXY, D_XYY, D_YYY,
)


class ElementFailure(RuntimeError):
    """Raised when an element flexibility matrix cannot be inverted."""


@dataclass(frozen=True)
class PlateMaterial:
    """Isotropic Kirchhoff plate material."""

    e: float
    nu: float
    t: float
    rho: float = 0.0

    def __post_init__(self):
        if self.e <= 0 or self.t <= 0:
            raise ValueError("modulus and thickness must be positive")
        if not 0 <= self.nu < 0.5:
            raise ValueError(f"Poisson ratio out of range: {self.nu}")
        if self.rho < 0:
            raise ValueError("density must be non-negative")

    @property
    def rigidity(self) -> float:
        return self.e * self.t**3 / (12.0 * (1.0 - self.nu**2))

    def elasticity_matrix(self) -> np.ndarray:
        """Force-curvature matrix acting on (w,11, w,12, w,21, w,22)."""
        d, nu = self.rigidity, self.nu
        half = (1.0 - nu) / 2.0
        return d * np.array(
            [
                [1.0, 0.0, 0.0, nu],
                [0.0, half, half, 0.0],
                [0.0, half, half, 0.0],
                [nu, 0.0, 0.0, 1.0],
            ]
        )

    @property
    def mass_per_area(self) -> float:
        return self.rho * self.t

    @property
    def rotary_inertia(self) -> float:
        return self.rho * self.t**3 / 12.0


@dataclass(frozen=True)
class Edge:
    """One element edge in local coordinates."""

    start: int
    end: int
    length: float
    tangent: np.ndarray
    normal: np.ndarray  # outward for CCW corners
    origin: np.ndarray

    def point(self, s: float) -> np.ndarray:
        return self.origin + s * self.tangent


@dataclass
class ElementGeometry:
    """Global corners plus the centroid frame and local corner coordinates."""

    corners: np.ndarray
    frame: geo.LocalFrame
    corners_local: np.ndarray

    @classmethod
    def from_corners(cls, corners) -> "ElementGeometry":
        frame, local = geo.local_geometry(corners)
        return cls(np.asarray(corners, dtype=float), frame, local)

    def area_points(self, n: int):
        """Quadrature points in local coordinates with jacobian weights."""
        pts_nat, wts = geo.gauss_rule(n).squared()
        pts = np.empty_like(pts_nat)
        weights = np.empty(len(wts))
        for i, (theta, w) in enumerate(zip(pts_nat, wts)):
            point, _, det = geo.isoparametric_eval(self.corners_local, theta)
            if det <= 0:
                raise geo.DegenerateGeometryError(
                    "non-positive jacobian inside element (concave or inverted cell)"
                )
            pts[i] = point
            weights[i] = w * det
        return pts, weights

    def edge(self, index: int) -> Edge:
        if not 0 <= index < 4:
            raise ValueError(f"edge index must be 0..3, got {index}")
        a, b = index, (index + 1) % 4
        vec = self.corners_local[b] - self.corners_local[a]
        length = float(np.linalg.norm(vec))
        if length <= 0.0:
            raise geo.DegenerateGeometryError(f"zero-length edge {index}")
        tangent = vec / length
        normal = np.array([tangent[1], -tangent[0]])
        return Edge(a, b, length, tangent, normal, self.corners_local[a].copy())

    def edges(self):
        return [self.edge(i) for i in range(4)]


def edge_frame_functions(geom: ElementGeometry, edge_index: int):
    """Boundary frame interpolation along one edge.

    Returns (edge, L) where L(s) is the 3x12 operator mapping the element's
    local nodal DOFs to (w, w,n, w,t) at arc-length s.  The deflection is a
    Hermite cubic in the end deflections and tangential slopes; the normal
    slope is linear in the end normal slopes.  Both depend only on the DOFs
    of the shared edge, which makes the trace single-valued across elements.
    """
    edge = geom.edge(edge_index)
    ell = edge.length
    ta, no = edge.tangent, edge.normal

    def L(s: float) -> np.ndarray:
        xi = s / ell
        h1 = 1 - 3 * xi**2 + 2 * xi**3
        h2 = ell * (xi - 2 * xi**2 + xi**3)
        h3 = 3 * xi**2 - 2 * xi**3
        h4 = ell * (-(xi**2) + xi**3)
        dh1 = (-6 * xi + 6 * xi**2) / ell
        dh2 = 1 - 4 * xi + 3 * xi**2
        dh3 = (6 * xi - 6 * xi**2) / ell
        dh4 = -2 * xi + 3 * xi**2
        out = np.zeros((3, 12))
        for (node, hw, hs, dhw, dhs) in (
            (edge.start, h1, h2, dh1, dh2),
            (edge.end, h3, h4, dh3, dh4),
        ):
            c = 3 * node
            # w from end deflection + tangential slope
            out[0, c] += hw
            out[0, c + 1] += hs * ta[0]
            out[0, c + 2] += hs * ta[1]
            # w,t is the arc derivative of the cubic
            out[2, c] += dhw
            out[2, c + 1] += dhs * ta[0]
            out[2, c + 2] += dhs * ta[1]
        # w,n linear between end normal slopes
        for node, lin in ((edge.start, 1 - xi), (edge.end, xi)):
            c = 3 * node
            out[1, c + 1] += lin * no[0]
            out[1, c + 2] += lin * no[1]
        return out

    return edge, L


def moments_and_shears(table: np.ndarray, mat: PlateMaterial):
    """Physical moments (M11, M12, M22) and shears (Q1, Q2) of basis columns.

    ``table`` is a (10, n) derivative table; returns arrays (3, n), (2, n)
    with the sagging-positive convention M11 = -D (w,11 + nu w,22).
    """
    d, nu = mat.rigidity, mat.nu
    m11 = -d * (table[D_XX] + nu * table[D_YY])
    m22 = -d * (table[D_YY] + nu * table[D_XX])
    m12 = -d * (1 - nu) * table[D_XY]
    q1 = -d * (table[D_XXX] + table[D_XYY])
    q2 = -d * (table[D_YYY] + table[D_XXY])
    return np.array([m11, m12, m22]), np.array([q1, q2])


def boundary_tractions(mat: PlateMaterial, edge: Edge):
    """Work-conjugate traction triple on an edge.

    Returns a function P(table) -> (3, n) producing, for each basis column of
    a derivative table, the triple paired with the frame fields (w, w,n, w,t)
    in the boundary work integral: (Qn, -Mnn, -Mnt).  With this pairing the
    boundary bilinear form of a Trefftz field reproduces its domain energy.
    """
    no, ta = edge.normal, edge.tangent

    def P(table: np.ndarray) -> np.ndarray:
        (m11, m12, m22), (q1, q2) = moments_and_shears(table, mat)
        qn = q1 * no[0] + q2 * no[1]
        mnn = m11 * no[0] ** 2 + 2 * m12 * no[0] * no[1] + m22 * no[1] ** 2
        mnt = (
            m11 * no[0] * ta[0]
            + m12 * (no[0] * ta[1] + no[1] * ta[0])
            + m22 * no[1] * ta[1]
        )
        return np.array([qn, -mnn, -mnt])

    return P


@dataclass
class PlateElementMatrices:
    """Element matrices in the local frame (DOFs node-major w, w,1, w,2)."""

    k: np.ndarray                  # (12, 12)
    m: np.ndarray                  # (12, 12)
    load: np.ndarray               # (12,) consistent RHS
    energy_constant: float
    f2: np.ndarray | None = None   # ZDEQ split of the RHS
    f1: np.ndarray | None = None
    h: np.ndarray | None = None    # hybrid internals (strain subspace)
    t_mat: np.ndarray | None = None
    h_bar: np.ndarray | None = None
    t_bar: np.ndarray | None = None
    r0: np.ndarray | None = None


# Parameter indices of the strain-producing monomials (1, x, y excluded).
_STRAIN = slice(3, 12)


def _curvature_rows(table: np.ndarray) -> np.ndarray:
    """Curvature 4-vector rows (w,11, w,12, w,21, w,22) of a derivative table."""
    return table[[D_XX, D_XY, D_XY, D_YY]]


def _mass_rows(table: np.ndarray) -> np.ndarray:
    return table[[D_W, D_X, D_Y]]


def zdeq_matrices(
    geom: ElementGeometry,
    basis: pb.InterpolationMatrices,
    mat: PlateMaterial,
    qbar=None,
    quad: int = 3,
) -> PlateElementMatrices:
    """Displacement-element stiffness, mass and load by domain integration."""
    qbar = np.zeros(4) if qbar is None else np.asarray(qbar, dtype=float)
    emat = mat.elasticity_matrix()
    mass_diag = np.diag([mat.mass_per_area, mat.rotary_inertia, mat.rotary_inertia])
    pts, wts = geom.area_points(quad)
    k = np.zeros((12, 12))
    m = np.zeros((12, 12))
    f2 = np.zeros(12)
    f1 = np.zeros(12)
    cconst = 0.0
    for x, w in zip(pts, wts):
        shapes = pb.eval_shape_functions(basis, x)
        bk = _curvature_rows(shapes.n)
        k += w * bk.T @ emat @ bk
        rows = _mass_rows(shapes.n)
        m += w * rows.T @ mass_diag @ rows
        qx = basis.particular.load_shapes(x) @ qbar
        f2 += w * shapes.n[D_W] * qx
        bkbar_q = _curvature_rows(shapes.nbar) @ qbar
        f1 += w * bk.T @ emat @ bkbar_q
        cconst += w * bkbar_q @ emat @ bkbar_q
    return PlateElementMatrices(k, m, f2 - f1, cconst, f2=f2, f1=f1)


def _plate_mass(geom, basis, mat, quad):
    mass_diag = np.diag([mat.mass_per_area, mat.rotary_inertia, mat.rotary_inertia])
    pts, wts = geom.area_points(quad)
    m = np.zeros((12, 12))
    for x, w in zip(pts, wts):
        rows = _mass_rows(pb.eval_shape_functions(basis, x).n)
        m += w * rows.T @ mass_diag @ rows
    return m


def _domain_flexibility(geom, basis, mat, quad):
    """H = int curv(M)' E curv(M) dA and H_bar against the particular set."""
    emat = mat.elasticity_matrix()
    pts, wts = geom.area_points(quad)
    h = np.zeros((12, 12))
    h_bar = np.zeros((12, 4))
    for x, w in zip(pts, wts):
        mono = _curvature_rows(pb.eval_homogeneous(x))
        part = _curvature_rows(basis.particular.eval(x))
        h += w * mono.T @ emat @ mono
        h_bar += w * mono.T @ emat @ part
    return h, h_bar


def _boundary_operators(geom, basis, mat, edge_quad):
    """T = oint P(M)' L ds and T_bar = oint L' P(M_bar) ds over all edges."""
    rule = geo.gauss_rule(edge_quad)
    t_mat = np.zeros((12, 12))
    t_bar = np.zeros((12, 4))
    for idx in range(4):
        edge, frame_l = edge_frame_functions(geom, idx)
        tractions = boundary_tractions(mat, edge)
        for node, wq in zip(rule.nodes, rule.weights):
            s = 0.5 * (node + 1.0) * edge.length
            ds = 0.5 * edge.length * wq
            x = edge.point(s)
            p_mono = tractions(pb.eval_homogeneous(x))
            p_part = tractions(basis.particular.eval(x))
            lmat = frame_l(s)
            t_mat += ds * p_mono.T @ lmat
            t_bar += ds * lmat.T @ p_part
    return t_mat, t_bar


def _boundary_flexibility(geom, basis, mat, edge_quad):
    """Boundary H and H_bar from basis traces against basis tractions."""
    rule = geo.gauss_rule(edge_quad)
    h = np.zeros((12, 12))
    h_bar = np.zeros((12, 4))
    for idx in range(4):
        edge = geom.edge(idx)
        tractions = boundary_tractions(mat, edge)
        no, ta = edge.normal, edge.tangent
        for node, wq in zip(rule.nodes, rule.weights):
            s = 0.5 * (node + 1.0) * edge.length
            ds = 0.5 * edge.length * wq
            x = edge.point(s)
            mono = pb.eval_homogeneous(x)
            part = basis.particular.eval(x)
            p_mono = tractions(mono)
            trace = np.array(
                [
                    mono[D_W],
                    no[0] * mono[D_X] + no[1] * mono[D_Y],
                    ta[0] * mono[D_X] + ta[1] * mono[D_Y],
                ]
            )
            trace_bar = np.array(
                [
                    part[D_W],
                    no[0] * part[D_X] + no[1] * part[D_Y],
                    ta[0] * part[D_X] + ta[1] * part[D_Y],
                ]
            )
            h += ds * trace.T @ p_mono
            h_bar += ds * p_mono.T @ trace_bar
    # the boundary form is only quasi-symmetric under quadrature
    return 0.5 * (h + h.T), h_bar


def _eliminate(h, h_bar, t_mat, t_bar, qbar, kind):
    hs = h[_STRAIN, _STRAIN]
    ts = t_mat[_STRAIN, :]
    hbs = h_bar[_STRAIN, :]
    cond = np.linalg.cond(hs)
    if not np.isfinite(cond) or cond > 1e12:
        rank = np.linalg.matrix_rank(hs)
        raise ElementFailure(
            f"{kind}: flexibility matrix singular in the strain subspace "
            f"(rank {rank} of 9); use at least 3x3 area quadrature"
        )
    sol_t = np.linalg.solve(hs, ts)
    sol_h = np.linalg.solve(hs, hbs)
    k = ts.T @ sol_t
    load = ts.T @ (sol_h @ qbar) - t_bar @ qbar
    return k, load, sol_t, sol_h


def tfeq_matrices(
    geom: ElementGeometry,
    basis: pb.InterpolationMatrices,
    mat: PlateMaterial,
    qbar=None,
    quad: int = 3,
    edge_quad: int = 4,
) -> PlateElementMatrices:
    """Hybrid element: domain flexibility, boundary displacement frame."""
    qbar = np.zeros(4) if qbar is None else np.asarray(qbar, dtype=float)
    h, h_bar = _domain_flexibility(geom, basis, mat, quad)
    t_mat, t_bar = _boundary_operators(geom, basis, mat, edge_quad)
    k, load, _, _ = _eliminate(h, h_bar, t_mat, t_bar, qbar, "TFEQ")
    m = _plate_mass(geom, basis, mat, quad)
    return PlateElementMatrices(
        k, m, load, 0.0, h=h, t_mat=t_mat, h_bar=h_bar, t_bar=t_bar,
        r0=np.zeros(12),
    )


def jfeq_matrices(
    geom: ElementGeometry,
    basis: pb.InterpolationMatrices,
    mat: PlateMaterial,
    qbar=None,
    quad: int = 3,
    edge_quad: int = 4,
) -> PlateElementMatrices:
    """Boundary element: flexibility from the symmetrized boundary identity."""
    qbar = np.zeros(4) if qbar is None else np.asarray(qbar, dtype=float)
    h, h_bar = _boundary_flexibility(geom, basis, mat, edge_quad)
    t_mat, t_bar = _boundary_operators(geom, basis, mat, edge_quad)
    k, load, _, _ = _eliminate(h, h_bar, t_mat, t_bar, qbar, "JFEQ")
    m = _plate_mass(geom, basis, mat, quad)
    return PlateElementMatrices(
        k, m, load, 0.0, h=h, t_mat=t_mat, h_bar=h_bar, t_bar=t_bar,
        r0=np.zeros(12),
    )


def recover_parameters(
    geom: ElementGeometry,
    basis: pb.InterpolationMatrices,
    mat: PlateMaterial,
    u_local: np.ndarray,
    qbar: np.ndarray,
    variant: str = "zdeq",
    quad: int = 3,
    edge_quad: int = 4,
) -> np.ndarray:
    """Basis parameters c for a solved element.

    ZDEQ uses the nodal interpolation directly.  The hybrid variants recover
    the nine strain parameters from the elimination identity and fit the
    three rigid parameters to the nodal values in a least-squares sense (the
    boundary identity leaves them undetermined, and they carry no forces).
    """
    u_local = np.asarray(u_local, dtype=float)
    qbar = np.asarray(qbar, dtype=float)
    if variant == "zdeq":
        return basis.b @ (u_local - basis.a_bar @ qbar)
    if variant == "tfeq":
        h, h_bar = _domain_flexibility(geom, basis, mat, quad)
    elif variant == "jfeq":
        h, h_bar = _boundary_flexibility(geom, basis, mat, edge_quad)
    else:
        raise ValueError(f"unknown plate variant {variant!r}")
    t_mat, _ = _boundary_operators(geom, basis, mat, edge_quad)
    c = np.zeros(12)
    rhs = t_mat[_STRAIN, :] @ u_local - h_bar[_STRAIN, :] @ qbar
    c[_STRAIN] = np.linalg.solve(h[_STRAIN, _STRAIN], rhs)
    residual = u_local - basis.a[:, _STRAIN] @ c[_STRAIN] - basis.a_bar @ qbar
    c[:3] = np.linalg.lstsq(basis.a[:, :3], residual, rcond=None)[0]
    return c


def recover_internal_fields(
    geom: ElementGeometry,
    basis: pb.InterpolationMatrices,
    mat: PlateMaterial,
    u_local: np.ndarray,
    qbar,
    x,
    variant: str = "zdeq",
):
    """Deflection, slopes, moments and shears at a local point.

    Returns (w, (w,1, w,2), (M11, M12, M22), (Q1, Q2)) in the element frame.
    """
    qbar = np.zeros(4) if qbar is None else np.asarray(qbar, dtype=float)
    c = recover_parameters(geom, basis, mat, u_local, qbar, variant=variant)
    table = pb.eval_homogeneous(x) @ c + basis.particular.eval(x) @ qbar
    table = table[:, None]
    moments, shears = moments_and_shears(table, mat)
    return (
        float(table[D_W, 0]),
        np.array([table[D_X, 0], table[D_Y, 0]]),
        moments[:, 0],
        shears[:, 0],
    )
