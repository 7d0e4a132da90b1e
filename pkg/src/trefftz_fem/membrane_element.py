"""Plane-stress hybrid quadrilateral built from an Airy stress function.

The stress function is a complete quartic constrained by the biharmonic
equation (the two raw quartics x^4 and y^4 are replaced by the combinations
x^4 - 3 x^2 y^2 and y^4 - 3 x^2 y^2, which absorbs the constrained
parameter).  Membrane forces derive from the stress function in the
classical self-equilibrated way

    n11 = F,22    n22 = F,11    n12 = -F,12 - y*qx - x*qy

so that the force field balances constant body loads (qx, qy) exactly.
Nodes carry two translations and a drilling rotation; the boundary frame
couples the rotations through an Allman-type quadratic bow of the normal
edge displacement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .plate_basis import PolyTable, poly_add
from .plate_elements import ElementFailure, ElementGeometry


@dataclass(frozen=True)
class MembraneMaterial:
    """Isotropic plane-stress material."""

    e: float
    nu: float
    t: float
    rho: float = 0.0

    def __post_init__(self):
        if self.e <= 0 or self.t <= 0:
            raise ValueError("modulus and thickness must be positive")
        if not 0 <= self.nu < 0.5:
            raise ValueError(f"Poisson ratio out of range: {self.nu}")

    def compliance(self) -> np.ndarray:
        """Strain-force matrix on (n11, n21, n12, n22), forces per unit length."""
        nu = self.nu
        half = (1.0 + nu) / 2.0
        return (1.0 / (self.e * self.t)) * np.array(
            [
                [1.0, 0.0, 0.0, -nu],
                [0.0, half, half, 0.0],
                [0.0, half, half, 0.0],
                [-nu, 0.0, 0.0, 1.0],
            ]
        )


def _mono(p, q, scale=1.0):
    c = np.zeros((p + 1, q + 1))
    c[p, q] = scale
    return c


# 14 stress-function terms; parameters (c1..c12, c14, c15) in this order.
AIRY_TERMS = [
    _mono(0, 0), _mono(1, 0), _mono(0, 1),
    _mono(2, 0), _mono(1, 1), _mono(0, 2),
    _mono(3, 0), _mono(2, 1), _mono(1, 2), _mono(0, 3),
    poly_add(_mono(4, 0), _mono(2, 2, -3.0)),   # x^4 - 3 x^2 y^2
    _mono(3, 1), _mono(1, 3),
    poly_add(_mono(0, 4), _mono(2, 2, -3.0)),   # y^4 - 3 x^2 y^2
]

# Strain-producing parameters: constants and linear terms carry no force.
_FORCE_PARAMS = list(range(3, 14))

_AIRY_TABLE = PolyTable(AIRY_TERMS)


def airy_basis_eval(x) -> np.ndarray:
    """Stress-function terms with derivatives, (10, 14) derivative table."""
    u, v = x
    return _AIRY_TABLE.eval(u, v)


def membrane_force_basis(x, loads=(0.0, 0.0)):
    """Force field columns at a local point.

    Returns (basis, particular) where ``basis`` is (4, 11) over the
    strain-producing parameters and ``particular`` (4,) carries the
    body-load terms; rows are (n11, n21, n12, n22).
    """
    table = airy_basis_eval(x)
    f_yy = table[5]   # D_YY
    f_xx = table[3]   # D_XX
    f_xy = table[4]   # D_XY
    n11 = f_yy[_FORCE_PARAMS]
    n22 = f_xx[_FORCE_PARAMS]
    n12 = -f_xy[_FORCE_PARAMS]
    basis = np.array([n11, n12, n12, n22])
    qx, qy = loads
    shear_load = -x[1] * qx - x[0] * qy
    particular = np.array([0.0, shear_load, shear_load, 0.0])
    return basis, particular


def membrane_edge_frame(geom: ElementGeometry, edge_index: int):
    """Boundary displacement interpolation for one edge.

    Returns (edge, L) with L(s) a 2x12 operator mapping local nodal DOFs
    (u1, u2, rz per node) to the local displacement vector on the edge:
    linear in the end translations plus an Allman quadratic bow of the
    normal component driven by the difference of the end drilling rotations.
    """
    edge = geom.edge(edge_index)
    ell = edge.length
    ta, no = edge.tangent, edge.normal

    def L(s: float) -> np.ndarray:
        xi = s / ell
        out = np.zeros((2, 12))
        for node, lin in ((edge.start, 1 - xi), (edge.end, xi)):
            c = 3 * node
            out[0, c] += lin
            out[1, c + 1] += lin
        # quadratic normal bow: du_n/ds jump between ends equals -(phi_b - phi_a)
        bubble = 0.5 * ell * xi * (1 - xi)
        out[:, 3 * edge.end + 2] += bubble * no
        out[:, 3 * edge.start + 2] -= bubble * no
        return out

    return edge, L


@dataclass
class MembraneElementMatrices:
    """Local-frame matrices, DOFs node-major (u1, u2, rz)."""

    k: np.ndarray
    m: np.ndarray
    load: np.ndarray
    h: np.ndarray
    t_mat: np.ndarray
    h_bar: np.ndarray
    t_bar: np.ndarray


def _membrane_flexibility(geom, mat, loads, quad):
    compliance = mat.compliance()
    pts, wts = geom.area_points(quad)
    h = np.zeros((11, 11))
    h_bar = np.zeros(11)
    for x, w in zip(pts, wts):
        basis, particular = membrane_force_basis(x, loads)
        h += w * basis.T @ compliance @ basis
        h_bar += w * basis.T @ compliance @ particular
    return h, h_bar


def _membrane_boundary(geom, loads, edge_quad):
    rule = geo.gauss_rule(edge_quad)
    t_mat = np.zeros((11, 12))
    t_bar = np.zeros(12)
    for idx in range(4):
        edge, frame_l = membrane_edge_frame(geom, idx)
        no = edge.normal
        for node, wq in zip(rule.nodes, rule.weights):
            s = 0.5 * (node + 1.0) * edge.length
            ds = 0.5 * edge.length * wq
            x = edge.point(s)
            basis, particular = membrane_force_basis(x, loads)
            # edge traction 2-vectors t_i = n_ij n_j of each column
            tr_basis = np.array(
                [basis[0] * no[0] + basis[2] * no[1],
                 basis[1] * no[0] + basis[3] * no[1]]
            )
            tr_part = np.array(
                [particular[0] * no[0] + particular[2] * no[1],
                 particular[1] * no[0] + particular[3] * no[1]]
            )
            lmat = frame_l(s)
            t_mat += ds * tr_basis.T @ lmat
            t_bar += ds * lmat.T @ tr_part
    return t_mat, t_bar


def membrane_matrices(
    geom: ElementGeometry,
    mat: MembraneMaterial,
    loads=(0.0, 0.0),
    quad: int = 3,
    edge_quad: int = 4,
) -> MembraneElementMatrices:
    """Hybrid stiffness k = T' H^-1 T plus body-load vector and mass."""
    loads = tuple(loads)
    h, h_bar = _membrane_flexibility(geom, mat, loads, quad)
    t_mat, t_bar = _membrane_boundary(geom, loads, edge_quad)
    cond = np.linalg.cond(h)
    if not np.isfinite(cond) or cond > 1e12:
        rank = np.linalg.matrix_rank(h)
        raise ElementFailure(
            f"membrane flexibility matrix singular (rank {rank} of 11) at "
            f"{quad}x{quad} Gauss quadrature; at least 3x3 is required"
        )
    sol_t = np.linalg.solve(h, t_mat)
    k = t_mat.T @ sol_t
    load = t_mat.T @ np.linalg.solve(h, h_bar) - t_bar
    m = _membrane_mass(geom, mat)
    return MembraneElementMatrices(k, m, load, h, t_mat, h_bar, t_bar)


def _membrane_mass(geom, mat):
    """Lumped-consistent translational mass from the bilinear map."""
    pts_nat, wts = geo.gauss_rule(2).squared()
    m = np.zeros((12, 12))
    mu = mat.rho * mat.t
    if mu == 0.0:
        return m
    for theta, w in zip(pts_nat, wts):
        shp = geo.shape_bilinear(theta)
        _, _, det = geo.isoparametric_eval(geom.corners_local, theta)
        for i in range(4):
            for j in range(4):
                m[3 * i, 3 * j] += mu * w * det * shp[i] * shp[j]
                m[3 * i + 1, 3 * j + 1] += mu * w * det * shp[i] * shp[j]
    return m


def membrane_recover_forces(
    geom: ElementGeometry,
    mat: MembraneMaterial,
    u_local: np.ndarray,
    loads,
    x,
    quad: int = 3,
    edge_quad: int = 4,
):
    """Membrane forces (n11, n12, n22) at a local point from solved DOFs."""
    loads = (0.0, 0.0) if loads is None else tuple(loads)
    h, h_bar = _membrane_flexibility(geom, mat, loads, quad)
    t_mat, _ = _membrane_boundary(geom, loads, edge_quad)
    c = np.linalg.solve(h, t_mat @ np.asarray(u_local, dtype=float) - h_bar)
    basis, particular = membrane_force_basis(x, loads)
    n = basis @ c + particular
    return np.array([n[0], n[1], n[3]])
