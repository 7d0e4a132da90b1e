"""Exact twelve-DOF space-frame element (axial, two bending planes, torsion).

The trial space solves the four member ODEs exactly for linearly varying
distributed loads, so the eliminated element is exact: the stiffness equals
the classical closed-form space-frame matrix, the load vector reproduces the
exact fixed-end forces, and internal force recovery returns the analytic ODE
solution inside the member.

Two elimination pipelines are provided.  The boundary pipeline evaluates the
virtual-work identity at the two end points (the boundary integral of a 1-D
member degenerates to end-point products); the hybrid pipeline integrates
the strain-energy pairing over the length.  Both produce identical matrices.

Local axes: x1 along the member; x2, x3 from an orientation hint vector.
DOF order per node: (u1, u2, u3, r1, r2, r3) with r2 = -u3' and r3 = +u2'.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .geometry import gauss_rule


@dataclass(frozen=True)
class FrameSection:
    """Material and section constants of a prismatic member."""

    e: float
    nu: float
    a: float
    i2: float       # bending inertia about local x2 (deflection u3)
    i3: float       # bending inertia about local x3 (deflection u2)
    j: float        # St. Venant torsion constant
    rho: float = 0.0
    ip: float | None = None  # polar inertia for torsional mass; default i2+i3

    def __post_init__(self):
        for name in ("e", "a", "i2", "i3", "j"):
            if getattr(self, name) <= 0:
                raise ValueError(f"section property {name} must be positive")
        if not 0 <= self.nu < 0.5:
            raise ValueError(f"Poisson ratio out of range: {self.nu}")

    @property
    def g(self) -> float:
        return self.e / (2.0 * (1.0 + self.nu))

    @property
    def polar_inertia(self) -> float:
        return self.ip if self.ip is not None else self.i2 + self.i3


@dataclass(frozen=True)
class FrameLoads:
    """Linearly varying member loads by end intensities, in local axes."""

    n1: float = 0.0   # axial at node 1
    n2: float = 0.0   # axial at node 2
    qy1: float = 0.0  # transverse along x2
    qy2: float = 0.0
    qz1: float = 0.0  # transverse along x3
    qz2: float = 0.0
    mx1: float = 0.0  # distributed torque
    mx2: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.qy1, self.qy2,
                         self.qz1, self.qz2, self.mx1, self.mx2])


# Field row indices
U1, U2, U3, R1 = range(4)


def _poly1(*coeffs):
    return np.asarray(coeffs, dtype=float)


@dataclass
class FrameBasis:
    """Polynomial field representation of the 12+8 member trial functions."""

    section: FrameSection
    length: float
    homogeneous: list = field(init=False)  # [field][param] 1-D coefficient arrays
    particular: list = field(init=False)   # [field][load]  1-D coefficient arrays

    def __post_init__(self):
        ell = self.length
        if ell <= 0:
            raise ValueError("member length must be positive")
        sec = self.section
        ea, gj = sec.e * sec.a, sec.g * sec.j
        ei2, ei3 = sec.e * sec.i2, sec.e * sec.i3
        zero = _poly1(0.0)
        lin = [_poly1(1.0), _poly1(0.0, 1.0)]
        cubic = [_poly1(1.0), _poly1(0.0, 1.0), _poly1(0.0, 0.0, 1.0), _poly1(0.0, 0.0, 0.0, 1.0)]
        hom = [[zero] * 12 for _ in range(4)]
        for k in range(2):
            hom[U1][k] = lin[k]
            hom[R1][10 + k] = lin[k]
        for k in range(4):
            hom[U2][2 + k] = cubic[k]
            hom[U3][6 + k] = cubic[k]
        self.homogeneous = hom
        # particular fields: hat-load preimages of the member ODEs
        def second_order(stiff):
            # stiff * u'' = -(load1*(1-x/l) + load2*(x/l))
            p1 = _poly1(0.0, 0.0, -1.0 / 2.0, 1.0 / (6.0 * ell)) / stiff
            p2 = _poly1(0.0, 0.0, 0.0, -1.0 / (6.0 * ell)) / stiff
            return p1, p2

        def fourth_order(stiff):
            # stiff * u'''' = +(load1*(1-x/l) + load2*(x/l))
            p1 = _poly1(0.0, 0.0, 0.0, 0.0, 1.0 / 24.0, -1.0 / (120.0 * ell)) / stiff
            p2 = _poly1(0.0, 0.0, 0.0, 0.0, 0.0, 1.0 / (120.0 * ell)) / stiff
            return p1, p2

        par = [[zero] * 8 for _ in range(4)]
        par[U1][0], par[U1][1] = second_order(ea)
        par[U2][2], par[U2][3] = fourth_order(ei3)
        par[U3][4], par[U3][5] = fourth_order(ei2)
        par[R1][6], par[R1][7] = second_order(gj)
        self.particular = par

    def eval_fields(self, x1: float, deriv: int = 0):
        """(4, 12) homogeneous and (4, 8) particular field values at x1."""
        hom = np.zeros((4, 12))
        par = np.zeros((4, 8))
        for f in range(4):
            for k in range(12):
                hom[f, k] = npoly.polyval(x1, npoly.polyder(self.homogeneous[f][k], deriv))
            for k in range(8):
                par[f, k] = npoly.polyval(x1, npoly.polyder(self.particular[f][k], deriv))
        return hom, par

    def boundary_displacements(self):
        """U (12, 12) and U_bar (12, 8): nodal DOFs of the trial functions."""
        u = np.zeros((12, 12))
        u_bar = np.zeros((12, 8))
        for node, x1 in enumerate((0.0, self.length)):
            h0, p0 = self.eval_fields(x1, 0)
            h1, p1 = self.eval_fields(x1, 1)
            rows = slice(6 * node, 6 * node + 6)
            u[rows] = np.vstack([h0[U1], h0[U2], h0[U3], h0[R1], -h1[U3], h1[U2]])
            u_bar[rows] = np.vstack([p0[U1], p0[U2], p0[U3], p0[R1], -p1[U3], p1[U2]])
        return u, u_bar

    def force_fields(self, x1: float):
        """Internal forces (N, V2, V3, T, M2, M3) of basis columns at x1.

        Returns (6, 12) homogeneous and (6, 8) particular blocks with the
        convention M3 = EI3 u2'', M2 = -EI2 u3'', V = dM/dx sign-matched so
        that end equilibrium holds for distributed loads.
        """
        sec = self.section
        out = []
        for block_idx, cols in (("hom", 12), ("par", 8)):
            h1, p1 = self.eval_fields(x1, 1)
            h2, p2 = self.eval_fields(x1, 2)
            h3, p3 = self.eval_fields(x1, 3)
            d1 = h1 if block_idx == "hom" else p1
            d2 = h2 if block_idx == "hom" else p2
            d3 = h3 if block_idx == "hom" else p3
            n = sec.e * sec.a * d1[U1]
            m3 = sec.e * sec.i3 * d2[U2]
            m2 = -sec.e * sec.i2 * d2[U3]
            v2 = sec.e * sec.i3 * d3[U2]
            v3 = -sec.e * sec.i2 * d3[U3]
            tq = sec.g * sec.j * d1[R1]
            out.append(np.array([n, v2, v3, tq, m2, m3]))
        return out[0], out[1]

    def boundary_tractions(self):
        """P (12, 12) and P_bar (12, 8): end tractions conjugate to the DOFs.

        From the boundary terms of the four member bilinear forms, the
        traction conjugate to (u1, u2, u3, r1, r2, r3) at the end with
        outward sign s (node 1: -1, node 2: +1) is
        (s N, -s V2, s V3, s T, s M2, s M3) in the reporting convention of
        ``force_fields``.
        """
        p = np.zeros((12, 12))
        p_bar = np.zeros((12, 8))
        signs = np.array([1.0, -1.0, 1.0, 1.0, 1.0, 1.0])
        for node, (x1, sign) in enumerate(((0.0, -1.0), (self.length, 1.0))):
            hom, par = self.force_fields(x1)
            rows = slice(6 * node, 6 * node + 6)
            p[rows] = sign * signs[:, None] * hom
            p_bar[rows] = sign * signs[:, None] * par
        return p, p_bar


# Strain-producing parameter indices: axial rate, two bending pairs, twist rate.
_FRAME_STRAIN = [1, 4, 5, 8, 9, 11]


@dataclass
class FrameElementMatrices:
    k: np.ndarray
    m: np.ndarray
    load: np.ndarray
    h: np.ndarray
    t_mat: np.ndarray
    h_bar: np.ndarray
    t_bar: np.ndarray


def _assemble_from(h, h_bar, t_mat, t_bar, loads_vec):
    hs = h[np.ix_(_FRAME_STRAIN, _FRAME_STRAIN)]
    ts = t_mat[_FRAME_STRAIN, :]
    hbs = h_bar[_FRAME_STRAIN, :]
    sol_t = np.linalg.solve(hs, ts)
    k = ts.T @ sol_t
    load = ts.T @ np.linalg.solve(hs, hbs @ loads_vec) - t_bar @ loads_vec
    return k, load


def frame_matrices(
    section: FrameSection,
    length: float,
    loads: FrameLoads | None = None,
    pipeline: str = "boundary",
) -> FrameElementMatrices:
    """Stiffness, consistent mass and exact fixed-end load vector."""
    loads = loads or FrameLoads()
    basis = FrameBasis(section, length)
    u_mat, u_bar = basis.boundary_displacements()
    p_mat, p_bar = basis.boundary_tractions()
    if pipeline == "boundary":
        h = p_mat.T @ u_mat
        h_bar = p_mat.T @ u_bar
    elif pipeline == "hybrid":
        h, h_bar = _domain_flexibility(basis)
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    t_mat = p_mat.T          # frame = identity on the nodal DOFs
    t_bar = p_bar
    k, load = _assemble_from(h, h_bar, t_mat, t_bar, loads.vector())
    m = _frame_mass(basis, u_mat)
    return FrameElementMatrices(k, m, load, h, t_mat, h_bar, t_bar)


def _domain_flexibility(basis: FrameBasis):
    """H and H_bar from the strain-energy pairing over the member length."""
    sec, ell = basis.section, basis.length
    stiff = np.diag([sec.e * sec.a, sec.e * sec.i3, sec.e * sec.i2, sec.g * sec.j])
    rule = gauss_rule(5)
    h = np.zeros((12, 12))
    h_bar = np.zeros((12, 8))
    for node, w in zip(rule.nodes, rule.weights):
        x1 = 0.5 * (node + 1.0) * ell
        dx = 0.5 * ell * w
        h1, p1 = basis.eval_fields(x1, 1)
        h2, p2 = basis.eval_fields(x1, 2)
        rows_h = np.array([h1[U1], h2[U2], h2[U3], h1[R1]])
        rows_p = np.array([p1[U1], p2[U2], p2[U3], p1[R1]])
        h += dx * rows_h.T @ stiff @ rows_h
        h_bar += dx * rows_h.T @ stiff @ rows_p
    return h, h_bar


def _frame_mass(basis: FrameBasis, u_mat: np.ndarray):
    """Consistent mass from the homogeneous shapes with rho*A and rho*Ip."""
    sec, ell = basis.section, basis.length
    mu = sec.rho * sec.a
    mu_t = sec.rho * basis.section.polar_inertia
    m = np.zeros((12, 12))
    if sec.rho == 0.0:
        return m
    shape = np.linalg.inv(u_mat)  # params from nodal DOFs
    rule = gauss_rule(4)
    dens = np.diag([mu, mu, mu, mu_t])
    for node, w in zip(rule.nodes, rule.weights):
        x1 = 0.5 * (node + 1.0) * ell
        dx = 0.5 * ell * w
        hom, _ = basis.eval_fields(x1, 0)
        rows = hom @ shape  # (4 fields, 12 dofs)
        m += dx * rows.T @ dens @ rows
    return m


def frame_internal_forces(
    section: FrameSection,
    length: float,
    u_local: np.ndarray,
    loads: FrameLoads | None,
    x1: float,
):
    """Section forces (N, V2, V3, T, M2, M3) at x1 from solved local DOFs.

    Parameters are recovered through the boundary identity, so the result is
    the exact ODE solution inside the member.
    """
    loads = loads or FrameLoads()
    lv = loads.vector()
    basis = FrameBasis(section, length)
    u_mat, u_bar = basis.boundary_displacements()
    c = np.linalg.solve(u_mat, np.asarray(u_local, dtype=float) - u_bar @ lv)
    hom, par = basis.force_fields(x1)
    return hom @ c + par @ lv


def frame_displacement(
    section: FrameSection,
    length: float,
    u_local: np.ndarray,
    loads: FrameLoads | None,
    x1: float,
):
    """Displacement fields (u1, u2, u3, r1) at x1, exact within the member."""
    loads = loads or FrameLoads()
    lv = loads.vector()
    basis = FrameBasis(section, length)
    u_mat, u_bar = basis.boundary_displacements()
    c = np.linalg.solve(u_mat, np.asarray(u_local, dtype=float) - u_bar @ lv)
    hom, par = basis.eval_fields(x1, 0)
    return hom @ c + par @ lv


def frame_triad(xa, xb, orientation=None) -> np.ndarray:
    """Local axes as rows: x1 along the member, x3 from the orientation hint.

    The hint (default global z) is projected off the axis; if the member is
    parallel to the hint, global x is used instead.
    """
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    axis = xb - xa
    length = np.linalg.norm(axis)
    if length <= 0:
        raise ValueError("zero-length member")
    t = axis / length
    hint = np.array([0.0, 0.0, 1.0]) if orientation is None else np.asarray(orientation, float)
    x3 = hint - (hint @ t) * t
    if np.linalg.norm(x3) < 1e-8 * np.linalg.norm(hint):
        hint = np.array([1.0, 0.0, 0.0])
        x3 = hint - (hint @ t) * t
    x3 /= np.linalg.norm(x3)
    x2 = np.cross(x3, t)
    return np.vstack([t, x2, x3])
