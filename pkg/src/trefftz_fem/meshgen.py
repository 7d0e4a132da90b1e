"""Deterministic generators for the benchmark meshes.

Every generator returns a complete model (nodes, elements, material,
constraints, loads) ready for assembly.  Node numbering is row-major over
the structured grid, so refining a square mesh nests the coarse nodes.

Boundary-condition presets:

* ``ss``       hard simple support: w plus the slope along the edge; at a
               corner both slopes end up fixed.
* ``ss-soft``  transverse displacement only (the skew-plate convention).
* ``clamped``  w and both slopes.
* ``free``     no constraint.

The preset name applies per edge; mixed cases pass a 4-tuple ordered
(bottom, right, top, left).
"""

from __future__ import annotations

import numpy as np

from .frame_element import FrameSection
from .membrane_element import MembraneMaterial
from .model import Model
from .plate_elements import PlateMaterial

# Interior-node offsets (fractions of the local cell size) reproducing the
# character of the distorted 4x4 test mesh; fixed and documented so the
# distorted benchmark is reproducible.
DISTORTION_PATTERN = (0.15, -0.12), (-0.1, 0.15), (0.12, 0.1), (-0.15, -0.08)


def unit_rigidity_plate(nu: float = 0.3, t: float = 0.2, rho: float = 5.0) -> PlateMaterial:
    """Plate material with rigidity exactly one (the benchmark scaling)."""
    return PlateMaterial(e=12.0 * (1.0 - nu**2) / t**3, nu=nu, t=t, rho=rho)


def _transfinite_point(corners, s, t):
    """Bilinear interpolation of the four domain corners at (s, t) in [0,1]^2."""
    c = np.asarray(corners, dtype=float)
    return ((1 - s) * (1 - t) * c[0] + s * (1 - t) * c[1]
            + s * t * c[2] + (1 - s) * t * c[3])


def grid_model(corners, nx: int, ny: int, material, kind: str = "ZDEQ",
               sx=None, sy=None) -> Model:
    """Structured nx x ny mesh of the straight-edged quad ``corners``.

    ``sx``/``sy`` optionally give the normalized grid lines (defaults
    uniform).  Node ids run row-major starting at 1; element ids likewise.
    """
    if nx < 1 or ny < 1:
        raise ValueError("subdivision counts must be >= 1")
    sx = np.linspace(0.0, 1.0, nx + 1) if sx is None else np.asarray(sx, float)
    sy = np.linspace(0.0, 1.0, ny + 1) if sy is None else np.asarray(sy, float)
    model = Model()
    model.materials[1] = material
    nid = lambda i, j: j * (nx + 1) + i + 1
    for j in range(ny + 1):
        for i in range(nx + 1):
            model.add_node(nid(i, j), _transfinite_point(corners, sx[i], sy[j]))
    eid = 1
    for j in range(ny):
        for i in range(nx):
            model.add_element(
                eid, kind, (nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)), 1
            )
            eid += 1
    return model


def _grid_nid(nx):
    return lambda i, j: j * (nx + 1) + i + 1


def _edge_nodes(nx, ny):
    """Node index sets for the four edges (bottom, right, top, left)."""
    nid = _grid_nid(nx)
    bottom = [nid(i, 0) for i in range(nx + 1)]
    right = [nid(nx, j) for j in range(ny + 1)]
    top = [nid(i, ny) for i in range(nx + 1)]
    left = [nid(0, j) for j in range(ny + 1)]
    return bottom, right, top, left


def apply_plate_bc(model: Model, nx: int, ny: int, preset, tangents=None):
    """Constrain the grid boundary according to the preset(s).

    ``tangents`` optionally lists the in-plane tangent direction per edge
    (unit 2-vectors); needed for hard simple support on slanted edges where
    the constrained slope combination is not axis-aligned.  With axis-aligned
    or nearly axis-aligned tangents, the dominant global slope component is
    constrained.
    """
    presets = (preset,) * 4 if isinstance(preset, str) else tuple(preset)
    if len(presets) != 4:
        raise ValueError("preset must be a name or a 4-tuple (bottom, right, top, left)")
    edges = _edge_nodes(nx, ny)
    default_tangents = ((1, 0), (0, 1), (1, 0), (0, 1))
    tangents = tangents or default_tangents
    seen = set()

    def constrain(node, dof):
        if (node, dof) not in seen:
            model.constrain(node, dof, 0.0)
            seen.add((node, dof))

    for nodes, name, tangent in zip(edges, presets, tangents):
        if name == "free":
            continue
        for node in nodes:
            constrain(node, "w")
            if name == "clamped":
                constrain(node, "sx")
                constrain(node, "sy")
            elif name == "ss":
                # tangential slope: pick the dominant component of the tangent
                dof = "sx" if abs(tangent[0]) >= abs(tangent[1]) else "sy"
                constrain(node, dof)
            elif name == "ss-soft":
                pass
            else:
                raise ValueError(f"unknown boundary preset {name!r}")
    return model


def set_plate_load(model: Model, load):
    """Assign nodal load intensities per element from a callable q(x, y)."""
    for eid, el in model.elements.items():
        q = [float(load(*model.nodes[n][:2])) for n in el.nodes]
        model.element_loads[eid] = {"q": q}
    return model


def square_mesh(a: float, n: int, bc="ss", load=None, distorted: bool = False,
                material: PlateMaterial | None = None, kind: str = "ZDEQ") -> Model:
    """n x n plate mesh over an a x a square with optional interior distortion."""
    material = material or unit_rigidity_plate()
    corners = [(0.0, 0.0), (a, 0.0), (a, a), (0.0, a)]
    model = grid_model(corners, n, n, material, kind)
    if distorted:
        cell = a / n
        nid = _grid_nid(n)
        pattern = DISTORTION_PATTERN
        idx = 0
        for j in range(1, n):
            for i in range(1, n):
                dx, dy = pattern[idx % len(pattern)]
                model.nodes[nid(i, j)][:2] += (dx * cell, dy * cell)
                idx += 1
    apply_plate_bc(model, n, n, bc)
    if load is not None:
        set_plate_load(model, load)
    return model


def rhombic_mesh(a: float, n: int, skew_deg: float, bc="ss-soft", load=None,
                 material: PlateMaterial | None = None, kind: str = "ZDEQ") -> Model:
    """Affine shear of the square mesh; skew measured from the square.

    The rhombus has side length a and interior acute angle (90 - skew)
    degrees; skew -> 0 recovers the square mesh.
    """
    if not 0 <= skew_deg < 90:
        raise ValueError("skew angle must be in [0, 90) degrees")
    material = material or unit_rigidity_plate()
    phi = np.deg2rad(90.0 - skew_deg)
    d = np.array([np.cos(phi), np.sin(phi)]) * a
    corners = [(0.0, 0.0), (a, 0.0), (a + d[0], d[1]), (d[0], d[1])]
    model = grid_model(corners, n, n, material, kind)
    tangent_x = (1.0, 0.0)
    tangent_d = (np.cos(phi), np.sin(phi))
    apply_plate_bc(model, n, n, bc, tangents=(tangent_x, tangent_d, tangent_x, tangent_d))
    if load is not None:
        set_plate_load(model, load)
    return model


def trapezoid_mesh(corners, nx: int, ny: int, bc=("free", "free", "free", "clamped"),
                   load=None, material: PlateMaterial | None = None,
                   kind: str = "ZDEQ") -> Model:
    """Transfinite mesh of an arbitrary straight-edged trapezoid."""
    material = material or unit_rigidity_plate()
    model = grid_model(corners, nx, ny, material, kind)
    c = np.asarray(corners, float)
    tans = []
    for a, b in ((0, 1), (1, 2), (3, 2), (0, 3)):
        v = c[b] - c[a]
        tans.append(tuple(v / np.linalg.norm(v)))
    apply_plate_bc(model, nx, ny, bc, tangents=tans)
    if load is not None:
        set_plate_load(model, load)
    return model


def tapered_beam_mesh(n: int, length=1.0, root_width=0.1, tip_width=0.05,
                      thickness=0.01, e_mod=None, nu=0.3, load=1.0) -> Model:
    """Width-tapered cantilever plate strip under uniform area load.

    The clamped edge is the wide end; the free tip is the narrow end.
    """
    if e_mod is None:
        e_mod = 2.1e7
    corners = [(0.0, -root_width / 2), (length, -tip_width / 2),
               (length, tip_width / 2), (0.0, root_width / 2)]
    material = PlateMaterial(e=e_mod, nu=nu, t=thickness, rho=0.0)
    model = trapezoid_mesh(corners, n, n, bc=("free",) * 3 + ("clamped",),
                           material=material)
    set_plate_load(model, lambda x, y: load)
    return model


def strip_mesh(length: float, width: float, n_l: int, n_w: int,
               ratio: float = 1.0, material: PlateMaterial | None = None,
               kind: str = "ZDEQ") -> Model:
    """Cantilever strip with element lengths in linear progression 1:ratio.

    The lengths grow linearly from the clamped end: l_k = l_1 * (1 + (k-1) *
    (ratio - 1) / (n_l - 1)), scaled to sum to ``length``; ratio 1 gives a
    uniform mesh.
    """
    if ratio < 1.0:
        raise ValueError("distortion ratio must be >= 1")
    material = material or unit_rigidity_plate()
    if n_l == 1 or ratio == 1.0:
        sx = None
    else:
        steps = 1.0 + (ratio - 1.0) * np.arange(n_l) / (n_l - 1)
        sx = np.concatenate([[0.0], np.cumsum(steps)])
        sx /= sx[-1]
    corners = [(0.0, 0.0), (length, 0.0), (length, width), (0.0, width)]
    model = grid_model(corners, n_l, n_w, material, kind, sx=sx)
    apply_plate_bc(model, n_l, n_w, ("free", "free", "free", "clamped"))
    return model


def circular_mesh(radius: float, rings: int, sectors: int, bc="clamped",
                  load=None, material: PlateMaterial | None = None,
                  kind: str = "ZDEQ") -> Model:
    """Clamped circular plate mesh: kite-cell core plus annular rings.

    The innermost zone spans two sectors per cell (half the element count of
    the outer rings, with conforming connectivity): each core cell joins the
    centre node to three consecutive nodes of the first ring.  Outer rings
    are regular quadrilateral annuli.  The outer boundary is the inscribed
    polygon of the true circle.
    """
    if rings < 2:
        raise ValueError("need at least two rings")
    if sectors % 2 != 0:
        raise ValueError("sector count must be even")
    material = material or unit_rigidity_plate()
    model = Model()
    model.materials[1] = material
    center = model.add_node(1, (0.0, 0.0))
    ring_nodes = []
    nid = 2
    for k in range(1, rings + 1):
        r = radius * k / rings
        nodes = []
        for s in range(sectors):
            ang = 2.0 * np.pi * s / sectors
            model.add_node(nid, (r * np.cos(ang), r * np.sin(ang)))
            nodes.append(nid)
            nid += 1
        ring_nodes.append(nodes)
    eid = 1
    first = ring_nodes[0]
    for c in range(sectors // 2):
        i = 2 * c
        model.add_element(eid, kind, (center, first[i], first[(i + 1) % sectors],
                                      first[(i + 2) % sectors]), 1)
        eid += 1
    for k in range(rings - 1):
        inner, outer = ring_nodes[k], ring_nodes[k + 1]
        for s in range(sectors):
            sn = (s + 1) % sectors
            model.add_element(eid, kind, (inner[s], outer[s], outer[sn], inner[sn]), 1)
            eid += 1
    for node in ring_nodes[-1]:
        model.constrain(node, "w", 0.0)
        if bc == "clamped":
            model.constrain(node, "sx", 0.0)
            model.constrain(node, "sy", 0.0)
    if load is not None:
        set_plate_load(model, load)
    return model


def cook_membrane_mesh(n: int, e_mod: float = 1.0, nu: float = 1.0 / 3.0,
                       t: float = 1.0, total_load: float = 1.0) -> Model:
    """Cook's tapered membrane, clamped at x=0, shear load on the free edge.

    The unit resultant on the free edge is applied as consistent nodal
    forces of a uniform traction (half weights at the edge corners).
    """
    corners = [(0.0, 0.0), (48.0, 44.0), (48.0, 60.0), (0.0, 44.0)]
    material = MembraneMaterial(e=e_mod, nu=nu, t=t)
    model = grid_model(corners, n, n, material, "MEMBRANE")
    nid = _grid_nid(n)
    for j in range(n + 1):
        model.constrain(nid(0, j), "ux", 0.0)
        model.constrain(nid(0, j), "uy", 0.0)
        model.constrain(nid(0, j), "rz", 0.0)
    weights = np.full(n + 1, 1.0 / n)
    weights[0] = weights[-1] = 0.5 / n
    for j in range(n + 1):
        model.load_node(nid(n, j), "uy", total_load * weights[j])
    return model


def cantilever_membrane_mesh(n_h: int = 4, n_l: int = 16, depth: float = 12.0,
                             length: float = 48.0, t: float = 1.0,
                             e_mod: float = 30000.0, nu: float = 0.25,
                             total_load: float = 40.0,
                             load_profile: str = "parabolic") -> Model:
    """Shear-loaded cantilever membrane (depth x length x t).

    The tip load resultant is distributed over the free-end nodes either as
    the consistent forces of the exact parabolic shear traction or of a
    uniform traction.
    """
    corners = [(0.0, -depth / 2), (length, -depth / 2), (length, depth / 2),
               (0.0, depth / 2)]
    material = MembraneMaterial(e=e_mod, nu=nu, t=t)
    model = grid_model(corners, n_l, n_h, material, "MEMBRANE")
    nid = lambda i, j: j * (n_l + 1) + i + 1
    for j in range(n_h + 1):
        model.constrain(nid(0, j), "ux", 0.0)
        model.constrain(nid(0, j), "uy", 0.0)
        model.constrain(nid(0, j), "rz", 0.0)
    ys = np.array([model.nodes[nid(n_l, j)][1] for j in range(n_h + 1)])
    forces = _edge_consistent_forces(ys, depth, total_load, load_profile)
    for j in range(n_h + 1):
        model.load_node(nid(n_l, j), "uy", forces[j])
    return model


def _edge_consistent_forces(ys, depth, total, profile):
    """Consistent nodal forces of a traction profile on a straight edge."""
    half = depth / 2.0
    if profile == "parabolic":
        shape = lambda y: 1.5 / depth * (1.0 - (y / half) ** 2)
    elif profile == "uniform":
        shape = lambda y: 1.0 / depth
    else:
        raise ValueError(f"unknown load profile {profile!r}")
    forces = np.zeros(len(ys))
    for seg in range(len(ys) - 1):
        y0, y1 = ys[seg], ys[seg + 1]
        # two-point Gauss on the segment, linear hat weights
        for gp, gw in ((-1 / np.sqrt(3), 1.0), (1 / np.sqrt(3), 1.0)):
            y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * gp
            jac = 0.5 * (y1 - y0) * gw
            lin = 0.5 * (1 - gp), 0.5 * (1 + gp)
            forces[seg] += jac * shape(y) * lin[0] * total
            forces[seg + 1] += jac * shape(y) * lin[1] * total
    return forces


def single_element_plate(corners, material: PlateMaterial, clamp_node: int = 1,
                         kind: str = "ZDEQ") -> Model:
    """One plate element clamped at one node (the invariance test setup)."""
    model = Model()
    model.materials[1] = material
    for i, xy in enumerate(corners, start=1):
        model.add_node(i, xy)
    model.add_element(1, kind, (1, 2, 3, 4), 1)
    for dof in ("w", "sx", "sy"):
        model.constrain(clamp_node, dof, 0.0)
    return model


def frame_section(e=2e8, nu=0.3, a=1e-2, i2=1e-4, i3=1e-4, j=2e-4, rho=0.0):
    return FrameSection(e=e, nu=nu, a=a, i2=i2, i3=i3, j=j, rho=rho)
