"""Model container, DOF numbering, element assembly and the model-v1 format.

Nodal DOFs are stored in global axes.  Plate nodes carry the transverse
displacement and the two global slope components; membrane nodes carry two
translations and the drilling rotation; frame nodes carry the full
3-D translation/rotation set.  Element matrices are produced in their local
frames and rotated here, node block by node block.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import frame_element as fr
from . import membrane_element as me
from . import plate_basis as pb
from . import plate_elements as pe

MODEL_SCHEMA = "trefftz-fem/model-v1"

# Fixed global ordering of DOF kinds within a node.
DOF_ORDER = ("ux", "uy", "uz", "w", "sx", "sy", "rx", "ry", "rz")

PLATE_KINDS = ("ZDEQ", "TFEQ", "JFEQ")

ELEMENT_NODE_DOFS = {
    "ZDEQ": ("w", "sx", "sy"),
    "TFEQ": ("w", "sx", "sy"),
    "JFEQ": ("w", "sx", "sy"),
    "MEMBRANE": ("ux", "uy", "rz"),
    "FRAME": ("ux", "uy", "uz", "rx", "ry", "rz"),
}


class ModelError(ValueError):
    """Raised for inconsistent model definitions."""


@dataclass
class Element:
    kind: str
    nodes: tuple
    material: int
    orientation: tuple | None = None  # frame elements only


@dataclass
class Model:
    """Nodes, elements, materials, constraints and loads."""

    nodes: dict = field(default_factory=dict)          # id -> np.ndarray(3)
    elements: dict = field(default_factory=dict)       # id -> Element
    materials: dict = field(default_factory=dict)      # id -> material object
    constraints: list = field(default_factory=list)    # (node, dof, value)
    nodal_loads: list = field(default_factory=list)    # (node, dof, value)
    element_loads: dict = field(default_factory=dict)  # elem id -> load spec

    def add_node(self, nid: int, coords) -> int:
        xyz = np.zeros(3)
        coords = np.asarray(coords, dtype=float)
        xyz[: coords.size] = coords
        self.nodes[int(nid)] = xyz
        return int(nid)

    def add_element(self, eid, kind, nodes, material, orientation=None) -> int:
        kind = kind.upper()
        if kind not in ELEMENT_NODE_DOFS:
            raise ModelError(f"unknown element kind {kind!r}")
        self.elements[int(eid)] = Element(kind, tuple(int(n) for n in nodes),
                                          int(material), orientation)
        return int(eid)

    def constrain(self, node, dof, value=0.0):
        self.constraints.append((int(node), dof, float(value)))

    def load_node(self, node, dof, value):
        self.nodal_loads.append((int(node), dof, float(value)))

    def validate(self):
        for eid, el in self.elements.items():
            expected = 2 if el.kind == "FRAME" else 4
            if len(el.nodes) != expected:
                raise ModelError(f"element {eid}: expected {expected} nodes")
            for n in el.nodes:
                if n not in self.nodes:
                    raise ModelError(f"element {eid}: dangling node {n}")
            if el.material not in self.materials:
                raise ModelError(f"element {eid}: unknown material {el.material}")
        for node, dof, _ in self.constraints:
            if node not in self.nodes:
                raise ModelError(f"constraint on unknown node {node}")
            if dof not in DOF_ORDER:
                raise ModelError(f"unknown dof kind {dof!r}")

    def plate_corners(self, el: Element) -> np.ndarray:
        return np.array([self.nodes[n][:2] for n in el.nodes])


@dataclass
class DofMap:
    """Bijection between (node, dof kind) and global equation numbers."""

    index: dict                 # (node, dof) -> global index
    node_dofs: dict             # node -> tuple of dof kinds
    total: int
    fixed: np.ndarray           # indices of constrained DOFs
    fixed_values: np.ndarray
    free: np.ndarray

    def of(self, node, dof) -> int:
        return self.index[(node, dof)]


def build_dof_map(model: Model) -> DofMap:
    """Deterministic node-major, dof-minor numbering of active DOFs."""
    model.validate()
    active: dict[int, set] = {nid: set() for nid in model.nodes}
    for el in model.elements.values():
        for n in el.nodes:
            active[n].update(ELEMENT_NODE_DOFS[el.kind])
    index = {}
    node_dofs = {}
    counter = 0
    for nid in sorted(model.nodes):
        kinds = tuple(d for d in DOF_ORDER if d in active[nid])
        node_dofs[nid] = kinds
        for d in kinds:
            index[(nid, d)] = counter
            counter += 1
    fixed_map = {}
    for node, dof, value in model.constraints:
        if (node, dof) not in index:
            raise ModelError(f"constraint on inactive dof ({node}, {dof})")
        fixed_map[index[(node, dof)]] = value
    fixed = np.array(sorted(fixed_map), dtype=int)
    fixed_values = np.array([fixed_map[i] for i in fixed])
    free = np.array([i for i in range(counter) if i not in fixed_map], dtype=int)
    return DofMap(index, node_dofs, counter, fixed, fixed_values, free)


def plate_transformation(frame) -> np.ndarray:
    """T with u_local = T u_global for one plate node block (w, sx, sy)."""
    t = np.eye(3)
    t[1:, 1:] = frame.rotation.T
    return t


def membrane_transformation(frame) -> np.ndarray:
    t = np.eye(3)
    t[:2, :2] = frame.rotation.T
    return t


def transform_element(k_local, f_local, node_t):
    """Congruence transform of element matrices by per-node blocks.

    ``node_t`` is the per-node transformation (u_local = node_t u_global),
    applied block-diagonally.
    """
    n = k_local.shape[0]
    b = node_t.shape[0]
    t = np.zeros((n, n))
    for i in range(n // b):
        t[b * i:b * (i + 1), b * i:b * (i + 1)] = node_t
    k_global = t.T @ k_local @ t
    f_global = None if f_local is None else t.T @ f_local
    return k_global, f_global, t


@dataclass
class ElementResult:
    """Computed element data kept for assembly and recovery."""

    eid: int
    kind: str
    dofs: np.ndarray          # global dof indices
    k: np.ndarray
    m: np.ndarray
    load: np.ndarray
    t: np.ndarray             # u_local = t @ u_global
    geom: object = None
    basis: object = None
    material: object = None
    load_spec: object = None
    length: float = 0.0


@dataclass
class AssembledSystem:
    """Symmetric global matrices plus the constraint bookkeeping."""

    k: np.ndarray
    m: np.ndarray
    f: np.ndarray
    dof_map: DofMap
    element_results: dict

    def reduced(self):
        dm = self.dof_map
        kff = self.k[np.ix_(dm.free, dm.free)]
        mff = self.m[np.ix_(dm.free, dm.free)]
        ff = self.f[dm.free].copy()
        if dm.fixed.size:
            ff -= self.k[np.ix_(dm.free, dm.fixed)] @ dm.fixed_values
        return kff, mff, ff

    def expand(self, u_free: np.ndarray) -> np.ndarray:
        dm = self.dof_map
        u = np.zeros(dm.total)
        u[dm.free] = u_free
        if dm.fixed.size:
            u[dm.fixed] = dm.fixed_values
        return u


def _plate_qbar(model: Model, eid: int) -> np.ndarray:
    spec = model.element_loads.get(eid)
    if spec is None:
        return np.zeros(4)
    return np.asarray(spec["q"], dtype=float)


def _compute_element(model: Model, dof_map: DofMap, eid: int,
                     quad: int, edge_quad: int, variant_override=None) -> ElementResult:
    el = model.elements[eid]
    kind = variant_override.upper() if (variant_override and el.kind in PLATE_KINDS) else el.kind
    mat = model.materials[el.material]
    if kind in PLATE_KINDS:
        corners = model.plate_corners(el)
        geom = pe.ElementGeometry.from_corners(corners)
        basis = pb.build_plate_basis(geom.corners_local, mat.rigidity)
        qbar = _plate_qbar(model, eid)
        builder = {"ZDEQ": pe.zdeq_matrices, "TFEQ": pe.tfeq_matrices,
                   "JFEQ": pe.jfeq_matrices}[kind]
        if kind == "ZDEQ":
            em = builder(geom, basis, mat, qbar=qbar, quad=quad)
        else:
            em = builder(geom, basis, mat, qbar=qbar, quad=quad, edge_quad=edge_quad)
        kg, fg, t = transform_element(em.k, em.load, plate_transformation(geom.frame))
        mg = t.T @ em.m @ t
        dofs = np.array([dof_map.of(n, d) for n in el.nodes for d in ("w", "sx", "sy")])
        return ElementResult(eid, kind, dofs, kg, mg, fg, t, geom, basis, mat,
                             qbar)
    if kind == "MEMBRANE":
        corners = model.plate_corners(el)
        geom = pe.ElementGeometry.from_corners(corners)
        spec = model.element_loads.get(eid)
        body_global = np.zeros(2) if spec is None else np.asarray(spec["body"], float)
        body_local = geom.frame.rotation.T @ body_global
        em = me.membrane_matrices(geom, mat, loads=body_local, quad=quad,
                                  edge_quad=edge_quad)
        kg, fg, t = transform_element(em.k, em.load, membrane_transformation(geom.frame))
        mg = t.T @ em.m @ t
        dofs = np.array([dof_map.of(n, d) for n in el.nodes for d in ("ux", "uy", "rz")])
        return ElementResult(eid, kind, dofs, kg, mg, fg, t, geom, None, mat,
                             tuple(body_local))
    if kind == "FRAME":
        xa, xb = model.nodes[el.nodes[0]], model.nodes[el.nodes[1]]
        triad = fr.frame_triad(xa, xb, el.orientation)
        length = float(np.linalg.norm(xb - xa))
        spec = model.element_loads.get(eid)
        loads = fr.FrameLoads(**spec["frame"]) if spec else fr.FrameLoads()
        em = fr.frame_matrices(mat, length, loads)
        t6 = np.zeros((6, 6))
        t6[:3, :3] = triad
        t6[3:, 3:] = triad
        kg, fg, t = transform_element(em.k, em.load, t6)
        mg = t.T @ em.m @ t
        dofs = np.array([dof_map.of(n, d) for n in el.nodes
                         for d in ("ux", "uy", "uz", "rx", "ry", "rz")])
        return ElementResult(eid, kind, dofs, kg, mg, fg, t, None, None, mat,
                             loads, length)
    raise ModelError(f"unknown element kind {kind!r}")


def assemble_system(model: Model, dof_map: DofMap | None = None,
                    quad: int = 3, edge_quad: int = 4,
                    variant_override: str | None = None) -> AssembledSystem:
    """Compute all element matrices and scatter-add into global storage.

    ``variant_override`` swaps the plate formulation (zdeq/tfeq/jfeq) for
    every plate element, which is how benchmark sweeps compare variants on
    one mesh.  TREFFTZ_FEM_THREADS > 1 computes element matrices in a thread
    pool; the scatter-add stays serialized.
    """
    dof_map = dof_map or build_dof_map(model)
    eids = sorted(model.elements)
    threads = int(os.environ.get("TREFFTZ_FEM_THREADS", "1") or "1")

    def work(eid):
        return _compute_element(model, dof_map, eid, quad, edge_quad, variant_override)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, eids))
    else:
        results = [work(eid) for eid in eids]

    n = dof_map.total
    k = np.zeros((n, n))
    m = np.zeros((n, n))
    f = np.zeros(n)
    for res in results:
        ix = np.ix_(res.dofs, res.dofs)
        k[ix] += res.k
        m[ix] += res.m
        f[res.dofs] += res.load
    for node, dof, value in model.nodal_loads:
        f[dof_map.of(node, dof)] += value
    return AssembledSystem(k, m, f, dof_map, {r.eid: r for r in results})


def element_local_solution(system: AssembledSystem, eid: int, u_global: np.ndarray):
    """Element DOF vector in the element's local frame."""
    res = system.element_results[eid]
    return res.t @ u_global[res.dofs]


# ---------------------------------------------------------------------------
# model-v1 document format


def material_to_dict(mat) -> dict:
    if isinstance(mat, pe.PlateMaterial):
        return {"type": "plate", "e": mat.e, "nu": mat.nu, "t": mat.t, "rho": mat.rho}
    if isinstance(mat, me.MembraneMaterial):
        return {"type": "membrane", "e": mat.e, "nu": mat.nu, "t": mat.t, "rho": mat.rho}
    if isinstance(mat, fr.FrameSection):
        return {"type": "frame", "e": mat.e, "nu": mat.nu, "a": mat.a,
                "i2": mat.i2, "i3": mat.i3, "j": mat.j, "rho": mat.rho}
    raise ModelError(f"unknown material object {type(mat).__name__}")


def material_from_dict(data: dict):
    kind = data.get("type")
    fields = {k: v for k, v in data.items() if k not in ("type", "id")}
    if kind == "plate":
        return pe.PlateMaterial(**fields)
    if kind == "membrane":
        return me.MembraneMaterial(**fields)
    if kind == "frame":
        return fr.FrameSection(**fields)
    raise ModelError(f"unknown material type {kind!r}")


def model_to_dict(model: Model) -> dict:
    doc = {
        "schema": MODEL_SCHEMA,
        "nodes": [{"id": nid, "xyz": [float(c) for c in model.nodes[nid]]}
                  for nid in sorted(model.nodes)],
        "materials": [dict(id=mid, **material_to_dict(model.materials[mid]))
                      for mid in sorted(model.materials)],
        "elements": [],
        "constraints": [{"node": n, "dof": d, "value": v}
                        for n, d, v in model.constraints],
        "nodal_loads": [{"node": n, "dof": d, "value": v}
                        for n, d, v in model.nodal_loads],
        "element_loads": [],
    }
    for eid in sorted(model.elements):
        el = model.elements[eid]
        entry = {"id": eid, "kind": el.kind, "nodes": list(el.nodes),
                 "material": el.material}
        if el.orientation is not None:
            entry["orientation"] = list(el.orientation)
        doc["elements"].append(entry)
    for eid in sorted(model.element_loads):
        spec = model.element_loads[eid]
        entry = {"element": eid}
        for key, value in spec.items():
            entry[key] = list(value) if isinstance(value, (list, tuple, np.ndarray)) else value
        doc["element_loads"].append(entry)
    return doc


def model_from_dict(doc: dict) -> Model:
    if doc.get("schema") != MODEL_SCHEMA:
        raise ModelError(f"unsupported schema {doc.get('schema')!r}")
    model = Model()
    for nd in doc.get("nodes", []):
        model.add_node(nd["id"], nd.get("xyz", nd.get("xy")))
    for md in doc.get("materials", []):
        model.materials[int(md["id"])] = material_from_dict(md)
    for ed in doc.get("elements", []):
        model.add_element(ed["id"], ed["kind"], ed["nodes"], ed["material"],
                          tuple(ed["orientation"]) if "orientation" in ed else None)
    for cd in doc.get("constraints", []):
        model.constrain(cd["node"], cd["dof"], cd.get("value", 0.0))
    for ld in doc.get("nodal_loads", []):
        model.load_node(ld["node"], ld["dof"], ld["value"])
    for eld in doc.get("element_loads", []):
        eid = int(eld["element"])
        spec = {k: v for k, v in eld.items() if k != "element"}
        if "frame" in spec and isinstance(spec["frame"], dict):
            spec["frame"] = {k: float(v) for k, v in spec["frame"].items()}
        model.element_loads[eid] = spec
    model.validate()
    return model


def save_model(model: Model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid model file at line {exc.lineno}, "
                             f"column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(doc)
