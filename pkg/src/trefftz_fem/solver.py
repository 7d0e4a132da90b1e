"""Static and generalized-eigenvalue solvers with benchmark post-processing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import frame_element as fr
from . import membrane_element as me
from . import plate_elements as pe
from .model import AssembledSystem, Model, PLATE_KINDS, element_local_solution


class SingularSystemError(RuntimeError):
    """Static stiffness not positive definite (insufficient constraints?)."""


class MassMatrixError(RuntimeError):
    """Mass matrix not positive definite on the free DOFs."""


@dataclass
class StaticSolution:
    """Full nodal DOF vector (prescribed entries filled in) plus residual."""

    u: np.ndarray
    residual: float
    system: AssembledSystem

    def at(self, node, dof) -> float:
        return float(self.u[self.system.dof_map.of(node, dof)])


@dataclass
class EigenSolution:
    """Ascending eigenvalues omega^2 with mass-orthonormal mode vectors."""

    omega2: np.ndarray
    modes: np.ndarray          # columns, expanded to full DOF vectors
    system: AssembledSystem

    @property
    def omega(self) -> np.ndarray:
        return np.sqrt(np.clip(self.omega2, 0.0, None))


def solve_static(system: AssembledSystem) -> StaticSolution:
    """Direct symmetric solve of the reduced system."""
    kff, _, ff = system.reduced()
    try:
        cho = scipy.linalg.cho_factor(kff, lower=False, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"stiffness matrix is not positive definite on the free DOFs ({exc}); "
            "the model is probably under-constrained (rigid-body motion left free)"
        ) from exc
    u_free = scipy.linalg.cho_solve(cho, ff, check_finite=False)
    scale = np.linalg.norm(ff)
    residual = np.linalg.norm(kff @ u_free - ff) / (scale if scale > 0 else 1.0)
    return StaticSolution(system.expand(u_free), residual, system)


def solve_eigen(system: AssembledSystem, count: int) -> EigenSolution:
    """Smallest generalized eigenpairs of (K, M) by symmetric reduction."""
    kff, mff, _ = system.reduced()
    n = kff.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"eigenpair count must be in 1..{n}, got {count}")
    try:
        scipy.linalg.cholesky(mff, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise MassMatrixError(
            "mass matrix is not positive definite on the free DOFs"
        ) from exc
    vals, vecs = scipy.linalg.eigh(kff, mff, check_finite=False,
                                   subset_by_index=[0, count - 1])
    modes = np.column_stack([system.expand(vecs[:, i]) for i in range(count)])
    return EigenSolution(vals, modes, system)


def eigen_residuals(solution: EigenSolution) -> np.ndarray:
    """Relative residuals ||K phi - w^2 M phi|| / ||K phi|| per mode."""
    system = solution.system
    dm = system.dof_map
    kff, mff, _ = system.reduced()
    out = []
    for i, lam in enumerate(solution.omega2):
        phi = solution.modes[dm.free, i]
        num = np.linalg.norm(kff @ phi - lam * mff @ phi)
        den = np.linalg.norm(kff @ phi)
        out.append(num / den if den > 0 else num)
    return np.array(out)


@dataclass
class PlatePointForces:
    """Recovered plate results at one material point."""

    w: float
    slopes: np.ndarray
    moments: np.ndarray   # (M11, M12, M22)
    shears: np.ndarray    # (Q1, Q2)


def plate_point_results(solution: StaticSolution, eid: int, x_local,
                        frame: str = "global") -> PlatePointForces:
    """Deflection, slopes, moments, shears of one plate element at a point.

    ``frame`` selects the reporting axes for moments/shears/slopes:
    "local" keeps the element frame, "global" rotates to global axes.
    """
    system = solution.system
    res = system.element_results[eid]
    if res.kind not in PLATE_KINDS:
        raise ValueError(f"element {eid} is not a plate element")
    u_local = element_local_solution(system, eid, solution.u)
    w, slopes, moments, shears = pe.recover_internal_fields(
        res.geom, res.basis, res.material, u_local, res.load_spec, x_local,
        variant=res.kind.lower(),
    )
    if frame == "local":
        return PlatePointForces(w, slopes, moments, shears)
    rot = res.geom.frame.rotation
    m_tensor = np.array([[moments[0], moments[1]], [moments[1], moments[2]]])
    m_glob = rot @ m_tensor @ rot.T
    return PlatePointForces(
        w,
        rot @ slopes,
        np.array([m_glob[0, 0], m_glob[0, 1], m_glob[1, 1]]),
        rot @ shears,
    )


def postprocess_plate(solution: StaticSolution, model: Model, frame: str = "global"):
    """Nodal-averaged moment tensors and principal moments.

    Element corner moments are recovered per element, averaged arithmetically
    over the elements incident to each node, and the averaged 2x2 tensor is
    diagonalized for principal values.  Returns a dict
    node -> {"moments": (m11, m12, m22), "principal": (m_max, m_min),
             "shears": (q1, q2), "w": w, "count": n}.
    """
    system = solution.system
    sums: dict[int, dict] = {}
    for eid, res in system.element_results.items():
        if res.kind not in PLATE_KINDS:
            continue
        el = model.elements[eid]
        for corner, node in enumerate(el.nodes):
            point = res.geom.corners_local[corner]
            found = plate_point_results(solution, eid, point, frame=frame)
            entry = sums.setdefault(node, {"m": np.zeros(3), "q": np.zeros(2),
                                           "w": 0.0, "n": 0})
            entry["m"] += found.moments
            entry["q"] += found.shears
            entry["w"] += found.w
            entry["n"] += 1
    out = {}
    for node, entry in sums.items():
        n = entry["n"]
        m = entry["m"] / n
        tensor = np.array([[m[0], m[1]], [m[1], m[2]]])
        principal = np.linalg.eigvalsh(tensor)[::-1]
        out[node] = {
            "moments": m,
            "shears": entry["q"] / n,
            "w": entry["w"] / n,
            "principal": principal,
            "count": n,
        }
    return out


def membrane_point_forces(solution: StaticSolution, eid: int, x_local):
    """Recovered membrane forces (n11, n12, n22) in the element frame."""
    system = solution.system
    res = system.element_results[eid]
    if res.kind != "MEMBRANE":
        raise ValueError(f"element {eid} is not a membrane element")
    u_local = element_local_solution(system, eid, solution.u)
    return me.membrane_recover_forces(res.geom, res.material, u_local,
                                      res.load_spec, x_local)


def frame_section_forces(solution: StaticSolution, eid: int, x1: float):
    """Section forces (N, V2, V3, T, M2, M3) of a frame member at x1."""
    system = solution.system
    res = system.element_results[eid]
    if res.kind != "FRAME":
        raise ValueError(f"element {eid} is not a frame element")
    u_local = element_local_solution(system, eid, solution.u)
    return fr.frame_internal_forces(res.material, res.length, u_local,
                                    res.load_spec, x1)


# ---------------------------------------------------------------------------
# benchmark normalizations


def normalize(value: float, kind: str, *, q0=1.0, a=1.0, rigidity=1.0,
              rho_h=1.0, radius=1.0) -> float:
    """Normalized benchmark quantity.

    kinds:
      "deflection"        w D / (q0 a^4)
      "moment"            m / (q0 a^2)
      "shear"             q / (q0 a)
      "frequency-pi"      omega (a/pi)^2 sqrt(rho_h / D)
      "frequency-a2"      omega a^2 sqrt(rho_h / D)
      "frequency-circle"  sqrt(omega R^2 sqrt(rho_h / D))
    """
    if min(q0, a, rigidity, rho_h, radius) <= 0:
        raise ValueError("reference quantities must be positive")
    if kind == "deflection":
        return value * rigidity / (q0 * a**4)
    if kind == "moment":
        return value / (q0 * a**2)
    if kind == "shear":
        return value / (q0 * a)
    if kind == "frequency-pi":
        return value * (a / np.pi) ** 2 * np.sqrt(rho_h / rigidity)
    if kind == "frequency-a2":
        return value * a**2 * np.sqrt(rho_h / rigidity)
    if kind == "frequency-circle":
        return float(np.sqrt(value * radius**2 * np.sqrt(rho_h / rigidity)))
    raise ValueError(f"unknown normalization kind {kind!r}")
