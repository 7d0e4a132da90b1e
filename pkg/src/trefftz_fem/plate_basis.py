"""Trial basis for the Kirchhoff plate quadrilateral.

The internal deflection is approximated by 12 homogeneous monomials (the
classical non-conforming rectangle set, all of them biharmonic) plus four
load-dependent particular functions.  The particular functions are exact
biharmonic preimages of the bilinear load interpolant, so the combined field
satisfies the full plate equation D * w,iijj = q for any bilinear load.

All polynomials are represented by dense coefficient matrices C with
C[p, q] multiplying x^p * y^q; derivatives are taken exactly by exponent
shifts, which keeps third derivatives (needed for boundary shears) free of
finite-difference noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

# Exponents (p, q) of the 12 homogeneous monomials.
PLATE_MONOMIALS = [
    (0, 0), (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
    (3, 1), (1, 3),
]

# Derivative multi-indices served by every evaluator, in fixed order.
DERIV_ORDERS = [
    (0, 0),
    (1, 0), (0, 1),
    (2, 0), (1, 1), (0, 2),
    (3, 0), (2, 1), (1, 2), (0, 3),
]
D_W, D_X, D_Y, D_XX, D_XY, D_YY, D_XXX, D_XXY, D_XYY, D_YYY = range(10)


class ElementInterpolationError(RuntimeError):
    """Raised when a nodal interpolation matrix is singular or ill-conditioned."""


def poly_deriv(coeffs: np.ndarray, a: int, b: int) -> np.ndarray:
    """Exact (a, b)-th partial derivative of a coefficient matrix."""
    c = coeffs
    for _ in range(a):
        c = npoly.polyder(c, axis=0)
    for _ in range(b):
        c = npoly.polyder(c, axis=1)
    return np.atleast_2d(c)


def poly_eval(coeffs: np.ndarray, x, y):
    return npoly.polyval2d(x, y, coeffs)


def poly_add(*terms: np.ndarray) -> np.ndarray:
    """Sum coefficient matrices of possibly different shapes."""
    rows = max(t.shape[0] for t in terms)
    cols = max(t.shape[1] for t in terms)
    out = np.zeros((rows, cols))
    for t in terms:
        out[: t.shape[0], : t.shape[1]] += t
    return out


def poly_biharmonic(coeffs: np.ndarray) -> np.ndarray:
    """Exact biharmonic operator applied to a coefficient matrix."""
    return poly_add(
        poly_deriv(coeffs, 4, 0),
        2.0 * poly_deriv(coeffs, 2, 2),
        poly_deriv(coeffs, 0, 4),
    )


def _monomial_coeffs(p: int, q: int, scale: float = 1.0) -> np.ndarray:
    c = np.zeros((p + 1, q + 1))
    c[p, q] = scale
    return c


class PolyTable:
    """Pre-differentiated family of polynomials evaluated as a block.

    ``eval(x, y)`` returns an array of shape (10, nfuncs) holding the values
    and all partial derivatives up to third order (DERIV_ORDERS row order).
    All derivative coefficient matrices are padded into one dense tensor so
    a point evaluation is a single contraction against the monomial powers.
    """

    def __init__(self, coeff_list):
        self.coeffs = [np.asarray(c, dtype=float) for c in coeff_list]
        tables = [
            [poly_deriv(c, a, b) for c in self.coeffs] for (a, b) in DERIV_ORDERS
        ]
        rows = max(t.shape[0] for row in tables for t in row)
        cols = max(t.shape[1] for row in tables for t in row)
        self._tensor = np.zeros((len(DERIV_ORDERS), len(self.coeffs), rows, cols))
        for i, row in enumerate(tables):
            for j, c in enumerate(row):
                self._tensor[i, j, : c.shape[0], : c.shape[1]] = c
        self._pmax, self._qmax = rows, cols

    def __len__(self):
        return len(self.coeffs)

    def eval(self, x: float, y: float) -> np.ndarray:
        powers = np.outer(
            np.power(x, np.arange(self._pmax)), np.power(y, np.arange(self._qmax))
        )
        return np.tensordot(self._tensor, powers, axes=([2, 3], [0, 1]))


_HOMOGENEOUS = PolyTable([_monomial_coeffs(p, q) for p, q in PLATE_MONOMIALS])


def eval_homogeneous(x) -> np.ndarray:
    """Values and derivatives (10, 12) of the homogeneous monomials at a point."""
    u, v = x
    return _HOMOGENEOUS.eval(u, v)


def load_shape_matrix(corners_local) -> np.ndarray:
    """Inverse of the bilinear load-node matrix [1, u_i, v_i, u_i v_i]."""
    xy = np.asarray(corners_local, dtype=float)
    vand = np.column_stack([np.ones(4), xy[:, 0], xy[:, 1], xy[:, 0] * xy[:, 1]])
    try:
        return np.linalg.inv(vand)
    except np.linalg.LinAlgError as exc:
        raise ElementInterpolationError(
            "bilinear load interpolation is degenerate for these corners"
        ) from exc


@dataclass
class ParticularSet:
    """Load-particular deflection functions M_bar (one per load node).

    Applying D * biharmonic to M_bar(p) * qbar(p) reproduces the bilinear
    interpolant of the nodal load intensities exactly.
    """

    rigidity: float
    load_node_inverse: np.ndarray  # (4, 4)
    table: PolyTable               # the 4 particular functions
    load_table: PolyTable          # bilinear nodal load shape functions

    def eval(self, x) -> np.ndarray:
        """Values and derivatives (10, 4) of the particular functions."""
        u, v = x
        return self.table.eval(u, v)

    def load_shapes(self, x) -> np.ndarray:
        """Bilinear nodal load shape functions (4,) at a point."""
        u, v = x
        return self.load_table.eval(u, v)[D_W]


def build_particular(corners_local, rigidity: float) -> ParticularSet:
    """Particular functions for a bilinear load over the given cell.

    The four quartic/sextic seed terms are the biharmonic preimages of
    1, x, y and x*y; combining them with the load-node inverse ties the
    particular field to nodal load intensities.
    """
    if rigidity <= 0.0:
        raise ValueError(f"plate rigidity must be positive, got {rigidity}")
    a_load = load_node_inverse = load_shape_matrix(corners_local)
    # Seeds: D * biharmonic(seed_k) = [1, x, y, x*y][k]
    seeds = [
        _monomial_coeffs(2, 2, 1.0 / 8.0),
        _monomial_coeffs(1, 4, 1.0 / 24.0),
        _monomial_coeffs(4, 1, 1.0 / 24.0),
        _monomial_coeffs(3, 3, 1.0 / 72.0),
    ]
    particular_coeffs = [
        poly_add(*(seeds[k] * a_load[k, p] for k in range(4))) / rigidity
        for p in range(4)
    ]
    load_coeffs = []
    for p in range(4):
        c = np.zeros((2, 2))
        c[0, 0] = a_load[0, p]
        c[1, 0] = a_load[1, p]
        c[0, 1] = a_load[2, p]
        c[1, 1] = a_load[3, p]
        load_coeffs.append(c)
    return ParticularSet(rigidity, load_node_inverse, PolyTable(particular_coeffs),
                         PolyTable(load_coeffs))


@dataclass
class InterpolationMatrices:
    """Nodal interpolation data for one element.

    ``a`` collects (w, w,1, w,2) of the 12 monomials at the four corners
    (node-major DOF order); ``b`` is its inverse; ``a_bar`` holds the same
    nodal traces of the particular functions.
    """

    corners_local: np.ndarray
    a: np.ndarray       # (12, 12)
    b: np.ndarray       # (12, 12)
    a_bar: np.ndarray   # (12, 4)
    cond: float
    particular: ParticularSet

    @property
    def rigidity(self) -> float:
        return self.particular.rigidity


_COND_LIMIT = 1e12


def build_interpolation(corners_local, particular: ParticularSet) -> InterpolationMatrices:
    """Assemble A, B = A^-1 and A_bar from nodal values and slopes."""
    xy = np.asarray(corners_local, dtype=float)
    a = np.empty((12, 12))
    a_bar = np.empty((12, 4))
    for node in range(4):
        mono = eval_homogeneous(xy[node])
        part = particular.eval(xy[node])
        for l, dorder in enumerate((D_W, D_X, D_Y)):
            a[3 * node + l] = mono[dorder]
            a_bar[3 * node + l] = part[dorder]
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise ElementInterpolationError(
            f"nodal interpolation matrix is ill-conditioned (cond ~ {cond:.3g})"
        )
    b = np.linalg.inv(a)
    return InterpolationMatrices(xy, a, b, a_bar, cond, particular)


@dataclass
class PlateShapeSet:
    """Shape-function evaluation at one point.

    ``n`` (10, 12): homogeneous shape functions N = M * B and derivatives.
    ``nbar`` (10, 4): particular shape functions N_bar = -N * A_bar + M_bar.
    """

    n: np.ndarray
    nbar: np.ndarray


def eval_shape_functions(basis: InterpolationMatrices, x) -> PlateShapeSet:
    """Evaluate nodal and particular shape functions with derivatives at x."""
    mono = eval_homogeneous(x)
    n = mono @ basis.b
    nbar = -n @ basis.a_bar + basis.particular.eval(x)
    return PlateShapeSet(n, nbar)


def build_plate_basis(corners_local, rigidity: float) -> InterpolationMatrices:
    """Particular set + interpolation matrices in one call."""
    particular = build_particular(corners_local, rigidity)
    return build_interpolation(corners_local, particular)
