"""Assembly of the mixed RT0/P0 operator pair and the discrete energy.

The flux space is spanned by the lowest-order Raviart-Thomas basis
phi_i|_K = s_i * |F_i| / (2|K|) * (x - p_i), with p_i the vertex opposite
facet F_i and s_i the orientation sign; the degree of freedom is the signed
flux through the facet's global normal.  The primal space is one value per
triangle.  All integrals of piecewise-constant data use closed forms; the
flux mass matrix uses the edge-midpoint rule, which is exact for its
quadratic integrand.
"""

import numpy as np
import scipy.sparse as sp

from . import quadrature
from .errors import AlignmentError, AssemblyError

__all__ = [
    "AssembledOperators",
    "MixedState",
    "assemble",
    "l2_project_potential",
    "discrete_gradient",
    "energy",
    "l4_norm4",
    "rt0_l2_project",
    "p0_project",
]


class AssembledOperators:
    """Sparse operators of the mixed pair on one mesh.

    B    : (nf, nf) flux mass matrix, symmetric positive definite
    C    : (nf, nt) divergence coupling, C[F, K] = sign * |F|
    M0   : (nt,) element areas (the diagonal primal mass matrix)
    pot  : (nt,) element averages of the potential
    kappa: interaction strength
    """

    def __init__(self, mesh, B, C, M0, pot, kappa):
        self.mesh = mesh
        self.B = B
        self.C = C
        self.M0 = M0
        self.pot = pot
        self.kappa = kappa

    @property
    def n_facets(self):
        return self.B.shape[0]

    @property
    def n_elements(self):
        return len(self.M0)


class MixedState:
    """A normalized primal/flux pair with its eigenvalue and energy."""

    def __init__(self, u, sigma, lambda_h, energy_h, residual_l2):
        self.u = u
        self.sigma = sigma
        self.lambda_h = lambda_h
        self.energy_h = energy_h
        self.residual_l2 = residual_l2


def _rt0_coefficients(mesh):
    """Per-triangle basis scaling s_i * |F_i| / (2|K|), shape (nt, 3)."""
    return mesh.facet_sign * mesh.tri_facet_lengths() / (2.0 * mesh.areas[:, None])


def assemble(mesh, pot):
    """Build the operators of the mixed pair for a mesh and potential preset."""
    if (mesh.areas <= 0.0).any():
        bad = int(np.argmin(mesh.areas))
        raise AssemblyError(f"triangle {bad} has nonpositive area {mesh.areas[bad]}")

    coords = mesh.corner_coords()
    areas = mesh.areas
    fot = mesh.facet_of_triangle

    # flux mass matrix from exact 3x3 element blocks
    mids = quadrature.physical_points(coords, 2)
    diff = mids[:, :, None, :] - coords[:, None, :, :]  # (nt, q, i, xy)
    inner = np.einsum("tqix,tqjx->tij", diff, diff) * (areas / 3.0)[:, None, None]
    coef = _rt0_coefficients(mesh)
    blocks = coef[:, :, None] * coef[:, None, :] * inner
    rows = np.broadcast_to(fot[:, :, None], blocks.shape)
    cols = np.broadcast_to(fot[:, None, :], blocks.shape)
    nf = mesh.n_facets
    B = sp.coo_matrix(
        (blocks.ravel(), (rows.ravel(), cols.ravel())), shape=(nf, nf)
    ).tocsr()
    B.sum_duplicates()
    B.sort_indices()

    # divergence coupling: constant divergence s|F|/|K| integrates to s|F|
    cdata = mesh.facet_sign * mesh.tri_facet_lengths()
    ccols = np.broadcast_to(np.arange(mesh.n_triangles)[:, None], fot.shape)
    C = sp.coo_matrix(
        (cdata.ravel(), (fot.ravel(), ccols.ravel())), shape=(nf, mesh.n_triangles)
    ).tocsr()
    C.sort_indices()

    return AssembledOperators(mesh, B, C, areas.copy(), l2_project_potential(mesh, pot), pot.kappa)


def l2_project_potential(mesh, pot):
    """Element averages of the potential (its L2 projection onto constants).

    The harmonic well is integrated exactly by the edge-midpoint rule; grid
    presets are looked up from the cell containing the element barycenter,
    which is exact provided every element is nested in one cell.
    """
    if pot.kind == "harmonic":
        mids = quadrature.physical_points(mesh.corner_coords(), 2)
        return 0.5 * (mids**2).sum(axis=2).mean(axis=1)
    if pot.kind == "constant":
        return np.full(mesh.n_triangles, pot.value)

    grid = pot.grid
    L = grid.half_width
    eps = grid.cell_size
    m = grid.n_cells
    centers = mesh.centroids
    ix = np.floor((centers[:, 0] + L) / eps).astype(np.int64)
    iy = np.floor((centers[:, 1] + L) / eps).astype(np.int64)
    if (ix < 0).any() or (ix >= m).any() or (iy < 0).any() or (iy >= m).any():
        raise AlignmentError("mesh extends beyond the potential grid")
    # every corner must lie in the barycenter's (closed) cell
    corners = mesh.corner_coords()
    tol = 1e-12 * 2.0 * L
    lo_x = -L + ix * eps - tol
    hi_x = lo_x + eps + 2 * tol
    lo_y = -L + iy * eps - tol
    hi_y = lo_y + eps + 2 * tol
    ok = (
        (corners[:, :, 0] >= lo_x[:, None]).all(axis=1)
        & (corners[:, :, 0] <= hi_x[:, None]).all(axis=1)
        & (corners[:, :, 1] >= lo_y[:, None]).all(axis=1)
        & (corners[:, :, 1] <= hi_y[:, None]).all(axis=1)
    )
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise AlignmentError(
            f"element {bad} straddles a potential cell boundary; "
            "the mesh must refine the potential's cells"
        )
    return grid.values[iy, ix]


def discrete_gradient(ops, v, bfac):
    """Coefficients g of the discrete gradient of v: B g = -C v."""
    return bfac.solve(-(ops.C @ v))


def energy(ops, v, bfac, g=None):
    """Discrete energy: half the flux norm plus potential and quartic terms."""
    if g is None:
        g = discrete_gradient(ops, v, bfac)
    grad2 = g @ (ops.B @ g)
    pot2 = ops.M0 @ (ops.pot * v * v)
    return 0.5 * grad2 + 0.5 * pot2 + 0.25 * ops.kappa * l4_norm4(ops, v)


def l4_norm4(ops, v):
    """Fourth power of the L4 norm, exact for piecewise constants."""
    return float(ops.M0 @ (v**4))


def rt0_l2_project(ops, field, bfac, quad_degree=4):
    """L2-project a vector field onto the flux space: solve B x = r.

    r_F accumulates integrals of field . phi_F by quadrature of the given
    degree; ``field`` must map an (n, 2) array of points to (n, 2) values.
    """
    mesh = ops.mesh
    bary, weights = quadrature.rule(quad_degree)
    coords = mesh.corner_coords()
    pts = quadrature.physical_points(coords, quad_degree)  # (nt, q, 2)
    vals = field(pts.reshape(-1, 2)).reshape(pts.shape)
    coef = _rt0_coefficients(mesh)
    # phi_i(x_q) = coef_i * (x_q - p_i)
    basis = coef[:, None, :, None] * (pts[:, :, None, :] - coords[:, None, :, :])
    local = np.einsum("q,tqx,tqix,t->ti", weights, vals, basis, mesh.areas)
    rhs = np.zeros(mesh.n_facets)
    np.add.at(rhs, mesh.facet_of_triangle, local)
    return bfac.solve(rhs)


def p0_project(mesh, f, degree=4):
    """Element means of a scalar function by quadrature of the given degree."""
    pts = quadrature.physical_points(mesh.corner_coords(), degree)
    _, weights = quadrature.rule(degree)
    vals = f(pts.reshape(-1, 2)).reshape(pts.shape[:2])
    return vals @ weights
