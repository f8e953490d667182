"""Conforming P1 ground-state solver: a certified upper energy bound.

Minimizing the energy over the conforming P1 subspace (homogeneous Dirichlet
boundary) approximates the ground-state energy from above; together with the
mixed lower bound this brackets the exact energy of the problem with the
projected potential.  All integrals are exact: closed forms for the
quadratic terms, the 6-point degree-4 rule for the quartic/cubic terms, so
the evaluated energy of any normalized iterate is a rigorous upper bound.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import linalg, quadrature
from .errors import NonConvergenceError, StagnationError
from .solver import SolverConfig

__all__ = ["P1Operators", "p1_assemble", "p1_ground_state"]


class P1Operators:
    """P1 matrices on interior vertices (Dirichlet rows/columns eliminated).

    stiffness, mass, pot_mass share one sparsity pattern; ``interior`` maps
    interior-DOF indices to mesh vertex indices.
    """

    def __init__(self, mesh, stiffness, mass, pot_mass, interior, quartic_data):
        self.mesh = mesh
        self.stiffness = stiffness
        self.mass = mass
        self.pot_mass = pot_mass
        self.interior = interior
        self._q = quartic_data

    @property
    def n_dofs(self):
        return len(self.interior)

    # -- nonlinear-term assembly ------------------------------------------------

    def values_at_quad(self, v_full):
        """P1 values at the degree-4 quadrature points, shape (nt, q)."""
        bary, _ = quadrature.rule(4)
        return np.einsum("qi,ti->tq", bary, v_full[self.mesh.triangles])

    def quartic(self, v_full):
        """Integral of v^4 (exact for P1 via the degree-4 rule)."""
        _, w = quadrature.rule(4)
        vq = self.values_at_quad(v_full)
        return float(self.mesh.areas @ ((vq**4) @ w))

    def cubic_mass(self, v_full):
        """Weighted mass matrix with weight v^2 on interior DOFs (degree-4 exact)."""
        bary, w = quadrature.rule(4)
        vq = self.values_at_quad(v_full)
        blocks = np.einsum(
            "t,q,tq,qi,qj->tij", self.mesh.areas, w, vq**2, bary, bary
        )
        rows, cols, keep, ni = self._q
        data = blocks.ravel()[keep]
        return sp.coo_matrix((data, (rows, cols)), shape=(ni, ni)).tocsr()


def p1_assemble(mesh, pot_elem):
    """Assemble stiffness, consistent mass, and potential-weighted mass.

    ``pot_elem`` are the element averages of the potential (shared with the
    mixed assembly so both bounds certify the same projected problem).
    """
    coords = mesh.corner_coords()
    areas = mesh.areas
    nt = mesh.n_triangles

    # grad of barycentric i is the 90-degree CCW rotation of the opposite edge
    edges = coords[:, [2, 0, 1], :] - coords[:, [1, 2, 0], :]  # edge opposite vertex i
    grads = np.empty_like(edges)
    grads[:, :, 0] = -edges[:, :, 1]
    grads[:, :, 1] = edges[:, :, 0]
    grads /= (2.0 * areas)[:, None, None]
    k_blocks = np.einsum("t,tix,tjx->tij", areas, grads, grads)

    m_local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    m_blocks = areas[:, None, None] * m_local
    mv_blocks = (areas * pot_elem)[:, None, None] * m_local

    tri = mesh.triangles
    interior = mesh.interior_vertices()
    ni = len(interior)
    to_int = np.full(mesh.n_vertices, -1, dtype=np.int64)
    to_int[interior] = np.arange(ni)

    rows_full = np.broadcast_to(tri[:, :, None], (nt, 3, 3)).ravel()
    cols_full = np.broadcast_to(tri[:, None, :], (nt, 3, 3)).ravel()
    ri = to_int[rows_full]
    ci = to_int[cols_full]
    keep = np.flatnonzero((ri >= 0) & (ci >= 0))
    rows, cols = ri[keep], ci[keep]

    def build(blocks):
        mat = sp.coo_matrix((blocks.ravel()[keep], (rows, cols)), shape=(ni, ni)).tocsr()
        mat.sum_duplicates()
        mat.sort_indices()
        return mat

    return P1Operators(
        mesh,
        build(k_blocks),
        build(m_blocks),
        build(mv_blocks),
        interior,
        (rows, cols, keep, ni),
    )


def _full_vector(ops, v_int):
    v = np.zeros(ops.mesh.n_vertices)
    v[ops.interior] = v_int
    return v


def _terms(ops, kappa, v_int, mfac):
    v_full = _full_vector(ops, v_int)
    kv = ops.stiffness @ v_int
    mvv = ops.pot_mass @ v_int
    q4 = ops.quartic(v_full)
    E = 0.5 * (v_int @ kv) + 0.5 * (v_int @ mvv) + 0.25 * kappa * q4
    lam = v_int @ kv + v_int @ mvv + kappa * q4
    w_cubic = ops.cubic_mass(v_full)
    r = kv + mvv + kappa * (w_cubic @ v_int) - lam * (ops.mass @ v_int)
    residual = np.sqrt(r @ mfac.solve(r))
    return E, lam, residual, w_cubic


def _newton_direction(ops, kappa, v, lam, w_cubic):
    """Norm-constrained Newton correction with the full cubic linearization."""
    mv = ops.mass @ v
    jac = ops.stiffness + ops.pot_mass + 3.0 * kappa * w_cubic - lam * ops.mass
    r = (ops.stiffness + ops.pot_mass + kappa * w_cubic) @ v - lam * mv
    K = sp.bmat(
        [[jac, sp.csc_matrix(mv[:, None])], [sp.csc_matrix(mv[None, :]), None]],
        format="csc",
    )
    sol = spla.splu(K, permc_spec="COLAMD").solve(np.concatenate([-r, [0.0]]))
    return sol[:-1]


def p1_ground_state(ops, kappa, cfg=None, v0=None):
    """L2-normalized conforming minimizer via the same damped inverse iteration.

    Returns (vertex coefficient vector with zero boundary values, E_upper,
    lambda_upper).
    """
    cfg = cfg if cfg is not None else SolverConfig()
    mfac = linalg.chol(ops.mass)

    if v0 is not None:
        v = np.asarray(v0, dtype=float)[ops.interior]
        if not np.any(v):
            v = np.ones(ops.n_dofs)
    else:
        v = np.ones(ops.n_dofs)
        if cfg.init_noise > 0.0:
            rng = np.random.Generator(np.random.PCG64(cfg.seed))
            v = v + cfg.init_noise * rng.uniform(-1.0, 1.0, ops.n_dofs)
    v = v / np.sqrt(v @ (ops.mass @ v))

    linear_part = (ops.stiffness + ops.pot_mass).tocsr()
    converged = False
    accel_next_try = 0
    E, lam, residual, w_cubic = _terms(ops, kappa, v, mfac)
    for iteration in range(cfg.max_iters):
        if residual <= cfg.tol_residual:
            converged = True
            break

        # safeguarded line-searched accelerated step, as in the mixed solver;
        # the sign guard keeps Newton off sign-changing excited states
        if cfg.shift_enabled and iteration >= accel_next_try:
            dv = _newton_direction(ops, kappa, v, lam, w_cubic)
            accepted = False
            t = 1.0
            while t >= 2.0**-8:
                cand = v + t * dv
                cand = cand / np.sqrt(cand @ (ops.mass @ cand))
                E_c, lam_c, res_c, w_c = _terms(ops, kappa, cand, mfac)
                neg = np.minimum(cand, 0.0)
                neg_mass = neg @ (ops.mass @ neg)
                if (
                    res_c < (1.0 - 0.25 * t) * residual
                    and E_c <= E + 1e-8 * abs(E) + 1e-12
                    and neg_mass <= 1e-3
                ):
                    v, E, lam, residual, w_cubic = cand, E_c, lam_c, res_c, w_c
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                continue
            accel_next_try = iteration + (12 if residual > cfg.damping_threshold else 4)

        system = linear_part + kappa * w_cubic
        w = linalg.chol(sp.csc_matrix(system)).solve(ops.mass @ v)
        cand = w / np.sqrt(w @ (ops.mass @ w))
        if cand @ (ops.mass @ v) < 0.0:
            cand = -cand

        if residual > cfg.damping_threshold:
            t = 1.0
            accepted = False
            while t >= cfg.backtrack_floor:
                trial = (1.0 - t) * v + t * cand
                trial = trial / np.sqrt(trial @ (ops.mass @ trial))
                E_t, lam_t, res_t, w_t = _terms(ops, kappa, trial, mfac)
                if E_t <= E:
                    v, E, lam, residual, w_cubic = trial, E_t, lam_t, res_t, w_t
                    accepted = True
                    break
                t *= cfg.backtrack_factor
            if not accepted:
                raise StagnationError(
                    f"P1 backtracking floor reached at residual {residual:.3e}"
                )
        else:
            v = cand
            E, lam, residual, w_cubic = _terms(ops, kappa, v, mfac)

    if not converged:
        raise NonConvergenceError(
            f"P1 residual {residual:.3e} > {cfg.tol_residual} after {cfg.max_iters} iterations"
        )

    if v.sum() < 0.0:
        v = -v
    return _full_vector(ops, v), E, lam
