"""Exact prolongation across one red refinement and errors against references.

Piecewise constants and lowest-order Raviart-Thomas fields are nested under
midpoint subdivision, so prolongation is exact: children inherit the parent
value, and child facet fluxes are midpoint evaluations of the parent's
per-triangle linear field.  Errors of coarse solutions are therefore
measured on the reference mesh after repeated prolongation.
"""

import numpy as np

from .errors import LineageError

__all__ = ["prolong_p0", "prolong_rt0", "prolong_p1", "error_vs_reference", "ErrorRecord"]


def _refinement_info(fine):
    info = fine.parent
    if info is None:
        raise LineageError("mesh has no parent; expected one red refinement step")
    return info


def prolong_p0(coarse_vec, fine):
    """Each child inherits its parent's value."""
    info = _refinement_info(fine)
    coarse_vec = np.asarray(coarse_vec)
    if len(coarse_vec) != info.parent.n_triangles:
        raise LineageError("coefficient vector does not match the parent mesh")
    return coarse_vec[info.child_to_parent]


def prolong_rt0(coarse_vec, fine):
    """Child facet coefficient = normal component of the parent field at the
    child facet midpoint (midpoint-exact for the per-triangle linear fields;
    the basis is normalized to unit normal component on its facet)."""
    info = _refinement_info(fine)
    coarse = info.parent
    coarse_vec = np.asarray(coarse_vec, dtype=float)
    if len(coarse_vec) != coarse.n_facets:
        raise LineageError("flux vector does not match the parent mesh")

    owner_tri = fine.facet_triangles[:, 0]
    parent_tri = info.child_to_parent[owner_tri]

    pk_facets = coarse.facet_of_triangle[parent_tri]           # (nf_f, 3)
    coef = (
        coarse.facet_sign[parent_tri]
        * coarse.facet_lengths[pk_facets]
        / (2.0 * coarse.areas[parent_tri])[:, None]
    )
    opp = coarse.vertices[coarse.triangles[parent_tri]]        # (nf_f, 3, 2)

    fv = fine.vertices[fine.facets]
    mid = fv.mean(axis=1)
    field = np.einsum(
        "fi,fix->fx", coef * coarse_vec[pk_facets], mid[:, None, :] - opp
    )
    d = fv[:, 1] - fv[:, 0]
    unit_normal = np.column_stack([-d[:, 1], d[:, 0]]) / fine.facet_lengths[:, None]
    return np.einsum("fx,fx->f", field, unit_normal)


def prolong_p1(coarse_vertex_vals, fine):
    """Vertex values on the refined mesh: originals kept, midpoints averaged."""
    info = _refinement_info(fine)
    coarse_vertex_vals = np.asarray(coarse_vertex_vals, dtype=float)
    if len(coarse_vertex_vals) != info.parent.n_vertices:
        raise LineageError("vertex vector does not match the parent mesh")
    mids = coarse_vertex_vals[info.parent.facets].mean(axis=1)
    return np.concatenate([coarse_vertex_vals, mids])


class ErrorRecord:
    """L2 errors of the primal/flux pair and scalar energy/eigenvalue gaps."""

    def __init__(self, err_u_l2, err_sigma_l2, err_E, err_lambda):
        self.err_u_l2 = err_u_l2
        self.err_sigma_l2 = err_sigma_l2
        self.err_E = err_E
        self.err_lambda = err_lambda

    def __iter__(self):
        return iter((self.err_u_l2, self.err_sigma_l2, self.err_E, self.err_lambda))


def error_vs_reference(state_coarse, ref_state, meshes, ops_ref):
    """Errors of a coarse state against a reference on a finer mesh.

    ``meshes`` is the refinement chain from the coarse mesh (first entry) to
    the reference mesh (last entry); the coarse solution is prolonged up the
    chain and sign-aligned against the reference before measuring.
    ``ops_ref`` supplies the reference-mesh B for the flux norm.
    """
    if len(meshes) < 1:
        raise LineageError("empty mesh chain")
    for k in range(1, len(meshes)):
        info = meshes[k].parent
        if info is None or info.parent is not meshes[k - 1]:
            raise LineageError(f"mesh {k} is not the red refinement of mesh {k - 1}")

    u = np.asarray(state_coarse.u, dtype=float)
    sig = np.asarray(state_coarse.sigma, dtype=float)
    if len(u) != meshes[0].n_triangles:
        raise LineageError("coarse state does not match the first chain mesh")
    for fine in meshes[1:]:
        u = prolong_p0(u, fine)
        sig = prolong_rt0(sig, fine)

    ref = meshes[-1]
    if u @ (ref.areas * ref_state.u) < 0.0:
        u = -u
        sig = -sig

    du = u - ref_state.u
    err_u = float(np.sqrt(du @ (ref.areas * du)))
    ds = sig - ref_state.sigma
    err_sigma = float(np.sqrt(ds @ (ops_ref.B @ ds)))
    return ErrorRecord(
        err_u,
        err_sigma,
        abs(state_coarse.energy_h - ref_state.energy_h),
        abs(state_coarse.lambda_h - ref_state.lambda_h),
    )
