"""Walk through the building blocks: meshes, refinement, assembled operators.

Run:  python3 demos/01_mesh_and_operators.py
"""

import numpy as np

from gpemixed import assemble, friedrichs_keller, harmonic, mesh_size, red_refine

# The initial mesh of (-8, 8)^2: 2x2 squares, each split by a diagonal, with
# the lower-right/upper-left diagonals flipped so the mesh is point-symmetric.
mesh = friedrichs_keller(8.0, 2, symmetric=True)
print(f"initial mesh: {mesh.n_triangles} triangles, {mesh.n_vertices} vertices, "
      f"{mesh.n_facets} facets, h = {mesh_size(mesh):.4f}")

# Uniform red refinement splits every triangle into four congruent children.
for _ in range(3):
    mesh = red_refine(mesh)
    print(f"level {mesh.level}: {mesh.n_triangles} triangles, h = {mesh_size(mesh):.4f}")

# Assembly produces the flux mass matrix B, the divergence coupling C with
# entries +/- facet length, the element areas M0, and the element averages of
# the trapping potential.
ops = assemble(mesh, harmonic(kappa=100.0))
print(f"\nB: {ops.B.shape} with {ops.B.nnz} nonzeros")
print(f"C: {ops.C.shape} with {ops.C.nnz} nonzeros (2 per interior facet row)")
print(f"potential averages range: [{ops.pot.min():.4f}, {ops.pot.max():.4f}]")
print(f"total area: {ops.M0.sum():.1f}")

# The divergence coupling is exact: entries are signed facet lengths.
f = mesh.n_facets // 3
row = ops.C[f].toarray().ravel()
nz = np.flatnonzero(row)
print(f"\nfacet {f}: C entries {row[nz]} vs facet length {mesh.facet_lengths[f]:.6f}")
