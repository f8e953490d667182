import io

import numpy as np
import pytest

from gpemixed import ConfigurationError, TriMesh, friedrichs_keller, mesh_size, red_refine


def check_invariants(m, L=None):
    # positive, counter-clockwise areas
    assert (m.areas > 0).all()
    # interior facets have two incident triangles with opposite signs
    counts = np.zeros(m.n_facets, dtype=int)
    sign_sum = np.zeros(m.n_facets)
    for t in range(m.n_triangles):
        for i in range(3):
            counts[m.facet_of_triangle[t, i]] += 1
            sign_sum[m.facet_of_triangle[t, i]] += m.facet_sign[t, i]
    assert set(np.unique(counts)) <= {1, 2}
    interior = counts == 2
    np.testing.assert_allclose(sign_sum[interior], 0.0, atol=0)
    # facet_triangles agrees with incidence counts
    assert ((m.facet_triangles[:, 1] >= 0) == interior).all()
    # conformity: each facet's vertices are vertices of every incident triangle
    for f in range(m.n_facets):
        for t in m.facet_triangles[f]:
            if t >= 0:
                assert set(m.facets[f]) <= set(m.triangles[t])
    # Euler formula on a simply connected planar mesh
    assert m.n_vertices - m.n_facets + m.n_triangles == 1
    if L is not None:
        assert abs(m.areas.sum() - (2 * L) ** 2) < 1e-12 * (2 * L) ** 2


def test_friedrichs_keller_8_elements():
    m = friedrichs_keller(8.0, 2, symmetric=True)
    assert m.n_triangles == 8
    assert m.n_vertices == 9
    assert m.n_facets == 16
    check_invariants(m, L=8.0)
    # point symmetry: -p is a vertex for every vertex p
    vset = {(round(x, 12), round(y, 12)) for x, y in m.vertices}
    for x, y in m.vertices:
        assert (round(-x, 12), round(-y, 12)) in vset


def test_friedrichs_keller_smallest():
    m = friedrichs_keller(1.0, 1, symmetric=False)
    assert m.n_triangles == 2
    assert m.n_vertices == 4
    assert m.n_facets == 5
    check_invariants(m, L=1.0)


def test_friedrichs_keller_total_area():
    m = friedrichs_keller(8.0, 2)
    assert abs(m.areas.sum() - 256.0) < 1e-12 * 256.0


def test_symmetric_odd_n_rejected():
    with pytest.raises(ConfigurationError):
        friedrichs_keller(1.0, 3, symmetric=True)
    with pytest.raises(ConfigurationError):
        friedrichs_keller(-1.0, 2)
    with pytest.raises(ConfigurationError):
        friedrichs_keller(1.0, 0)


def test_red_refine_counts():
    m = friedrichs_keller(8.0, 2, symmetric=True)
    fine = red_refine(m)
    assert fine.n_triangles == 32
    assert fine.n_vertices == 25
    check_invariants(fine, L=8.0)
    # k refinements quadruple the triangle count each time
    mk = m
    for k in range(1, 4):
        mk = red_refine(mk)
        assert mk.n_triangles == 8 * 4**k
        assert mk.level == k


def test_red_refine_halves_h():
    m = friedrichs_keller(8.0, 2, symmetric=True)
    h0 = mesh_size(m)
    assert abs(h0 - 8.0 * np.sqrt(2.0)) < 1e-13 * h0
    fine = red_refine(m)
    assert abs(mesh_size(fine) - h0 / 2) < 1e-14 * h0
    assert abs(mesh_size(fine) - 4.0 * np.sqrt(2.0)) < 1e-13 * h0


def test_mesh_size_single_triangle():
    m = TriMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]))
    assert abs(mesh_size(m) - np.sqrt(2.0)) < 1e-15


def test_child_areas_sum_to_parent():
    m = friedrichs_keller(8.0, 2, symmetric=True)
    fine = red_refine(m)
    child_sum = np.zeros(m.n_triangles)
    np.add.at(child_sum, fine.parent.child_to_parent, fine.areas)
    np.testing.assert_allclose(child_sum, m.areas, rtol=1e-13)


def test_facet_normal_convention():
    # facet_sign is +1 exactly when the canonical facet normal (90-degree CCW
    # rotation of b - a) points away from the triangle centroid
    m = red_refine(friedrichs_keller(2.0, 2, symmetric=True))
    fv = m.vertices[m.facets]
    d = fv[:, 1] - fv[:, 0]
    normal = np.column_stack([-d[:, 1], d[:, 0]])
    mid = fv.mean(axis=1)
    for t in range(m.n_triangles):
        for i in range(3):
            f = m.facet_of_triangle[t, i]
            outward = (mid[f] - m.centroids[t]) @ normal[f]
            assert np.sign(outward) == m.facet_sign[t, i]


def test_refinement_info_maps():
    m = friedrichs_keller(1.0, 1)
    fine = red_refine(m)
    info = fine.parent
    assert info.parent is m
    assert len(info.child_to_parent) == fine.n_triangles
    # midpoint vertices sit at facet midpoints
    mids = m.vertices[m.facets].mean(axis=1)
    np.testing.assert_allclose(fine.vertices[info.facet_midpoint], mids, atol=0)


def test_export_text():
    m = friedrichs_keller(1.0, 1)
    buf = io.StringIO()
    m.export_text(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "vertices 4"
    assert lines[5] == "triangles 2"
    assert len(lines) == 8


def test_meshes_are_immutable():
    m = friedrichs_keller(1.0, 1)
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 5.0
    with pytest.raises(ValueError):
        m.triangles[0, 0] = 3
