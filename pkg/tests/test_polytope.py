import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from fwpkit.polytope import (
    TAU_FEAS,
    TAU_VERT,
    DegeneracyWarning,
    HPolytope,
    VPolytope,
    affine_hull,
    contains,
    extreme_points,
    facet_enum,
    polytope_from_dict,
    reduce_equalities,
    support,
    to_off,
    vertex_enum,
)


def box(n, lo=-1.0, hi=1.0):
    return HPolytope(np.vstack([np.eye(n), -np.eye(n)]), np.r_[np.full(n, hi), np.full(n, -lo)])


def same_rows(X, Y, tol=1e-8):
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    if X.shape != Y.shape:
        return False
    D = np.abs(X[:, None, :] - Y[None, :, :]).max(axis=2)
    return D.min(axis=1).max() <= tol and D.min(axis=0).max() <= tol


def random_hpoly(rng, n, extra=4):
    """Random bounded polytope: tangent planes of the unit sphere plus a cross-polytope."""
    U = rng.normal(size=(n + extra, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    A = np.vstack([U, np.eye(n), -np.eye(n)])
    b = np.r_[np.ones(n + extra), np.full(2 * n, 1.5)]
    return HPolytope(A, b)


# ---------------------------------------------------------------------------
# construction and serialization


def test_hpolytope_shapes_validated():
    with pytest.raises(ValueError):
        HPolytope(np.ones((2, 2)), np.ones(3))
    with pytest.raises(ValueError):
        HPolytope(np.ones((2, 2)), np.ones(2), np.ones((1, 3)), np.ones(1))


def test_hpolytope_arrays_read_only():
    P = box(2)
    with pytest.raises(ValueError):
        P.A[0, 0] = 5.0


def test_vpolytope_dedupes_and_sorts():
    V = VPolytope([[1.0, 0.0], [0.0, 0.0], [1.0 + 1e-10, 0.0]])
    assert V.m == 2
    np.testing.assert_array_equal(V.vertices, [[0.0, 0.0], [1.0, 0.0]])
    assert V.V.shape == (2, 2)


def test_json_round_trip():
    P = HPolytope([[1.0, 0.0]], [2.0], [[0.0, 1.0]], [3.0])
    Q = polytope_from_dict(json.loads(json.dumps(P.to_dict())))
    np.testing.assert_array_equal(Q.A, P.A)
    np.testing.assert_array_equal(Q.d, P.d)
    V = VPolytope([[0.0, 1.0], [2.0, 3.0]], rays=[[0.0, 2.0]])
    W = polytope_from_dict(json.loads(json.dumps(V.to_dict())))
    np.testing.assert_array_equal(W.vertices, V.vertices)
    np.testing.assert_array_equal(W.rays, [[0.0, 1.0]])


# ---------------------------------------------------------------------------
# reduce_equalities


def test_reduce_diagonal():
    P = HPolytope(box(2).A, box(2).b, [[1.0, -1.0]], [0.0])
    red, lift, ok = reduce_equalities(P)
    assert ok and lift.dim == 1
    x = lift(np.array([0.7]))
    np.testing.assert_allclose(x[0], x[1])
    V = vertex_enum(P)
    assert same_rows(V.vertices, [[-1, -1], [1, 1]])


def test_reduce_fully_determined():
    P = HPolytope(box(2).A, box(2).b, np.eye(2), [0.25, -0.5])
    red, lift, ok = reduce_equalities(P)
    assert ok and lift.dim == 0
    np.testing.assert_allclose(lift.offset, [0.25, -0.5])
    assert same_rows(vertex_enum(P).vertices, [[0.25, -0.5]])


def test_reduce_inconsistent_equalities():
    P = HPolytope(box(2).A, box(2).b, [[1.0, 1.0], [1.0, 1.0]], [0.0, 1.0])
    assert not reduce_equalities(P).feasible
    assert vertex_enum(P).is_empty


def test_reduce_feasible_lift_but_empty_region():
    # x1 + x2 = 3 misses the unit box
    P = HPolytope(box(2, 0.0, 1.0).A, box(2, 0.0, 1.0).b, [[1.0, 1.0]], [3.0])
    red, lift, ok = reduce_equalities(P)
    assert ok
    # substitution oracle: the reduced interval is empty
    res = linprog(np.zeros(1), A_ub=red.A, b_ub=red.b, bounds=[(None, None)])
    assert res.status == 2
    assert vertex_enum(P).is_empty


def test_reduce_dimension_mismatch():
    with pytest.raises(ValueError):
        HPolytope(np.eye(2), np.ones(2), np.ones((1, 3)), [1.0])


# ---------------------------------------------------------------------------
# vertex_enum


def test_box_vertices():
    V = vertex_enum(box(2))
    assert same_rows(V.vertices, [[-1, -1], [-1, 1], [1, -1], [1, 1]])
    assert V.is_bounded


def test_capped_planar_friction_cone():
    mu = 0.5
    A = np.array([[-1.0, -mu], [1.0, -mu], [0.0, -1.0], [0.0, 1.0]])
    V = vertex_enum(HPolytope(A, [0.0, 0.0, 0.0, 1.0]))
    assert same_rows(V.vertices, [[0.0, 0.0], [0.5, 1.0], [-0.5, 1.0]])


def test_unbounded_cone_reports_rays():
    mu = 0.5
    A = np.array([[-1.0, -mu], [1.0, -mu], [0.0, -1.0]])
    V = vertex_enum(HPolytope(A, np.zeros(3)))
    assert not V.is_bounded
    assert same_rows(V.vertices, [[0.0, 0.0]])
    r = np.array([[-mu, 1.0], [mu, 1.0]]) / np.hypot(mu, 1.0)
    assert same_rows(V.rays, r)


def test_line_reported_with_warning():
    # strip |x2| <= 1 contains the x1 axis
    P = HPolytope([[0.0, 1.0], [0.0, -1.0]], [1.0, 1.0])
    with pytest.warns(DegeneracyWarning):
        V = vertex_enum(P)
    assert not V.is_bounded
    assert same_rows(V.rays, [[-1.0, 0.0], [1.0, 0.0]])


def test_empty_polytope():
    P = HPolytope([[1.0], [-1.0]], [-1.0, 0.0])
    assert vertex_enum(P).is_empty


def test_redundant_rows_removed():
    # many copies of the same square facets, including scaled ones
    A = np.vstack([box(2).A * s for s in (1.0, 2.0, 3.0, 0.5, 4.0)])
    b = np.concatenate([box(2).b * s for s in (1.0, 2.0, 3.0, 0.5, 4.0)])
    V = vertex_enum(HPolytope(A, b))
    assert same_rows(V.vertices, vertex_enum(box(2)).vertices)


def test_degenerate_vertices_pyramid():
    # square pyramid: the apex lies on four facets in R^3
    A = np.array([[0, 0, -1], [1, 0, 1], [-1, 0, 1], [0, 1, 1], [0, -1, 1]], float)
    b = np.array([0, 1, 1, 1, 1], float)
    V = vertex_enum(HPolytope(A, b))
    expect = [[0, 0, 1], [1, 1, 0], [1, -1, 0], [-1, 1, 0], [-1, -1, 0]]
    assert same_rows(V.vertices, expect)


def test_vertices_are_feasible_and_active():
    rng = np.random.default_rng(3)
    for n in (2, 3, 4, 5):
        P = random_hpoly(rng, n)
        V = vertex_enum(P)
        norms = np.linalg.norm(P.A, axis=1)
        slack = P.b[None, :] - V.vertices @ P.A.T
        assert np.all(slack >= -TAU_FEAS * norms)
        active = (np.abs(slack) <= 1e-7 * norms).sum(axis=1)
        assert np.all(active >= n)
        for v in V.vertices:
            assert contains(P, v)


def test_vertices_with_equalities_satisfy_them():
    rng = np.random.default_rng(4)
    P0 = random_hpoly(rng, 5)
    C = rng.normal(size=(2, 5))
    x0 = rng.uniform(-0.1, 0.1, 5)
    P = HPolytope(P0.A, P0.b, C, C @ x0)
    V = vertex_enum(P)
    assert not V.is_empty
    assert np.abs(V.vertices @ C.T - C @ x0).max() <= TAU_FEAS


def test_vertex_enum_matches_qhull_oracle():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        P = random_hpoly(rng, n, extra=6)
        V = vertex_enum(P)
        # brute-force oracle: every n-subset of rows solved and filtered
        from itertools import combinations

        pts = []
        for rows in combinations(range(len(P.b)), n):
            A = P.A[list(rows)]
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            x = np.linalg.solve(A, P.b[list(rows)])
            if np.all(P.A @ x <= P.b + 1e-9):
                pts.append(x)
        oracle = VPolytope(np.array(pts)).vertices
        assert same_rows(V.vertices, oracle)


# ---------------------------------------------------------------------------
# facet_enum


def test_triangle_facets():
    H = facet_enum(VPolytope([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert H.A.shape == (3, 2) and H.C.shape[0] == 0
    assert contains(H, [0.2, 0.2]) and not contains(H, [0.6, 0.6])


def test_embedded_triangle_gets_equality():
    H = facet_enum(VPolytope([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]))
    assert H.C.shape == (1, 3) and H.A.shape[0] == 3
    c = H.C[0] / H.C[0, 2]
    np.testing.assert_allclose(c, [0, 0, 1], atol=1e-12)
    np.testing.assert_allclose(H.d[0] / H.C[0, 2], 1.0)


def test_single_vertex_pure_equalities():
    H = facet_enum(VPolytope([[1.0, 2.0, 3.0]]))
    assert H.A.shape[0] == 0 and H.C.shape[0] == 3
    assert same_rows(vertex_enum(H).vertices, [[1.0, 2.0, 3.0]])


def test_collinear_vertices():
    V = VPolytope([[0, 0, 0], [1, 1, 1], [2, 2, 2]])
    H = facet_enum(V)
    assert H.C.shape[0] == 2 and H.A.shape[0] == 2
    assert same_rows(vertex_enum(H).vertices, [[0, 0, 0], [2, 2, 2]])


def test_facet_round_trip_3d():
    rng = np.random.default_rng(6)
    V = extreme_points(VPolytope(rng.normal(size=(30, 3))))
    assert same_rows(vertex_enum(facet_enum(V)).vertices, V.vertices, TAU_VERT)


def test_facet_enum_rejects_rays_and_empty():
    with pytest.raises(ValueError):
        facet_enum(VPolytope([[0.0, 0.0]], rays=[[1.0, 0.0]]))
    with pytest.raises(ValueError):
        facet_enum(VPolytope.empty(2))


def test_extreme_points_drop_interior():
    X = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5], [0.2, 0.7]], float)
    assert same_rows(extreme_points(VPolytope(X)).vertices, X[:4])


# ---------------------------------------------------------------------------
# support and containment


def test_support_examples():
    assert support(box(2, 0.0, 1.0), [1.0, 0.0]) == pytest.approx(1.0)
    mu = 0.5
    cone = HPolytope([[-1.0, -mu], [1.0, -mu], [0.0, -1.0], [0.0, 1.0]], [0, 0, 0, 1.0])
    assert support(cone, [0.0, -1.0]) == pytest.approx(0.0, abs=1e-12)
    assert support(VPolytope([[0.0, 0.0], [0.5, 1.0]]), [1.0, 1.0]) == pytest.approx(1.5)


def test_support_unbounded_and_empty():
    cone = HPolytope([[-1.0, -0.5], [1.0, -0.5]], [0.0, 0.0])
    assert support(cone, [0.0, 1.0]) == np.inf
    assert support(VPolytope([[0.0, 0.0]], rays=[[0.0, 1.0]]), [0.0, 1.0]) == np.inf
    empty = HPolytope([[1.0], [-1.0]], [-1.0, 0.0])
    assert support(empty, [1.0]) == -np.inf
    assert support(VPolytope.empty(2), [1.0, 0.0]) == -np.inf


def test_support_zero_direction_rejected():
    with pytest.raises(ValueError):
        support(box(2), [0.0, 0.0])


def test_support_h_vs_v_1000_directions():
    rng = np.random.default_rng(7)
    P = random_hpoly(rng, 4)
    V = vertex_enum(P)
    D = rng.normal(size=(1000, 4))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    for d in D:
        h = support(P, d)
        assert abs(h - support(V, d)) <= 1e-7 * (1 + abs(h))


def test_contains_centroid_and_outward_point():
    rng = np.random.default_rng(8)
    V = vertex_enum(random_hpoly(rng, 3))
    assert contains(V, V.vertices.mean(axis=0))
    H = facet_enum(V)
    tol = 1e-8
    i = 0
    a = H.A[i] / np.linalg.norm(H.A[i])
    on_facet = V.vertices[np.argmax(V.vertices @ a)]
    assert not contains(V, on_facet + 10 * tol * a, tol)
    assert not contains(H, on_facet + 10 * tol * a, tol)


def test_contains_dimension_mismatch():
    with pytest.raises(ValueError):
        contains(box(2), [0.0, 0.0, 0.0])


def test_contains_dual_forms_agree_1000_points():
    rng = np.random.default_rng(9)
    P = random_hpoly(rng, 3)
    V = vertex_enum(P)
    X = rng.uniform(-1.6, 1.6, size=(1000, 3))
    # keep points away from the boundary so both forms see the same answer
    norms = np.linalg.norm(P.A, axis=1)
    margin = np.min((P.b - X @ P.A.T) / norms, axis=1)
    X = X[np.abs(margin) > 1e-6]
    agree = [contains(P, x) == contains(V, x) for x in X]
    assert all(agree)


def test_degenerate_contains():
    V = VPolytope([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    assert contains(V, [0.2, 0.2, 1.0])
    assert not contains(V, [0.2, 0.2, 1.001])


# ---------------------------------------------------------------------------
# affine hull


def test_affine_hull_single_vertex():
    H = affine_hull(VPolytope([[1.0, 2.0, 3.0]]))
    assert H.dim == 0
    assert H.null_basis.shape == (3, 3)
    np.testing.assert_allclose(H.null_basis.T @ H.null_basis, np.eye(3), atol=1e-12)


def test_affine_hull_embedded_triangle():
    H = affine_hull(VPolytope([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]))
    assert H.dim == 2
    np.testing.assert_allclose(np.abs(H.null_basis[:, 0]), [0, 0, 1], atol=1e-12)
    np.testing.assert_allclose(H.span_basis.T @ H.null_basis, 0, atol=1e-12)


def test_affine_hull_vertices_within_tolerance():
    rng = np.random.default_rng(10)
    B = np.linalg.qr(rng.normal(size=(5, 2)))[0]
    X = rng.normal(size=(12, 2)) @ B.T + 3.0
    H = affine_hull(VPolytope(X))
    assert H.dim == 2
    assert np.abs((X - H.base_point) @ H.null_basis).max() <= 1e-7


# ---------------------------------------------------------------------------
# OFF export


def test_off_cube():
    text = to_off(vertex_enum(box(3)))
    lines = text.strip().splitlines()
    assert lines[0] == "OFF"
    nv, nf, _ = map(int, lines[1].split())
    assert (nv, nf) == (8, 12)
    X = np.array([[float(c) for c in l.split()] for l in lines[2:2 + nv]])
    # outward orientation: face normals point away from the centroid
    for l in lines[2 + nv:]:
        _, i, j, k = map(int, l.split())
        n = np.cross(X[j] - X[i], X[k] - X[i])
        assert n @ (X[i] - X.mean(axis=0)) > 0


def test_off_requires_3d():
    with pytest.raises(ValueError):
        to_off(VPolytope([[0.0, 0.0]]))


# ---------------------------------------------------------------------------
# properties


@st.composite
def point_clouds(draw):
    n = draw(st.integers(2, 4))
    m = draw(st.integers(n + 1, n + 8))
    seed = draw(st.integers(0, 2**32 - 1))
    return np.random.default_rng(seed).normal(size=(m, n))


@settings(max_examples=40, deadline=None)
@given(point_clouds())
def test_property_hull_round_trip(X):
    V = extreme_points(VPolytope(X))
    hull = ConvexHull(X)
    assert same_rows(V.vertices, X[np.sort(hull.vertices)], 1e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneracyWarning)
        W = vertex_enum(facet_enum(V))
    assert same_rows(W.vertices, V.vertices, TAU_VERT)


@settings(max_examples=40, deadline=None)
@given(point_clouds(), st.integers(0, 2**32 - 1))
def test_property_support_upper_bounds_samples(X, seed):
    V = VPolytope(X)
    H = facet_enum(extreme_points(V))
    d = np.random.default_rng(seed).normal(size=X.shape[1])
    h = support(V, d)
    assert h >= (X @ d).max() - 1e-12
    assert abs(support(H, d) - h) <= 1e-7 * (1 + abs(h))


@pytest.mark.parametrize("gap", [1e-3, 1.0, 1e6])
def test_inconsistent_inequalities_give_empty(gap):
    # x <= 0 and x >= gap inside a bounded box
    A = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 0.0]])
    b = np.array([0.0, -gap, 1.0, 1.0, 5.0])
    assert vertex_enum(HPolytope(A, b)).is_empty
