import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adq.CliIo.Fixtures import Fixtures
from adq.ConvexCore.ConvexCore import ConvexCore
from adq.ConvexCore.ConvexCoreModels import UnitVector, ball_volume
from adq.Errors import (
    BadDims,
    DegenerateInput,
    OriginOnBoundary,
    OriginOutside,
    UnboundedBody,
    ZeroRadial,
)

SQUARE_NORMALS = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]


def test_ball_volumes():
    assert ball_volume(1) == pytest.approx(2.0)
    assert ball_volume(2) == pytest.approx(np.pi)
    assert ball_volume(3) == pytest.approx(4.0 * np.pi / 3.0)


def test_square_vertices_facets_and_volume(fixtures, core):
    square = fixtures.square()
    assert len(square.vertices) == 4
    assert np.allclose(sorted(np.abs(square.vertices).ravel()), 1.0)
    assert [facet.area for facet in square.facets] == pytest.approx([2.0] * 4)
    assert not any(facet.degenerate for facet in square.facets)
    assert core.volume(square) == pytest.approx(4.0)


def test_cube_vertices_facets_and_volume(fixtures, core):
    cube = fixtures.cube()
    assert len(cube.vertices) == 8
    assert all(len(facet.vertex_ids) == 4 for facet in cube.facets)
    assert [facet.area for facet in cube.facets] == pytest.approx([4.0] * 6)
    assert core.volume(cube) == pytest.approx(8.0)


def test_cube_facet_cycles_are_counterclockwise_from_outside(fixtures):
    cube = fixtures.cube()
    for facet in cube.facets:
        a, b, c = cube.vertices[facet.vertex_ids[:3]]
        assert np.dot(np.cross(b - a, c - a), cube.normals[facet.index]) > 0.0


def test_radial_support_and_gauss_map(fixtures, core):
    square = fixtures.square()
    diagonal = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert core.radial_function(square, [1.0, 0.0]) == pytest.approx(1.0)
    assert core.radial_function(square, diagonal) == pytest.approx(np.sqrt(2.0))
    assert core.support_function(square, diagonal) == pytest.approx(np.sqrt(2.0))
    assert core.gauss_map_at(square, [1.0, 0.2]) == 0
    assert core.gauss_map_at(square, [0.0, -1.0]) == 3
    # on a ridge the smallest index wins
    assert core.gauss_map_at(square, diagonal) == 0


def test_dual_operator_is_reciprocal_radial(fixtures, core, rng):
    P = fixtures.random_polytope(3, 9, rng)
    for u in rng.standard_normal((10, 3)):
        u /= np.linalg.norm(u)
        assert core.dual_operator(P, u) == pytest.approx(1.0 / core.radial_function(P, u))


def test_hausdorff_square_and_its_double(fixtures, core):
    assert core.hausdorff_distance(fixtures.square(), fixtures.square(2.0)) == pytest.approx(np.sqrt(2.0))
    assert core.hausdorff_distance(fixtures.cube(), fixtures.cube()) == pytest.approx(0.0, abs=1e-12)


def test_redundant_halfspace_gives_degenerate_facet(core):
    normals = SQUARE_NORMALS + [[1.0, 1.0]]
    P = core.build_polytope(normals, [1.0, 1.0, 1.0, 1.0, 5.0])
    assert P.facets[4].degenerate
    assert P.facets[4].area == 0.0
    assert len(P.vertices) == 4


def test_unbounded_body_reports_witness(core):
    with pytest.raises(UnboundedBody) as error:
        core.build_polytope([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]], [1.0, 1.0, 1.0])
    witness = np.array(error.value.witness)
    assert np.all(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]) @ witness <= 1e-9)


def test_too_few_halfspaces(core):
    with pytest.raises(DegenerateInput):
        core.build_polytope([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0])


def test_empty_intersection(core):
    with pytest.raises(DegenerateInput):
        core.build_polytope(SQUARE_NORMALS, [-1.0, 1.0, -1.0, 1.0])


def test_bad_dimension(core):
    with pytest.raises(BadDims):
        core.build_polytope(np.vstack([np.eye(4), -np.eye(4)]), np.ones(8))


def test_origin_on_boundary_and_outside(core):
    boundary = core.build_polytope(SQUARE_NORMALS, [0.0, 1.0, 2.0, 1.0])
    with pytest.raises(ZeroRadial):
        core.gauss_map_at(boundary, [1.0, 0.0])
    with pytest.raises(OriginOnBoundary):
        core.dual_operator(boundary, [1.0, 0.0])
    outside = core.build_polytope(SQUARE_NORMALS, [-0.5, 1.0, 2.0, 1.0])
    with pytest.raises(OriginOutside):
        core.radial_function(outside, [0.0, 1.0])


def test_normal_cone_dual(core):
    P = core.build_polytope(SQUARE_NORMALS, [0.0, 1.0, 2.0, 1.0])
    cone = core.normal_cone_dual(P)
    assert cone.active == [0]
    assert cone.contains([-1.0, 0.5])
    assert not cone.contains([1.0, 0.0])
    assert core.normal_cone_dual(Fixtures().square()).contains([5.0, 5.0])


def test_unit_vector_validation():
    assert UnitVector.of([3.0, 4.0]).coords == pytest.approx((0.6, 0.8))
    with pytest.raises(ValueError):
        UnitVector(coords=(1.0, 1.0))
    with pytest.raises(DegenerateInput):
        UnitVector.of([0.0, 0.0])


def test_unimodular_map_preserves_volume(fixtures, core, rng):
    P = fixtures.random_polytope(3, 10, rng)
    phi = fixtures.random_unimodular(3, rng)
    assert np.linalg.det(phi) == pytest.approx(1.0)
    assert core.volume(core.transform_polytope(P, phi)) == pytest.approx(core.volume(P), rel=1e-9)


@given(seed=st.integers(0, 2**32 - 1), c=st.floats(0.25, 4.0))
def test_volume_scales_with_dilation(seed, c):
    fixtures, core = Fixtures(), ConvexCore()
    P = fixtures.random_polytope(2, 7, np.random.default_rng(seed))
    assert core.volume(P.scaled(c)) == pytest.approx(c**2 * core.volume(P), rel=1e-9)


@given(seed=st.integers(0, 2**32 - 1))
def test_cone_volume_matches_convex_hull(seed):
    from scipy.spatial import ConvexHull

    P = Fixtures().random_polytope(3, 9, np.random.default_rng(seed))
    assert ConvexCore().volume(P) == pytest.approx(ConvexHull(P.vertices).volume, rel=1e-9)


def test_qhull_failure_becomes_degenerate_input(core, monkeypatch):
    from scipy.spatial import QhullError

    import adq.ConvexCore.ConvexCore as convex_core_module

    def failing_intersection(halfspaces, interior_point):
        raise QhullError("QH6154 Qhull precision error: initial simplex is flat")

    monkeypatch.setattr(convex_core_module, "HalfspaceIntersection", failing_intersection)
    with pytest.raises(DegenerateInput) as caught:
        core.build_polytope(SQUARE_NORMALS, [1.0, 1.0, 1.0, 1.0])
    assert "QH6154" in caught.value.message


@given(seed=st.integers(0, 2**32 - 1))
def test_radial_points_lie_on_the_boundary(seed):
    rng = np.random.default_rng(seed)
    P = Fixtures().random_polytope(3, 9, rng)
    u = rng.standard_normal((200, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    x = P.radial_many(u)[:, None] * u
    slack = x @ P.normals.T - P.supports[None, :]
    assert np.allclose(np.max(slack, axis=1), 0.0, atol=1e-9 * P.scale)


def test_every_direction_lands_in_exactly_one_cone(fixtures, grassmann, rng):
    P = fixtures.random_polytope(3, 10, rng)
    u = grassmann.haar_frames(3, 1, 10_000, seed=5)[:, 0, :]
    labels = P.gauss_many(u)
    assert np.all((labels >= 0) & (labels < P.num_facets))
    radii = P.radial_many(u)
    heights = np.einsum("pi,pi->p", radii[:, None] * u, P.normals[labels])
    assert np.allclose(heights, P.supports[labels], rtol=1e-9)
    tight = np.abs(radii[:, None] * (u @ P.normals.T) - P.supports[None, :]) <= 1e-10 * P.scale
    assert np.all(tight.sum(axis=1) == 1)
    assert not any(P.facets[label].degenerate for label in np.unique(labels))


@pytest.mark.parametrize("n, facets", [(2, 7), (3, 9)])
def test_rebuilding_from_vertices_reproduces_support(fixtures, core, rng, n, facets):
    from scipy.spatial import ConvexHull

    P = fixtures.random_polytope(n, facets, rng)
    # qhull triangulates facets, so coplanar triangles repeat an equation
    equations = []
    for equation in ConvexHull(P.vertices).equations:
        if all(np.linalg.norm(equation - kept) > 1e-9 for kept in equations):
            equations.append(equation)
    equations = np.array(equations)
    rebuilt = core.build_polytope(equations[:, :n], -equations[:, n])
    grid = rng.standard_normal((500, n))
    grid /= np.linalg.norm(grid, axis=1)[:, None]
    assert np.allclose(rebuilt.support_many(grid), P.support_many(grid), atol=1e-9)
