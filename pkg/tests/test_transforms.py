import numpy as np
import pytest

from adq.Errors import BadDims
from adq.Grassmann.Grassmann import complement_frames
from adq.Grassmann.GrassmannModels import Subspace
from adq.Grassmann.SphereLattice import circle_points, fibonacci_sphere
from adq.Transforms.Transforms import dual_radon_constant
from adq.Transforms.TransformsModels import GrassmannFunction, SphericalFunction, SubspaceCache

ONE = SphericalFunction(evaluator=lambda u: np.ones(len(u)), description="1")
CONSTANT = GrassmannFunction(evaluator=lambda frames: np.ones(len(frames)), description="1")


def plane(normal) -> Subspace:
    normal = np.asarray(normal, dtype=float) / np.linalg.norm(normal)
    return Subspace(dim_ambient=3, dim=2, frame=complement_frames(normal[None, :])[0])


def test_radon_of_one_is_sphere_size(transforms):
    assert transforms.radon_m(ONE, plane([0.3, 0.1, 1.0]), 64) == pytest.approx(2.0 * np.pi)
    line = Subspace(dim_ambient=3, dim=1, frame=np.array([[0.0, 0.0, 1.0]]))
    assert transforms.radon_m(ONE, line, 64) == pytest.approx(2.0)


def test_radon_of_radial_power_is_section_volume(fixtures, transforms):
    square = fixtures.square()
    u = np.array([np.cos(0.3), np.sin(0.3)])
    line = Subspace(dim_ambient=2, dim=1, frame=u[None, :])
    chord = transforms.radon_m(transforms.radial_of(square), line, 64)
    assert chord == pytest.approx(transforms.grassmann.section_volume(square, line), rel=1e-10)

    cube = fixtures.cube()
    xi = plane([0.2, -0.4, 1.0])
    half_square = SphericalFunction(evaluator=lambda w: cube.radial_many(w) ** 2 / 2.0)
    area = transforms.radon_m(half_square, xi, 2048)
    assert area == pytest.approx(transforms.grassmann.section_volume(cube, xi), rel=1e-3)


def test_radon_rejects_large_subspaces(transforms):
    xi = Subspace(dim_ambient=4, dim=3, frame=np.eye(4)[:3])
    with pytest.raises(BadDims):
        transforms.radon_m(ONE, xi, 16)


def test_dual_radon_of_constant(transforms):
    assert transforms.dual_radon_m(CONSTANT, [0.0, 0.0, 1.0], 32, m=2) == pytest.approx(0.5)
    assert transforms.dual_radon_m(CONSTANT, [0.0, 1.0], 32, m=1) == pytest.approx(1.0 / np.pi)
    assert dual_radon_constant(3, 1) == pytest.approx(1.0 / (2.0 * np.pi))


def test_dual_radon_needs_m(transforms):
    with pytest.raises(BadDims):
        transforms.dual_radon_m(CONSTANT, [0.0, 0.0, 1.0], 32)


def test_dual_radon_of_square_chord(fixtures, transforms):
    profile = transforms.section_profile(fixtures.square())
    assert transforms.dual_radon_m(profile, [1.0, 0.0], m=1) == pytest.approx(2.0 / np.pi)


def test_dual_radon_of_ball_profile(fixtures, transforms):
    profile = transforms.section_profile(fixtures.ball(3))
    assert transforms.dual_radon_m(profile, [0.0, 0.6, 0.8], 64, m=2) == pytest.approx(np.pi**2 / 2.0)


def test_section_profile_values_and_scaling(fixtures, transforms):
    square_profile = transforms.section_profile(fixtures.square())
    assert square_profile(np.array([[[1.0, 0.0]]]))[0] == pytest.approx(2.0)
    cube = fixtures.cube()
    frames = np.eye(3)[None, :2, :]
    assert transforms.section_profile(cube)(frames)[0] == pytest.approx(16.0)
    c = 1.7
    scaled = transforms.section_profile(cube.scaled(c))(frames)[0]
    assert scaled == pytest.approx(c ** (2 * 2) * 16.0)


def test_section_profile_ignores_the_frame(fixtures, transforms):
    profile = transforms.section_profile(fixtures.cube())
    frames = np.eye(3)[None, :2, :]
    swapped = np.eye(3)[None, [1, 0], :]
    first = profile(frames)
    second = profile(swapped)
    assert first == pytest.approx(second)


def test_subspace_cache_keys_ignore_the_frame():
    cache = SubspaceCache()
    calls = []

    def compute(frames):
        calls.append(len(frames))
        return np.full(len(frames), 3.0)

    rotation = np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]])
    frame = np.eye(3)[:2]
    cache.evaluate(frame[None], compute)
    values = cache.evaluate((rotation @ frame)[None], compute)
    assert values[0] == 3.0
    assert calls == [1]
    assert cache.hits == 1 and cache.misses == 1


def test_intersection_body(fixtures, transforms):
    assert transforms.intersection_body_radial(fixtures.ball(3), [0.0, 0.0, 1.0]) == pytest.approx(np.pi)
    assert transforms.intersection_body_radial(fixtures.square(), [1.0, 0.0]) == pytest.approx(2.0)
    cube = fixtures.cube()
    u = np.array([0.1, 0.7, -0.2])
    value = transforms.intersection_body_radial(cube, u)
    assert transforms.intersection_body_radial(cube.scaled(3.0), u) == pytest.approx(9.0 * value)


def test_bidual_intersection_body_of_the_ball(fixtures, transforms):
    ball = fixtures.ball(3)
    assert transforms.bidual_intersection_radial(ball, [0.0, 0.0, 1.0], 2) == pytest.approx(np.pi**2 / 2.0)
    # chord² = 4, (2/(3ω_3))·4 = 2/π, root of order n - m = 2
    assert transforms.bidual_intersection_radial(ball, [0.0, 0.0, 1.0], 1) == pytest.approx(np.sqrt(2.0 / np.pi))


def test_bidual_homogeneity(fixtures, transforms):
    cube = fixtures.cube()
    u = np.array([0.3, -0.5, 0.8])
    c = 1.5
    for m in (1, 2):
        base = transforms.bidual_intersection_radial(cube, u, m, 64)
        scaled = transforms.bidual_intersection_radial(cube.scaled(c), u, m, 64)
        assert scaled == pytest.approx(c ** (4.0 / (3 - m)) * base, rel=1e-10)


def test_second_intersection_body_identity_on_the_cube(fixtures, transforms):
    cube = fixtures.cube()
    profile = transforms.section_profile(cube)
    constant = 2.0 / (3.0 * 4.0 * np.pi / 3.0)
    for u in fibonacci_sphere(5):
        lhs = transforms.dual_radon_m(profile, u, 256, m=2)
        rhs = constant * transforms.second_intersection_radial(cube, u, 512)
        assert lhs == pytest.approx(rhs, rel=1e-2)


def test_dual_radon_pairs_with_radon_on_the_circle(transforms, grassmann):
    f = SphericalFunction(evaluator=lambda u: 1.0 + u[:, 0] ** 2 + 0.3 * u[:, 0] * u[:, 1] + 0.2 * u[:, 1])
    F = GrassmannFunction(evaluator=lambda frames: 1.0 + 2.0 * frames[:, 0, 0] ** 2, dim=1)
    circle = circle_points(256)
    lhs = np.sum(f(circle) * transforms.dual_radon_many(F, circle)) * 2.0 * np.pi / 256
    rule = grassmann.grassmann_rule(2, 1, 256, seed=0)
    lines = rule.nodes[:, 0, :]
    rhs = np.sum((f(lines) + f(-lines)) * F(rule.nodes) * rule.weights)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_dual_radon_rotation_equivariance(transforms, rng):
    a = np.array([0.3, -0.2, 0.9])
    rotation, _ = np.linalg.qr(rng.standard_normal((3, 3)))

    def projection_power(axis):
        return lambda frames: np.sum(np.einsum("pmi,i->pm", frames, axis) ** 2, axis=1) ** 2

    F = GrassmannFunction(evaluator=projection_power(a), dim=2)
    rotated = GrassmannFunction(evaluator=projection_power(rotation @ a), dim=2)
    for u in fibonacci_sphere(4):
        assert transforms.dual_radon_m(rotated, rotation @ u, 64) == pytest.approx(
            transforms.dual_radon_m(F, u, 64), rel=1e-6
        )
