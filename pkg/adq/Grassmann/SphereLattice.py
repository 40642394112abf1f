r"""
Quasi-uniform point sets on the unit circle and the unit sphere.

The Fibonacci lattice places npoints points on S^2 with equal weights; around
500 points already integrate smooth functions to a few digits, and the equal
weights stay robust when the integrand has kinks.
"""

import numpy as np

GOLDEN_RATIO = (1.0 + 5.0**0.5) / 2.0


def fibonacci_sphere(npoints: int) -> np.ndarray:
    """
    Generates npoints quasi-uniformly distributed on the unit sphere.

    Returns
    -------
    points : ndarray, shape (npoints, 3)
        Cartesian coordinates of the points on the unit sphere.
    """
    indices = np.arange(0, npoints, dtype=float) + 0.5
    phi = np.arccos(1.0 - 2.0 * indices / npoints)
    theta = 2.0 * np.pi * indices / GOLDEN_RATIO

    x = np.cos(theta) * np.sin(phi)
    y = np.sin(theta) * np.sin(phi)
    z = np.cos(phi)
    return np.column_stack((x, y, z))


def fibonacci_hemisphere(npoints: int) -> np.ndarray:
    """npoints Fibonacci points on the open upper hemisphere z > 0."""
    indices = np.arange(0, npoints, dtype=float) + 0.5
    # z uniform on (0, 1) gives uniform area on the hemisphere
    z = 1.0 - indices / npoints
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    theta = 2.0 * np.pi * indices / GOLDEN_RATIO
    return np.column_stack((r * np.cos(theta), r * np.sin(theta), z))


def circle_points(npoints: int, half: bool = False) -> np.ndarray:
    """Uniform angles on [0, 2π), or on [0, π) when half is set."""
    span = np.pi if half else 2.0 * np.pi
    theta = span * np.arange(npoints, dtype=float) / npoints
    return np.column_stack((np.cos(theta), np.sin(theta)))
