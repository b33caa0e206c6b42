"""Simplex quadrature rules (Grundmann-Moller construction).

Rules are returned in barycentric coordinates with weights summing to 1,
so integrals are obtained by multiplying with the simplex measure
(length / area / volume).
"""

from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial

import numpy as np


def _compositions(total, parts):
    """All tuples of `parts` nonnegative integers summing to `total`."""
    for cuts in combinations_with_replacement(range(total + 1), parts - 1):
        prev = 0
        comp = []
        for c in cuts:
            comp.append(c - prev)
            prev = c
        comp.append(total - prev)
        yield tuple(comp)


@lru_cache(maxsize=None)
def simplex_rule(dim, degree):
    """Quadrature rule on the `dim`-simplex exact for polynomials of `degree`.

    Returns (points, weights): points are barycentric, shape (npts, dim+1);
    weights sum to 1 (normalized against the simplex measure).  Weights of
    the underlying Grundmann-Moller rule may be negative for degree >= 3.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    s = max(0, (degree - 1 + 1) // 2)  # rule index; exact degree 2s+1
    d = 2 * s + 1
    n = dim
    pts = []
    wts = []
    for i in range(s + 1):
        denom = d + n - 2 * i
        coef = (
            (-1.0) ** i
            * 2.0 ** (-2 * s)
            * denom**d
            / (factorial(i) * factorial(d + n - i))
        )
        for k in _compositions(s - i, n + 1):
            pts.append([(2 * kj + 1) / denom for kj in k])
            wts.append(coef)
    points = np.array(pts, dtype=float)
    weights = np.array(wts, dtype=float) * factorial(n)
    return points, weights


def tet_rule(degree):
    """Barycentric points and weights on the tetrahedron."""
    return simplex_rule(3, degree)


def triangle_rule(degree):
    """Barycentric points and weights on the triangle."""
    return simplex_rule(2, degree)


def map_to_simplex(vertices, bary_points):
    """Map barycentric points into a simplex given by its vertex array.

    vertices: (..., nverts, 3); bary_points: (npts, nverts).
    Returns (..., npts, 3).
    """
    return np.einsum("pk,...kd->...pd", bary_points, vertices)
