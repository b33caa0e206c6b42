import math

import numpy as np
import pytest

from sharptop.quadrature import map_to_simplex, simplex_rule, tet_rule, \
    triangle_rule


def monomial_integral_tet(a, b, c):
    # exact integral of x^a y^b z^c over the reference tetrahedron
    return (math.factorial(a) * math.factorial(b) * math.factorial(c)
            / math.factorial(a + b + c + 3))


def monomial_integral_tri(a, b):
    return (math.factorial(a) * math.factorial(b)
            / math.factorial(a + b + 2))


@pytest.mark.parametrize("degree", [1, 2, 3, 4, 5])
def test_tet_rule_exact_for_monomials(degree):
    pts, w = tet_rule(degree)
    ref = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1.0]])
    xyz = pts @ ref
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            for c in range(degree + 1 - a - b):
                q = np.sum(w * xyz[:, 0]**a * xyz[:, 1]**b * xyz[:, 2]**c)
                assert q / 6.0 == pytest.approx(
                    monomial_integral_tet(a, b, c), abs=1e-14)


@pytest.mark.parametrize("degree", [1, 2, 3, 4, 5])
def test_triangle_rule_exact_for_monomials(degree):
    pts, w = triangle_rule(degree)
    ref = np.array([[0, 0], [1, 0], [0, 1.0]])
    xy = pts @ ref
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            q = np.sum(w * xy[:, 0]**a * xy[:, 1]**b)
            assert q / 2.0 == pytest.approx(monomial_integral_tri(a, b),
                                            abs=1e-14)


def test_weights_normalized():
    for dim in (2, 3):
        for degree in (1, 3, 5):
            _, w = simplex_rule(dim, degree)
            assert np.sum(w) == pytest.approx(1.0, abs=1e-13)


def test_map_to_simplex_batched():
    pts, _ = tet_rule(2)
    verts = np.random.default_rng(0).uniform(size=(7, 4, 3))
    mapped = map_to_simplex(verts, pts)
    assert mapped.shape == (7, len(pts), 3)
    # first barycentric point maps inside each tet's convex hull
    assert np.all(mapped.min(axis=1) >= verts.min(axis=1) - 1e-12)
    assert np.all(mapped.max(axis=1) <= verts.max(axis=1) + 1e-12)
