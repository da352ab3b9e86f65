from fractions import Fraction

import pytest

from shufflehall.generators import alpha, build_P, empty_triangle_candidates
from shufflehall.hall_geometry import (
    LatticeTriangle,
    basis_rank,
    classify_triangle,
    collection_product,
    count_collections,
    verify_relation,
    verify_relation0,
)
from shufflehall.shuffle_core import bracket, shuffle_mul


def brute_interior(t):
    """Independent interior-point count by scanning the bounding box."""
    ax, ay = 0, 0
    bx, by = t.x2
    cx, cy = t.x1[0] + t.x2[0], t.x1[1] + t.x2[1]

    def cross(ox, oy, px, py, qx, qy):
        return (px - ox) * (qy - oy) - (py - oy) * (qx - ox)

    count = 0
    for x in range(min(ax, bx, cx), max(ax, bx, cx) + 1):
        for y in range(min(ay, by, cy), max(ay, by, cy) + 1):
            s1 = cross(ax, ay, bx, by, x, y)
            s2 = cross(bx, by, cx, cy, x, y)
            s3 = cross(cx, cy, ax, ay, x, y)
            if (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0):
                count += 1
    return count


def test_interior_count_matches_brute_force():
    cases = [
        ((2, 1), (1, 0)),
        ((1, 1), (2, 0)),
        ((2, 2), (1, 0)),
        ((3, 2), (1, 0)),
        ((1, 3), (2, 1)),
        ((3, 1), (1, -1)),
        ((2, 3), (2, 1)),
    ]
    for x1, x2 in cases:
        t = LatticeTriangle(x1, x2)
        assert t.interior_count() == brute_interior(t)


def test_classification_cases():
    assert classify_triangle(LatticeTriangle((2, 1), (1, 0))) == "empty"
    assert classify_triangle(LatticeTriangle((1, 1), (2, 0))) == "quasi-empty"
    assert classify_triangle(LatticeTriangle((2, 2), (1, 0))) == "quasi-empty"
    assert classify_triangle(LatticeTriangle((1, 1), (1, -1))) == "empty"
    assert classify_triangle(LatticeTriangle((1, 2), (1, -2))) == "neither"
    assert classify_triangle(LatticeTriangle((1, 1), (1, 1))) == "degenerate"
    assert classify_triangle(LatticeTriangle((2, 3), (2, 1))) == "empty"
    assert classify_triangle(LatticeTriangle((2, 5), (1, 0))) == "neither"


def test_relation_on_primitive_triangle():
    assert verify_relation(LatticeTriangle((2, 1), (1, 0)))


def test_relation_on_gcd_two_total():
    assert verify_relation(LatticeTriangle((1, 1), (1, -1)))


def test_relation_on_quasi_empty():
    assert verify_relation(LatticeTriangle((1, 1), (2, 0)))


def test_relation_rejects_fat_triangle():
    with pytest.raises(ValueError, match="needs an empty"):
        verify_relation(LatticeTriangle((1, 2), (1, -2)))


def test_relation0_on_a_ray():
    assert verify_relation0((1, 1), (2, 2))
    assert verify_relation0((1, 0), (2, 0))
    with pytest.raises(ValueError, match="collinear"):
        verify_relation0((1, 1), (2, 1))


def test_count_collections_frozen():
    assert count_collections(2, 0, 0) == 2
    assert count_collections(2, 1, Fraction(1, 2)) == 1
    assert count_collections(3, 1, Fraction(1, 3)) == 1
    assert count_collections(2, 1, 1) == 2
    assert count_collections(1, 5, 5) == 1
    assert count_collections(2, 3, 0) == 0


def test_collection_product_order():
    parts = [(1, 1), (1, 0)]
    want = shuffle_mul(build_P(1, 0), build_P(1, 1))
    assert collection_product(parts) == want


def test_basis_rank_matches_count_small():
    for k, d, mu in [
        (2, 1, Fraction(1, 2)),
        (2, 0, 0),
        (2, 1, 1),
        (3, 1, Fraction(1, 3)),
        (2, 2, 1),
    ]:
        assert basis_rank(k, d, mu) == count_collections(k, d, mu)
    with pytest.raises(ValueError, match="k <= 4"):
        basis_rank(5, 1, 1)


def test_recursion_triangles_are_empty():
    for k in range(2, 5):
        for d in range(-3, 4):
            for x1, x2 in empty_triangle_candidates(k, d):
                assert classify_triangle(LatticeTriangle(x1, x2)) == "empty"
