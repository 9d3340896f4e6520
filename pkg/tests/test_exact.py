import itertools
from fractions import Fraction
from math import gcd

from hypothesis import given, settings, strategies as st

from cmforge.exact import (FiniteAbelianGroup, GroupHom, InfiniteGroup, det, det_int, group_from_elements,
                           hnf_with_transform, integer_kernel, inverse, is_unimodular, matmul, snf,
                           solve_integer)

small = st.integers(-9, 9)


def matrices(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def _lattice_points(cols, box=4):
    """Brute-force sample of the column lattice, used as an oracle for equal spans."""
    n = len(cols[0]) if cols else 0
    pts = set()
    for c in itertools.product(range(-box, box + 1), repeat=len(cols)):
        pts.add(tuple(sum(k * v[i] for k, v in zip(c, cols)) for i in range(n)))
    return pts


@settings(max_examples=60, deadline=None)
@given(matrices(3, 3))
def test_hnf_shape_and_transform(m):
    h, u = hnf_with_transform(m)
    assert matmul(m, u) == h
    assert is_unimodular(u)
    # lower echelon, positive pivots, reduced to the left of pivots
    last = -1
    for j in range(3):
        col = [h[i][j] for i in range(3)]
        nz = [i for i, x in enumerate(col) if x]
        if not nz:
            assert all(not any(h[i][k] for i in range(3)) for k in range(j, 3))
            break
        p = nz[0]
        assert p > last and col[p] > 0
        for k in range(j):
            assert 0 <= h[p][k] < col[p]
        last = p


@settings(max_examples=60, deadline=None)
@given(matrices(3, 4))
def test_snf_divisibility(m):
    u, s, v = snf(m)
    assert matmul(matmul(u, m), v) == s
    assert is_unimodular(u) and is_unimodular(v)
    diag = [s[i][i] for i in range(3)]
    for i in range(3):
        for j in range(4):
            if i != j:
                assert s[i][j] == 0
    for a, b in zip(diag, diag[1:]):
        assert a >= 0 and (a == 0 and b == 0 or a and b % a == 0)


@settings(max_examples=50, deadline=None)
@given(matrices(2, 3), st.lists(small, min_size=3, max_size=3))
def test_solve_integer_and_kernel(m, x):
    t = [sum(a * b for a, b in zip(r, x)) for r in m]
    y = solve_integer(m, t)
    assert y is not None
    assert [sum(a * b for a, b in zip(r, y)) for r in m] == t
    for k in integer_kernel(m):
        assert all(sum(a * b for a, b in zip(r, k)) == 0 for r in m)


def test_solve_integer_no_solution():
    assert solve_integer([[2, 4]], [3]) is None


def test_det_against_cofactor():
    m = [[2, -1, 0], [1, 3, 5], [-4, 0, 7]]
    cof = (2 * (3 * 7 - 5 * 0) - (-1) * (1 * 7 - 5 * -4) + 0)
    assert det(m) == cof == det_int(m)
    inv = inverse(m)
    assert matmul(m, inv) == [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]


def test_group_invariants_z2xz4():
    g = FiniteAbelianGroup(["a", "b"], [[2, 0], [0, 4]])
    assert g.invariants == (2, 4) and g.order == 8
    g = FiniteAbelianGroup(["a", "b"], [[2, 2], [0, 6]])
    assert g.order == 12 and g.invariants == (2, 6)


def test_infinite_group_rejected():
    try:
        FiniteAbelianGroup(["a", "b"], [[2, 0]])
    except InfiniteGroup:
        return
    raise AssertionError("rank-deficient relations accepted")


def test_enumerated_group_mod_15_units():
    units = [x for x in range(1, 15) if x % 3 and x % 5]
    eg = group_from_elements(1, lambda a, b: a * b % 15, units)
    assert eg.group.invariants == (2, 4)
    for a, b in itertools.product(units, repeat=2):
        assert eg(a * b % 15) == eg.group.op(eg(a), eg(b))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 11), min_size=3, max_size=3), st.integers(0, 11))
def test_solve_against_enumeration(coeffs, tgt):
    g = FiniteAbelianGroup(["a", "b"], [[2, 0], [0, 6]])
    gens = [g.element([c, c // 2]) for c in coeffs]
    target = g.element([tgt, 0])
    reach = {}
    for n in itertools.product(range(6), repeat=3):
        acc = g.identity()
        for k, x in zip(n, gens):
            acc = g.op(acc, g.pow(x, k))
        reach.setdefault(acc, n)
    n = g.solve(gens, target)
    assert (n is not None) == (target in reach)
    if n is not None:
        acc = g.identity()
        for k, x in zip(n, gens):
            acc = g.op(acc, g.pow(x, k))
        assert acc == target


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 11), min_size=4, max_size=4))
def test_hom_kernel_against_enumeration(imgs):
    src = FiniteAbelianGroup(["a", "b"], [[4, 0], [0, 6]])
    dst = FiniteAbelianGroup(["c"], [[12]])
    images = [dst.element([k * (12 // gcd(12, d))]) for k, d in zip(imgs, src.invariants)]
    h = GroupHom(src, dst, images)
    assert h.is_well_defined()
    kernel = {a for a in src.elements() if h(a) == dst.identity()}
    assert h.kernel() == kernel
    assert src.subgroup_generated(h.kernel_generators()) == kernel
    assert h.kernel_order() * h.image_order() == src.order
