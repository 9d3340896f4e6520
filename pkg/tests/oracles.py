"""Brute-force oracles shared by the tests; none of them call the code under test's algorithms."""
import itertools
from fractions import Fraction


def residue_count(K, a):
    """``#O_K/a`` by reducing a full box of coordinates."""
    n = int(a.norm())
    return len({a.reduce(K.elt(x, y)) for x in range(n) for y in range(n)})


def stable_submodules(K, m):
    """All O_K-submodules of O_K/m; O_K/m is a principal ideal ring, so cyclic ones suffice."""
    def omega(v):
        x, y = v
        return ((-K.c0 * y) % m, (x + K.D * y) % m)
    out = set()
    for v in itertools.product(range(m), repeat=2):
        w = omega(v)
        out.add(frozenset(((i * v[0] + j * w[0]) % m, (i * v[1] + j * w[1]) % m)
                          for i in range(m) for j in range(m)))
    return out


def torsion_points(K, a, m):
    """Points v of (Z/m)^2 with (v/m) a contained in O_K: the a-torsion."""
    basis = a.basis()
    pts = set()
    for x, y in itertools.product(range(m), repeat=2):
        z = K.elt(Fraction(x, m), Fraction(y, m))
        if all((z * b).is_integral() for b in basis):
            pts.add((x, y))
    return frozenset(pts)
