import pytest

from cmforge.exact import det
from cmforge.nfield import poly_mod, poly_mul

DISC = {"Q(sqrt-5)/H": 400, "Q(zeta12)/Q(i)": 144}


def test_poly_helpers():
    assert poly_mul([1, 1], [-1, 1]) == [-1, 0, 1]
    # x^3 mod (x^2 + 1) = -x
    assert poly_mod([0, 0, 0, 1], [1, 0, 1]) == [0, -1]


@pytest.mark.parametrize("label", list(DISC))
def test_discriminant_and_trace_form(instance, label):
    L = instance(label).L
    assert L.discriminant == DISC[label]
    # independent: determinant of the trace pairing on the integral basis
    B = L.O.basis()
    assert det([[(x * y).trace() for y in B] for x in B]) == DISC[label]


@pytest.mark.parametrize("label", list(DISC))
def test_automorphisms_form_a_group(instance, label):
    L = instance(label).L
    names = {a.then(b) for a in L.automorphisms for b in L.automorphisms}
    assert names == {a.matrix for a in L.automorphisms}
    x = L.O.elt([1, 2, -1, 3])
    y = L.O.elt([0, -1, 4, 1])
    for a in L.automorphisms:
        assert a(x * y) == a(x) * a(y)
        assert a(x + y) == a(x) + a(y)


@pytest.mark.parametrize("label", list(DISC))
def test_relative_norm_and_trace(instance, label):
    inst = instance(label)
    ext, K = inst.ext, inst.K
    x = inst.L.O.elt([2, -1, 1, 3])
    n = ext.rel_norm(x)
    assert K.norm(n) == x.norm()
    assert ext.in_base(ext.embed(ext.rel_trace(x)))
    # on K the norm is the power
    k = K.elt(3, -2)
    assert ext.rel_norm(ext.embed(k)) == k ** inst.degree


@pytest.mark.parametrize("label", list(DISC))
def test_different_norm_is_discriminant(instance, label):
    L = instance(label).L
    assert L.different.norm() == DISC[label]


@pytest.mark.parametrize("label", list(DISC))
def test_prime_factorisation_in_L(instance, label):
    inst = instance(label)
    ext = inst.ext
    for p in inst.K.primes_up_to(30):
        A = ext.extend_ideal(p)
        prod = inst.L.unit_ideal()
        for P, e in ext.factor(A).items():
            prod = prod * P ** e
        assert prod == A
