import itertools

import pytest

from cmforge.picocycle import NotInP, PartialL, choose_basis_primes, hasse_solve, rel_norm_sub

TWO = ["Q(sqrt-5)/H", "Q(zeta12)/Q(i)"]


def _ideals(full, n=20, bound=50):
    return [a for a in full.inst.K.ideals_up_to(bound) if full.partial._coprime(a)][:n]


def test_partial_gaussian_mod_3(instance):
    K = instance("Q(i)").K
    p = PartialL(K, K.ideal(3), K.ideal(3))
    inside = [a for a in K.ideals_up_to(40) if p.in_P(a)]
    assert len(inside) > 5
    for a in inside:
        v = p(a)
        assert K.ideal(v) == a and K.ideal(3).contains(v - 1)


def test_partial_rejects_nonprincipal(instance):
    K = instance("Q(sqrt-5)/H").K
    p = PartialL(K, K.unit_ideal(), K.unit_ideal())
    p2 = K.decompose_prime(2)["primes"][0]
    with pytest.raises(NotInP):
        p(p2)
    # values multiply on P
    for a, b in itertools.product([K.ideal(3), K.ideal(7), p2 * p2], repeat=2):
        assert p(a * b) == p(a) * p(b)


def test_basis_primes_d5(instance):
    inst = instance("Q(sqrt-5)/H")
    bp = choose_basis_primes(inst, inst.f)
    assert bp.r == 1 and bp.orders == [2]
    assert bp.primes[0] == inst.K.decompose_prime(2)["primes"][0]


def test_worked_case_d5(full):
    fl = full("Q(sqrt-5)/H")
    inst = fl.inst
    K, L = inst.K, inst.L
    p2 = K.decompose_prime(2)["primes"][0]
    w = fl.witnesses[0]
    assert w.n == 2 and w.t == K.elt(2) and w.pi.norm() == 4
    val = fl(p2)
    assert L.O.ideal([val]) == inst.ext.extend_ideal(p2)
    # 1 + i or its conjugate 1 - i; the deterministic tie-break gives sigma(1 + i)
    one_plus_i = w.theta
    assert val in {one_plus_i, fl.basis.sigmas[0](one_plus_i)}
    assert fl(K.ideal(2)) == 2


@pytest.mark.parametrize("label", TWO)
def test_cocycle_all_pairs(full, label):
    fl = full(label)
    ids = _ideals(fl)
    assert len(ids) == 20
    for a, b in itertools.product(ids, repeat=2):
        r = fl.cocycle_verify(a, b)
        assert r["a"] == str(a.h)


@pytest.mark.parametrize("label", TWO)
def test_values_one_mod_genus_ideal(full, label):
    fl = full(label)
    for a in _ideals(fl, 15):
        v = fl(a)
        assert fl.F.contains(v - 1)
        assert fl.inst.L.O.ideal([v]) == fl.inst.ext.extend_ideal(a)


def test_zeta12_conductor_three(full):
    fl = full("Q(zeta12)/Q(i)")
    K = fl.inst.K
    assert fl.f == K.ideal(3)
    assert fl.witnesses[0].t == K.elt(-2) or fl.witnesses[0].t.norm() == 4


def test_hasse_solution_has_right_norm(full):
    fl = full("Q(zeta12)/Q(i)")
    inst, bp = fl.inst, fl.basis
    w = fl.witnesses[0]
    pi, _ = hasse_solve(inst, bp, 0, w.t, 64)
    assert rel_norm_sub(inst, bp.sigmas[0], w.n, pi) == w.t
