import random

import pytest

from cmforge.descent import (ClassDependenceFailure, DescentDatum, build_t, hilbert90_solve,
                             minimal_model_verdict, synthetic_datum, trivial_datum)

LABELS = ["Q(i)", "Q(sqrt-5)/H", "Q(zeta12)/Q(i)"]


def test_trivial_datum(full):
    fl = full("Q(sqrt-5)/H")
    cy = build_t(trivial_datum(fl))
    assert cy.is_trivial()
    beta = hilbert90_solve(cy)
    assert beta == fl.inst.degree
    v = minimal_model_verdict(trivial_datum(fl), fl.inst.conductor, beta)
    assert v.generator == 1 and v.status == "global minimal model"


def test_one_plus_i_datum_d5(full):
    fl = full("Q(sqrt-5)/H")
    inst = fl.inst
    b0 = fl.witnesses[0].theta           # 1 + i
    cy = build_t(synthetic_datum(fl, b0))
    for s in inst.ext.G:
        assert cy(s) == s(b0) / b0
    beta = hilbert90_solve(cy)
    for s in inst.ext.G:
        assert cy(s) * s(beta) == beta
    # the splitting is b0^{-1} up to K^x
    assert inst.ext.in_base(beta * b0)


@pytest.mark.parametrize("label", LABELS)
def test_random_synthetic_data(full, label):
    fl = full(label)
    inst = fl.inst
    rng = random.Random(7)
    bases = [a for a in inst.K.ideals_up_to(20) if fl.partial._coprime(a)]
    for _ in range(5):
        b0 = inst.L.O.elt([rng.randint(-4, 4) for _ in range(inst.L.n)])
        if b0.is_zero():
            continue
        datum = synthetic_datum(fl, b0, rng.choice(bases))
        cy = build_t(datum)
        beta = hilbert90_solve(cy)
        v = minimal_model_verdict(datum, inst.conductor, beta)
        assert v.found
        assert inst.L.O.ideal([v.generator]) == datum.T or inst.conductor != inst.K.unit_ideal()
        assert inst.ext.extend_ideal(v.descended) == inst.L.O.ideal([beta]) * datum.T


def test_lambda_cocycle_pairs(full):
    fl = full("Q(sqrt-5)/H")
    b0 = fl.inst.L.O.elt([1, 2, 0, -1])
    d = synthetic_datum(fl, b0)
    ids = [a for a in fl.inst.K.ideals_up_to(20)][:6]
    for a in ids:
        d.check(a)
        for b in ids:
            d.check_pair(a, b)


def test_class_dependence_detected(full):
    fl = full("Q(sqrt-5)/H")
    inst = fl.inst
    p3 = inst.K.decompose_prime(3)["primes"][0]

    def lam(a):
        # correct on everything except ideals divisible by p3, where a unit sneaks in
        v = fl(a)
        return -v if p3.contains_ideal(a) else v
    with pytest.raises(ClassDependenceFailure):
        build_t(DescentDatum(inst.unit_ideal_L(), lam, fl))
