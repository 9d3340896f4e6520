import pytest

from cmforge.cmmodel import non_shimura_twist
from cmforge.froblift import (NotShimuraType, assemble_nu, build_family, build_lift, choose_exceptional_modulus,
                              epsilon_candidates, family_implies_shimura, perturb)
from cmforge.quadfield import ImagQuadField, NotCoprime

LABELS = ["Q(i)", "Q(sqrt-3)", "Q(sqrt-7)", "Q(sqrt-5)/H", "Q(zeta12)/Q(i)"]

_fams = {}


@pytest.fixture
def family(construction):
    def get(label):
        if label not in _fams:
            _fams[label] = build_family(construction(label).curve, 60, generate=True)
        return _fams[label]
    return get


def test_epsilon_unique_when_units_inject():
    K = ImagQuadField(-1)
    assert len(epsilon_candidates(K, K.ideal(3))) == 1


def test_epsilon_ambiguous_mod_2():
    K = ImagQuadField(-7)
    assert len(epsilon_candidates(K, K.ideal(2))) == 2


@pytest.mark.parametrize("label", LABELS)
def test_family_commutes_and_implies_shimura(family, label):
    fam = family(label)
    assert fam.lifts and len(fam.certificates) >= len(fam.lifts)
    assert fam.generates()
    assert family_implies_shimura(fam)
    for lift in fam.lifts.values():
        assert lift.degree == lift.prime.norm()
        assert lift.epsilon == 1


@pytest.mark.parametrize("label", ["Q(i)", "Q(sqrt-5)/H"])
def test_perturbed_family_fails(family, label):
    fam = family(label)
    rank = fam.curve.space.res.group.rank
    delta = tuple(int(i == 0) for i in range(rank))
    assert not family_implies_shimura(perturb(fam, fam.primes()[0], delta))


def test_exceptional_modulus_injective(construction):
    curve = construction("Q(i)").curve
    g = choose_exceptional_modulus(curve)
    assert curve.K.unit_map_injective(g) and g.contains_ideal(curve.space.m)


def test_lift_rejects_modulus_prime(construction):
    con = construction("Q(i)")
    with pytest.raises(NotCoprime):
        build_lift(con.curve, con.prime)


@pytest.mark.parametrize("label", ["Q(sqrt-5)/H", "Q(zeta12)/Q(i)"])
def test_non_shimura_twist_has_no_lifts(family, label):
    fam = family(label)
    tw = non_shimura_twist(fam.curve)[0]
    with pytest.raises(NotShimuraType):
        for q in fam.primes():
            build_lift(tw, q, fam.g)


def test_assemble_nu_orders_agree(family):
    fam = family("Q(sqrt-5)/H")
    sp = fam.curve.space
    K = sp.K
    ideals = [a for a in K.ideals_up_to(40) if a.is_coprime(sp.m) and a != K.unit_ideal()][:8]
    for a in ideals:
        nu = assemble_nu(fam, a)
        assert len(nu.orders) == 2
        if nu.u is not None:
            # the value is the character on any prime above, for split primes of a
            fac = K.factor(a)
            if len(fac) == 1 and list(fac.values()) == [1]:
                lift = fam.lifts.get(a)
                if lift is not None:
                    assert nu.u == lift.u
