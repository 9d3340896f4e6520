import pytest

from cmforge.classfield import divisors
from cmforge.cmmodel import (InadmissibleTwist, NotAdmissible, AdmissibleCharacter, classification_roundtrip,
                             everywhere_good_reduction_test, good_reduction, hecke_value, isogenous,
                             isogeny_degree, isomorphic, non_shimura_twist, serre_tensor, shimura_prime,
                             shimura_type_test, torsion_submodules)
from cmforge.quadfield import ImagQuadField
from oracles import residue_count, stable_submodules, torsion_points

LABELS = ["Q(i)", "Q(sqrt-3)", "Q(sqrt-7)", "Q(sqrt-5)/H", "Q(zeta12)/Q(i)"]


@pytest.mark.parametrize("d", [-1, -3, -5, -7])
def test_isogeny_degree_is_norm(d):
    K = ImagQuadField(d)
    for a in K.ideals_up_to(30):
        assert isogeny_degree(K, a) == a.norm() == residue_count(K, a)


def test_serre_tensor_class_shift():
    K = ImagQuadField(-5)
    p2 = K.decompose_prime(2)["primes"][0]
    c0 = K.class_group.group.identity()
    c1 = serre_tensor(K, c0, p2)
    assert c1 != c0 and serre_tensor(K, c1, p2) == c0


@pytest.mark.parametrize("d", [-1, -5])
@pytest.mark.parametrize("m", [2, 3, 4, 6, 10, 12])
def test_torsion_submodules_are_divisor_torsion(d, m):
    K = ImagQuadField(d)
    found = torsion_submodules(K, m)
    divs = divisors(K, K.ideal(m))
    assert {a for _, a in found} == set(divs) and len(found) == len(divs)
    oracle = stable_submodules(K, m)
    assert oracle == {torsion_points(K, a, m) for a in divs}


def test_torsion_counts_gaussian():
    K = ImagQuadField(-1)
    assert len(torsion_submodules(K, 6)) == 6
    assert len(torsion_submodules(K, 2)) == 3


def test_shimura_prime_gaussian():
    K = ImagQuadField(-1)
    p = shimura_prime(K)
    assert p in {K.ideal(K.from_sqrt(2, 1)), K.ideal(K.from_sqrt(2, -1))}


@pytest.mark.parametrize("label", LABELS)
def test_construction_properties(construction, label):
    con = construction(label)
    curve = con.curve
    assert curve.rho.certify()["generators"] == len(curve.rho.images)
    assert shimura_type_test(curve)
    back = classification_roundtrip(curve.rho, curve.c)
    assert isomorphic(back, curve)
    ext = curve.space.inst.ext
    pO = ext.extend_ideal(con.prime)
    bad = [P for P in ext.primes_up_to(60) if not good_reduction(curve, P)]
    assert bad and all(P.contains_ideal(pO) for P in bad)


def test_gaussian_prime_is_2_plus_i(construction):
    con = construction("Q(i)")
    K = con.curve.K
    assert con.prime in {K.ideal(K.from_sqrt(2, 1)), K.ideal(K.from_sqrt(2, -1))}
    assert con.prime.norm() == 5


def test_positive_convention(construction):
    curve = construction("Q(sqrt-5)/H", e=1).curve
    assert curve.rho.e == 1 and shimura_type_test(curve)


def test_isogeny_class_is_rho(construction):
    curve = construction("Q(sqrt-5)/H").curve
    K = curve.K
    p2 = K.decompose_prime(2)["primes"][0]
    other = curve.serre_tensor(p2)
    assert isogenous(curve, other) and not isomorphic(curve, other)


def test_bad_images_rejected(construction):
    curve = construction("Q(i)").curve
    sp = curve.space
    rg = sp.res.group
    broken = [rg.op(x, tuple(int(i == 0) for i in range(rg.rank))) for x in curve.rho.images]
    with pytest.raises(NotAdmissible):
        AdmissibleCharacter(sp, broken, curve.rho.e).certify()


@pytest.mark.parametrize("label", ["Q(i)", "Q(sqrt-5)/H"])
def test_hecke_value(construction, label):
    curve = construction(label).curve
    sp = curve.space
    ext = sp.inst.ext
    for P in ext.primes_up_to(40):
        if not P.is_coprime(ext.extend_ideal(sp.m)):
            continue
        x = hecke_value(curve, P)
        assert sp.K.ideal(x) == ext.ideal_norm_to_base(P)
        break


def test_twist_breaks_shimura_type(construction):
    curve = construction("Q(sqrt-5)/H").curve
    tw, vals, x = non_shimura_twist(curve)
    assert not shimura_type_test(tw)
    assert tw.rho(x) != curve.rho(x)


def test_twist_needs_proper_extension(construction):
    with pytest.raises(InadmissibleTwist):
        non_shimura_twist(construction("Q(i)").curve)


def test_everywhere_good_criterion(construction):
    curve = construction("Q(i)").curve
    rep = everywhere_good_reduction_test(curve, construction("Q(i)").prime, 60)
    assert rep.verdict is True and rep.implication_holds
    rep = everywhere_good_reduction_test(construction("Q(sqrt-7)").curve, construction("Q(sqrt-7)").prime, 60)
    assert rep.verdict is False


def test_everywhere_good_criterion_inapplicable(construction):
    curve = construction("Q(sqrt-7)").curve
    rep = everywhere_good_reduction_test(curve, curve.K.ideal(2), 60)
    assert rep.verdict is None
