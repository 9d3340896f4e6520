import pytest

from cmforge.catalog import ConfigError, load_catalog, parse_catalog
from cmforge.classfield import (InstanceRejected, LRayClassGroup, extended_generator, principal_generator, verify_instance)

EXT = ["Q(sqrt-5)/H", "Q(zeta12)/Q(i)"]


def test_bundled_catalog_labels(catalog):
    assert set(catalog) >= {"Q(i)", "Q(sqrt-3)", "Q(sqrt-7)", "Q(sqrt-23)", "Q(sqrt-5)/H",
                            "Q(zeta12)/Q(i)", "Q(i)/(2+i)"}


@pytest.mark.parametrize("raw", [{}, {"schema": 2, "instance": []}, {"schema": 1, "instance": [{"label": "x"}]},
                                 {"schema": 1, "instance": [{"label": "x", "d": "y", "modulus": [[1, 0]]}]}])
def test_malformed_catalog(raw):
    with pytest.raises(ConfigError):
        parse_catalog(raw)


def test_unreadable_catalog(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("schema = [")
    with pytest.raises(ConfigError):
        load_catalog(p)


def test_d23_rejected_without_extension(catalog):
    with pytest.raises(InstanceRejected):
        verify_instance(catalog["Q(sqrt-23)"])


def test_hilbert_class_field_d5(instance):
    inst = instance("Q(sqrt-5)/H")
    K, ext = inst.K, inst.ext
    assert inst.degree == 2 and inst.conductor == K.unit_ideal()
    assert inst.genus_ideal == K.unit_ideal()
    # capitulation: the prime above 2 becomes principal, generated by 1 + i
    p2 = K.decompose_prime(2)["primes"][0]
    assert K.is_principal(p2) is None
    g = principal_generator(inst, ext.extend_ideal(p2))
    assert inst.L.O.ideal([g]) == ext.extend_ideal(p2)
    assert g.norm() == 4


def test_zeta12_over_gaussian(instance):
    inst = instance("Q(zeta12)/Q(i)")
    K = inst.K
    assert inst.conductor == K.ideal(3)
    assert inst.genus_ideal == K.unit_ideal()
    assert not inst.genus_identity_exact


@pytest.mark.parametrize("label", EXT)
def test_frobenius_matches_splitting(instance, label):
    inst = instance(label)
    ext = inst.ext
    for p in inst.K.primes_up_to(60, coprime_to=inst.f):
        s = inst.artin_symbol(p)
        splits = len(ext.primes_over(p)) == inst.degree
        assert splits == (s == ext.identity)
        assert s.name == ext.frobenius(p).name


@pytest.mark.parametrize("label", EXT)
def test_relative_norm_of_extended_ideals(instance, label):
    inst = instance(label)
    ext = inst.ext
    for a in inst.K.ideals_up_to(20):
        assert ext.ideal_norm_to_base(ext.extend_ideal(a)) == a ** inst.degree


@pytest.mark.parametrize("label", EXT)
def test_extended_generators(instance, label):
    inst = instance(label)
    for a in inst.K.ideals_up_to(25):
        g = extended_generator(inst, a)
        assert g is not None
        assert inst.L.O.ideal([g]) == inst.ext.extend_ideal(a)


def test_ray_lift_group_norm_map(instance):
    inst = instance("Q(sqrt-5)/H")
    K = inst.K
    cl = LRayClassGroup(inst, K.ideal(3))
    h = cl.norm_map
    assert h.is_well_defined()
    assert h.kernel_order() * h.image_order() == cl.order
    assert {x for x in cl.group.elements() if h(x) == h.dst.identity()} == set(h.kernel())
