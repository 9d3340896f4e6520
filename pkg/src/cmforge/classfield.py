"""Verified abelian extensions of K: Artin dictionary, conductor, genus ideal, ray classes of L."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import factorial, isqrt
from typing import Optional, Sequence

from .catalog import ExtensionData, InstanceCatalogEntry
from .exact import FiniteAbelianGroup, GroupHom
from .nfield import Automorphism, NumberField, RelativeExtension
from .order import Elt, Ideal, residue_pow
from .quadfield import (ImagQuadField, NotCoprime, RayClassGroup, ResidueGroup, SearchExhausted,
                        _ideal_key)

# rational upper bound for 4/pi used in the Minkowski bound
FOUR_OVER_PI_UPPER = Fraction(12733, 10000)


class InstanceRejected(ValueError):
    pass


class DescentFailure(ArithmeticError):
    pass


class CatalogMissingSubfield(LookupError):
    pass


def quadratic_as_field(K: ImagQuadField) -> NumberField:
    """``K`` as a :class:`NumberField` with root ``omega``."""
    return NumberField([K.c0, -K.D, 1], [[1], [0, 1]], {"id": [0, 1], "conj": [K.D, -1]},
                       label=f"Q(sqrt{K.d})")


def k_element(K: ImagQuadField, pair: Sequence[Fraction]) -> Elt:
    return K.from_sqrt(pair[0], pair[1])


def k_ideal(K: ImagQuadField, gens) -> Ideal:
    return K.ideal(*[k_element(K, g) for g in gens])


def divisors(K: ImagQuadField, a: Ideal) -> list[Ideal]:
    """All integral divisors of an integral ideal, sorted by (norm, HNF)."""
    fac = list(K.factor(a).items()) if a != K.unit_ideal() else []
    out = []
    for exps in product(*(range(e + 1) for _, e in fac)):
        d = K.unit_ideal()
        for (q, _), k in zip(fac, exps):
            d = d * q ** k
        out.append(d)
    return sorted(out, key=_ideal_key)


@dataclass
class UnitData:
    """Generators of ``O_L^x``: a root of unity and fundamental units."""

    torsion: Elt
    torsion_order: int
    fundamental: list[Elt]

    @property
    def generators(self) -> list[Elt]:
        return [self.torsion] + list(self.fundamental)


@dataclass
class AbelianFieldInstance:
    label: str
    entry: InstanceCatalogEntry
    K: ImagQuadField
    ext: RelativeExtension
    f: Ideal
    ray: RayClassGroup
    sigma_basis: list[Automorphism]
    units: UnitData
    checks: dict = field(default_factory=dict)
    _capitulation: dict = field(default_factory=dict, repr=False)

    @property
    def L(self) -> NumberField:
        return self.ext.L

    @property
    def degree(self) -> int:
        return self.ext.degree

    # Artin map ----------------------------------------------------------------
    def class_to_aut(self, e: Sequence[int]) -> Automorphism:
        out = self.ext.identity
        for s, k in zip(self.sigma_basis, e):
            out = self.ext.compose(self.ext.aut_pow(s, k), out)
        return out

    @cached_property
    def aut_to_class(self) -> dict:
        return {self.class_to_aut(e).name: e for e in self.ray.group.elements()}

    def artin_symbol(self, a: Ideal) -> Automorphism:
        """``sigma_a`` for an ideal coprime to the modulus."""
        return self.class_to_aut(self.ray.artin_class(a))

    def frobenius(self, p: Ideal) -> Automorphism:
        return self.ext.frobenius(p)

    # ideals -----------------------------------------------------------------
    @cached_property
    def conductor(self) -> Ideal:
        return conductor(self)

    @cached_property
    def genus_ideal(self) -> Ideal:
        return genus_ideal(self)

    @cached_property
    def genus_identity_exact(self) -> bool:
        """Whether ``f_{L/K} O_L = D_{L/K} F_{L/K} O_L`` holds on the nose."""
        lhs = self.ext.extend_ideal(self.conductor)
        rhs = self.ext.relative_different * self.ext.extend_ideal(self.genus_ideal)
        return lhs == rhs

    def mixed_conductor(self, H: Sequence[Automorphism]) -> Ideal:
        return mixed_conductor(self, H)

    def unit_ideal_L(self) -> Ideal:
        return self.L.unit_ideal()

    def capitulation(self, cap: int = 8) -> list:
        """Prime lifts ``q_j`` of the class-group basis of ``K`` with generators of ``q_j O_L``."""
        if cap not in self._capitulation:
            lifts = self.K.ray_class_group(self.K.unit_ideal()).class_lifts
            self._capitulation[cap] = [(q, search_generator(self.L, self.ext.extend_ideal(q), cap))
                                       for q in lifts]
        return self._capitulation[cap]


# ---------------------------------------------------------------------------

def _build_extension(K: ImagQuadField, data: Optional[ExtensionData]):
    if data is None:
        L = quadratic_as_field(K)
        ext = RelativeExtension(K, L, [0, 1])
        units = UnitData(ext.embed(K.unit_generator), K.w, [])
        return ext, units
    if data.class_number != 1:
        raise InstanceRejected("only class fields of class number one are supported")
    L = NumberField(data.polynomial, data.basis, data.automorphisms, label=data.name)
    ext = RelativeExtension(K, L, data.omega)
    units = UnitData(L.from_power(data.torsion_unit), data.torsion_order,
                     [L.from_power(u) for u in data.fundamental_units])
    return ext, units


def minkowski_bound(L: NumberField) -> int:
    """Integer upper bound for the Minkowski constant of a totally complex field."""
    n = L.n
    r2 = n // 2
    disc = abs(L.discriminant)
    root = isqrt(disc)
    if root * root < disc:
        root += 1
    m = FOUR_OVER_PI_UPPER ** r2 * Fraction(factorial(n), n ** n) * root
    return int(m)


def verify_class_number_one(ext: RelativeExtension, search_bound: int = 4) -> dict:
    """Certificate that ``Cl(L)`` is trivial: every prime below the Minkowski bound is principal."""
    if ext.L.n == 2:
        if ext.K.class_number != 1:
            raise InstanceRejected("L = K but K has nontrivial class group")
        return {"method": "reduced forms", "class_number": 1}
    bound = minkowski_bound(ext.L)
    gens = {}
    for P in ext.primes_up_to(bound):
        g = ext.L.bounded_search_principal(P, search_bound)
        if g is None:
            raise InstanceRejected(f"prime {P} below the Minkowski bound has no generator found")
        gens[str(P)] = g
    return {"method": "minkowski", "bound": bound, "primes_checked": len(gens)}


def verify_units(ext: RelativeExtension, units: UnitData, search_bound: int = 2,
                 max_exp: int = 12) -> dict:
    """Check the unit generators and that small units lie in the group they generate."""
    L = ext.L
    z = units.torsion
    if z ** units.torsion_order != 1 or any(z ** k == 1 for k in range(1, units.torsion_order)):
        raise InstanceRejected("torsion unit has the wrong order")
    for u in units.fundamental:
        if abs(u.norm()) != 1:
            raise InstanceRejected(f"claimed unit {u} has norm {u.norm()}")
    if len(units.fundamental) > 1:
        raise InstanceRejected("unit rank above one is not supported")
    mu = {z ** k for k in range(units.torsion_order)}
    eps = units.fundamental[0] if units.fundamental else None
    found = L.bounded_search_units(search_bound)
    for x in found:
        ok = x in mu
        if not ok and eps is not None:
            ok = any(x * eps ** -k in mu for k in range(-max_exp, max_exp + 1))
        if not ok:
            raise InstanceRejected(f"unit {x} lies outside the claimed unit group")
    return {"units_found": len(found), "rank": len(units.fundamental),
            "torsion_order": units.torsion_order}


def verify_instance(entry: InstanceCatalogEntry, norm_bound: int = 200,
                    min_primes: int = 25) -> AbelianFieldInstance:
    """Load a catalog entry and check every claim about it; raises :class:`InstanceRejected`."""
    try:
        K = ImagQuadField(entry.d)
        f = k_ideal(K, entry.modulus)
        if not f.is_integral():
            raise InstanceRejected("modulus must be integral")
        ext, units = _build_extension(K, entry.extension)
    except InstanceRejected:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise InstanceRejected(str(exc)) from exc
    ray = K.ray_class_group(f)
    if ray.order != ray.formula_order():
        raise InstanceRejected("ray class group order disagrees with the exact sequence")
    if ray.order != ext.degree:
        raise InstanceRejected(f"|Cl_f(K)| = {ray.order} but [L:K] = {ext.degree}")
    checks: dict = {"ray_class_invariants": list(ray.group.invariants)}

    # Frobenius at unramified primes, split/principal cross-check, dictionary
    primes = K.primes_up_to(norm_bound, coprime_to=f)
    if len(primes) < min_primes:
        raise InstanceRejected(f"only {len(primes)} primes below {norm_bound}")
    table: dict = {}
    split_checked = 0
    for p in primes:
        try:
            s = ext.frobenius(p)
        except ArithmeticError as exc:
            raise InstanceRejected(f"Frobenius at {p}: {exc}") from exc
        cls = ray.artin_class(p)
        if table.setdefault(cls, s.name) != s.name:
            raise InstanceRejected(f"Artin map not well defined on class {cls}")
        splits = _splits_completely(ext, p)
        if splits != (s == ext.identity) or splits != (cls == ray.group.identity()):
            raise InstanceRejected(f"splitting of {p} disagrees with its Artin class")
        split_checked += 1
    reps = ray.prime_representatives(norm_bound)
    sigma_basis = [ext.frobenius(q) for q in reps]
    inst = AbelianFieldInstance(entry.label, entry, K, ext, f, ray, sigma_basis, units, checks)
    for cls, name in table.items():
        if inst.class_to_aut(cls).name != name:
            raise InstanceRejected("Artin dictionary is not a homomorphism")
    if len({inst.class_to_aut(e).name for e in ray.group.elements()}) != ext.degree:
        raise InstanceRejected("Artin dictionary is not injective")
    checks["primes_checked"] = split_checked
    checks["class_number_L"] = verify_class_number_one(ext)
    checks["units"] = verify_units(ext, units)
    checks["conductor"] = str(inst.conductor)
    checks["genus_identity_exact"] = inst.genus_identity_exact
    if not ext.L.different.is_integral():
        raise InstanceRejected("different is not integral")
    return inst


def _splits_completely(ext: RelativeExtension, p: Ideal) -> bool:
    """Decided by certificate: ``[L:K]`` primes of norm ``Np``, or a basis element
    whose ``Np``-th power differs from it modulo ``p O_L``."""
    q = int(p.norm())
    primes = ext.primes_over(p)
    if len(primes) == ext.degree and all(P.norm() == q for P in primes):
        return True
    pe = ext.extend_ideal(p)
    if any(not pe.contains(residue_pow(w, q, pe) - w) for w in ext.L.O.basis()):
        return False
    raise ArithmeticError(f"no splitting certificate for {p}")


# ---------------------------------------------------------------------------

def conductor(inst: AbelianFieldInstance) -> Ideal:
    """Smallest ``m | f`` such that every ``u = 1 mod m`` (coprime to ``f``) has trivial Artin symbol."""
    K, f, ray = inst.K, inst.f, inst.ray
    residues = [r for r in f.residues() if _coprime(K, r, f)] if f != K.unit_ideal() else []
    good = []
    for m in divisors(K, f):
        ok = True
        for r in residues:
            x = K.O.elt(r)
            if m == K.unit_ideal() or m.contains(x - 1):
                if inst.class_to_aut(ray.residue_class(r)) != inst.ext.identity:
                    ok = False
                    break
        if ok:
            good.append(m)
    best = good[0]
    if any(not best.contains_ideal(m) for m in good):
        raise ArithmeticError("admissible moduli are not closed under gcd")
    return best


def _coprime(K: ImagQuadField, r, f: Ideal) -> bool:
    x = K.O.elt(r)
    return not x.is_zero() and (K.ideal(x) + f) == K.unit_ideal()


def genus_ideal(inst: AbelianFieldInstance) -> Ideal:
    """Largest ``F`` of ``K`` with ``F O_L | f_{L/K} O_L D_{L/K}^{-1}``."""
    ext = inst.ext
    J = ext.extend_ideal(inst.conductor) * ext.relative_different.inverse()
    below = ext.contract_ideal(J) if J.is_integral() else None
    if below is None:
        raise ArithmeticError("conductor is not divisible by the different")
    for F in reversed(divisors(inst.K, below)):
        if ext.extend_ideal(F).contains_ideal(J):
            return F
    raise ArithmeticError("no genus ideal")


def mixed_conductor(inst: AbelianFieldInstance, H: Sequence[Automorphism]) -> Ideal:
    """``D_{L/K'} F_{L/K} O_L`` for ``K'`` the fixed field of ``H``, checked to come from ``K'``."""
    ext = inst.ext
    names = {s.name for s in H}
    for s in H:
        for t in H:
            if ext.compose(s, t).name not in names:
                raise CatalogMissingSubfield("H is not a subgroup of G(L/K)")
    out = ext.different_over(H) * ext.extend_ideal(inst.genus_ideal)
    if any(out.apply(s.matrix) != out for s in ext.G):
        raise DescentFailure("mixed conductor is not Galois invariant")
    if ext.contract_to(out, H) != out:
        raise DescentFailure("mixed conductor is not extended from the subfield")
    return out


# ---------------------------------------------------------------------------
# generators of principal ideals of L

def search_generator(L: NumberField, A: Ideal, cap: int = 8) -> Elt:
    """Generator of ``A`` by a box search whose bound doubles from 2 up to ``cap``."""
    den = A.den
    B = A * den
    g, bound = None, 2
    while g is None and bound <= cap:
        g = L.bounded_search_principal(B, bound)
        bound *= 2
    if g is None:
        raise SearchExhausted(f"generator of {A}", cap)
    return g / den


def extended_generator(inst: "AbelianFieldInstance", a: Ideal, cap: int = 8) -> Optional[Elt]:
    """Generator of ``a O_L`` from a generator in ``K`` and the capitulation of class-group lifts."""
    K, ext = inst.K, inst.ext
    k = K.ideal_class(a)
    rest, gen = a, ext.L.O.one
    for (q, gq), kj in zip(inst.capitulation(cap), k):
        if kj:
            rest = rest * q ** (-kj)
            gen = gen * gq ** kj
    den = rest.den
    gam = K.is_principal(rest * den)
    if gam is None:
        return None
    return ext.embed(gam / den) * gen


def principal_generator(inst: "AbelianFieldInstance", A: Ideal, cap: int = 8) -> Elt:
    """A generator of the (fractional) ideal ``A`` of ``L``, exactly verified."""
    ext = inst.ext
    g = None
    a = ext.contract_ideal(A * A.den) if A.den != 1 else ext.contract_ideal(A)
    if ext.extend_ideal(a) == A * A.den:
        g = extended_generator(inst, a, cap)
        if g is not None:
            g = g / A.den
    if g is None:
        g = search_generator(inst.L, A, cap)
    if ext.L.O.ideal([g]) != A:
        raise ArithmeticError("generator check failed")
    return g


class LRayClassGroup:
    """``Cl_m(L)`` for ``L`` of class number one: ``(O_L/mO_L)^x`` modulo units."""

    def __init__(self, inst: AbelianFieldInstance, m: Ideal, search_cap: int = 8):
        self.inst, self.m = inst, m
        ext = inst.ext
        self.mL = ext.extend_ideal(m)
        self.factors = ext.factor(self.mL) if self.mL != ext.L.unit_ideal() else {}
        self.residues = ResidueGroup(ext.L.O, self.mL, self.factors)
        unit_logs = [self.residues.log(u) for u in inst.units.generators]
        self.group, self._proj = self.residues.group.quotient(unit_logs)
        self.search_cap = search_cap
        self._gen_cache: dict = {}
        self.ray_K = inst.K.ray_class_group(m)

    @property
    def order(self) -> int:
        return self.group.order

    def class_of_element(self, x: Elt) -> tuple:
        """Class of the principal ideal ``(x)`` for ``x`` coprime to ``m``."""
        return self._proj(self.residues.log(x))

    def generator(self, A: Ideal) -> Elt:
        if A in self._gen_cache:
            return self._gen_cache[A]
        ext = self.inst.ext
        g = None
        if A.den == 1 and ext.extend_ideal(ext.contract_ideal(A)) == A:
            g = self._extended_generator(ext.contract_ideal(A))
        if g is None:
            g = self._search_generator(A)
        self._gen_cache[A] = g
        return g

    def _search_generator(self, A: Ideal) -> Elt:
        return search_generator(self.inst.L, A, self.search_cap)

    def _extended_generator(self, a: Ideal) -> Optional[Elt]:
        return extended_generator(self.inst, a, self.search_cap)

    def class_of(self, A: Ideal) -> tuple:
        if not (A + self.mL == self.inst.L.unit_ideal() or A.den != 1):
            raise NotCoprime(f"{A} is not coprime to the modulus")
        return self.class_of_element(self.generator(A))

    def basis_element(self, i: int) -> Elt:
        """An element of ``O_L`` whose principal ideal lies in SNF basis class ``i``."""
        # quotient generators are the SNF basis of the residue group
        lift = self.residues.group.reduce(self.group.basis_in_generators(i))
        return self.inst.L.O.elt(self.residues.exp(lift))

    def norm_class(self, x: Elt) -> tuple:
        """``Cl_m(K)`` class of ``(N_{L/K} x)``."""
        return self.ray_K.residue_class(self.inst.ext.rel_norm(x))

    @cached_property
    def norm_map(self) -> GroupHom:
        imgs = [self.norm_class(self.basis_element(i)) for i in range(self.group.rank)]
        hom = GroupHom(self.group, self.ray_K.group, imgs)
        if not hom.is_well_defined():
            raise ArithmeticError("norm map is not well defined on Cl_m(L)")
        return hom

    def norm_kernel(self) -> frozenset:
        return self.norm_map.kernel()

    def norm_kernel_generators(self) -> list:
        return self.norm_map.kernel_generators()

    def inertia_image(self, P: Ideal) -> "InertiaImage":
        return inertia_image(self, P)


@dataclass
class InertiaImage:
    prime: Ideal
    level: int
    generators: list
    subgroup: frozenset


def inertia_image(cl: LRayClassGroup, P: Ideal) -> InertiaImage:
    """Classes of ``(u~)`` with ``u~ = u mod P^k`` and ``u~ = 1`` away from ``P``."""
    k = cl.factors.get(P, 0)
    if k == 0:
        ident = cl.group.identity()
        return InertiaImage(P, 0, [], frozenset([ident]))
    rg = cl.residues
    j = list(cl.factors).index(P)
    off = sum(len(loc[2].group.invariants) for loc in rg.local[:j])
    n_loc = len(rg.local[j][2].group.invariants)
    gens = []
    for i in range(n_loc):
        vec = [0] * len(rg.group.labels)
        vec[off + i] = 1
        gens.append(cl._proj(rg.group.element(vec)))
    return InertiaImage(P, k, gens, cl.group.subgroup_generated(gens))
