"""Finite-level model of CM elliptic curves as pairs (rho mod m, Steinitz class).

A curve over ``L`` is recorded by a character ``rho: Cl_m(L) -> (O_K/m)^x``
satisfying the admissibility square with the norm map, together with an ideal
class ``c`` of ``K``.  The sign convention ``e`` fixes how ``rho`` enters the
square; the default ``e = -1`` is the one for which the retraction
construction is admissible.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import gcd
from typing import Optional, Sequence

from .classfield import AbelianFieldInstance, InertiaImage, LRayClassGroup
from .exact import GroupHom
from .order import Elt, Ideal
from .quadfield import ImagQuadField, NotCoprime, ResidueGroup, SearchExhausted, _ideal_key

DEFAULT_E = -1


class InadmissibleTwist(ValueError):
    pass


class NotAdmissible(ValueError):
    pass


class AuxiliaryPrimeClash(ValueError):
    pass


# ---------------------------------------------------------------------------
# Serre tensor, torsion

def serre_tensor(K: ImagQuadField, c: tuple, a: Ideal) -> tuple:
    """Steinitz class of ``a (x) E`` from that of ``E``: multiply by ``[a]``."""
    if a.norm() == 0:
        raise ValueError("zero ideal")
    cl = K.class_group.group
    return cl.op(c, K.ideal_class(a))


def isogeny_degree(K: ImagQuadField, a: Ideal, lattice: Optional[Ideal] = None) -> int:
    """Index ``[a^{-1} L : L]`` of lattices, from the change-of-basis determinant."""
    lam = lattice if lattice is not None else K.unit_ideal()
    big = a.inverse() * lam
    # coordinates of the basis of lam in the basis of big
    from .exact import det, inverse
    bb = [b.coords_fraction() for b in big.basis()]
    lb = [b.coords_fraction() for b in lam.basis()]
    binv = inverse([[bb[j][i] for j in range(2)] for i in range(2)])
    coords = [[sum(binv[i][k] * lb[j][k] for k in range(2)) for j in range(2)] for i in range(2)]
    idx = abs(det(coords))
    if idx.denominator != 1:
        raise ArithmeticError("lattice is not contained in its scaled copy")
    return int(idx)


@dataclass(frozen=True)
class TorsionModule:
    """``O_K / a`` as a rank-two abelian group with the action of ``omega``."""

    ideal: Ideal
    hnf: tuple
    omega_action: tuple

    @property
    def cardinality(self) -> int:
        return int(self.ideal.norm())


def torsion_module(K: ImagQuadField, a: Ideal) -> TorsionModule:
    om = K.omega.mul_matrix()
    return TorsionModule(a, a.h, tuple(tuple(int(x) for x in r) for r in om))


def torsion_submodules(K: ImagQuadField, m: int) -> list[tuple[tuple, Ideal]]:
    """O_K-stable subgroups of ``(1/m)O_K / O_K`` found by brute force, each paired with
    the ideal ``a | (m)`` whose torsion ``a^{-1}/O_K`` it equals.

    Subgroups are enumerated as lattices ``m Z^2 <= H <= Z^2`` (``H`` scaled by ``m``)
    and kept when stable under multiplication by ``omega``.
    """
    if m < 1:
        raise ValueError("m must be positive")
    om = K.omega.mul_matrix()
    out = []
    for a in range(1, m + 1):
        if m % a:
            continue
        for c in range(1, m + 1):
            if m % c:
                continue
            for b in range(c):
                # columns (a, b), (0, c); need (m, 0) in the span
                if ((m // a) * b) % c:
                    continue
                cols = [(a, b), (0, c)]
                if not all(_in_lattice(_apply(om, v), a, b, c) for v in cols):
                    continue
                lam = Ideal.from_lattice(K.O, [[Fraction(x, m) for x in v] for v in cols])
                # lam = a_ideal^{-1}: the torsion subgroup a^{-1}/O_K
                div = lam.inverse()
                if not div.is_integral() or not div.contains_ideal(K.ideal(m)):
                    raise ArithmeticError("stable subgroup does not come from a divisor of (m)")
                out.append(((a, b, c), div))
    return sorted(out, key=lambda t: _ideal_key(t[1]))


def _apply(mat, v):
    return tuple(int(sum(mat[i][j] * v[j] for j in range(2))) for i in range(2))


def _in_lattice(v, a, b, c) -> bool:
    x, y = v
    if x % a:
        return False
    return (y - (x // a) * b) % c == 0


# ---------------------------------------------------------------------------

class CharacterSpace:
    """Data shared by all characters at one working modulus: ``Cl_m(L)``, ``(O_K/m)^x``."""

    def __init__(self, inst: AbelianFieldInstance, m: Ideal, aux: Sequence[Ideal] = (),
                 special: Optional[Ideal] = None):
        self.inst, self.m = inst, m
        self.K = inst.K
        self.aux = list(aux)
        self.special = special
        self.cl = LRayClassGroup(inst, m)
        self.ray_K = self.cl.ray_K
        self.res = self.ray_K.residues
        self._proj_cache: dict = {}

    # residues of K ------------------------------------------------------------
    def value_residue(self, v: tuple) -> Elt:
        return self.K.O.elt(self.res.exp(v))

    def project(self, v: tuple, ell: Ideal) -> tuple:
        """Image of ``v`` in ``(O_K/ell)^x`` as an SNF vector (``ell | m``)."""
        rg = self._proj_group(ell)
        return rg.log(self.value_residue(v))

    def _proj_group(self, ell: Ideal) -> ResidueGroup:
        if ell not in self._proj_cache:
            if not ell.contains_ideal(self.m):
                raise ValueError("projection modulus must divide m")
            self._proj_cache[ell] = self.K.residue_group(ell)
        return self._proj_cache[ell]

    def unit_logs(self) -> list[tuple]:
        return [self.res.log(u) for u in self.K.units]

    def T(self, v: tuple) -> tuple:
        """``(O_K/m)^x -> Cl_m(K)``: class of ``(u~)``."""
        return self.ray_K.group.element(list(v) + [0] * (len(self.ray_K.group.labels) - len(v)))

    @cached_property
    def norm_images(self) -> list[tuple]:
        """``Cl_m(K)`` class of ``N(A)`` for each SNF basis class ``A`` of ``Cl_m(L)``."""
        return [self.cl.norm_class(self.cl.basis_element(i)) for i in range(self.cl.group.rank)]


@dataclass
class AdmissibleCharacter:
    space: CharacterSpace
    images: list            # SNF vectors in (O_K/m)^x, one per SNF basis class of Cl_m(L)
    e: int = DEFAULT_E
    certificate: dict = field(default_factory=dict)

    def __call__(self, x: tuple) -> tuple:
        rg = self.space.res.group
        out = rg.identity()
        for k, img in zip(x, self.images):
            out = rg.op(out, rg.pow(img, k))
        return out

    def __eq__(self, other):
        return (isinstance(other, AdmissibleCharacter) and self.space is other.space
                and [tuple(i) for i in self.images] == [tuple(i) for i in other.images])

    def hom(self) -> GroupHom:
        return GroupHom(self.space.cl.group, self.space.res.group, self.images)

    def certify(self) -> dict:
        """Homomorphism and admissibility on every SNF generator; raises :class:`NotAdmissible`."""
        sp = self.space
        if not self.hom().is_well_defined():
            raise NotAdmissible("images do not respect the relations of Cl_m(L)")
        rg = sp.res.group
        for i, img in enumerate(self.images):
            lhs = sp.norm_images[i]
            rhs = sp.T(rg.pow(img, self.e))
            if lhs != rhs:
                raise NotAdmissible(f"admissibility fails on generator {i}: {lhs} != {rhs}")
        self.certificate = {"generators": len(self.images), "e": self.e,
                            "modulus_norm": int(sp.m.norm())}
        return self.certificate

    def value_at(self, A: Ideal) -> tuple:
        return self(self.space.cl.class_of(A))

    def project(self, x: tuple, ell: Ideal) -> tuple:
        return self.space.project(self(x), ell)


@dataclass
class CMCurveModel:
    rho: AdmissibleCharacter
    c: tuple
    label: str = "E"

    @property
    def space(self) -> CharacterSpace:
        return self.rho.space

    @property
    def K(self) -> ImagQuadField:
        return self.space.K

    def serre_tensor(self, a: Ideal) -> "CMCurveModel":
        return replace(self, c=serre_tensor(self.K, self.c, a))

    def galois_transport(self, a: Ideal) -> "CMCurveModel":
        """``sigma_a^* E``: class ``[a]^{-1} c``; ``rho`` unchanged at this finite abelian level."""
        if not a.is_coprime(self.space.m) and a.den == 1:
            raise NotCoprime(f"{a} is not coprime to the working modulus")
        cl = self.K.class_group.group
        return replace(self, c=cl.op(self.c, cl.neg(self.K.ideal_class(a))))


def classification_roundtrip(rho: AdmissibleCharacter, c: tuple) -> CMCurveModel:
    """Build the curve attached to ``(rho, c)`` and check that both are recovered."""
    rho.certify()
    curve = CMCurveModel(rho, tuple(c))
    if curve.rho != rho or curve.c != tuple(c):
        raise AssertionError("classification is not bijective on this input")
    return curve


def isogenous(a: CMCurveModel, b: CMCurveModel) -> bool:
    return a.rho == b.rho


def isomorphic(a: CMCurveModel, b: CMCurveModel) -> bool:
    return a.rho == b.rho and a.c == b.c


# ---------------------------------------------------------------------------
# twists

def unit_character_images(space: CharacterSpace, units: Sequence[Elt]) -> list[tuple]:
    return [space.res.log(u) for u in units]


def twist(curve: CMCurveModel, chi_units: Sequence[Elt]) -> CMCurveModel:
    """Twist by ``chi: Cl_m(L) -> O_K^x`` given by its values (units) on the SNF basis."""
    sp = curve.space
    rg = sp.res.group
    if len(chi_units) != sp.cl.group.rank:
        raise InadmissibleTwist("one unit per generator of Cl_m(L) is required")
    for u in chi_units:
        if u not in sp.K.units:
            raise InadmissibleTwist(f"{u} is not a unit of K")
    chi = unit_character_images(sp, chi_units)
    images = [rg.op(a, b) for a, b in zip(chi, curve.rho.images)]
    rho = AdmissibleCharacter(sp, images, curve.rho.e)
    try:
        rho.certify()
    except NotAdmissible as exc:
        raise InadmissibleTwist(str(exc)) from exc
    return CMCurveModel(rho, curve.c, curve.label + "^chi")


def non_shimura_twist(curve: CMCurveModel) -> tuple[CMCurveModel, list[Elt], tuple]:
    """A unit-valued twist that is nontrivial on the kernel of the norm map.

    Returns the twisted curve, the character values on the SNF basis of
    ``Cl_m(L)`` and a kernel element on which the twist is nontrivial.
    """
    sp = curve.space
    grp = sp.cl.group
    if sp.inst.ext.degree == 1:
        raise InadmissibleTwist("L = K: the norm kernel is trivial, every character is of Shimura type")
    zeta, w = sp.K.unit_generator, sp.K.w
    kernel = sp.cl.norm_kernel_generators()
    # characters to mu_w: exponent a_i with a_i d_i = 0 mod w
    choices = [[a for a in range(w) if (a * d) % w == 0] for d in grp.invariants]
    for exps in product(*choices):
        if not any(exps):
            continue
        x = next((x for x in kernel if sum(a * k for a, k in zip(exps, x)) % w), None)
        if x is not None:
            vals = [zeta ** a for a in exps]
            return twist(curve, vals), vals, x
    raise InadmissibleTwist("every unit-valued character is trivial on the norm kernel")


# ---------------------------------------------------------------------------
# Hecke values, reduction

def hecke_value(curve: CMCurveModel, A: Ideal) -> Elt:
    """``x_A`` in ``K^x`` with ``(x_A) = N_{L/K}(A)`` and ``x_A = rho(A)^e mod m``."""
    sp = curve.space
    g = sp.cl.generator(A)
    n = sp.inst.ext.rel_norm(g)
    rg = sp.res.group
    target = rg.pow(curve.rho(sp.cl.class_of_element(g)), curve.rho.e)
    for u in sp.K.units:
        if sp.res.log(u * n) == target:
            return u * n
    raise SearchExhausted("unit adjustment of the Hecke value", sp.K.w)


def good_reduction_test(curve: CMCurveModel, P: Ideal, ell: Ideal) -> bool:
    """Inertia at ``P`` acts trivially on ``E[ell]`` (``ell`` an auxiliary prime not below ``P``)."""
    sp = curve.space
    below = sp.inst.ext.prime_below(P)
    if not ell.is_coprime(below):
        raise AuxiliaryPrimeClash(f"auxiliary prime {ell} lies under {P}")
    if not ell.contains_ideal(sp.m):
        raise ValueError("auxiliary prime must divide the working modulus")
    inertia: InertiaImage = sp.cl.inertia_image(P)
    ident = sp._proj_group(ell).group.identity()
    return all(curve.rho.project(g, ell) == ident for g in inertia.generators)


def auxiliaries_for(curve: CMCurveModel, P: Ideal) -> list[Ideal]:
    sp = curve.space
    below = sp.inst.ext.prime_below(P)
    return [a for a in sp.aux if a.is_coprime(below)]


def good_reduction(curve: CMCurveModel, P: Ideal) -> bool:
    """Good reduction at ``P`` decided with two auxiliary primes, which must agree."""
    auxs = auxiliaries_for(curve, P)[:2]
    if len(auxs) < 2:
        raise AuxiliaryPrimeClash("fewer than two auxiliary primes coprime to P")
    verdicts = {good_reduction_test(curve, P, a) for a in auxs}
    if len(verdicts) != 1:
        raise ArithmeticError(f"auxiliary primes disagree at {P}")
    return verdicts.pop()


def find_bad_prime(curve: CMCurveModel, bound: int = 100) -> Optional[Ideal]:
    for P in curve.space.inst.ext.primes_up_to(bound):
        if not good_reduction(curve, P):
            return P
    return None


def shimura_type_test(curve: CMCurveModel) -> bool:
    """``rho`` is trivial on the kernel of the norm ``Cl_m(L) -> Cl_m(K)``."""
    ident = curve.space.res.group.identity()
    return all(curve.rho(x) == ident for x in curve.space.cl.norm_kernel_generators())


@dataclass
class EverywhereGoodReport:
    verdict: Optional[bool]          # None: criterion not applicable
    reason: str
    spot_checks: dict = field(default_factory=dict)   # str(P) -> bool
    bad_outside_f: list = field(default_factory=list)
    bad_dividing_f: list = field(default_factory=list)

    @property
    def implication_holds(self) -> bool:
        """Criterion true implies good reduction at every checked prime not dividing ``f``."""
        return self.verdict is not True or not self.bad_outside_f


def everywhere_good_reduction_test(curve: CMCurveModel, f: Ideal, bound: int = 100) -> EverywhereGoodReport:
    """Criterion: ``E[f]`` rational (``rho`` trivial mod ``f``) and units inject mod ``f``.

    When the criterion holds, every prime of norm ``<= bound`` is spot-checked
    and primes with bad reduction are reported, split by whether they divide ``f``.
    """
    sp = curve.space
    K = sp.K
    if not f.contains_ideal(sp.m):
        return EverywhereGoodReport(None, "f does not divide the working modulus")
    if not K.unit_map_injective(f):
        return EverywhereGoodReport(None, "O_K^x -> (O_K/f)^x is not injective")
    grp = sp.cl.group
    ident = sp._proj_group(f).group.identity()
    rational = all(curve.rho.project(tuple(int(i == j) for j in range(grp.rank)), f) == ident
                   for i in range(grp.rank))
    if not rational:
        return EverywhereGoodReport(False, "E[f] is not rational over L")
    rep = EverywhereGoodReport(True, "criterion satisfied")
    for P in sp.inst.ext.primes_up_to(bound):
        ok = good_reduction(curve, P)
        rep.spot_checks[str(P.h)] = ok
        if not ok:
            (rep.bad_dividing_f if P.contains_ideal(sp.inst.ext.extend_ideal(f))
             else rep.bad_outside_f).append(P)
    return rep


# ---------------------------------------------------------------------------
# construction with a retraction onto the units

def shimura_prime(K: ImagQuadField, bound: int = 200) -> Ideal:
    """Smallest prime with ``Np = p`` rational, ``p = 1 mod w`` and ``(p-1)/w`` prime to ``w``."""
    w = K.w
    for p in K.primes_up_to(bound):
        q = int(p.norm())
        if q == _rational_prime(q) and (q - 1) % w == 0 and gcd((q - 1) // w, w) == 1:
            return p
    raise SearchExhausted("prime admitting a retraction onto the units", bound)


def _rational_prime(q: int) -> int:
    return q if all(q % k for k in range(2, int(q ** 0.5) + 1)) and q > 1 else -1


def auxiliary_primes(K: ImagQuadField, avoid: Sequence[Ideal], count: int = 3,
                     bound: int = 200, exclude: Optional[Ideal] = None) -> list[Ideal]:
    """Smallest primes coprime to ``avoid`` (and to ``exclude``) on which the units inject."""
    out = []
    for q in K.primes_up_to(bound):
        if any(not q.is_coprime(a) for a in avoid):
            continue
        if exclude is not None and not q.is_coprime(exclude):
            continue
        if K.unit_map_injective(q):
            out.append(q)
            if len(out) == count:
                return out
    raise SearchExhausted("auxiliary primes", bound)


def split_auxiliary_prime(inst: AbelianFieldInstance, avoid: Sequence[Ideal], bound: int = 200) -> Ideal:
    """Smallest prime of ``K`` split completely in ``L`` with ``Nq = 1 mod w``, coprime to ``avoid``."""
    K, ext = inst.K, inst.ext
    for q in K.primes_up_to(bound):
        if any(not q.is_coprime(a) for a in avoid) or (q.norm() - 1) % K.w:
            continue
        if ext.is_ramified(q) or ext.aut_order(ext.frobenius(q)) != 1:
            continue
        return q
    raise SearchExhausted("completely split auxiliary prime", bound)


class Retraction:
    """``alpha: (O_K/m)^x -> O_K^x`` through the component at a prime ``p``."""

    def __init__(self, K: ImagQuadField, p: Ideal):
        self.K, self.p = K, p
        q = int(p.norm())
        k = (q - 1) // K.w
        self.exponent = k * pow(k, -1, K.w) if K.w > 1 else 0
        self.table = {p.reduce(u): u for u in K.units}
        if len(self.table) != K.w:
            raise ValueError("units do not inject modulo p")

    def __call__(self, x: Elt) -> Elt:
        from .order import residue_pow
        y = residue_pow(self.K.O.elt(self.p.reduce(x)), self.exponent, self.p)
        return self.table[self.p.reduce(y)]


def retraction_character(space: CharacterSpace, alpha: Retraction, e: int = DEFAULT_E) -> AdmissibleCharacter:
    """``rho(A) = s^{-1} alpha(s)`` (``e = -1``) or ``s alpha(s)^{-1}`` (``e = +1``), ``s`` the
    residue of ``N(A)``."""
    rg = space.res.group
    images = []
    for i in range(space.cl.group.rank):
        x = space.cl.basis_element(i)
        s = space.inst.ext.rel_norm(x)
        sv = space.res.log(s)
        av = space.res.log(alpha(space.K.O.elt(space.res.residue(s))))
        if e == -1:
            images.append(rg.op(rg.neg(sv), av))
        elif e == 1:
            images.append(rg.op(sv, rg.neg(av)))
        else:
            raise ValueError("e must be +1 or -1")
    rho = AdmissibleCharacter(space, images, e)
    rho.certify()
    return rho


@dataclass
class ShimuraConstruction:
    prime: Ideal
    alpha: Retraction
    curve: CMCurveModel
    aux: list


def shimura_construct(inst: AbelianFieldInstance, bound: int = 200, e: int = DEFAULT_E,
                      n_aux: int = 3) -> ShimuraConstruction:
    """Curve over the Hilbert class field whose character factors through the norm."""
    K = inst.K
    p = shimura_prime(K, bound)
    aux = auxiliary_primes(K, [p], n_aux, bound)
    if inst.ext.degree > 1:
        # a completely split prime makes the norm kernel visible to unit-valued twists
        aux.append(split_auxiliary_prime(inst, [p] + aux, bound))
    m = p
    for a in aux:
        m = m * a
    space = CharacterSpace(inst, m, aux, special=p)
    alpha = Retraction(K, p)
    rho = retraction_character(space, alpha, e)
    curve = CMCurveModel(rho, K.class_group.group.identity(), f"E_{K.d}")
    return ShimuraConstruction(p, alpha, curve, aux)


def admissible_characters(space: CharacterSpace, e: int = DEFAULT_E, limit: int = 10 ** 5):
    """All admissible characters at this modulus: one base solution times unit-valued twists."""
    rg = space.res.group
    grp = space.cl.group
    base = []
    # solve T(v^e) = N-class(A_i): search v in (O_K/m)^x
    for i in range(grp.rank):
        target = space.norm_images[i]
        v = next((x for x in rg.elements() if space.T(rg.pow(x, e)) == target), None)
        if v is None:
            raise NotAdmissible("no value satisfies the admissibility square")
        base.append(v)
    ulogs = space.unit_logs()
    count = 0
    for choice in product(range(len(ulogs)), repeat=grp.rank):
        images = [rg.op(b, ulogs[c]) for b, c in zip(base, choice)]
        rho = AdmissibleCharacter(space, images, e)
        try:
            rho.certify()
        except NotAdmissible:
            continue
        yield rho
        count += 1
        if count >= limit:
            return
