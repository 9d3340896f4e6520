"""Extension of a principal-ideal map to all ideals with the twisted cocycle rule.

Given ``l`` on principal ideals (generators ``= 1 mod f``), ``l`` is extended to
every ideal ``a`` prime to ``g`` with values in ``L`` so that
``l(a) O_L = a O_L``, ``l(a) = 1 mod F`` and ``l(ab) = l(a) sigma_a(l(b))``.
Solvers for the norm equation, ideal Hilbert 90, the congruence splitting
and the principal generator ``A`` are bounded searches, and every output is
checked against its defining equation before use.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

from .classfield import AbelianFieldInstance, CatalogMissingSubfield
from .exact import FiniteAbelianGroup
from .nfield import Automorphism
from .order import Elt, Ideal, congruent_one
from .quadfield import ImagQuadField, NotCoprime, SearchExhausted, _ideal_key

SEARCH_START = 8
SEARCH_CAP = 128


class NotInP(ValueError):
    pass


class CocycleFailure(ArithmeticError):
    pass


def _congruent_one(x: Elt, m: Ideal) -> bool:
    return m.norm() == 1 or congruent_one(x, m)


# ---------------------------------------------------------------------------
# the map on principal ideals

class PartialL:
    """A homomorphism ``l`` on ideals prime to ``g`` with a generator ``= 1 mod f``.

    When the units inject modulo ``f`` the value is the unique such generator.
    Otherwise a basis of the principal subgroup is grown prime by prime in a
    fixed order (norm, then HNF), so values never depend on the order of queries.
    """

    def __init__(self, K: ImagQuadField, g: Ideal, f: Ideal):
        if not f.is_integral() or not g.is_integral() or not f.contains_ideal(g):
            raise ValueError("need integral f dividing g")
        self.K, self.g, self.f = K, g, f
        self.ray = K.ray_class_group(f)
        self.injective = K.unit_map_injective(f)
        self._primes: list[Ideal] = []       # adjoined primes, in order
        self._classes: list[tuple] = []
        self._vectors: list[list[int]] = []  # basis vector j lives on primes 0..j
        self._gens: list[Elt] = []
        self._cache: dict = {}

    def in_P(self, a: Ideal) -> bool:
        if not self._coprime(a):
            return False
        return self.ray.artin_class(a) == self.ray.group.identity()

    def _coprime(self, a: Ideal) -> bool:
        return all(q.is_coprime(self.g) for q in self.K.factor(a)) if a.den != 1 else a.is_coprime(self.g)

    def generators_one_mod_f(self, a: Ideal) -> list[Elt]:
        """All generators of ``a`` congruent to 1 modulo ``f``, best first."""
        den = a.den
        gam = self.K.is_principal(a * den)
        if gam is None:
            raise NotInP(f"{a} is not principal")
        gam = gam / den
        out = [u * gam for u in self.K.units if _congruent_one(u * gam, self.f)]
        return sorted(out, key=lambda x: tuple(self.K.to_sqrt(x)), reverse=True)

    def __call__(self, a: Ideal) -> Elt:
        if a in self._cache:
            return self._cache[a]
        if not self.in_P(a):
            raise NotInP(f"{a} is not in the principal ray subgroup prime to g")
        if self.injective:
            cands = self.generators_one_mod_f(a)
            if len(cands) != 1:
                raise ArithmeticError("generator = 1 mod f is not unique")
            val = cands[0]
        else:
            val = self._bookkeeping_value(a)
        if self.K.ideal(val) != a or not _congruent_one(val, self.f):
            raise ArithmeticError(f"bad value for {a}")
        self._cache[a] = val
        return val

    # bookkeeping -----------------------------------------------------------
    def _prime_order(self, upto: Ideal) -> None:
        """Adjoin every prime prime to ``g`` up to and including ``upto`` in the fixed order."""
        key = _ideal_key(upto)
        if upto in self._primes:
            return
        bound = int(upto.norm())
        for q in self.K.primes_up_to(bound, coprime_to=self.g):
            if q not in self._primes and _ideal_key(q) <= key:
                self._adjoin(q)

    def _adjoin(self, q: Ideal) -> None:
        grp = self.ray.group
        c = self.ray.artin_class(q)
        for t in range(1, grp.element_order(c) + 1):
            k = grp.solve(self._classes, grp.pow(c, t))
            if k is not None:
                break
        vec = [-x for x in k] + [t]
        ideal = q ** t
        for s, x in zip(self._primes, k):
            if x:
                ideal = ideal * s ** (-x)
        gen = self.generators_one_mod_f(ideal)[0]
        self._primes.append(q)
        self._classes.append(c)
        self._vectors.append(vec)
        self._gens.append(gen)

    def _bookkeeping_value(self, a: Ideal) -> Elt:
        fac = self.K.factor(a) if a != self.K.unit_ideal() else {}
        for q in sorted(fac, key=_ideal_key):
            self._prime_order(q)
        idx = {q: i for i, q in enumerate(self._primes)}
        e = [0] * len(self._primes)
        for q, k in fac.items():
            e[idx[q]] = k
        val = self.K.O.one
        for j in reversed(range(len(e))):
            if e[j] == 0:
                continue
            t = self._vectors[j][j]
            if e[j] % t:
                raise ArithmeticError("exponent vector outside the principal lattice")
            c = e[j] // t
            for i, x in enumerate(self._vectors[j]):
                e[i] -= c * x
            val = val * self._gens[j] ** c
        return val

    def basis_table(self) -> list[dict]:
        return [{"prime": str(q.h), "vector": v, "generator": str(g)}
                for q, v, g in zip(self._primes, self._vectors, self._gens)]


# ---------------------------------------------------------------------------
# basis primes

@dataclass
class BasisPrimes:
    primes: list
    orders: list
    classes: list
    sigmas: list                       # Automorphism per basis prime
    subgroups: list                    # G(L/K_i) as lists of automorphisms
    group: FiniteAbelianGroup

    @property
    def r(self) -> int:
        return len(self.primes)

    def verify(self) -> dict:
        """``G = (+) <sigma_i>``: orders multiply to ``|G|`` and the classes generate."""
        prod = 1
        for n in self.orders:
            prod *= n
        if prod != self.group.order:
            raise ValueError("orders of the basis do not multiply to |G|")
        if self.group.quotient(self.classes)[0].order != 1:
            raise ValueError("basis classes do not generate G")
        for c, n in zip(self.classes, self.orders):
            if self.group.element_order(c) != n:
                raise ValueError("recorded order is wrong")
        return {"r": self.r, "orders": list(self.orders)}


def _generated(ext, gens: Sequence[Automorphism]) -> list[Automorphism]:
    out = {ext.identity.name: ext.identity}
    frontier = [ext.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = ext.compose(s, x)
                if y.name not in out:
                    out[y.name] = y
                    nxt.append(y)
        frontier = nxt
    return sorted(out.values(), key=lambda s: s.name)


def choose_basis_primes(inst: AbelianFieldInstance, g: Ideal, bound: int = 200,
                        pool: int = 30) -> BasisPrimes:
    grp = inst.ray.group
    ext = inst.ext
    if grp.order == 1:
        return BasisPrimes([], [], [], [], [], grp)
    cands = [p for p in inst.K.primes_up_to(bound, coprime_to=g) if not ext.is_ramified(p)][:pool]
    classes = [inst.ray.artin_class(p) for p in cands]
    for combo in combinations(range(len(cands)), grp.rank):
        cs = [classes[i] for i in combo]
        orders = [grp.element_order(c) for c in cs]
        prod = 1
        for n in orders:
            prod *= n
        if prod != grp.order or grp.quotient(cs)[0].order != 1:
            continue
        sigmas = [inst.class_to_aut(c) for c in cs]
        subs = [_generated(ext, [s for j, s in enumerate(sigmas) if j != i]) for i in range(len(cs))]
        for p, s in zip((cands[i] for i in combo), sigmas):
            if ext.frobenius(p).name != s.name:
                raise ArithmeticError("Artin class and Frobenius disagree")
        for H, n in zip(subs, orders):
            if len(ext.fixed_lattice(H)) != 2 * n:
                raise CatalogMissingSubfield("fixed field has the wrong degree")
        bp = BasisPrimes([cands[i] for i in combo], orders, cs, sigmas, subs, grp)
        bp.verify()
        return bp
    raise SearchExhausted("independent basis primes", bound)


# ---------------------------------------------------------------------------
# solvers

def rel_norm_sub(inst: AbelianFieldInstance, s: Automorphism, n: int, x: Elt) -> Elt:
    """``N_{K_i/K}(x) = prod_{k<n} s^k(x)`` for ``x`` in the fixed field ``K_i``."""
    out = inst.L.O.one
    y = x
    for _ in range(n):
        out = out * y
        y = s(y)
    return inst.ext.contract(out)


def _box(inst, basis, start=SEARCH_START, cap=SEARCH_CAP):
    """Elements of the span of ``basis``, by shells, with the bound doubling up to ``cap``."""
    L = inst.L
    lo, hi = 0, start
    while lo < cap:
        hi = min(hi, cap)
        for v in L.O.box(hi, lo):
            if any(v):
                acc = L.O.zero
                for c, b in zip(v, basis):
                    if c:
                        acc = acc + b * c
                yield acc, hi
        lo, hi = hi, hi * 2


def hasse_solve(inst: AbelianFieldInstance, bp: BasisPrimes, i: int, t: Elt,
                cap: int = SEARCH_CAP) -> tuple[Elt, int]:
    """``pi`` in ``K_i`` with ``N_{K_i/K}(pi) = t``; returns ``(pi, bound used)``."""
    ext = inst.ext
    s, n = bp.sigmas[i], bp.orders[i]
    if t == 1:
        return inst.L.O.one, 0
    sub = ext.fixed_lattice(bp.subgroups[i])
    target = abs(t.norm()) ** (inst.L.n // (2 * n))
    for x, b in _box(inst, sub, cap=cap):
        if abs(x.norm()) == target and rel_norm_sub(inst, s, n, x) == t:
            return x, b
    raise SearchExhausted(f"element of norm {t}", cap)


def noether90_solve(inst: AbelianFieldInstance, bp: BasisPrimes, i: int, A: Ideal) -> Ideal:
    """``b`` with ``A = b sigma_i(b)^{-1}``, by telescoping exponents along each orbit."""
    ext = inst.ext
    s = bp.sigmas[i]
    if ext.ideal_norm_to_base(A) != inst.K.unit_ideal():
        raise ValueError("relative norm of A is not trivial")
    L1 = inst.L.unit_ideal()
    fac = ext.factor(A) if A != L1 else {}
    b = L1
    seen = set()
    for P in fac:
        if P in seen:
            continue
        orbit = [P]
        Q = P.apply(s.matrix)
        while Q != P:
            orbit.append(Q)
            Q = Q.apply(s.matrix)
        seen.update(orbit)
        acc = 0
        for j in range(1, len(orbit)):
            acc += fac.get(orbit[j], 0)
            if acc:
                b = b * orbit[j] ** acc
    if b * b.apply(s.matrix).inverse() != A:
        raise ArithmeticError("ideal Hilbert 90 solution fails its equation")
    if ext.contract_to(b, bp.subgroups[i]) != b:
        raise SearchExhausted("solution ideal defined over K_i", 0)
    return b


def terada_solve(inst: AbelianFieldInstance, bp: BasisPrimes, i: int, pi: Elt, M: Ideal,
                 cap: int = SEARCH_CAP) -> tuple[Elt, Elt]:
    """``(alpha, beta)`` in ``K_i`` with ``pi = alpha beta / sigma_i(beta)`` and ``alpha = 1 mod M``."""
    s = bp.sigmas[i]
    one = inst.L.O.one
    cands = [(one, 0)]
    if M.norm() != 1:
        cands = _box(inst, inst.ext.fixed_lattice(bp.subgroups[i]), cap=cap)
    for beta, _ in cands:
        if beta.is_zero():
            continue
        alpha = pi * s(beta) / beta
        if _congruent_one(alpha, M):
            if alpha * beta / s(beta) != pi:
                raise ArithmeticError("splitting fails its equation")
            return alpha, beta
    raise SearchExhausted("congruence splitting", cap)


def _unit_candidates(inst: AbelianFieldInstance, max_exp: int = 12):
    z, w = inst.units.torsion, inst.units.torsion_order
    eps = inst.units.fundamental[0] if inst.units.fundamental else None
    exps = sorted(range(-max_exp, max_exp + 1), key=lambda k: (abs(k), -k)) if eps is not None else [0]
    for k in exps:
        for a in range(w):
            yield z ** a * (eps ** k if k else inst.L.O.one)


def tannaka_A_solve(inst: AbelianFieldInstance, ideals: Sequence[Ideal], F: Ideal,
                    cap: int = SEARCH_CAP) -> Elt:
    """Generator ``A = 1 mod F`` of the product of ``ideals`` (``F`` an ideal of ``L``)."""
    L = inst.L
    prod = L.unit_ideal()
    for a in ideals:
        prod = prod * a
    if prod == L.unit_ideal():
        gen = L.O.one
    else:
        den = prod.den
        gen, b = None, 2
        while gen is None and b <= cap:
            gen = L.bounded_search_principal(prod * den, b)
            b *= 2
        if gen is None:
            raise SearchExhausted("generator of the product ideal", cap)
        gen = gen / den
    for u in _unit_candidates(inst):
        if _congruent_one(u * gen, F):
            A = u * gen
            if L.O.ideal([A]) != prod:
                raise ArithmeticError("A does not generate the product")
            return A
    raise SearchExhausted("unit adjustment of A", 12)


# ---------------------------------------------------------------------------

@dataclass
class ThetaWitness:
    prime: Ideal
    n: int
    t: Elt
    pi: Elt
    b: Ideal
    alpha: Elt
    beta: Elt
    theta: Elt
    search_bound: int

    def as_dict(self) -> dict:
        return {"prime": str(self.prime.h), "n": self.n, "l(p^n)": str(self.t), "pi": str(self.pi),
                "b": str(self.b.h), "alpha": str(self.alpha), "beta": str(self.beta),
                "theta": str(self.theta), "bound": self.search_bound}


class FullL:
    """The extended map on ideals prime to ``g``."""

    def __init__(self, inst: AbelianFieldInstance, g: Optional[Ideal] = None,
                 partial: Optional[PartialL] = None, cap: int = SEARCH_CAP):
        self.inst = inst
        K, ext = inst.K, inst.ext
        self.f = inst.conductor
        self.g = g if g is not None else inst.f
        if not self.f.contains_ideal(self.g):
            raise ValueError("g must be divisible by the conductor")
        self.partial = partial or PartialL(K, self.g, self.f)
        self.F = ext.extend_ideal(inst.genus_ideal)
        self.basis = choose_basis_primes(inst, self.g)
        bp = self.basis
        self.witnesses: list[ThetaWitness] = []
        pis, alphas, betas, bs = [], [], [], []
        for i, (p, n, s) in enumerate(zip(bp.primes, bp.orders, bp.sigmas)):
            t = self.partial(p ** n)
            if not _congruent_one(t, self.f):
                raise ArithmeticError("l(p^n) is not 1 mod f")
            pi, used = hasse_solve(inst, bp, i, t, cap)
            quot = ext.extend_ideal(p) * inst.L.O.ideal([pi]).inverse()
            b = noether90_solve(inst, bp, i, quot)
            M = inst.mixed_conductor(bp.subgroups[i])
            alpha, beta = terada_solve(inst, bp, i, pi, M, cap)
            if rel_norm_sub(inst, s, n, alpha) != t:
                raise ArithmeticError("norm of alpha differs from l(p^n)")
            pis.append(pi), alphas.append(alpha), betas.append(beta), bs.append(b)
            self.witnesses.append(ThetaWitness(p, n, t, pi, b, alpha, beta, inst.L.O.one, used))
        a_ideals = [inst.L.O.ideal([beta]) * b for beta, b in zip(betas, bs)]
        self.A = tannaka_A_solve(inst, a_ideals, self.F, cap)
        for w, s in zip(self.witnesses, bp.sigmas):
            w.theta = w.alpha * self.A / s(self.A)
            if inst.L.O.ideal([w.theta]) != ext.extend_ideal(w.prime):
                raise ArithmeticError("Theta does not generate p O_L")
        self._cache: dict = {}
        self._gamma: dict = {}

    # decomposition -----------------------------------------------------------
    def gamma_decompose(self, a: Ideal) -> tuple[Ideal, tuple]:
        if a in self._gamma:
            return self._gamma[a]
        K, bp = self.inst.K, self.basis
        if not self.partial._coprime(a):
            raise NotCoprime(f"{a} is not prime to g")
        c = self.inst.ray.artin_class(a)
        if bp.r:
            n = bp.group.solve(bp.classes, c)
            x = tuple(k % m for k, m in zip(n, bp.orders))
        else:
            x = ()
        gam = a
        for p, k in zip(bp.primes, x):
            if k:
                gam = gam * p ** (-k)
        if not self.partial.in_P(gam):
            raise ArithmeticError("gamma(a) is not in the principal ray subgroup")
        self._gamma[a] = (gam, x)
        return gam, x

    # evaluation --------------------------------------------------------------
    def w_action(self, i: int, x: tuple, theta: Elt) -> Elt:
        """``w_{i,x_i}(theta) = prod_{j=1}^{x_i} (sigma_i^j prod_{k<i} sigma_k^{x_k})(theta)``."""
        ext, bp = self.inst.ext, self.basis
        tau = ext.identity
        for k in range(i):
            tau = ext.compose(ext.aut_pow(bp.sigmas[k], x[k]), tau)
        out = self.inst.L.O.one
        for j in range(1, x[i] + 1):
            out = out * ext.compose(ext.aut_pow(bp.sigmas[i], j), tau)(theta)
        return out

    def __call__(self, a: Ideal) -> Elt:
        if a in self._cache:
            return self._cache[a]
        ext = self.inst.ext
        gam, x = self.gamma_decompose(a)
        val = ext.embed(self.partial(gam))
        for i, w in enumerate(self.witnesses):
            val = val * self.w_action(i, x, w.theta)
        if self.inst.L.O.ideal([val]) != ext.extend_ideal(a):
            raise ArithmeticError(f"l({a}) does not generate a O_L")
        if not _congruent_one(val, self.F):
            raise ArithmeticError(f"l({a}) is not 1 mod F")
        self._cache[a] = val
        return val

    def sigma(self, a: Ideal) -> Automorphism:
        return self.inst.artin_symbol(a)

    # verification --------------------------------------------------------------
    def cocycle_verify(self, a: Ideal, b: Ideal) -> dict:
        ext = self.inst.ext
        la, lb, lab = self(a), self(b), self(a * b)
        lhs = la * self.sigma(a)(lb)
        if lhs != lab:
            raise CocycleFailure(a, b, lhs, lab)
        ga, x = self.gamma_decompose(a)
        gb, y = self.gamma_decompose(b)
        gab, z = self.gamma_decompose(a * b)
        deltas = []
        for xi, yi, zi, n in zip(x, y, z, self.basis.orders):
            d, r = divmod(xi + yi - zi, n)
            if r or d not in (0, 1):
                raise CocycleFailure(a, b, "carry", (x, y, z))
            deltas.append(d)
        p = self.partial
        rhs = ext.embed(p(ga) * p(gb) / p(gab))
        for i, (d, w) in enumerate(zip(deltas, self.witnesses)):
            if d:
                rhs = rhs * ext.embed(rel_norm_sub(self.inst, self.basis.sigmas[i], w.n, w.alpha))
        # the defect l(a) sigma_a(l(b)) / l(ab) expressed through gamma and the carries
        if rhs != 1 or lhs / lab != 1:
            raise CocycleFailure(a, b, "carry identity", rhs)
        return {"a": str(a.h), "b": str(b.h), "case": self._case(b, x, deltas), "deltas": deltas}

    def _case(self, b: Ideal, x: tuple, deltas: list) -> str:
        if self.partial.in_P(b):
            return "principal"
        if b in self.basis.primes:
            return "prime-carry" if any(deltas) else "prime"
        return "general"

    def witness_dump(self) -> dict:
        return {"basis": [str(p.h) for p in self.basis.primes], "orders": self.basis.orders,
                "A": str(self.A), "theta": [w.as_dict() for w in self.witnesses],
                "partial": self.partial.basis_table()}
