"""Galois descent of a rank-one module along ``L/K``.

The module ``T`` is a fractional ideal of ``L`` and the isomorphisms
``a^{-1} T -> sigma_a^* T`` are scalars ``lambda_a``.  Dividing by ``l(a)``
gives a cocycle on ``G(L/K)``, which is split by a Poincare series; the split
module is extended from ``K`` and a generator of it is found by search.
"""
from __future__ import annotations

import random
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable, Optional

from .classfield import AbelianFieldInstance, principal_generator
from .nfield import Automorphism
from .order import Elt, Ideal
from .picocycle import FullL
from .quadfield import SearchExhausted


class ClassDependenceFailure(ArithmeticError):
    pass


class CocycleIdentityFailure(ArithmeticError):
    pass


class DegenerateResolvent(ArithmeticError):
    pass


class DatumError(ValueError):
    pass


@dataclass
class DescentDatum:
    T: Ideal
    lam: Callable[[Ideal], Elt]
    full: FullL
    label: str = ""

    @property
    def inst(self) -> AbelianFieldInstance:
        return self.full.inst

    def check(self, a: Ideal) -> None:
        """``lambda_a a^{-1} T = sigma_a(T)`` as ideals of ``L``."""
        ext = self.inst.ext
        lhs = self.inst.L.O.ideal([self.lam(a)]) * ext.extend_ideal(a).inverse() * self.T
        if lhs != ext.conj_ideal(self.T, self.full.sigma(a)):
            raise DatumError(f"lambda fails to transport T at {a}")

    def check_pair(self, a: Ideal, b: Ideal) -> None:
        sa, sb = self.full.sigma(a), self.full.sigma(b)
        la, lb = self.lam(a), self.lam(b)
        if sa(lb) * la != sb(la) * lb:
            raise DatumError(f"lambda does not commute at ({a}, {b})")


def synthetic_datum(full: FullL, beta0: Elt, base: Optional[Ideal] = None) -> DescentDatum:
    """``T = base O_L beta0`` with ``lambda_a = l(a) sigma_a(beta0) / beta0``."""
    inst = full.inst
    ext = inst.ext
    base = base if base is not None else inst.K.unit_ideal()
    T = ext.extend_ideal(base) * inst.L.O.ideal([beta0])

    def lam(a: Ideal) -> Elt:
        return full(a) * full.sigma(a)(beta0) / beta0

    return DescentDatum(T, lam, full, label=f"beta0={beta0}")


def trivial_datum(full: FullL) -> DescentDatum:
    return DescentDatum(full.inst.unit_ideal_L(), full, full, label="trivial")


# ---------------------------------------------------------------------------

@dataclass
class GaloisCocycle:
    inst: AbelianFieldInstance
    values: dict                          # automorphism name -> t_sigma
    auts: dict = field(default_factory=dict)   # name -> Automorphism

    def __call__(self, s: Automorphism) -> Elt:
        return self.values[s.name]

    def verify(self) -> None:
        """``t_id = 1`` and ``t_{st} = t_s s(t_t)`` over the whole group."""
        ext = self.inst.ext
        if self(ext.identity) != 1:
            raise CocycleIdentityFailure(("identity", self(ext.identity)))
        for s in ext.G:
            for t in ext.G:
                st = ext.compose(s, t)
                if self(st) != self(s) * s(self(t)):
                    raise CocycleIdentityFailure((s.name, t.name))

    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.values.values())


def _ideals_by_class(full: FullL, per_class: int = 2, bound: int = 60, cap: int = 960) -> dict:
    inst = full.inst
    ray = inst.ray
    want = {c: [] for c in ray.group.elements()}
    while True:
        for a in inst.K.ideals_up_to(bound):
            if not full.partial._coprime(a):
                continue
            lst = want[ray.artin_class(a)]
            if len(lst) < per_class and a not in lst:
                lst.append(a)
        if all(len(v) >= per_class for v in want.values()):
            return want
        if bound * 2 > cap:
            raise SearchExhausted("ideals in every ray class", bound)
        bound *= 2


def build_t(datum: DescentDatum, per_class: int = 2) -> GaloisCocycle:
    """``t_a = lambda_a / l(a)``, checked to depend only on ``sigma_a``."""
    full, inst = datum.full, datum.inst
    values, auts = {}, {}
    for c, ideals in _ideals_by_class(full, per_class).items():
        s = inst.class_to_aut(c)
        ts = []
        for a in ideals:
            datum.check(a)
            ts.append(datum.lam(a) / full(a))
        if any(t != ts[0] for t in ts):
            raise ClassDependenceFailure((c, [str(a.h) for a in ideals], ts))
        if full.partial.in_P(ideals[0]) and ts[0] != 1:
            raise ClassDependenceFailure((c, "principal ideal with t != 1"))
        values[s.name], auts[s.name] = ts[0], s
    cocycle = GaloisCocycle(inst, values, auts)
    cocycle.verify()
    return cocycle


# ---------------------------------------------------------------------------

def _trials(inst: AbelianFieldInstance, n_random: int, seed: int):
    O = inst.L.O
    yield O.one
    yield from O.basis()
    rng = random.Random(seed)
    for _ in range(n_random):
        yield O.elt([rng.randint(-3, 3) for _ in range(inst.L.n)])


def hilbert90_solve(cocycle: GaloisCocycle, n_random: int = 32, seed: int = 0) -> Elt:
    """``beta`` with ``t_s = beta / s(beta)`` for all ``s``, as ``sum_s t_s s(x)``."""
    inst = cocycle.inst
    for x in _trials(inst, n_random, seed):
        beta = inst.L.O.zero
        for s in inst.ext.G:
            beta = beta + cocycle(s) * s(x)
        if beta.is_zero():
            continue
        for s in inst.ext.G:
            if cocycle(s) * s(beta) != beta:
                raise CocycleIdentityFailure(("splitting", s.name))
        return beta
    raise DegenerateResolvent(f"all {n_random} random trials gave a zero resolvent")


# ---------------------------------------------------------------------------

@dataclass
class MinimalModelVerdict:
    status: str                  # "global minimal model", "minimal model away from f", "inconclusive"
    generator: Optional[Elt]     # g with (g) = T up to f-support
    descended: Optional[Ideal]   # ideal of K with descended * O_L = beta T
    beta: Elt
    detail: str = ""

    @property
    def found(self) -> bool:
        return self.generator is not None

    def as_dict(self) -> dict:
        return {"status": self.status, "generator": str(self.generator), "beta": str(self.beta),
                "descended": None if self.descended is None else [list(map(str, r)) for r in self.descended.h],
                "detail": self.detail}


def _away_from(K, A: Ideal, f: Ideal, ext) -> Ideal:
    """Remove from ``A`` the primes of ``L`` above primes dividing ``f``."""
    if f == K.unit_ideal():
        return A
    out = A
    for p in K.factor(f):
        for P in ext.primes_over(p):
            v = ext.valuation(P, out)
            if v:
                out = out * P ** (-v)
    return out


def minimal_model_verdict(datum: DescentDatum, f: Ideal, beta: Optional[Elt] = None,
                          cap: int = 8) -> MinimalModelVerdict:
    """Descend ``beta T`` to ``K`` and exhibit a generator of ``T`` away from ``f``."""
    inst = datum.inst
    ext, K = inst.ext, inst.K
    if beta is None:
        beta = hilbert90_solve(build_t(datum))
    M = inst.L.O.ideal([beta]) * datum.T
    for s in ext.G:
        if ext.conj_ideal(M, s) != M:
            raise DatumError(f"beta T is not stable under {s.name}")
    den = M.den
    J = ext.contract_ideal(M * den)
    if ext.extend_ideal(J) != M * den:
        raise DatumError("beta T is not extended from K")
    J = J * K.ideal(Fraction(1, den))
    status = "global minimal model" if f == K.unit_ideal() else "minimal model away from f"
    try:
        G = principal_generator(inst, _away_from(K, M, f, ext), cap)
    except SearchExhausted as exc:
        return MinimalModelVerdict("inconclusive", None, J, beta, str(exc))
    g = G / beta
    lhs = _away_from(K, inst.L.O.ideal([g]), f, ext)
    if lhs != _away_from(K, datum.T, f, ext):
        raise ArithmeticError("generator does not match T away from f")
    return MinimalModelVerdict(status, g, J, beta)
