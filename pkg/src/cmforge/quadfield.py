"""Imaginary quadratic fields: elements, ideals, forms, class and ray class groups."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt
from typing import Iterable, Optional

from .exact import EnumeratedGroup, FiniteAbelianGroup, ext_gcd, group_from_elements
from .order import Elt, Ideal, Order, ZeroIdeal, split_one, unit_residue


class NotCoprime(ValueError):
    pass


class SearchExhausted(RuntimeError):
    """A bounded search ran out of room.  Carries the bound that was used."""

    def __init__(self, what: str, bound):
        super().__init__(f"{what}: nothing found up to bound {bound}")
        self.bound = bound


def is_squarefree(n: int) -> bool:
    n = abs(n)
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def factorint(n: int) -> dict[int, int]:
    """Trial-division factorisation (inputs are desk sized)."""
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i, v in enumerate(sieve) if v]


# ---------------------------------------------------------------------------
# binary quadratic forms

def reduce_form(a: int, b: int, c: int) -> tuple[int, int, int]:
    while True:
        k = (a - b) // (2 * a)
        b, c = b + 2 * k * a, a * k * k + b * k + c
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        return a, b, c


def compose_forms(f1: tuple[int, int, int], f2: tuple[int, int, int]) -> tuple[int, int, int]:
    """Dirichlet composition of primitive forms of the same discriminant (unreduced)."""
    a1, b1, c1 = f1
    a2, b2, c2 = f2
    disc = b1 * b1 - 4 * a1 * c1
    if b2 * b2 - 4 * a2 * c2 != disc:
        raise ValueError("forms of different discriminant")
    s = (b1 + b2) // 2
    g1, u1, v1 = ext_gcd(a1, a2)
    e, x, w = ext_gcd(g1, s)
    u, v = x * u1, x * v1
    big_a = a1 * a2 // (e * e)
    num = u * a1 * b2 + v * a2 * b1 + w * (b1 * b2 + disc) // 2
    if num % e:
        raise ArithmeticError("composition failed to be integral")
    big_b = (num // e) % (2 * big_a)
    if big_b > big_a:
        big_b -= 2 * big_a
    big_c, r = divmod(big_b * big_b - disc, 4 * big_a)
    if r:
        raise ArithmeticError("composition produced a non-integral form")
    return big_a, big_b, big_c


def reduced_forms(disc: int) -> list[tuple[int, int, int]]:
    """All reduced primitive positive definite forms ``|b| <= a <= c`` of discriminant ``disc``."""
    out = []
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a + 1, a + 1):
            if (b * b - disc) % (4 * a):
                continue
            c = (b * b - disc) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return sorted(out)


# ---------------------------------------------------------------------------

class ImagQuadField:
    """``K = Q(sqrt(d))`` with integral basis ``[1, omega]``, ``omega = (D + sqrt(D))/2``."""

    def __init__(self, d: int):
        if d >= 0 or not is_squarefree(d):
            raise ValueError(f"d={d} must be a negative squarefree integer")
        self.d = d
        self.D = d if d % 4 == 1 else 4 * d
        self.c0 = (self.D * self.D - self.D) // 4
        # omega^2 = D*omega - c0
        self.O = Order([[(1, 0), (0, 1)], [(0, 1), (-self.c0, self.D)]])
        self.omega = self.O.elt([0, 1])
        self._sqrt_scale = 1 if self.D == d else 2

    def __repr__(self):
        return f"ImagQuadField({self.d})"

    def __eq__(self, other):
        return isinstance(other, ImagQuadField) and other.d == self.d

    def __hash__(self):
        return hash(("K", self.d))

    # elements ---------------------------------------------------------------
    def elt(self, x, y=0) -> Elt:
        """``x + y*omega``."""
        return self.O.elt([x, y])

    def from_sqrt(self, a, b=0) -> Elt:
        """``a + b*sqrt(d)``."""
        a, b = Fraction(a), Fraction(b)
        # sqrt(d) = (2 omega - D) / scale
        return self.O.elt([a - b * self.D / self._sqrt_scale, 2 * b / self._sqrt_scale])

    def to_sqrt(self, x: Elt) -> tuple[Fraction, Fraction]:
        cx, cy = x.coords_fraction()
        # x = cx + cy*omega = cx + cy*(D + scale*sqrt d)/2
        return cx + cy * self.D / 2, cy * self._sqrt_scale / 2

    def format(self, x: Elt) -> str:
        a, b = self.to_sqrt(x)
        s = f"sqrt({self.d})"
        if b == 0:
            return str(a)
        if a == 0:
            return f"{b}*{s}"
        return f"{a}{'+' if b > 0 else '-'}{abs(b)}*{s}"

    @cached_property
    def conj_matrix(self) -> list[list[int]]:
        return [[1, self.D], [0, -1]]

    def conj(self, x):
        if isinstance(x, Ideal):
            return x.apply(self.conj_matrix)
        return x.apply(self.conj_matrix)

    def norm(self, x: Elt) -> Fraction:
        return x.norm()

    @cached_property
    def units(self) -> tuple[Elt, ...]:
        """All units, found by exhaustive search of the norm form."""
        out = []
        bound = abs(self.D) + 2
        for y in range(-2, 3):
            for x in range(-bound, bound + 1):
                if x * x + self.D * x * y + self.c0 * y * y == 1:
                    out.append(self.elt(x, y))
        out.sort(key=lambda u: self._gen_key(u), reverse=True)
        return tuple(out)

    @property
    def w(self) -> int:
        return len(self.units)

    @cached_property
    def unit_generator(self) -> Elt:
        for u in self.units:
            if all(u ** k != 1 for k in range(1, self.w)):
                return u
        raise ArithmeticError("no generator of the unit group")

    def _gen_key(self, x: Elt):
        a, b = self.to_sqrt(x)
        return (a, b)

    def canonical_associate(self, x: Elt) -> Elt:
        """Deterministic representative of ``x * units``: largest ``(a, b)`` for ``a + b sqrt d``."""
        return max((u * x for u in self.units), key=self._gen_key)

    # ideals -----------------------------------------------------------------
    def ideal(self, *gens) -> Ideal:
        return self.O.ideal([g if isinstance(g, Elt) else self.O.from_int(g) for g in gens])

    def unit_ideal(self) -> Ideal:
        return self.O.unit_ideal()

    def principal(self, x) -> Ideal:
        return self.ideal(x)

    def ideal_norm(self, a: Ideal) -> Fraction:
        return a.norm()

    def decompose_prime(self, p: int) -> dict:
        """Factor ``p O_K``: ``{'type': split|inert|ramified, 'primes': [...]}``."""
        roots = [r for r in range(p) if (r * r - self.D * r + self.c0) % p == 0]
        if self.D % p == 0:
            kind = "ramified"
        elif len(roots) == 2:
            kind = "split"
        else:
            kind = "inert"
        if kind == "inert":
            primes = [self.ideal(p)]
        else:
            primes = sorted({self.ideal(p, self.omega - r) for r in roots}, key=_ideal_key)
        return {"type": kind, "primes": primes}

    def primes_up_to(self, bound: int, coprime_to: Optional[Ideal] = None) -> list[Ideal]:
        """Prime ideals of norm ``<= bound`` sorted by ``(norm, HNF)``."""
        out = []
        for p in primes_up_to(bound):
            for q in self.decompose_prime(p)["primes"]:
                if q.norm() <= bound and (coprime_to is None or q.is_coprime(coprime_to)):
                    out.append(q)
        return sorted(out, key=_ideal_key)

    def factor(self, a: Ideal) -> dict[Ideal, int]:
        """Prime factorisation of a fractional ideal."""
        if a.den != 1:
            num = self.factor(a * a.den)
            for q, e in self.factor(self.ideal(a.den)).items():
                num[q] = num.get(q, 0) - e
            return {q: e for q, e in sorted(num.items(), key=lambda t: _ideal_key(t[0])) if e}
        out: dict[Ideal, int] = {}
        rest = a
        for p in factorint(int(a.norm())):
            for q in self.decompose_prime(p)["primes"]:
                while q.contains_ideal(rest):
                    rest = rest * q.inverse()
                    out[q] = out.get(q, 0) + 1
        if rest != self.unit_ideal():
            raise ArithmeticError("incomplete factorisation")
        return dict(sorted(out.items(), key=lambda t: _ideal_key(t[0])))

    def ideals_up_to(self, bound: int) -> list[Ideal]:
        """All nonzero integral ideals of norm ``<= bound``."""
        primes = self.primes_up_to(bound)
        out = [self.unit_ideal()]
        for q in primes:
            nq = int(q.norm())
            new = []
            for a in out:
                b, n = a, int(a.norm())
                while n * nq <= bound:
                    b, n = b * q, n * nq
                    new.append(b)
            out += new
        return sorted(out, key=_ideal_key)

    # forms --------------------------------------------------------------------
    def form_to_ideal(self, f: tuple[int, int, int]) -> Ideal:
        a, b, _ = f
        return Ideal.from_lattice(self.O, [[a, 0], [-(b + self.D) // 2, 1]])

    def _oriented_basis(self, a: Ideal) -> tuple[Elt, Elt]:
        al, be = a.basis()
        a1, a2 = self.to_sqrt(al)
        b1, b2 = self.to_sqrt(be)
        if a1 * b2 - a2 * b1 < 0:
            be = -be
        return al, be

    def _basis_form(self, al: Elt, be: Elt, n: Fraction) -> tuple[int, int, int]:
        fa = al.norm() / n
        fb = (al * self.conj(be)).trace() / n
        fc = be.norm() / n
        return int(fa), int(fb), int(fc)

    def reduce_ideal_basis(self, a: Ideal) -> tuple[tuple[int, int, int], Elt, Elt]:
        """Reduce the norm form of ``a``; returns the reduced form and the matching oriented basis."""
        al, be = self._oriented_basis(a)
        n = a.norm()
        fa, fb, fc = self._basis_form(al, be, n)
        while True:
            k = (fa - fb) // (2 * fa)
            if k:
                be = be + al * k
                fa, fb, fc = self._basis_form(al, be, n)
            if fa > fc or (fa == fc and fb < 0):
                al, be = -be, al
                fa, fb, fc = self._basis_form(al, be, n)
                continue
            return (fa, fb, fc), al, be

    def ideal_to_form(self, a: Ideal) -> tuple[int, int, int]:
        return self.reduce_ideal_basis(a)[0]

    @cached_property
    def class_group(self) -> EnumeratedGroup:
        """Class group as reduced forms under Dirichlet composition."""
        forms = reduced_forms(self.D)
        ident = forms[0]
        return group_from_elements(ident, lambda f, g: reduce_form(*compose_forms(f, g)), forms,
                                   labels=lambda i: f"form{i}")

    @property
    def class_number(self) -> int:
        return self.class_group.group.order

    def ideal_class(self, a: Ideal) -> tuple[int, ...]:
        return self.class_group(self.ideal_to_form(a))

    def is_principal(self, a: Ideal) -> Optional[Elt]:
        """A generator of ``a`` (canonical associate) or ``None``; decided by form reduction."""
        f, al, _ = self.reduce_ideal_basis(a)
        if f[0] != 1:
            return None
        if self.ideal(al) != a:
            raise ArithmeticError("reduced basis vector does not generate the ideal")
        return self.canonical_associate(al)

    def class_representative(self, cls: tuple[int, ...]) -> Ideal:
        """An ideal (from the form dictionary) in the given class."""
        for f, e in self.class_group.log.items():
            if e == cls:
                return self.form_to_ideal(f)
        raise KeyError(cls)

    # residues ---------------------------------------------------------------
    def residue_group(self, m: Ideal) -> "ResidueGroup":
        return ResidueGroup(self.O, m, self.factor(m))

    def unit_residues(self, m: Ideal) -> frozenset:
        rg = self.residue_group(m)
        return rg.group.subgroup_generated([rg.log(u) for u in self.units])

    def unit_map_injective(self, m: Ideal) -> bool:
        if m.norm() == 1:
            return self.w == 1
        return len({m.reduce(u) for u in self.units}) == self.w

    def ray_class_group(self, f: Ideal, prime_bound: int = 2000) -> "RayClassGroup":
        return RayClassGroup(self, f, prime_bound)


# ---------------------------------------------------------------------------
# an oracle for the class number that never touches forms

def principal_by_norm(K: ImagQuadField, a: Ideal) -> Optional[Elt]:
    """An element of ``a`` of norm ``N a``, by enumerating the positive definite norm form."""
    n = a.norm()
    al, be = a.basis()
    A, B, C = al.norm(), (al * K.conj(be)).trace(), be.norm()
    disc = -(B * B - 4 * A * C)
    ymax = isqrt(int(4 * A * n / disc)) + 1
    xmax = isqrt(int(4 * C * n / disc)) + 1
    for y in range(-ymax, ymax + 1):
        for x in range(-xmax, xmax + 1):
            if A * x * x + B * x * y + C * y * y == n:
                return al * x + be * y
    return None


def class_number_by_ideals(K: ImagQuadField) -> int:
    """Classes of integral ideals of norm below the Minkowski bound ``2 sqrt|D| / pi``.

    Two ideals are identified when ``a conj(b)`` is principal, tested by
    :func:`principal_by_norm`.
    """
    bound = int(2 * isqrt(-K.D) // 3) + 2     # 2/pi < 2/3, padded
    reps: list[Ideal] = []
    for a in K.ideals_up_to(bound):
        if not any(principal_by_norm(K, a * K.conj(b)) is not None for b in reps):
            reps.append(a)
    return len(reps)


def _ideal_key(a: Ideal):
    return (a.norm(), a.den, a.h)


class ResidueGroup:
    """``(O / m)^x`` for an integral ideal of any :class:`Order`.

    Built from the prime-power factors of ``m`` (``factors``): each local group
    ``(O / P^k)^x`` is enumerated and the global group is their CRT product.
    """

    def __init__(self, ring: Order, m: Ideal, factors: dict[Ideal, int]):
        if not m.is_integral():
            raise ValueError("modulus must be integral")
        self.ring, self.m = ring, m
        self.trivial = m.norm() == 1
        self._one = (0,) * ring.n if self.trivial else m.reduce(ring.one)
        self.local: list[tuple[Ideal, Ideal, EnumeratedGroup, dict]] = []
        mods = [(P, P ** k) for P, k in factors.items()]
        labels, rels, self.phi = [], [], 1
        for j, (P, Q) in enumerate(mods):
            units = sorted((r for r in Q.residues() if not P.contains(ring.elt(r))), key=_res_key)
            eg = group_from_elements(Q.reduce(ring.one), _mul_mod(ring, Q), units)
            self.phi *= len(units)
            rest = ring.unit_ideal()
            for i, (_, Qi) in enumerate(mods):
                if i != j:
                    rest = rest * Qi
            idem = split_one(Q, rest)[1]
            table = {v: x for x, v in eg.log.items()}
            self.local.append((Q, idem, eg, table))
            off = len(labels)
            for i, d in enumerate(eg.group.invariants):
                labels.append(f"P{j}_{i}")
                rels.append((off + i, d))
        n = len(labels)
        self.group = FiniteAbelianGroup(labels, [[d if k == i else 0 for k in range(n)] for i, d in rels])

    def residue(self, x: Elt) -> tuple[int, ...]:
        if self.trivial:
            return self._one
        if not x.is_integral():
            x = unit_residue(x, self.m, self.phi)
        return self.m.reduce(x)

    def log(self, x) -> tuple[int, ...]:
        """SNF exponent vector of an element (or residue tuple) coprime to ``m``."""
        if self.trivial:
            return ()
        if not isinstance(x, Elt):
            x = self.ring.elt(x)
        if not x.is_integral():
            x = self.ring.elt(unit_residue(x, self.m, self.phi).c)
        vec: list[int] = []
        for Q, _, eg, _ in self.local:
            vec += list(eg(Q.reduce(x)))
        return self.group.element(vec)

    def exp(self, e: tuple[int, ...]) -> tuple[int, ...]:
        """Canonical residue with the given SNF exponent vector."""
        if self.trivial:
            return self._one
        gv = [0] * len(self.group.labels)
        for i, k in enumerate(e):
            for j, c in enumerate(self.group.basis_in_generators(i)):
                gv[j] += k * c
        acc, off = self.ring.zero, 0
        for Q, idem, eg, table in self.local:
            n = len(eg.group.invariants)
            loc = eg.group.reduce(gv[off:off + n])
            off += n
            acc = acc + self.ring.elt(table[loc]) * idem
        return self.m.reduce(acc)

    def basis_residue(self, i: int) -> tuple[int, ...]:
        return self.exp(tuple(int(i == j) for j in range(self.group.rank)))

    def mul(self, x, y) -> tuple[int, ...]:
        return self.m.reduce(self.ring.elt(x) * self.ring.elt(y))


def _mul_mod(ring: Order, Q: Ideal):
    def op(x, y):
        return Q.reduce(Elt(ring, ring.mul_coords(x, y)))
    return op


def _res_key(r):
    return (max(map(abs, r)), r)


class RayClassGroup:
    """``Cl_f(K)`` from ``(O/f)^x / im(O^x) -> Cl_f -> Cl -> 1``."""

    def __init__(self, K: ImagQuadField, f: Ideal, prime_bound: int = 2000):
        if not f.is_integral():
            raise ValueError("modulus must be integral")
        self.K, self.f = K, f
        self.residues = K.residue_group(f)
        rg = self.residues.group
        cl = K.class_group.group
        self.class_lifts: list[Ideal] = []
        for i in range(cl.rank):
            target = tuple(int(i == j) for j in range(cl.rank))
            q = next((q for q in K.primes_up_to(prime_bound, coprime_to=f)
                      if K.ideal_class(q) == target), None)
            if q is None:
                raise SearchExhausted(f"prime lift of class generator {i}", prime_bound)
            self.class_lifts.append(q)
        nr, nc = rg.rank, cl.rank
        labels = [f"r{i}" for i in range(nr)] + [f"q{j}" for j in range(nc)]
        rels = []
        for i, d in enumerate(rg.invariants):
            rels.append([d if k == i else 0 for k in range(nr + nc)])
        for u in K.units:
            rels.append(list(self.residues.log(u)) + [0] * nc)
        self._lift_gens = []
        for j, (q, h) in enumerate(zip(self.class_lifts, cl.invariants)):
            gam = K.is_principal(q ** h)
            if gam is None:
                raise ArithmeticError("class lift power is not principal")
            self._lift_gens.append(gam)
            r = [-x for x in self.residues.log(gam)]
            rels.append(r + [h if k == j else 0 for k in range(nc)])
        self.group = FiniteAbelianGroup(labels, rels)
        self._nr, self._nc = nr, nc
        self.prime_bound = prime_bound

    @property
    def order(self) -> int:
        return self.group.order

    def formula_order(self) -> int:
        im = self.K.unit_residues(self.f)
        return self.K.class_number * self.residues.phi // len(im)

    def residue_class(self, u) -> tuple[int, ...]:
        """Class of the principal ideal ``(u~)`` for a residue (or element) ``u`` coprime to ``f``."""
        return self.group.element(list(self.residues.log(u)) + [0] * self._nc)

    def artin_class(self, a: Ideal) -> tuple[int, ...]:
        if not a.is_coprime(self.f) and not (a.den != 1 and self._coprime_fractional(a)):
            raise NotCoprime(f"{a} is not coprime to {self.f}")
        k = self.K.ideal_class(a)
        cl = self.K.class_group.group
        j = a
        for q, kj in zip(self.class_lifts, k):
            if kj:
                j = j * q ** (-kj)
        gam = self.K.is_principal(j)
        if gam is None:
            raise ArithmeticError("class bookkeeping failed")
        vec = list(self.residues.log(gam)) + list(k)
        return self.group.element(vec)

    def _coprime_fractional(self, a: Ideal) -> bool:
        return all(q.is_coprime(self.f) for q in self.K.factor(a))

    def to_class_group(self, x: tuple[int, ...]) -> tuple[int, ...]:
        cl = self.K.class_group.group
        out = cl.identity()
        for i, k in enumerate(x):
            gv = self.group.basis_in_generators(i)
            img = cl.reduce(gv[self._nr:])
            out = cl.op(out, cl.pow(img, k))
        return out

    def prime_representatives(self, bound: Optional[int] = None) -> list[Ideal]:
        """Smallest-norm prime in the class of each SNF basis element."""
        bound = bound or self.prime_bound
        reps = []
        primes = self.K.primes_up_to(bound, coprime_to=self.f)
        for i in range(self.group.rank):
            target = tuple(int(i == j) for j in range(self.group.rank))
            q = next((q for q in primes if self.artin_class(q) == target), None)
            if q is None:
                raise SearchExhausted(f"prime in ray class {target}", bound)
            reps.append(q)
        return reps

    def generated_by_primes(self, bound: int) -> frozenset:
        classes = {self.artin_class(q) for q in self.K.primes_up_to(bound, coprime_to=self.f)}
        return self.group.subgroup_generated(classes)
