"""Small absolute number fields given by a polynomial and a verified integral basis.

Polynomials are coefficient lists, constant term first.  Elements live in the
maximal order as :class:`~cmforge.order.Elt` over the supplied integral basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterator, Optional, Sequence

import sympy

from .exact import det, hnf, integer_kernel, inverse, matmul
from .order import Elt, Ideal, Order, residue_pow
from .quadfield import ImagQuadField, _ideal_key, factorint

MAX_DEGREE = 8


class IntegralBasisError(ValueError):
    pass


class NonIntegralDifferent(ArithmeticError):
    pass


class NotInBase(ArithmeticError):
    pass


class Ramified(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# polynomial helpers (Fraction coefficients, constant first)

def poly_mul(a: Sequence, b: Sequence) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def poly_mod(a: Sequence, g: Sequence[int]) -> list[Fraction]:
    """Remainder modulo a monic polynomial ``g``."""
    a = [Fraction(x) for x in a]
    n = len(g) - 1
    for k in range(len(a) - 1, n - 1, -1):
        c = a[k]
        if c:
            for i in range(n + 1):
                a[k - n + i] -= c * g[i]
    a = a[:n] + [Fraction(0)] * (n - len(a))
    return a


def poly_compose_mod(a: Sequence, h: Sequence, g: Sequence[int]) -> list[Fraction]:
    """``a(h) mod g`` by Horner."""
    out = [Fraction(0)]
    for c in reversed(list(a)):
        out = poly_mod(poly_mul(out, h), g)
        out[0] += c
    return poly_mod(out, g)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Automorphism:
    name: str
    image: tuple[Fraction, ...]    # image of the root, power-basis coordinates
    matrix: tuple[tuple[int, ...], ...]  # action on the integral basis (columns)

    def __call__(self, x):
        return x.apply(self.matrix)

    def then(self, other: "Automorphism") -> tuple[tuple[int, ...], ...]:
        """Matrix of ``other o self``."""
        return tuple(map(tuple, matmul(other.matrix, self.matrix)))


class NumberField:
    def __init__(self, poly: Sequence[int], basis: Sequence[Sequence], automorphisms: dict,
                 label: str = "L"):
        self.label = label
        self.poly = [int(c) for c in poly]
        self.n = n = len(self.poly) - 1
        if self.poly[-1] != 1:
            raise IntegralBasisError("defining polynomial must be monic")
        if not 1 <= n <= MAX_DEGREE:
            raise ValueError(f"degree {n} outside 1..{MAX_DEGREE}")
        x = sympy.Symbol("x")
        if not sympy.Poly(list(reversed(self.poly)), x, domain="QQ").is_irreducible:
            raise ValueError("defining polynomial is reducible")
        self.B = [[Fraction(c) for c in row] + [Fraction(0)] * (n - len(row)) for row in basis]
        if len(self.B) != n or self.B[0] != [1] + [0] * (n - 1):
            raise IntegralBasisError("integral basis must have n rows starting with 1")
        self.Binv = inverse(self.B)
        table = []
        for i in range(n):
            row = []
            for j in range(n):
                c = self._power_to_coords(poly_mod(poly_mul(self.B[i], self.B[j]), self.poly))
                if any(v.denominator != 1 for v in c):
                    raise IntegralBasisError(f"basis not closed under multiplication ({i},{j})")
                row.append([int(v) for v in c])
            table.append(row)
        self.O = Order(table)
        self._check_discriminant()
        self.automorphisms = [self._make_aut(name, img) for name, img in automorphisms.items()]
        self._check_group()

    def __repr__(self):
        return f"NumberField({self.label}, {self.poly})"

    # conversions --------------------------------------------------------------
    def _power_to_coords(self, p: Sequence[Fraction]) -> list[Fraction]:
        # row vector p = c * B
        return [sum(p[k] * self.Binv[k][i] for k in range(self.n)) for i in range(self.n)]

    def from_power(self, coeffs: Sequence) -> Elt:
        p = [Fraction(c) for c in coeffs] + [Fraction(0)] * (self.n - len(coeffs))
        return self.O.elt(self._power_to_coords(poly_mod(p, self.poly)))

    def to_power(self, x: Elt) -> list[Fraction]:
        c = x.coords_fraction()
        return [sum(c[i] * self.B[i][k] for i in range(self.n)) for k in range(self.n)]

    def elt(self, coords: Sequence, den: int = 1) -> Elt:
        return self.O.elt(coords, den)

    @property
    def one(self) -> Elt:
        return self.O.one

    def _check_discriminant(self) -> None:
        x = sympy.Symbol("x")
        dpoly = int(sympy.discriminant(sympy.Poly(list(reversed(self.poly)), x)))
        index = 1 / abs(det(self.B))
        if index.denominator != 1 or dpoly != self.O.discriminant * index ** 2:
            raise IntegralBasisError("discriminant of the basis is inconsistent with the polynomial")

    @property
    def discriminant(self) -> int:
        return self.O.discriminant

    # automorphisms ------------------------------------------------------------
    def _make_aut(self, name: str, image: Sequence) -> Automorphism:
        img = [Fraction(c) for c in image]
        if any(poly_compose_mod(self.poly, img, self.poly)):
            raise IntegralBasisError(f"automorphism {name}: image is not a root")
        cols = []
        for i in range(self.n):
            c = self._power_to_coords(poly_compose_mod(self.B[i], img, self.poly))
            if any(v.denominator != 1 for v in c):
                raise IntegralBasisError(f"automorphism {name} does not preserve the integral basis")
            cols.append([int(v) for v in c])
        mat = tuple(tuple(cols[j][i] for j in range(self.n)) for i in range(self.n))
        if abs(det(mat)) != 1:
            raise IntegralBasisError(f"automorphism {name} is not unimodular")
        return Automorphism(name, tuple(img), mat)

    def _check_group(self) -> None:
        mats = {a.matrix for a in self.automorphisms}
        ident = tuple(tuple(int(i == j) for j in range(self.n)) for i in range(self.n))
        if ident not in mats:
            raise IntegralBasisError("automorphism list must contain the identity")
        for a in self.automorphisms:
            for b in self.automorphisms:
                if a.then(b) not in mats:
                    raise IntegralBasisError(f"automorphisms not closed: {a.name}, {b.name}")
        # multiplicativity spot check on basis products
        for a in self.automorphisms:
            for w in self.O.basis():
                for v in self.O.basis():
                    if a(w * v) != a(w) * a(v):
                        raise IntegralBasisError(f"automorphism {a.name} is not multiplicative")

    def automorphism(self, name: str) -> Automorphism:
        return next(a for a in self.automorphisms if a.name == name)

    def aut_by_matrix(self, mat) -> Automorphism:
        mat = tuple(map(tuple, mat))
        return next(a for a in self.automorphisms if a.matrix == mat)

    # ideals -------------------------------------------------------------------
    def ideal(self, *gens) -> Ideal:
        return self.O.ideal([g if isinstance(g, Elt) else self.O.from_int(g) for g in gens])

    def unit_ideal(self) -> Ideal:
        return self.O.unit_ideal()

    @cached_property
    def different(self) -> Ideal:
        d = self.O.unit_ideal().dual().inverse()
        if not d.is_integral():
            raise NonIntegralDifferent("different is not integral; integral basis is wrong")
        return d

    # searches -----------------------------------------------------------------
    def box_elements(self, basis: Sequence[Elt], bound: int, start: int = 0) -> Iterator[Elt]:
        """Nonzero combinations of ``basis`` by increasing coefficient sup-norm."""
        for v in self.O.box(bound, start):
            if any(v):
                acc = self.O.zero
                for c, b in zip(v, basis):
                    if c:
                        acc = acc + b * c
                yield acc

    def bounded_search_principal(self, a: Ideal, bound: int) -> Optional[Elt]:
        """A generator of ``a`` with coordinates (over the ideal's basis) up to ``bound``."""
        target = a.norm()
        for x in self.box_elements(a.basis(), bound):
            if abs(x.norm()) == target:
                if self.ideal(x) != a:
                    raise ArithmeticError("norm test accepted a non-generator")
                return x
        return None

    def bounded_search_units(self, bound: int) -> list[Elt]:
        return [x for x in self.box_elements(self.O.basis(), bound) if abs(x.norm()) == 1]


def _sublattice_in(A: Ideal, vectors: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Basis of integer vectors ``c`` with ``sum c_t vectors[t]`` in ``A``."""
    n, k = A.ring.n, len(vectors)
    hinv = inverse([[Fraction(A.h[i][j], A.den) for j in range(n)] for i in range(n)])
    u = [[sum(hinv[i][m] * vectors[t][m] for m in range(n)) for i in range(n)] for t in range(k)]
    den = lcm(*(x.denominator for row in u for x in row))
    # kernel of [u_0 .. u_{k-1} | den*I]: coordinates over A must be integral
    mat = [[int(u[t][i] * den) for t in range(k)] + [den * int(i == j) for j in range(n)]
           for i in range(n)]
    return [list(v[:k]) for v in integer_kernel(mat)]


def hnf_rows(rows: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """A basis (``n`` rows) of the row lattice of a full-rank integer matrix."""
    h = hnf([list(col) for col in zip(*rows)])
    return [[h[i][j] for i in range(n)] for j in range(n)]


# ---------------------------------------------------------------------------

class RelativeExtension:
    """``L / K`` with ``K`` imaginary quadratic embedded through the image of ``omega``."""

    def __init__(self, K: ImagQuadField, L: NumberField, omega_image: Sequence):
        self.K, self.L = K, L
        self.omega = L.from_power(omega_image)
        if self.omega * self.omega != self.omega * K.D - K.c0:
            raise IntegralBasisError("embedding of omega does not satisfy its minimal polynomial")
        if L.n % 2:
            raise ValueError("L must contain K")
        self.degree = L.n // 2
        self.G = [a for a in L.automorphisms if a(self.omega) == self.omega]
        if len(self.G) != self.degree:
            raise IntegralBasisError(f"found {len(self.G)} automorphisms over K, expected {self.degree}")
        for a in self.G:
            for b in self.G:
                if a.then(b) != b.then(a):
                    raise ValueError("G(L/K) is not abelian")
        self._primes_over: dict[Ideal, list[Ideal]] = {}

    def __repr__(self):
        return f"RelativeExtension({self.L.label}/{self.K.d})"

    @property
    def identity(self) -> Automorphism:
        ident = tuple(tuple(int(i == j) for j in range(self.L.n)) for i in range(self.L.n))
        return self.L.aut_by_matrix(ident)

    # elements ---------------------------------------------------------------
    def embed(self, x) -> Elt:
        if not isinstance(x, Elt):
            return self.L.O.from_int(x)
        cx, cy = x.coords_fraction()
        return self.L.O.from_int(cx) + self.omega * self.L.O.from_int(cy)

    def contract(self, x: Elt) -> Elt:
        """The element of ``K`` equal to ``x``; raises :class:`NotInBase` otherwise."""
        c, w = x.coords_fraction(), self.omega.coords_fraction()
        k = next(i for i in range(1, self.L.n) if w[i])
        b = c[k] / w[k]
        a = c[0] - b * w[0]
        y = self.K.elt(a, b)
        if self.embed(y) != x:
            raise NotInBase(f"{x} does not lie in K")
        return y

    def in_base(self, x: Elt) -> bool:
        return all(s(x) == x for s in self.G)

    def rel_norm(self, x: Elt) -> Elt:
        out = self.L.one
        for s in self.G:
            out = out * s(x)
        return self.contract(out)

    def rel_trace(self, x: Elt) -> Elt:
        out = self.L.O.zero
        for s in self.G:
            out = out + s(x)
        return self.contract(out)

    # ideals -----------------------------------------------------------------
    def extend_ideal(self, a: Ideal) -> Ideal:
        return self.L.O.ideal([self.embed(b) for b in a.basis()])

    def contract_ideal(self, A: Ideal) -> Ideal:
        """``A`` intersected with ``K``."""
        e = [self.embed(self.K.O.one).coords_fraction(), self.omega.coords_fraction()]
        return Ideal.from_lattice(self.K.O, _sublattice_in(A, e))

    def ideal_norm_to_base(self, A: Ideal) -> Ideal:
        if A.den != 1:
            d = A.den
            return self.ideal_norm_to_base(A * d) * self.K.ideal(Fraction(1, d ** self.degree))
        prod = self.L.unit_ideal()
        for s in self.G:
            prod = prod * A.apply(s.matrix)
        out = self.contract_ideal(prod)
        if self.extend_ideal(out) != prod:
            raise NotInBase("product of conjugates is not extended from K")
        return out

    def conj_ideal(self, A: Ideal, s: Automorphism) -> Ideal:
        return A.apply(s.matrix)

    @cached_property
    def relative_different(self) -> Ideal:
        dk = self.K.O.unit_ideal().dual().inverse()
        out = self.L.different * self.extend_ideal(dk).inverse()
        if not out.is_integral():
            raise NonIntegralDifferent("relative different is not integral")
        return out

    # ramification and Frobenius ----------------------------------------------
    @cached_property
    def relative_discriminant(self) -> Ideal:
        return self.ideal_norm_to_base(self.relative_different)

    def is_ramified(self, p: Ideal) -> bool:
        return p.contains_ideal(self.relative_discriminant)

    def frobenius(self, p: Ideal) -> Automorphism:
        """The unique ``s`` in ``G(L/K)`` with ``s(x) = x^Np mod p O_L`` (``p`` unramified)."""
        if self.is_ramified(p):
            raise Ramified(f"{p} ramifies in {self.L.label}")
        pe = self.extend_ideal(p)
        q = int(p.norm())
        basis = self.L.O.basis()
        powers = [residue_pow(w, q, pe) for w in basis]
        hits = [s for s in self.G if all(pe.contains(s(w) - wq) for w, wq in zip(basis, powers))]
        if len(hits) != 1:
            raise ArithmeticError(f"Frobenius at {p} is not unique ({len(hits)} candidates)")
        return hits[0]

    def aut_order(self, s: Automorphism) -> int:
        k, m = 1, s.matrix
        ident = self.identity.matrix
        while m != ident:
            m = tuple(map(tuple, matmul(s.matrix, m)))
            k += 1
        return k

    def compose(self, s: Automorphism, t: Automorphism) -> Automorphism:
        """``s o t``."""
        return self.L.aut_by_matrix(t.then(s))

    def aut_pow(self, s: Automorphism, k: int) -> Automorphism:
        k %= self.aut_order(s)
        out = self.identity
        for _ in range(k):
            out = self.compose(s, out)
        return out

    # primes -----------------------------------------------------------------
    def primes_over(self, p: Ideal) -> list[Ideal]:
        """Prime ideals of ``L`` above a prime ``p`` of ``K`` (sorted by norm, HNF)."""
        if p in self._primes_over:
            return self._primes_over[p]
        pe = self.extend_ideal(p)
        if self.is_ramified(p):
            primes = self._primes_by_residues(pe)
        else:
            f = self.aut_order(self.frobenius(p))
            g = self.degree // f
            primes = [pe] if g == 1 else self._primes_by_search(pe, int(p.norm()) ** f, g)
        primes.sort(key=_ideal_key)
        prod = self.L.unit_ideal()
        for P in primes:
            prod = prod * P ** self.valuation(P, pe)
        if prod != pe:
            raise ArithmeticError(f"prime decomposition of {p} is incomplete")
        self._primes_over[p] = primes
        return primes

    def _primes_by_residues(self, pe: Ideal) -> list[Ideal]:
        cands = set()
        for r in pe.residues():
            x = self.L.O.elt(r)
            if x.is_zero():
                continue
            c = pe + self.L.ideal(x)
            if c != self.L.unit_ideal():
                cands.add(c)
        primes = [c for c in cands if not any(d != c and d.contains_ideal(c) for d in cands)]
        return primes or [pe]

    def _primes_by_search(self, pe: Ideal, target: int, g: int) -> list[Ideal]:
        # an ideal of norm N(p)^f containing p O_L is prime: every prime above p has that norm
        q = min(factorint(target))
        found: list[Ideal] = []
        for x in self.L.box_elements(self.L.O.basis(), max(4, target)):
            if x.norm() % q:
                continue
            c = pe + self.L.ideal(x)
            if c.norm() == target and c not in found:
                found.append(c)
                if len(found) == g:
                    return found
        return self._primes_by_residues(pe)

    def primes_up_to(self, bound: int) -> list[Ideal]:
        """Primes of ``L`` of absolute norm ``<= bound``."""
        out = []
        for p in self.K.primes_up_to(bound):
            out += [P for P in self.primes_over(p) if P.norm() <= bound]
        return sorted(out, key=_ideal_key)

    def prime_below(self, P: Ideal) -> Ideal:
        q = min(factorint(int(P.norm())))
        for p in self.K.decompose_prime(q)["primes"]:
            if P.contains_ideal(self.extend_ideal(p)):
                return p
        raise ArithmeticError("no prime of K below P")

    def valuation(self, P: Ideal, A: Ideal) -> int:
        if A.den != 1:
            return self.valuation(P, A * A.den) - self.valuation(P, self.L.ideal(A.den))
        v, inv = 0, P.inverse()
        while P.contains_ideal(A):
            A = A * inv
            v += 1
        return v

    def factor(self, A: Ideal) -> dict[Ideal, int]:
        """Prime factorisation of a fractional ideal of ``L``."""
        if A.den != 1:
            num = self.factor(A * A.den)
            for P, e in self.factor(self.L.ideal(A.den)).items():
                num[P] = num.get(P, 0) - e
            return {P: e for P, e in sorted(num.items(), key=lambda t: _ideal_key(t[0])) if e}
        out: dict[Ideal, int] = {}
        rest = A
        for q in factorint(int(A.norm())):
            for p in self.K.decompose_prime(q)["primes"]:
                for P in self.primes_over(p):
                    while P.contains_ideal(rest):
                        rest = rest * P.inverse()
                        out[P] = out.get(P, 0) + 1
        if rest != self.L.unit_ideal():
            raise ArithmeticError("incomplete factorisation in L")
        return dict(sorted(out.items(), key=lambda t: _ideal_key(t[0])))

    # intermediate fields --------------------------------------------------------
    def fixed_lattice(self, H: Sequence[Automorphism]) -> list[Elt]:
        """Z-basis of ``O_L`` intersected with the fixed field of ``H``."""
        n = self.L.n
        rows = []
        for s in H:
            for i in range(n):
                rows.append([s.matrix[i][j] - int(i == j) for j in range(n)])
        return [self.L.O.elt(v) for v in integer_kernel(rows)]

    def contract_to(self, A: Ideal, H: Sequence[Automorphism]) -> Ideal:
        """``(A meet L^H) O_L``: the extension of the contraction of ``A`` to ``L^H``."""
        sub = self.fixed_lattice(H)
        coeffs = _sublattice_in(A, [v.coords_fraction() for v in sub])
        gens = []
        for c in coeffs:
            acc = self.L.O.zero
            for k, v in zip(c, sub):
                acc = acc + v * k
            gens.append(acc)
        return self.L.O.ideal(gens)

    def different_over(self, H: Sequence[Automorphism]) -> Ideal:
        """Relative different of ``L`` over the fixed field of ``H``."""
        n = self.L.n
        rows = []
        for w in self.L.O.basis():
            # x -> Tr_H(x w) as a rational matrix; x lies in the codifferent iff all are integral
            cols = []
            for b in self.L.O.basis():
                t = self.L.O.zero
                for s in H:
                    t = t + s(b * w)
                cols.append(t.coords_fraction())
            rows += [[cols[j][i] for j in range(n)] for i in range(n)]
        den = lcm(*(x.denominator for r in rows for x in r))
        basis = hnf_rows([[int(x * den) for x in r] for r in rows], n)
        # dual lattice of the row lattice (rows / den)
        m = [[Fraction(x, den) for x in r] for r in basis]
        dual = inverse(m)
        codiff = Ideal.from_lattice(self.L.O, [[dual[i][j] for i in range(n)] for j in range(n)])
        out = codiff.inverse()
        if not out.is_integral():
            raise NonIntegralDifferent("relative different over a subfield is not integral")
        return out

    # searches -----------------------------------------------------------------
    def bounded_search_norm(self, t: Elt, bound: int) -> Optional[Elt]:
        """Integral ``x`` with ``N_{L/K}(x) = t`` and coordinates up to ``bound``."""
        target = abs(t.norm())
        for x in self.L.box_elements(self.L.O.basis(), bound):
            if abs(x.norm()) == target and self.rel_norm(x) == t:
                return x
        return None
