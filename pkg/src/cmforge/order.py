"""Exact arithmetic in a maximal order given by structure constants.

Shared by the quadratic field and the class fields.  An element is an integer
coordinate vector over the integral basis with one positive denominator; an
ideal is the column HNF of ``den * I`` together with ``den``.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from itertools import product
from math import gcd, lcm
from typing import Iterable, Iterator, Sequence

from .exact import det, det_int, hnf, hnf_with_transform, inverse


class ZeroIdeal(ValueError):
    pass


def _content(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g


class Order:
    """Z-basis ``w_0 = 1, ..., w_{n-1}`` with ``w_i w_j = sum_k table[i][j][k] w_k``."""

    def __init__(self, table: Sequence[Sequence[Sequence[int]]]):
        self.n = len(table)
        self.table = [[tuple(int(c) for c in table[i][j]) for j in range(self.n)]
                      for i in range(self.n)]
        for i in range(self.n):
            e = tuple(int(k == i) for k in range(self.n))
            if self.table[0][i] != e or self.table[i][0] != e:
                raise ValueError("basis element 0 must be the identity")

    # elements ---------------------------------------------------------------
    def elt(self, coords: Sequence, den: int = 1) -> "Elt":
        fr = [Fraction(c) for c in coords]
        d = lcm(*(f.denominator for f in fr)) if fr else 1
        return Elt(self, tuple(int(f * d) for f in fr), d * den)

    def from_int(self, a) -> "Elt":
        a = Fraction(a)
        return Elt(self, (a.numerator,) + (0,) * (self.n - 1), a.denominator)

    @cached_property
    def one(self) -> "Elt":
        return self.from_int(1)

    @cached_property
    def zero(self) -> "Elt":
        return self.from_int(0)

    def basis(self) -> list["Elt"]:
        return list(self._basis)

    @cached_property
    def _basis(self) -> tuple["Elt", ...]:
        return tuple(Elt(self, tuple(int(i == j) for j in range(self.n)), 1) for i in range(self.n))

    def mul_coords(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        out = [0] * self.n
        t = self.table
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if not bj:
                    continue
                c = ai * bj
                for k, tk in enumerate(t[i][j]):
                    if tk:
                        out[k] += c * tk
        return out

    @cached_property
    def trace_form(self) -> list[list[int]]:
        return [[(self._basis[i] * self._basis[j]).trace() for j in range(self.n)]
                for i in range(self.n)]

    @cached_property
    def discriminant(self) -> int:
        return int(det(self.trace_form))

    # ideals -----------------------------------------------------------------
    def ideal(self, gens: Iterable["Elt"]) -> "Ideal":
        """Ideal generated (as an O-module) by ``gens``."""
        gens = [g for g in gens if not g.is_zero()]
        if not gens:
            raise ZeroIdeal("zero ideal")
        vecs = [(g * w) for g in gens for w in self.basis()]
        return Ideal.from_lattice(self, [v.coords_fraction() for v in vecs])

    def unit_ideal(self) -> "Ideal":
        return self.ideal([self.one])

    def box(self, bound: int, start: int = 0) -> Iterator[tuple[int, ...]]:
        """Integer vectors with sup-norm in ``(start, bound]``.

        Ordered by sup-norm, then by l1-norm, then lexicographically largest
        first, so small positive witnesses such as ``1 + x`` come early.
        """
        for r in range(start + 1 if start else 0, bound + 1):
            shell = [v for v in product(range(-r, r + 1), repeat=self.n)
                     if max(map(abs, v), default=0) == r]
            shell.sort(key=lambda v: (sum(map(abs, v)), tuple(-c for c in v)))
            yield from shell


class Elt:
    __slots__ = ("ring", "c", "d")

    def __init__(self, ring: Order, coords: Sequence[int], den: int = 1):
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            coords, den = [-x for x in coords], -den
        g = gcd(_content(coords), den)
        if g > 1:
            coords, den = [x // g for x in coords], den // g
        self.ring = ring
        self.c = tuple(coords)
        self.d = den

    def coords_fraction(self) -> list[Fraction]:
        return [Fraction(x, self.d) for x in self.c]

    def is_zero(self) -> bool:
        return not any(self.c)

    def is_integral(self) -> bool:
        return self.d == 1

    def __add__(self, other):
        other = self._coerce(other)
        return Elt(self.ring, [a * other.d + b * self.d for a, b in zip(self.c, other.c)],
                   self.d * other.d)

    __radd__ = __add__

    def __neg__(self):
        return Elt(self.ring, [-a for a in self.c], self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return Elt(self.ring, self.ring.mul_coords(self.c, other.c), self.d * other.d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.ring.one, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.from_int(other)
        if not isinstance(other, Elt):
            return NotImplemented
        return self.c == other.c and self.d == other.d

    def __hash__(self):
        return hash((self.c, self.d))

    def _coerce(self, other) -> "Elt":
        if isinstance(other, Elt):
            return other
        return self.ring.from_int(other)

    def mul_matrix(self) -> list[list[Fraction]]:
        """Matrix of multiplication by self on the integral basis (column convention)."""
        cols = [self.ring.mul_coords(self.c, w.c) for w in self.ring._basis]
        return [[Fraction(cols[j][i], self.d) for j in range(self.ring.n)] for i in range(self.ring.n)]

    def int_mul_matrix(self) -> list[list[int]]:
        """Multiplication matrix of ``d * self`` (integer entries)."""
        cols = [self.ring.mul_coords(self.c, w.c) for w in self.ring._basis]
        return [[cols[j][i] for j in range(self.ring.n)] for i in range(self.ring.n)]

    def norm(self) -> Fraction:
        return Fraction(det_int(self.int_mul_matrix()), self.d ** self.ring.n)

    def trace(self) -> Fraction:
        m = self.mul_matrix()
        t = sum(m[i][i] for i in range(self.ring.n))
        return int(t) if t.denominator == 1 else t

    def inverse(self) -> "Elt":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        m = inverse(self.mul_matrix())
        return self.ring.elt([m[i][0] for i in range(self.ring.n)])

    def apply(self, mat: Sequence[Sequence[int]]) -> "Elt":
        """Image under the ring map with matrix ``mat`` (column convention)."""
        n = self.ring.n
        return Elt(self.ring, [sum(mat[i][j] * self.c[j] for j in range(n)) for i in range(n)], self.d)

    def __repr__(self):
        return f"Elt({list(self.c)}/{self.d})" if self.d != 1 else f"Elt({list(self.c)})"


class Ideal:
    """Fractional ideal ``H / den`` with ``H`` the column HNF of ``den * I``."""

    __slots__ = ("ring", "h", "den")

    def __init__(self, ring: Order, h: Sequence[Sequence[int]], den: int):
        self.ring = ring
        self.h = tuple(tuple(r) for r in h)
        self.den = den

    @classmethod
    def from_lattice(cls, ring: Order, vectors: Sequence[Sequence]) -> "Ideal":
        """Canonical ideal spanned over Z by rational coordinate vectors (full rank required)."""
        fr = [[Fraction(x) for x in v] for v in vectors]
        d = lcm(*(x.denominator for v in fr for x in v)) if fr else 1
        cols = [[int(x * d) for x in v] for v in fr]
        n = ring.n
        m = [[cols[j][i] for j in range(len(cols))] for i in range(n)]
        h = hnf(m)
        h = [row[:n] for row in h]
        if any(h[i][i] == 0 for i in range(n)):
            raise ZeroIdeal("lattice is not of full rank")
        g = gcd(_content(x for row in h for x in row), d)
        if g > 1:
            h = [[x // g for x in row] for row in h]
            d //= g
        return cls(ring, h, d)

    # structure ---------------------------------------------------------------
    def basis(self) -> list[Elt]:
        n = self.ring.n
        return [Elt(self.ring, [self.h[i][j] for i in range(n)], self.den) for j in range(n)]

    def basis_fraction(self) -> list[list[Fraction]]:
        return [b.coords_fraction() for b in self.basis()]

    def norm(self) -> Fraction:
        p = 1
        for i in range(self.ring.n):
            p *= self.h[i][i]
        return Fraction(p, self.den ** self.ring.n)

    def is_integral(self) -> bool:
        return self.den == 1

    def __eq__(self, other):
        return isinstance(other, Ideal) and self.h == other.h and self.den == other.den

    def __hash__(self):
        return hash((self.h, self.den))

    def __mul__(self, other):
        if isinstance(other, Elt):
            if other.is_zero():
                raise ZeroIdeal("product with zero")
            return Ideal.from_lattice(self.ring, [(b * other).coords_fraction() for b in self.basis()])
        if isinstance(other, (int, Fraction)):
            return self * self.ring.from_int(other)
        vecs = [(a * b).coords_fraction() for a in self.basis() for b in other.basis()]
        return Ideal.from_lattice(self.ring, vecs)

    __rmul__ = __mul__

    def __add__(self, other: "Ideal") -> "Ideal":
        return Ideal.from_lattice(self.ring, self.basis_fraction() + other.basis_fraction())

    def __pow__(self, k: int) -> "Ideal":
        if k < 0:
            return self.inverse() ** (-k)
        out, base = self.ring.unit_ideal(), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __truediv__(self, other: "Ideal") -> "Ideal":
        return self * other.inverse()

    def dual(self) -> "Ideal":
        """Trace dual ``{y : Tr(x y) in Z for all x in I}`` (a lattice, returned as ideal)."""
        n = self.ring.n
        t = self.ring.trace_form
        b = [[self.h[i][j] for i in range(n)] for j in range(n)]  # rows = basis vectors
        bt = [[Fraction(sum(b[r][k] * t[k][c] for k in range(n)), self.den) for c in range(n)]
              for r in range(n)]
        inv = inverse(bt)
        return Ideal.from_lattice(self.ring, [[inv[i][j] for i in range(n)] for j in range(n)])

    def inverse(self) -> "Ideal":
        codiff = self.ring.unit_ideal().dual()
        return (self * codiff).dual()

    def intersect(self, other: "Ideal") -> "Ideal":
        return (self.dual() + other.dual()).dual()

    def contains(self, x: Elt) -> bool:
        if x.is_zero():
            return True
        n = self.ring.n
        v = [Fraction(c * self.den, x.d) for c in x.c]
        for k in range(n):
            q = v[k] / self.h[k][k]
            if q.denominator != 1:
                return False
            v = [v[i] - q * self.h[i][k] for i in range(n)]
        return True

    def contains_ideal(self, other: "Ideal") -> bool:
        return all(self.contains(b) for b in other.basis())

    def divides(self, other: "Ideal") -> bool:
        return self.contains_ideal(other)

    def apply(self, mat) -> "Ideal":
        return Ideal.from_lattice(self.ring, [b.apply(mat).coords_fraction() for b in self.basis()])

    def is_coprime(self, other: "Ideal") -> bool:
        return (self + other) == self.ring.unit_ideal()

    def reduce(self, x: Elt) -> tuple[int, ...]:
        """Canonical residue of an integral element modulo this integral ideal."""
        if self.den != 1 or x.d != 1:
            raise ValueError("reduce needs integral ideal and element")
        n = self.ring.n
        v = list(x.c)
        for k in range(n):
            q = v[k] // self.h[k][k]
            if q:
                v = [v[i] - q * self.h[i][k] for i in range(n)]
        return tuple(v)

    def residues(self) -> Iterator[tuple[int, ...]]:
        """All canonical residues of ``O / I`` (integral ideals only)."""
        n = self.ring.n
        for v in product(*(range(self.h[k][k]) for k in range(n))):
            yield self.reduce(Elt(self.ring, v))

    def __repr__(self):
        return f"Ideal(h={[list(r) for r in self.h]}, den={self.den})"


def element_is_coprime(x: Elt, ideal: Ideal) -> bool:
    if x.is_zero():
        return ideal == x.ring.unit_ideal()
    return (x.ring.ideal([x]) + ideal) == x.ring.unit_ideal()


def unit_residue(x: Elt, modulus: Ideal, phi: int) -> Elt:
    """Integral representative of ``x`` modulo ``modulus`` for an ``x`` coprime to it.

    ``phi`` is ``#(O/modulus)^x``; denominators are cleared with an inverse
    computed as ``s^(phi-1)``.
    """
    ring = x.ring
    if x.is_integral():
        return ring.elt(modulus.reduce(x))
    # denominator ideal {s : s x integral} is coprime to the modulus
    dnm = ring.unit_ideal().intersect(ring.ideal([x]).inverse())
    for s in _small_elements(dnm):
        if element_is_coprime(s, modulus):
            num = ring.elt(modulus.reduce(s * x))
            inv = residue_pow(ring.elt(modulus.reduce(s)), phi - 1, modulus)
            return ring.elt(modulus.reduce(num * inv))
    raise ArithmeticError("no denominator element coprime to modulus found")


def _small_elements(ideal: Ideal, bound: int = 6) -> Iterator[Elt]:
    basis = ideal.basis()
    for v in ideal.ring.box(bound):
        if any(v):
            acc = ideal.ring.zero
            for c, b in zip(v, basis):
                if c:
                    acc = acc + b * c
            yield acc


def residue_pow(x: Elt, k: int, modulus: Ideal) -> Elt:
    """``x^k`` reduced modulo an integral ideal (``x`` integral)."""
    ring = x.ring
    out, base = ring.elt(modulus.reduce(ring.one)), ring.elt(modulus.reduce(x))
    while k:
        if k & 1:
            out = ring.elt(modulus.reduce(out * base))
        base = ring.elt(modulus.reduce(base * base))
        k >>= 1
    return out


def congruent_one(x: Elt, modulus: Ideal, phi: int | None = None) -> bool:
    """Multiplicative congruence ``x = 1 mod* modulus`` (``x`` coprime to the modulus)."""
    if modulus.norm() == 1:
        return True
    if not x.is_zero() and x.is_integral():
        return modulus.contains(x - 1)
    dnm = x.ring.unit_ideal().intersect(x.ring.ideal([x]).inverse())
    for s in _small_elements(dnm):
        if element_is_coprime(s, modulus):
            return modulus.contains(s * x - s)
    raise ArithmeticError("no denominator element coprime to modulus found")


def split_one(a: Ideal, b: Ideal) -> tuple[Elt, Elt]:
    """``x in a``, ``y in b`` with ``x + y = 1`` for coprime integral ideals."""
    ring = a.ring
    n = ring.n
    cols = [list(v.c) for v in a.basis()] + [list(v.c) for v in b.basis()]
    m = [[cols[j][i] for j in range(2 * n)] for i in range(n)]
    h, u = hnf_with_transform(m)
    if any(h[i][j] != int(i == j) for i in range(n) for j in range(n)):
        raise ValueError("ideals are not coprime")
    x = Elt(ring, [sum(u[j][0] * cols[j][i] for j in range(n)) for i in range(n)])
    return x, ring.one - x
