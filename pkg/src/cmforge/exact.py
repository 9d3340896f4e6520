"""Integer linear algebra and finite abelian groups.

Integers are Python ints and rationals are :class:`fractions.Fraction`, so
every computation here is exact.  Matrices are lists of rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, prod
from typing import Callable, Hashable, Iterable, Optional, Sequence


class InfiniteGroup(ValueError):
    """Raised when a relation matrix presents an infinite group."""


class NotInGroup(ValueError):
    pass


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``x*a + y*b == g == gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    if not a:
        return []
    cols = len(b[0]) if b else 0
    return [[sum(row[k] * b[k][j] for k in range(len(b))) for j in range(cols)]
            for row in a]


def transpose(m: Sequence[Sequence]) -> list[list]:
    return [list(r) for r in zip(*m)]


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            d = -d
        d *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return d


def det_int(m: Sequence[Sequence[int]]) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    a = [list(map(int, row)) for row in m]
    n, sign, prev = len(a), 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((r for r in range(k + 1, n) if a[r][k]), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def inverse(m: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def _col_combine(mats, k, j, x, y, u, v):
    # col_k <- x*col_k + y*col_j ; col_j <- u*col_k + v*col_j
    for mat in mats:
        for row in mat:
            a, b = row[k], row[j]
            row[k] = x * a + y * b
            row[j] = u * a + v * b


def hnf_with_transform(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Column Hermite normal form ``H = M U`` with ``U`` unimodular.

    ``H`` is lower echelon: the pivot of column ``k`` sits in a row strictly
    below the pivot of column ``k-1``, pivots are positive, and every entry
    left of a pivot in its row lies in ``[0, pivot)``.  Zero columns come last.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    h = [list(map(int, r)) for r in m]
    u = identity(cols)
    k = 0
    for i in range(rows):
        if k == cols:
            break
        for j in range(k + 1, cols):
            if h[i][j]:
                a, b = h[i][k], h[i][j]
                g, x, y = ext_gcd(a, b)
                _col_combine((h, u), k, j, x, y, -b // g, a // g)
        p = h[i][k]
        if p == 0:
            continue
        if p < 0:
            for mat in (h, u):
                for row in mat:
                    row[k] = -row[k]
            p = -p
        for j in range(k):
            q = h[i][j] // p
            if q:
                for mat in (h, u):
                    for row in mat:
                        row[j] -= q * row[k]
        k += 1
    return h, u


def solve_integer(m: Sequence[Sequence[int]], t: Sequence[int]) -> Optional[list[int]]:
    """An integer solution of ``M x = t``, or None."""
    h, u = hnf_with_transform(m)
    cols = len(u)
    y = [0] * cols
    k = 0
    for i, row in enumerate(h):
        r = t[i] - sum(row[j] * y[j] for j in range(k))
        if k < cols and row[k]:
            if r % row[k]:
                return None
            y[k] = r // row[k]
            k += 1
        elif r:
            return None
    return [sum(u[i][j] * y[j] for j in range(cols)) for i in range(cols)]


def hnf(m: Sequence[Sequence[int]]) -> list[list[int]]:
    return hnf_with_transform(m)[0]


def hnf_rank(h: Sequence[Sequence[int]]) -> int:
    if not h:
        return 0
    return sum(1 for j in range(len(h[0])) if any(row[j] for row in h))


def integer_kernel(m: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis (as columns of the returned list of vectors) of ``{x in Z^n : M x = 0}``."""
    h, u = hnf_with_transform(m)
    r = hnf_rank(h)
    n = len(u)
    return [[u[i][j] for i in range(n)] for j in range(r, n)]


def snf(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form: returns ``(U, S, V)`` with ``U M V = S``."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    s = [list(map(int, r)) for r in m]
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        for mat in (s, u):
            mat[i], mat[j] = mat[j], mat[i]

    def swap_cols(i, j):
        for mat in (s, v):
            for row in mat:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        for mat in (s, u):
            mat[dst] = [a + q * b for a, b in zip(mat[dst], mat[src])]

    def add_col(dst, src, q):
        for mat in (s, v):
            for row in mat:
                row[dst] += q * row[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if s[i][j] and (best is None or abs(s[i][j]) < abs(s[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return u, s, v
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = s[t][t]
            clean = True
            for i in range(t + 1, rows):
                q = s[i][t] // p
                if q:
                    add_row(i, t, -q)
                if s[i][t]:
                    clean = False
            for j in range(t + 1, cols):
                q = s[t][j] // p
                if q:
                    add_col(j, t, -q)
                if s[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if s[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if s[t][t] < 0:
            for mat in (s, u):
                mat[t] = [-x for x in mat[t]]
    return u, s, v


def is_unimodular(m: Sequence[Sequence[int]]) -> bool:
    return abs(det(m)) == 1


# ---------------------------------------------------------------------------
# finite abelian groups

Element = tuple[int, ...]


class FiniteAbelianGroup:
    """``Z^n / (row span of the relation matrix)`` in Smith-normal-form coordinates.

    Elements are tuples of exponents against the SNF basis, each reduced into
    ``[0, d_i)``; trivial factors ``d_i = 1`` are dropped.
    """

    def __init__(self, labels: Sequence[str], relations: Sequence[Sequence[int]]):
        self.labels = list(labels)
        n = len(self.labels)
        rels = [list(map(int, r)) for r in relations if any(r)]
        for r in rels:
            if len(r) != n:
                raise ValueError("relation length does not match generator count")
        self.relations = rels
        if n == 0:
            self._v = []
            self._vinv = []
            self._keep = []
            self.invariants = ()
            return
        if len(rels) < n:
            raise InfiniteGroup(f"{len(rels)} relations on {n} generators")
        _, s, v = snf(rels)
        diag = [s[i][i] for i in range(n)]
        if any(d == 0 for d in diag):
            raise InfiniteGroup("relation matrix is not of full rank")
        self._v = v
        self._vinv = [[int(x) for x in row] for row in inverse(v)]
        self._keep = [i for i, d in enumerate(diag) if d != 1]
        self.invariants = tuple(diag[i] for i in self._keep)

    # basic structure -------------------------------------------------------
    @property
    def order(self) -> int:
        return prod(self.invariants)

    @property
    def rank(self) -> int:
        return len(self.invariants)

    def identity(self) -> Element:
        return (0,) * self.rank

    def is_trivial(self) -> bool:
        return self.rank == 0

    def reduce(self, vec: Iterable[int]) -> Element:
        return tuple(int(x) % d for x, d in zip(vec, self.invariants))

    def element(self, gen_vector: Sequence[int]) -> Element:
        """Canonical element for an exponent vector on the original generators."""
        n = len(self.labels)
        if len(gen_vector) != n:
            raise NotInGroup(f"expected {n} exponents, got {len(gen_vector)}")
        y = [sum(gen_vector[k] * self._v[k][j] for k in range(n)) for j in range(n)]
        return self.reduce(y[i] for i in self._keep)

    def generator(self, i: int) -> Element:
        e = [0] * len(self.labels)
        e[i] = 1
        return self.element(e)

    def basis_in_generators(self, i: int) -> list[int]:
        """Exponents on the original generators of the ``i``-th SNF basis element."""
        return list(self._vinv[self._keep[i]])

    def op(self, a: Element, b: Element) -> Element:
        return self.reduce(x + y for x, y in zip(a, b))

    def neg(self, a: Element) -> Element:
        return self.reduce(-x for x in a)

    def pow(self, a: Element, k: int) -> Element:
        return self.reduce(k * x for x in a)

    def element_order(self, a: Element) -> int:
        o = 1
        for x, d in zip(a, self.invariants):
            o = o * (d // gcd(x, d)) // gcd(o, d // gcd(x, d))
        return o

    def discrete_log(self, a: Sequence[int]) -> Element:
        """Exponent vector of ``a`` against the SNF basis (validated)."""
        a = tuple(a)
        if len(a) != self.rank or any(not (0 <= x < d) for x, d in zip(a, self.invariants)):
            raise NotInGroup(f"{a} is not an element of C{self.invariants}")
        return a

    def elements(self) -> list[Element]:
        return [tuple(e) for e in product(*(range(d) for d in self.invariants))]

    def solve(self, gens: Sequence[Element], target: Element) -> Optional[list[int]]:
        """Integers ``n`` with ``sum n_i gens_i = target``, or None if outside the span."""
        r = self.rank
        if r == 0:
            return [0] * len(gens)
        rows = [[g[j] for g in gens] + [d if k == j else 0 for k in range(r)]
                for j, d in enumerate(self.invariants)]
        x = solve_integer(rows, list(target))
        return None if x is None else x[:len(gens)]

    def subgroup_generated(self, gens: Iterable[Element]) -> frozenset[Element]:
        seen = {self.identity()}
        frontier = [self.identity()]
        gens = [tuple(g) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.op(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    def quotient(self, gens: Iterable[Element]) -> tuple["FiniteAbelianGroup", Callable[[Element], Element]]:
        """Quotient by the subgroup generated by ``gens`` and the projection map."""
        r = self.rank
        rels = [[d if i == j else 0 for j in range(r)] for i, d in enumerate(self.invariants)]
        rels += [list(g) for g in gens]
        q = FiniteAbelianGroup([f"b{i}" for i in range(r)], rels)
        return q, lambda x: q.element(list(x))

    def is_trivial_on(self, subgroup: Iterable[Element], character: Callable[[Element], object],
                      unit: object) -> bool:
        return all(character(x) == unit for x in subgroup)

    def __repr__(self) -> str:
        return f"FiniteAbelianGroup(invariants={self.invariants})"


def group_from_relations(labels: Sequence[str], relations: Sequence[Sequence[int]]) -> FiniteAbelianGroup:
    return FiniteAbelianGroup(labels, relations)


@dataclass
class EnumeratedGroup:
    """A finite abelian group given concretely, with a discrete-log table."""

    group: FiniteAbelianGroup
    generators: list
    log: dict

    def __call__(self, x) -> Element:
        try:
            return self.log[x]
        except KeyError:
            raise NotInGroup(f"{x!r} not in enumerated group") from None


def group_from_elements(ident: Hashable, op: Callable, candidates: Iterable[Hashable],
                        labels: Callable[[int], str] = lambda i: f"g{i}") -> EnumeratedGroup:
    """Build the abelian group generated by ``candidates`` under ``op``.

    Generators are taken greedily in the given order; the result carries a
    complete element -> SNF exponent table.
    """
    gens: list = []
    known: dict = {ident: ()}
    rels: list[list[int]] = []
    for cand in candidates:
        if cand in known:
            continue
        k, x = 1, cand
        while x not in known:
            x = op(x, cand)
            k += 1
        rel = list(known[x]) + [0] * (len(gens) - len(known[x]))
        rels.append([-c for c in rel] + [k])
        new = {}
        for s, vec in known.items():
            vec = tuple(vec) + (0,) * (len(gens) - len(vec))
            y = s
            for j in range(k):
                new[y] = vec + (j,)
                y = op(y, cand)
        known = new
        gens.append(cand)
    n = len(gens)
    rels = [r + [0] * (n - len(r)) for r in rels]
    g = FiniteAbelianGroup([labels(i) for i in range(n)], rels)
    log = {x: g.element(list(v) + [0] * (n - len(v))) for x, v in known.items()}
    return EnumeratedGroup(g, gens, log)


class GroupHom:
    """Homomorphism between :class:`FiniteAbelianGroup` objects given on SNF basis images."""

    def __init__(self, src: FiniteAbelianGroup, dst: FiniteAbelianGroup, images: Sequence[Element]):
        if len(images) != src.rank:
            raise ValueError("need one image per SNF basis element")
        self.src, self.dst = src, dst
        self.images = [tuple(x) for x in images]

    def __call__(self, a: Element) -> Element:
        out = self.dst.identity()
        for x, img in zip(a, self.images):
            out = self.dst.op(out, self.dst.pow(img, x))
        return out

    def is_well_defined(self) -> bool:
        return all(self.dst.pow(img, d) == self.dst.identity()
                   for img, d in zip(self.images, self.src.invariants))

    def kernel(self) -> frozenset[Element]:
        e = self.dst.identity()
        return frozenset(x for x in self.src.elements() if self(x) == e)

    def kernel_generators(self) -> list[Element]:
        """Generators of the kernel from ``sum x_i img_i + sum y_j d_j e_j = 0`` over Z."""
        r, s = self.src.rank, self.dst.rank
        if s == 0:
            return [tuple(int(i == j) for j in range(r)) for i in range(r)]
        rows = [[self.images[i][j] for i in range(r)] + [d if k == j else 0 for k in range(s)]
                for j, d in enumerate(self.dst.invariants)]
        gens = {self.src.reduce(v[:r]) for v in integer_kernel(rows)}
        gens.discard(self.src.identity())
        return sorted(gens)

    def image_order(self) -> int:
        return self.dst.order // self.dst.quotient(self.images)[0].order

    def kernel_order(self) -> int:
        return self.src.order // self.image_order()

    def image(self) -> frozenset[Element]:
        return self.dst.subgroup_generated(self.images)
