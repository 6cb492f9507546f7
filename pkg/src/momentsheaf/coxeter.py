"""Finite Weyl groups: root data, reflections, lengths, Bruhat order,
parabolic quotients.

Realization.  For a family of rank n we work in t* = Q^n with the simple
roots as the standard basis ("root coordinates").  Every group element then
acts by an integer matrix, all arithmetic is exact, and no family needs
radicals (in particular G2).  The invariant bilinear form is carried
explicitly as the symmetrized Cartan matrix, so Cartan integers can be
recovered from coordinates.

Element identity is exact matrix equality; the canonical word of an element
is its ShortLex-minimal reduced word (BFS in ShortLex order guarantees the
first word found for a matrix is minimal).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

from .errors import ResourceCapError, ValidationError

Q = Fraction

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[Fraction, ...]

DEFAULT_GROUP_CAP = 50_000

FAMILIES = ("A", "B", "C", "D", "E", "F", "G")


def _family_rank_range(family: str) -> tuple[int, int]:
    return {
        "A": (1, 99),
        "B": (2, 99),
        "C": (2, 99),
        "D": (3, 99),
        "E": (6, 8),
        "F": (4, 4),
        "G": (2, 2),
    }[family]


def weyl_order(family: str, rank: int) -> int:
    """|W| by the classical product formulas."""
    if family == "A":
        return factorial(rank + 1)
    if family in ("B", "C"):
        return 2**rank * factorial(rank)
    if family == "D":
        return 2 ** (rank - 1) * factorial(rank)
    if family == "E":
        return {6: 51840, 7: 2903040, 8: 696729600}[rank]
    if family == "F":
        return 1152
    if family == "G":
        return 12
    raise ValidationError(f"unknown family {family!r}")


def cartan_matrix(family: str, rank: int) -> tuple[tuple[int, ...], ...]:
    """Cartan integers C[i][j] = 2(a_i, a_j)/(a_j, a_j), Bourbaki numbering."""
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}")
    lo, hi = _family_rank_range(family)
    if not lo <= rank <= hi:
        raise ValidationError(f"family {family} does not have rank {rank}")
    n = rank
    c = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def bond(i: int, j: int, cij: int = -1, cji: int = -1) -> None:
        c[i][j] = cij
        c[j][i] = cji

    if family in ("A", "B", "C", "G"):
        for i in range(n - 1):
            bond(i, i + 1)
        if family == "B" and n >= 2:
            bond(n - 2, n - 1, -2, -1)  # a_{n-1} long, a_n short
        if family == "C" and n >= 2:
            bond(n - 2, n - 1, -1, -2)  # a_n long
        if family == "G":
            bond(0, 1, -1, -3)  # a_1 short, a_2 long
    elif family == "D":
        for i in range(n - 2):
            bond(i, i + 1)
        bond(n - 3, n - 1)
    elif family == "E":
        # chain 1-3-4-5-6(-7-8), branch 2-4
        chain = [0, 2, 3, 4, 5, 6, 7][: n - 1]
        for i, j in zip(chain, chain[1:]):
            bond(i, j)
        bond(1, 3)
    elif family == "F":
        bond(0, 1)
        bond(1, 2, -2, -1)  # a_2 long, a_3 short
        bond(2, 3)
    return tuple(tuple(row) for row in c)


def _invert_rational(mat: Sequence[Sequence[Fraction]]) -> tuple[Vector, ...]:
    n = len(mat)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


@dataclass(frozen=True)
class CartanDatum:
    """Root datum of a finite Weyl group in root coordinates."""

    family: str
    rank: int
    cartan: tuple[tuple[int, ...], ...]
    gram: tuple[Vector, ...]
    simple_roots: tuple[Vector, ...]
    fundamental_weights: tuple[Vector, ...]

    @classmethod
    def build(cls, family: str, rank: int) -> "CartanDatum":
        family = family.upper()
        c = cartan_matrix(family, rank)
        n = rank
        # symmetrizers: d_j/d_i = C[j][i]/C[i][j] along Dynkin bonds
        d = [Fraction(0)] * n
        d[0] = Fraction(1)
        todo = [0]
        while todo:
            i = todo.pop()
            for j in range(n):
                if j != i and c[i][j] and d[j] == 0:
                    d[j] = d[i] * c[j][i] / c[i][j]
                    todo.append(j)
        if any(v == 0 for v in d):
            raise ValidationError("disconnected Dynkin diagram")
        gram = tuple(
            tuple(Fraction(c[i][j]) * d[j] for j in range(n)) for i in range(n)
        )
        simple = tuple(
            tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)
        )
        weights = _invert_rational([[Fraction(v) for v in row] for row in c])
        datum = cls(family, rank, c, gram, simple, weights)
        datum.validate()
        return datum

    def validate(self) -> None:
        n = self.rank
        if len(self.simple_roots) != n:
            raise ValidationError("wrong number of simple roots")
        if any(self.gram[i][j] != self.gram[j][i] for i in range(n) for j in range(n)):
            raise ValidationError("bilinear form is not symmetric")
        for i in range(n):
            for j in range(n):
                derived = 2 * self._pair(self.simple_roots[i], self.simple_roots[j])
                derived /= self._pair(self.simple_roots[j], self.simple_roots[j])
                if derived != self.cartan[i][j]:
                    raise ValidationError("Cartan integers do not match the family")
        for i in range(n):
            for j in range(n):
                pairing = 2 * self._pair(self.fundamental_weights[i], self.simple_roots[j])
                pairing /= self._pair(self.simple_roots[j], self.simple_roots[j])
                if pairing != (1 if i == j else 0):
                    raise ValidationError("fundamental weights are wrong")

    def _pair(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
        return sum(
            x[i] * self.gram[i][j] * y[j]
            for i in range(self.rank)
            for j in range(self.rank)
        )

    def pairing(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
        """The W-invariant bilinear form on t*."""
        return self._pair(x, y)

    def simple_reflection_matrix(self, i: int) -> Matrix:
        """Matrix of s_i (1-based) on t* in root coordinates."""
        n = self.rank
        rows = []
        for k in range(n):
            if k != i - 1:
                rows.append(tuple(int(k == j) for j in range(n)))
            else:
                rows.append(tuple(int(k == j) - self.cartan[j][i - 1] for j in range(n)))
        return tuple(rows)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def mat_vec(a: Matrix, v: Sequence[Fraction]) -> Vector:
    return tuple(sum(row[k] * v[k] for k in range(len(row))) for row in a)


def identity_matrix(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class WeylElement:
    """A group element: integer matrix on t*, length, ShortLex-minimal word."""

    index: int
    matrix: Matrix
    length: int
    word: tuple[int, ...]  # 1-based simple reflection indices

    def word_str(self) -> str:
        return "".join(str(s) for s in self.word) if self.word else "e"


@dataclass(frozen=True)
class Reflection:
    element: WeylElement
    positive_root: tuple[int, ...]  # integer root coordinates


class WeylGroup:
    """A fully enumerated finite Weyl group with order and reflection data."""

    def __init__(self, cartan: CartanDatum, cap: int | None = None):
        self.cartan = cartan
        order = weyl_order(cartan.family, cartan.rank)
        cap = cap if cap is not None else _group_cap()
        if order > cap:
            raise ResourceCapError(
                f"group {cartan.family}{cartan.rank} has order {order}, "
                f"exceeding the cap of {cap}"
            )
        self._build_elements()
        self._build_roots()
        self._bruhat_cache: dict[tuple[int, int], bool] = {}

    # -- enumeration --------------------------------------------------------

    def _build_elements(self) -> None:
        n = self.cartan.rank
        self.simple_matrices = [
            self.cartan.simple_reflection_matrix(i) for i in range(1, n + 1)
        ]
        ident = identity_matrix(n)
        elements: list[WeylElement] = [WeylElement(0, ident, 0, ())]
        index_of: dict[Matrix, int] = {ident: 0}
        rmul: list[list[int]] = []
        level = [0]
        while level:
            nxt: list[int] = []
            for i in level:
                w = elements[i]
                row = []
                for s in range(1, n + 1):
                    m = mat_mul(w.matrix, self.simple_matrices[s - 1])
                    j = index_of.get(m)
                    if j is None:
                        j = len(elements)
                        elements.append(
                            WeylElement(j, m, w.length + 1, w.word + (s,))
                        )
                        index_of[m] = j
                        nxt.append(j)
                    row.append(j)
                rmul.append(row)
            level = nxt
        self.elements = elements
        self.index_of = index_of
        self._rmul = rmul

    def _build_roots(self) -> None:
        n = self.cartan.rank
        roots: set[tuple[Fraction, ...]] = set()
        frontier = [tuple(r) for r in self.cartan.simple_roots]
        while frontier:
            new = []
            for r in frontier:
                if r in roots:
                    continue
                roots.add(r)
                for s in self.simple_matrices:
                    new.append(mat_vec(s, r))
            frontier = new
        positive = sorted(
            (tuple(int(c) for c in r) for r in roots if all(c >= 0 for c in r)),
            key=lambda r: (sum(r), r),
        )
        self.positive_roots: list[tuple[int, ...]] = positive
        self.reflections: list[Reflection] = []
        for beta in positive:
            m = self._reflection_matrix(beta)
            idx = self.index_of.get(m)
            if idx is None:
                raise ValidationError("reflection does not lie in the group")
            self.reflections.append(Reflection(self.elements[idx], beta))

    def _reflection_matrix(self, beta: Sequence[int]) -> Matrix:
        n = self.cartan.rank
        bvec = [Fraction(b) for b in beta]
        norm = self.cartan.pairing(bvec, bvec)
        rows: list[list[Fraction]] = [
            [Fraction(int(i == j)) for j in range(n)] for i in range(n)
        ]
        for j in range(n):
            coef = 2 * self.cartan.pairing(self.cartan.simple_roots[j], bvec) / norm
            for k in range(n):
                rows[k][j] -= coef * bvec[k]
        out = []
        for row in rows:
            if any(v.denominator != 1 for v in row):
                raise ValidationError("reflection matrix is not integral")
            out.append(tuple(int(v) for v in row))
        return tuple(out)

    # -- basic queries -------------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> WeylElement:
        return self.elements[0]

    @property
    def longest(self) -> WeylElement:
        return max(self.elements, key=lambda w: w.length)

    def rmult(self, i: int, s: int) -> int:
        """Index of elements[i] * s_s (s is 1-based)."""
        return self._rmul[i][s - 1]

    def length(self, i: int) -> int:
        return self.elements[i].length

    def element_of_word(self, word: Iterable[int]) -> WeylElement:
        i = 0
        for s in word:
            if not 1 <= s <= self.cartan.rank:
                raise ValidationError(f"simple reflection index {s} out of range")
            i = self.rmult(i, s)
        return self.elements[i]

    def element_of_matrix(self, m: Matrix) -> WeylElement:
        idx = self.index_of.get(m)
        if idx is None:
            raise ValidationError("matrix does not belong to the group")
        return self.elements[idx]

    def right_descents(self, i: int) -> list[int]:
        li = self.elements[i].length
        return [
            s
            for s in range(1, self.cartan.rank + 1)
            if self.elements[self.rmult(i, s)].length < li
        ]

    def act(self, i: int, v: Sequence[Fraction]) -> Vector:
        return mat_vec(self.elements[i].matrix, v)

    def inversions(self, i: int) -> int:
        """Number of positive roots sent to negative roots by element i."""
        m = self.elements[i].matrix
        count = 0
        for beta in self.positive_roots:
            img = mat_vec(m, [Fraction(b) for b in beta])
            if all(c <= 0 for c in img):
                count += 1
        return count


def _group_cap() -> int:
    raw = os.environ.get("MOMENTSHEAF_CAP")
    if raw is None:
        return DEFAULT_GROUP_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"MOMENTSHEAF_CAP must be an integer, got {raw!r}") from exc


def build_weyl_group(cartan: CartanDatum, cap: int | None = None) -> WeylGroup:
    """Enumerate the whole group (errors if the family order exceeds the cap)."""
    return WeylGroup(cartan, cap=cap)


def weyl_group(family: str, rank: int, cap: int | None = None) -> WeylGroup:
    """Convenience builder from a family letter and rank."""
    return build_weyl_group(CartanDatum.build(family, rank), cap=cap)


def bruhat_leq(W: WeylGroup, x: WeylElement | int, y: WeylElement | int) -> bool:
    """Bruhat order by the recursive descent criterion, memoized on the group."""
    i = x.index if isinstance(x, WeylElement) else x
    j = y.index if isinstance(y, WeylElement) else y
    cache = W._bruhat_cache
    ell = W.length

    def rec(i: int, j: int) -> bool:
        if i == j:
            return True
        if ell(i) >= ell(j):
            return False
        key = (i, j)
        hit = cache.get(key)
        if hit is not None:
            return hit
        s = W.right_descents(j)[0]
        js = W.rmult(j, s)
        is_ = W.rmult(i, s)
        if ell(is_) < ell(i):
            out = rec(is_, js)
        else:
            out = rec(i, js)
        cache[key] = out
        return out

    return rec(i, j)


def parabolic_subgroup(W: WeylGroup, J: Iterable[int]) -> list[int]:
    """Element indices of W_J, sorted in group order."""
    J = sorted(set(J))
    for s in J:
        if not 1 <= s <= W.cartan.rank:
            raise ValidationError(f"parabolic index {s} out of range")
    seen = {0}
    todo = [0]
    while todo:
        i = todo.pop()
        for s in J:
            j = W.rmult(i, s)
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return sorted(seen)


def longest_element(W: WeylGroup, indices: Sequence[int]) -> int:
    """Index of the longest element among `indices` (must be unique)."""
    best = max(indices, key=lambda i: W.length(i))
    ties = [i for i in indices if W.length(i) == W.length(best)]
    if len(ties) != 1:
        raise ValidationError("longest element is not unique")
    return best


def minimal_coset_reps(W: WeylGroup, J: Iterable[int]) -> list[WeylElement]:
    """Minimal-length representatives of the cosets wW_J, in group order."""
    J = sorted(set(J))
    reps = [
        w
        for w in W.elements
        if all(W.length(W.rmult(w.index, s)) > w.length for s in J)
    ]
    sub = parabolic_subgroup(W, J)
    if len(reps) * len(sub) != len(W):
        raise ValidationError("coset representative count mismatch")
    return reps


def is_minimal_rep(W: WeylGroup, w: WeylElement | int, J: Iterable[int]) -> bool:
    i = w.index if isinstance(w, WeylElement) else w
    return all(W.length(W.rmult(i, s)) > W.length(i) for s in sorted(set(J)))
