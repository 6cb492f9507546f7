"""Exact rational linear algebra and degreewise models of graded polynomial rings.

Everything here works over Q with `fractions.Fraction`; there is no floating
point anywhere in this module.  The graded ring is A = Q[x1..xn] with every
variable in internal degree 1, and quotients A/(l1,..,lk) by independent
linear forms are modelled by substituting pivot variables away, so that each
graded piece is a plain finite-dimensional Q-vector space with a fixed
monomial basis.

Determinism contract: monomial bases use graded-lex order, Gaussian
elimination processes columns left to right (the reduced row echelon form is
unique, so pivot-row selection only affects speed, not results), and every
basis returned by the kernel/image routines is the canonical RREF basis.
Identical inputs therefore give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd
from typing import Iterable, Sequence

Q = Fraction

# Dense vector over Q.
Vector = tuple[Fraction, ...]

# Multivariate polynomial: exponent tuple -> nonzero coefficient.
Poly = dict[tuple[int, ...], Fraction]

# Sparse row: column index -> nonzero coefficient.
Row = dict[int, Fraction]


# ---------------------------------------------------------------------------
# integer vectors and normalization


def primitive_integer(vec: Sequence[Fraction | int]) -> tuple[int, ...]:
    """Scale a nonzero rational vector to coprime integers, first nonzero > 0.

    This is the canonical form used for moment-graph edge directions; it is
    idempotent and erases any rational multiple.
    """
    fracs = [Fraction(v) for v in vec]
    if all(v == 0 for v in fracs):
        raise ValueError("cannot normalize the zero vector")
    denom_lcm = 1
    for v in fracs:
        denom_lcm = denom_lcm * v.denominator // gcd(denom_lcm, v.denominator)
    ints = [int(v * denom_lcm) for v in fracs]
    g = 0
    for v in ints:
        g = gcd(g, v)
    ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-u for u in ints]
            break
    return tuple(ints)


# ---------------------------------------------------------------------------
# monomial bases


@dataclass(frozen=True)
class MonomialBasis:
    """Ordered basis of the degree-d piece of Q[x1..xn], optionally skipping
    variables (used for edge rings A_L where pivot variables are eliminated).

    Exponent tuples always have length n; skipped variables carry exponent 0.
    Order is graded-lex with x1 > x2 > ... > xn.
    """

    n: int
    d: int
    skip: tuple[int, ...]
    exponents: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.exponents)

    def index(self, exp: tuple[int, ...]) -> int:
        return _basis_index(self.n, self.d, self.skip)[exp]


@lru_cache(maxsize=None)
def monomial_basis(n: int, d: int, skip: tuple[int, ...] = ()) -> MonomialBasis:
    """The degree-d monomials in the variables {1..n} minus `skip` (0-based)."""
    if d < 0:
        return MonomialBasis(n, d, skip, ())
    active = [i for i in range(n) if i not in skip]

    def gen(pos: int, remaining: int) -> Iterable[tuple[int, ...]]:
        if pos == len(active) - 1:
            e = [0] * n
            e[active[pos]] = remaining
            yield tuple(e)
            return
        for k in range(remaining, -1, -1):
            for tail in gen(pos + 1, remaining - k):
                e = list(tail)
                e[active[pos]] = k
                yield tuple(e)

    if not active:
        exps = ((tuple([0] * n),) if d == 0 else ())
        return MonomialBasis(n, d, skip, exps)
    return MonomialBasis(n, d, skip, tuple(gen(0, d)))


@lru_cache(maxsize=None)
def _basis_index(n: int, d: int, skip: tuple[int, ...]) -> dict[tuple[int, ...], int]:
    basis = monomial_basis(n, d, skip)
    return {e: i for i, e in enumerate(basis.exponents)}


def graded_dim(n: int, d: int) -> int:
    """dim A_d = C(d+n-1, n-1) for A = Q[x1..xn]; n = 0 is the ground field."""
    if d < 0:
        return 0
    if n == 0:
        return 1 if d == 0 else 0
    return comb(d + n - 1, n - 1)


# ---------------------------------------------------------------------------
# polynomials as exponent dicts


def poly_zero() -> Poly:
    return {}


def poly_const(n: int, c: Fraction | int) -> Poly:
    c = Fraction(c)
    return {tuple([0] * n): c} if c else {}


def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for e, c in q.items():
        v = out.get(e, 0) + c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def poly_scale(p: Poly, c: Fraction | int) -> Poly:
    c = Fraction(c)
    if not c:
        return {}
    return {e: v * c for e, v in p.items()}


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            v = out.get(e, 0) + c1 * c2
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def poly_degree(p: Poly) -> int:
    """Total degree; -1 for the zero polynomial."""
    return max((sum(e) for e in p), default=-1)


def poly_from_coeffs(basis: MonomialBasis, coeffs: Sequence[Fraction]) -> Poly:
    return {e: Fraction(c) for e, c in zip(basis.exponents, coeffs) if c}


def poly_to_coeffs(basis: MonomialBasis, p: Poly) -> Vector:
    vec = [Fraction(0)] * len(basis)
    idx = _basis_index(basis.n, basis.d, basis.skip)
    for e, c in p.items():
        vec[idx[e]] = c
    return tuple(vec)


def poly_str(p: Poly, names: Sequence[str] | None = None) -> str:
    """Canonical polynomial string, e.g. '2*x1^2 - 1/3*x1*x2'."""
    if not p:
        return "0"
    n = len(next(iter(p)))
    names = names or [f"x{i + 1}" for i in range(n)]
    terms = []
    for e in sorted(p, key=lambda e: (-sum(e), tuple(-k for k in e))):
        c = p[e]
        factors = []
        for i, k in enumerate(e):
            if k == 1:
                factors.append(names[i])
            elif k > 1:
                factors.append(f"{names[i]}^{k}")
        body = "*".join(factors)
        if not body:
            term = str(abs(c))
        elif abs(c) == 1:
            term = body
        else:
            term = f"{abs(c)}*{body}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, term))
    first_sign, first_term = terms[0]
    out = ("-" if first_sign == "-" else "") + first_term
    for sign, term in terms[1:]:
        out += f" {sign} {term}"
    return out


def poly_parse(text: str, n: int) -> Poly:
    """Inverse of poly_str for the canonical format (also accepts '+-' sugar)."""
    text = text.strip()
    if text in ("0", ""):
        return {}
    text = text.replace("-", "+-")
    out: Poly = {}
    for chunk in text.split("+"):
        chunk = chunk.strip()
        if not chunk:
            continue
        neg = chunk.startswith("-")
        if neg:
            chunk = chunk[1:].strip()
        coeff = Fraction(1)
        exp = [0] * n
        for factor in chunk.split("*"):
            factor = factor.strip()
            if not factor:
                continue
            if factor[0] == "x":
                if "^" in factor:
                    var, _, power = factor.partition("^")
                    exp[int(var[1:]) - 1] += int(power)
                else:
                    exp[int(factor[1:]) - 1] += 1
            else:
                coeff *= Fraction(factor)
        if neg:
            coeff = -coeff
        e = tuple(exp)
        v = out.get(e, 0) + coeff
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


# ---------------------------------------------------------------------------
# linear forms and quotients by spans of linear forms


@dataclass(frozen=True)
class LinearForm:
    """A degree-1 element of A, stored by its coefficient vector."""

    coeffs: Vector

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @property
    def n(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def as_poly(self) -> Poly:
        p: Poly = {}
        for i, c in enumerate(self.coeffs):
            if c:
                e = [0] * self.n
                e[i] = 1
                p[tuple(e)] = c
        return p


class LinearQuotient:
    """Normal-form model of A/(l1,..,lk) for independent linear forms l_i.

    Pivot variables are chosen greedily from the *largest* index down, so the
    quotient is the polynomial ring in the surviving low-index variables;
    reduce() substitutes each pivot by minus the rest of its (normalized)
    form.  reduce is idempotent and its kernel on A_d is exactly
    (l1,..,lk)*A_{d-1}.
    """

    def __init__(self, forms: Sequence[LinearForm]):
        if not forms:
            raise ValueError("need at least one linear form")
        self.n = forms[0].n
        rows: list[list[Fraction]] = [list(f.coeffs) for f in forms]
        pivots: list[int] = []
        reduced: list[list[Fraction]] = []
        for row in rows:
            row = list(row)
            for p, r in zip(pivots, reduced):
                if row[p]:
                    f = row[p]
                    row = [a - f * b for a, b in zip(row, r)]
            piv = max((i for i in range(self.n) if row[i] != 0), default=-1)
            if piv < 0:
                raise ValueError("linear forms are dependent")
            inv = 1 / row[piv]
            row = [a * inv for a in row]
            for r in reduced:
                if r[piv]:
                    f = r[piv]
                    for i in range(self.n):
                        r[i] -= f * row[i]
            pivots.append(piv)
            reduced.append(row)
        order = sorted(range(len(pivots)), key=lambda i: pivots[i])
        self.pivots: tuple[int, ...] = tuple(pivots[i] for i in order)
        # substitution x_p -> -(rest of the normalized form), pivot-free
        self._subst: dict[int, Poly] = {}
        for i in order:
            p, row = pivots[i], reduced[i]
            sub: Poly = {}
            for j, c in enumerate(row):
                if j != p and c:
                    e = [0] * self.n
                    e[j] = 1
                    sub[tuple(e)] = -c
            self._subst[p] = sub
        self._subst_powers: dict[tuple[int, int], Poly] = {}

    @property
    def codim(self) -> int:
        return len(self.pivots)

    def dim(self, d: int) -> int:
        return graded_dim(self.n - self.codim, d)

    def basis(self, d: int) -> MonomialBasis:
        return monomial_basis(self.n, d, self.pivots)

    def _power(self, pivot: int, k: int) -> Poly:
        key = (pivot, k)
        if key not in self._subst_powers:
            if k == 0:
                self._subst_powers[key] = poly_const(self.n, 1)
            else:
                self._subst_powers[key] = poly_mul(
                    self._power(pivot, k - 1), self._subst[pivot]
                )
        return self._subst_powers[key]

    def reduce(self, p: Poly) -> Poly:
        """Normal form of p modulo the span of the defining linear forms."""
        for pivot in self.pivots:
            out: Poly = {}
            for e, c in p.items():
                k = e[pivot]
                if k == 0:
                    v = out.get(e, 0) + c
                    if v:
                        out[e] = v
                    else:
                        out.pop(e, None)
                    continue
                base = list(e)
                base[pivot] = 0
                term = poly_scale(self._power(pivot, k), c)
                for e2, c2 in term.items():
                    e3 = tuple(a + b for a, b in zip(base, e2))
                    v = out.get(e3, 0) + c2
                    if v:
                        out[e3] = v
                    else:
                        out.pop(e3, None)
            p = out
        return p


class QuotientBasis(LinearQuotient):
    """The edge ring A_L = A/(alpha): the one-form case of LinearQuotient."""

    def __init__(self, alpha: LinearForm):
        if alpha.is_zero():
            raise ValueError("edge form must be nonzero")
        super().__init__([alpha])
        self.alpha = alpha

    @property
    def pivot(self) -> int:
        return self.pivots[0]


def quotient_reduce(q: LinearQuotient, coeffs: Sequence[Fraction], d: int) -> Vector:
    """Reduce a degree-d coefficient vector of A into the quotient's basis."""
    p = poly_from_coeffs(monomial_basis(q.n, d), coeffs)
    return poly_to_coeffs(q.basis(d), q.reduce(p))


# ---------------------------------------------------------------------------
# sparse matrices over Q


@dataclass
class QMatrix:
    """Sparse rational matrix; rows are dicts with no stored zeros."""

    nrows: int
    ncols: int
    rows: list[Row]

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[Fraction | int]]) -> "QMatrix":
        rows = [
            {j: Fraction(v) for j, v in enumerate(r) if v != 0} for r in dense
        ]
        ncols = len(dense[0]) if dense else 0
        return cls(len(rows), ncols, rows)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[Fraction]], nrows: int) -> "QMatrix":
        rows: list[Row] = [{} for _ in range(nrows)]
        for j, col in enumerate(cols):
            for i, v in enumerate(col):
                if v:
                    rows[i][j] = Fraction(v)
        return cls(nrows, len(cols), rows)

    def column(self, j: int) -> Vector:
        return tuple(self.rows[i].get(j, Fraction(0)) for i in range(self.nrows))

    def apply(self, vec: Sequence[Fraction]) -> Vector:
        out = []
        for r in self.rows:
            out.append(sum((v * vec[j] for j, v in r.items()), Fraction(0)))
        return tuple(out)

    def transpose(self) -> "QMatrix":
        rows: list[Row] = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                rows[j][i] = v
        return QMatrix(self.ncols, self.nrows, rows)


def _row_axpy(target: Row, factor: Fraction, source: Row) -> None:
    """target -= factor * source, dropping created zeros."""
    for c, v in source.items():
        nv = target.get(c, 0) - factor * v
        if nv:
            target[c] = nv
        else:
            target.pop(c, None)


def _content_reduce(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    return {c: v // g for c, v in row.items()}


def _int_row(row: Row) -> dict[int, int]:
    denom = 1
    for v in row.values():
        denom = denom * v.denominator // gcd(denom, v.denominator)
    return _content_reduce(
        {c: int(v * denom) for c, v in row.items() if v}
    )


def rref(rows: Iterable[Row], ncols: int) -> tuple[list[int], list[Row]]:
    """Reduced row echelon form of a sparse row list.

    Columns are processed left to right; among candidate pivot rows the
    sparsest (Markowitz-style, ties by insertion order) is eliminated first.
    RREF is unique, so this choice affects fill-in only, not results.

    Elimination runs on integer rows by cross-multiplication with gcd
    content reduction (fraction arithmetic only appears in the final
    normalization), which keeps entry growth and per-step cost down on the
    larger graded pieces.
    """
    work: list[dict[int, int] | None] = [r for r in (map(_int_row, rows)) if r]
    pivots: list[int] = []
    echelon: list[dict[int, int]] = []
    live = len(work)
    for col in range(ncols):
        if live == 0:
            break
        best = -1
        best_size = -1
        for i, r in enumerate(work):
            if r is not None and col in r:
                if best < 0 or len(r) < best_size:
                    best, best_size = i, len(r)
        if best < 0:
            continue
        piv = work[best]
        work[best] = None
        live -= 1
        pv = piv[col]
        for i, r in enumerate(work):
            if r is not None and col in r:
                rc = r[col]
                new = {}
                for c, v in r.items():
                    new[c] = v * pv
                for c, v in piv.items():
                    nv = new.get(c, 0) - rc * v
                    if nv:
                        new[c] = nv
                    else:
                        new.pop(c, None)
                if new:
                    work[i] = _content_reduce(new)
                else:
                    work[i] = None
                    live -= 1
        pivots.append(col)
        echelon.append(piv)
    # single deferred back-substitution pass, last pivot first
    for j in range(len(echelon) - 1, -1, -1):
        r = echelon[j]
        for jj in range(j + 1, len(echelon)):
            col = pivots[jj]
            if col in r:
                rc = r[col]
                piv = echelon[jj]
                pv = piv[col]
                new = {c: v * pv for c, v in r.items()}
                for c, v in piv.items():
                    nv = new.get(c, 0) - rc * v
                    if nv:
                        new[c] = nv
                    else:
                        new.pop(c, None)
                r = _content_reduce(new)
        echelon[j] = r
    final: list[Row] = []
    for col, r in zip(pivots, echelon):
        pv = r[col]
        final.append({c: Fraction(v, pv) for c, v in r.items()})
    return pivots, final


def kernel_basis(m: QMatrix) -> list[Vector]:
    """Canonical basis of the right kernel {x : m x = 0}."""
    pivots, rows = rref(m.rows, m.ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivot_set:
            continue
        vec = [Fraction(0)] * m.ncols
        vec[free] = Fraction(1)
        for p, r in zip(pivots, rows):
            c = r.get(free)
            if c:
                vec[p] = -c
        basis.append(tuple(vec))
    return basis


def image_basis(m: QMatrix) -> list[Vector]:
    """RREF basis of the column space, as vectors of length nrows."""
    pivots, rows = rref(m.transpose().rows, m.nrows)
    out = []
    for r in rows:
        vec = [Fraction(0)] * m.nrows
        for j, v in r.items():
            vec[j] = v
        out.append(tuple(vec))
    return out


def matrix_rank(m: QMatrix) -> int:
    pivots, _ = rref(m.rows, m.ncols)
    return len(pivots)


# ---------------------------------------------------------------------------
# subspaces of Q^N


class Subspace:
    """A subspace of Q^N held in RREF; supports exact membership,
    intersection, and annihilators."""

    def __init__(self, ambient: int, vectors: Iterable[Sequence[Fraction]] = ()):
        self.ambient = ambient
        rows = [
            {j: Fraction(v) for j, v in enumerate(vec) if v != 0} for vec in vectors
        ]
        self.pivots, self.rows = rref(rows, ambient)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def basis_vectors(self) -> list[Vector]:
        out = []
        for r in self.rows:
            vec = [Fraction(0)] * self.ambient
            for j, v in r.items():
                vec[j] = v
            out.append(tuple(vec))
        return out

    def reduce(self, vec: Sequence[Fraction]) -> Row:
        """Residue of vec after eliminating all pivot coordinates."""
        residue: Row = {j: Fraction(v) for j, v in enumerate(vec) if v != 0}
        for p, r in zip(self.pivots, self.rows):
            if p in residue:
                _row_axpy(residue, residue[p], r)
        return residue

    def contains(self, vec: Sequence[Fraction]) -> bool:
        return not self.reduce(vec)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and self.pivots == other.pivots
            and self.rows == other.rows
        )

    def __le__(self, other: "Subspace") -> bool:
        return all(other.contains(v) for v in self.basis_vectors())

    def annihilator(self) -> "Subspace":
        """{f in (Q^N)* : f(v) = 0 for all v}, via the kernel of the basis."""
        m = QMatrix(len(self.rows), self.ambient, [dict(r) for r in self.rows])
        return Subspace(self.ambient, kernel_basis(m))

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient != other.ambient:
            raise ValueError("ambient dimension mismatch")
        ann = [dict(r) for r in self.annihilator().rows]
        ann += [dict(r) for r in other.annihilator().rows]
        m = QMatrix(len(ann), self.ambient, ann)
        return Subspace(self.ambient, kernel_basis(m))


# ---------------------------------------------------------------------------
# multiplication maps between graded pieces


def multiply_map(f: LinearForm, n: int, d: int) -> QMatrix:
    """Matrix of multiplication by f from A_d to A_{d+1} in monomial bases."""
    src = monomial_basis(n, d)
    dst = monomial_basis(n, d + 1)
    idx = _basis_index(n, d + 1, ())
    rows: list[Row] = [{} for _ in range(len(dst))]
    for j, e in enumerate(src.exponents):
        for i, c in enumerate(f.coeffs):
            if not c:
                continue
            e2 = list(e)
            e2[i] += 1
            rows[idx[tuple(e2)]][j] = rows[idx[tuple(e2)]].get(j, Fraction(0)) + c
    rows = [{j: v for j, v in r.items() if v} for r in rows]
    return QMatrix(len(dst), len(src), rows)
