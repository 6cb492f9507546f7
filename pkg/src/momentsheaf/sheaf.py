"""Sheaves on moment graphs and the canonical top-down construction.

A sheaf assigns a free graded module to each vertex (over A = Q[x1..xn]), a
free graded module over the edge ring A_L = A/(alpha_L) to each edge, and a
restriction map rho for each incidence.  Sections over a subgraph are tuples
compatible under all restrictions; everything is computed degreewise by
exact linear algebra.

The canonical sheaf is built from the unique maximal vertex downwards: at
each vertex the boundary image (sections just above, restricted to the
upward edges) is computed, and the vertex module is its projective cover.
Generator lifts are the reduced-echelon coset representatives of the image
modulo the span of (degree-one) times (image one degree lower), which makes
two runs produce identical generator degrees and identical rho matrices.

Degree bounds: on graphs of Schubert origin, new generators can only appear
in internal degrees d with 2d <= rank(top) - rank(x) - 1, so the builder
computes exactly that far (cohomological degree is twice the internal one).
Loaded graphs carry no such guarantee and require an explicit bound.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ConsistencyError, ResourceCapError, ValidationError
from .exactalg import (
    LinearForm,
    LinearQuotient,
    Poly,
    QMatrix,
    QuotientBasis,
    Subspace,
    Vector,
    graded_dim,
    image_basis,
    kernel_basis,
    matrix_rank,
    monomial_basis,
    poly_add,
    poly_const,
    poly_from_coeffs,
    poly_mul,
    poly_str,
    poly_to_coeffs,
)
from .klpoly import KLPolynomial, poincare_csv
from .moment_graph import MomentGraph, Subgraph, SubgraphSelector, planar_family, select

Q = Fraction


# ---------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class GradedFreeModule:
    """A free graded module recorded by its multiset of generator degrees."""

    gens: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(g < 0 for g in self.gens):
            raise ValidationError("generator degrees must be nonnegative")
        object.__setattr__(self, "gens", tuple(sorted(self.gens)))

    @property
    def rank(self) -> int:
        return len(self.gens)


@dataclass
class EdgeModule:
    """Edge data: a free module over the edge ring A_L."""

    module: GradedFreeModule
    quotient: QuotientBasis


@dataclass(frozen=True)
class RhoMap:
    """Matrix of a restriction map; entries[j][i] is a homogeneous element
    of A_L (in reduced, pivot-free form) of degree d_i - e_j."""

    entries: tuple[tuple[Poly, ...], ...]


def _identity_rho(rank: int, n: int) -> RhoMap:
    one = poly_const(n, 1)
    return RhoMap(
        tuple(
            tuple(one if i == j else {} for i in range(rank)) for j in range(rank)
        )
    )


@dataclass
class GammaSheaf:
    """A sheaf on a moment graph; may be partially defined mid-construction."""

    graph: MomentGraph
    vertex_modules: dict[int, GradedFreeModule] = field(default_factory=dict)
    edge_modules: dict[int, EdgeModule] = field(default_factory=dict)
    rho: dict[tuple[int, int], RhoMap] = field(default_factory=dict)
    canonical: bool = False
    _rho_matrix_cache: dict[tuple[int, int, int], QMatrix] = field(
        default_factory=dict, repr=False
    )

    @property
    def n(self) -> int:
        return self.graph.dim_t

    def vertex_piece_dim(self, v: int, d: int) -> int:
        return sum(graded_dim(self.n, d - g) for g in self.vertex_modules[v].gens)

    def edge_piece_dim(self, e: int, d: int) -> int:
        em = self.edge_modules[e]
        return sum(em.quotient.dim(d - g) for g in em.module.gens)


def structure_sheaf(g: MomentGraph) -> GammaSheaf:
    """The sheaf of rings: A at every vertex, A_L at every edge, quotient
    restrictions; its sections compute equivariant ordinary cohomology."""
    sheaf = GammaSheaf(graph=g)
    unit = GradedFreeModule((0,))
    for v in range(g.n_vertices):
        sheaf.vertex_modules[v] = unit
    for k, e in enumerate(g.edges):
        quotient = QuotientBasis(LinearForm([Fraction(c) for c in e.direction]))
        sheaf.edge_modules[k] = EdgeModule(unit, quotient)
        sheaf.rho[(e.lower, k)] = _identity_rho(1, g.dim_t)
        sheaf.rho[(e.upper, k)] = _identity_rho(1, g.dim_t)
    return sheaf


# ---------------------------------------------------------------------------
# degreewise layouts and restriction matrices


@dataclass(frozen=True)
class Layout:
    """Fixed component ordering of the product of module pieces in one
    degree: all subgraph vertices (by index), then dangling edges sorted by
    (upper-vertex id, direction)."""

    degree: int
    components: tuple[tuple[str, int], ...]
    offsets: tuple[int, ...]
    sizes: tuple[int, ...]
    total: int

    def slot(self, kind: str, idx: int) -> tuple[int, int]:
        pos = self.components.index((kind, idx))
        return self.offsets[pos], self.sizes[pos]


def _edge_sort_key(g: MomentGraph, k: int):
    e = g.edges[k]
    return (g.labels[e.upper], e.direction)


def dangling_edges(g: MomentGraph, sub: Subgraph) -> list[int]:
    vset = set(sub.vertices)
    out = [
        k
        for k in sub.edges
        if g.edges[k].lower not in vset or g.edges[k].upper not in vset
    ]
    return sorted(out, key=lambda k: _edge_sort_key(g, k))


def section_layout(sheaf: GammaSheaf, sub: Subgraph, d: int) -> Layout:
    comps: list[tuple[str, int]] = [("v", v) for v in sub.vertices]
    comps += [("e", k) for k in dangling_edges(sheaf.graph, sub)]
    sizes = []
    for kind, idx in comps:
        if kind == "v":
            sizes.append(sheaf.vertex_piece_dim(idx, d))
        else:
            sizes.append(sheaf.edge_piece_dim(idx, d))
    offsets = []
    acc = 0
    for s in sizes:
        offsets.append(acc)
        acc += s
    return Layout(d, tuple(comps), tuple(offsets), tuple(sizes), acc)


def rho_degree_matrix(sheaf: GammaSheaf, v: int, e: int, d: int) -> QMatrix:
    """Matrix of rho_{v,e} from (M_v)_d to (M_e)_d in the fixed bases."""
    key = (v, e, d)
    hit = sheaf._rho_matrix_cache.get(key)
    if hit is not None:
        return hit
    n = sheaf.n
    em = sheaf.edge_modules[e]
    rho = sheaf.rho[(v, e)]
    vgens = sheaf.vertex_modules[v].gens
    egens = em.module.gens
    nrows = sheaf.edge_piece_dim(e, d)
    rows: list[dict[int, Fraction]] = [{} for _ in range(nrows)]
    col = 0
    for i, dg in enumerate(vgens):
        src = monomial_basis(n, d - dg)
        for mono in src.exponents:
            reduced = em.quotient.reduce({mono: Fraction(1)})
            roff = 0
            for j, eg in enumerate(egens):
                tgt = em.quotient.basis(d - eg)
                entry = rho.entries[j][i]
                if entry and reduced:
                    prod = poly_mul(entry, reduced)
                    for pos, c in enumerate(poly_to_coeffs(tgt, prod)):
                        if c:
                            rows[roff + pos][col] = c
                roff += len(tgt)
            col += 1
    m = QMatrix(nrows, col, rows)
    sheaf._rho_matrix_cache[key] = m
    return m


# ---------------------------------------------------------------------------
# sections


@dataclass
class SectionSpace:
    """Degreewise bases of the space of sections over one subgraph."""

    subgraph: Subgraph
    layouts: dict[int, Layout]
    bases: dict[int, list[Vector]]

    def dim(self, d: int) -> int:
        return len(self.bases[d])

    def dims(self) -> list[int]:
        return [len(self.bases[d]) for d in sorted(self.bases)]

    def subspace(self, d: int) -> Subspace:
        return Subspace(self.layouts[d].total, self.bases[d])


def _sections_rows(sheaf: GammaSheaf, sub: Subgraph, layout: Layout) -> list[dict]:
    g = sheaf.graph
    vset = set(sub.vertices)
    d = layout.degree
    rows: list[dict[int, Fraction]] = []
    for k in sub.edges:
        e = g.edges[k]
        erows = sheaf.edge_piece_dim(k, d)
        if erows == 0:
            continue
        lo_in, hi_in = e.lower in vset, e.upper in vset
        if lo_in and hi_in:
            a = rho_degree_matrix(sheaf, e.lower, k, d)
            b = rho_degree_matrix(sheaf, e.upper, k, d)
            lo_off, _ = layout.slot("v", e.lower)
            hi_off, _ = layout.slot("v", e.upper)
            for r in range(erows):
                row: dict[int, Fraction] = {}
                for c, val in a.rows[r].items():
                    row[lo_off + c] = row.get(lo_off + c, Fraction(0)) + val
                for c, val in b.rows[r].items():
                    nv = row.get(hi_off + c, Fraction(0)) - val
                    if nv:
                        row[hi_off + c] = nv
                    else:
                        row.pop(hi_off + c, None)
                if row:
                    rows.append(row)
        else:
            e_off, _ = layout.slot("e", k)
            for v in (e.lower, e.upper):
                if v not in vset:
                    continue
                a = rho_degree_matrix(sheaf, v, k, d)
                v_off, _ = layout.slot("v", v)
                for r in range(erows):
                    row = {e_off + r: Fraction(-1)}
                    for c, val in a.rows[r].items():
                        row[v_off + c] = val
                    rows.append(row)
    return rows


def sections(
    sheaf: GammaSheaf,
    z: Subgraph | SubgraphSelector,
    d_max: int,
    threads: int = 1,
) -> SectionSpace:
    """Exact bases of the section space in every degree up to d_max.

    Edge values are eliminated when both endpoints are present (they are
    determined by either endpoint); edges with a missing endpoint contribute
    their own unknown block, so e.g. sections over the bare edge set U_x give
    the full product of the edge modules.
    """
    sub = select(sheaf.graph, z) if isinstance(z, SubgraphSelector) else z

    def solve(d: int) -> tuple[Layout, list[Vector]]:
        layout = section_layout(sheaf, sub, d)
        rows = _sections_rows(sheaf, sub, layout)
        return layout, kernel_basis(QMatrix(len(rows), layout.total, rows))

    degrees = range(d_max + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(solve, degrees))
    else:
        solved = [solve(d) for d in degrees]
    layouts = {d: lay for d, (lay, _) in zip(degrees, solved)}
    bases = {d: vecs for d, (_, vecs) in zip(degrees, solved)}
    return SectionSpace(sub, layouts, bases)


def check_sections(sheaf: GammaSheaf, space: SectionSpace) -> bool:
    """Re-verify, by direct polynomial substitution, that every stored basis
    vector satisfies every incidence constraint exactly."""
    g = sheaf.graph
    sub = space.subgraph
    vset = set(sub.vertices)
    for d, vecs in space.bases.items():
        layout = space.layouts[d]
        for vec in vecs:
            values: dict[tuple[str, int], list[Poly]] = {}
            for pos, (kind, idx) in enumerate(layout.components):
                off = layout.offsets[pos]
                if kind == "v":
                    gens = sheaf.vertex_modules[idx].gens
                    polys = []
                    for dg in gens:
                        basis = monomial_basis(sheaf.n, d - dg)
                        polys.append(
                            poly_from_coeffs(basis, vec[off : off + len(basis)])
                        )
                        off += len(basis)
                else:
                    em = sheaf.edge_modules[idx]
                    polys = []
                    for dg in em.module.gens:
                        basis = em.quotient.basis(d - dg)
                        polys.append(
                            poly_from_coeffs(basis, vec[off : off + len(basis)])
                        )
                        off += len(basis)
                values[(kind, idx)] = polys
            for k in sub.edges:
                e = g.edges[k]
                em = sheaf.edge_modules[k]
                egens = em.module.gens
                expected = values.get(("e", k))
                sides = []
                for v in (e.lower, e.upper):
                    if v not in vset:
                        continue
                    rho = sheaf.rho[(v, k)]
                    vval = values[("v", v)]
                    out = []
                    for j in range(len(egens)):
                        acc: Poly = {}
                        for i, p in enumerate(vval):
                            if rho.entries[j][i] and p:
                                acc = poly_add(
                                    acc,
                                    poly_mul(rho.entries[j][i], em.quotient.reduce(p)),
                                )
                        out.append(acc)
                    sides.append(out)
                if expected is not None:
                    sides.append(expected)
                for other in sides[1:]:
                    if other != sides[0]:
                        return False
    return True


# ---------------------------------------------------------------------------
# boundary image and the canonical construction


def _project_to_dangling(layout: Layout, vec: Vector) -> Vector:
    voff = 0
    for (kind, _), size in zip(layout.components, layout.sizes):
        if kind == "e":
            break
        voff += size
    return vec[voff:]


def boundary_image(
    sheaf: GammaSheaf, x: int, d_max: int, threads: int = 1
) -> SectionSpace:
    """Image of the restriction from sections above x (with its upward
    edges) to the product of the upward edge modules, degree by degree."""
    secs = sections(sheaf, SubgraphSelector.above_punctured(x), d_max, threads)
    target = select(sheaf.graph, SubgraphSelector.up_edges(x))
    layouts = {}
    bases = {}
    for d in sorted(secs.bases):
        layout = section_layout(sheaf, target, d)
        layouts[d] = layout
        projected = [_project_to_dangling(secs.layouts[d], v) for v in secs.bases[d]]
        m = QMatrix.from_columns(projected, layout.total)
        bases[d] = image_basis(m)
    return SectionSpace(target, layouts, bases)


def multiply_section(
    sheaf: GammaSheaf,
    src: Layout,
    dst: Layout,
    vec: Sequence[Fraction],
    var: int,
) -> Vector:
    """Module action: multiply a degree-(d-1) product element by x_var."""
    n = sheaf.n
    out = [Fraction(0)] * dst.total
    xvar = [0] * n
    xvar[var] = 1
    xpoly: Poly = {tuple(xvar): Fraction(1)}
    for pos, (kind, idx) in enumerate(src.components):
        off = src.offsets[pos]
        dst_off, _ = dst.slot(kind, idx)
        if kind == "v":
            gens = sheaf.vertex_modules[idx].gens
            reducer = None
        else:
            em = sheaf.edge_modules[idx]
            gens = em.module.gens
            reducer = em.quotient
        for dg in gens:
            if reducer is None:
                sb = monomial_basis(n, src.degree - dg)
                tb = monomial_basis(n, dst.degree - dg)
                mult = xpoly
            else:
                sb = reducer.basis(src.degree - dg)
                tb = reducer.basis(dst.degree - dg)
                mult = reducer.reduce(xpoly)
            p = poly_from_coeffs(sb, vec[off : off + len(sb)])
            if p:
                prod = poly_mul(p, mult)
                for pos2, c in enumerate(poly_to_coeffs(tb, prod)):
                    if c:
                        out[dst_off + pos2] += c
            off += len(sb)
            dst_off += len(tb)
    return tuple(out)


def _degree_span(
    sheaf: GammaSheaf, space: SectionSpace, d: int
) -> Subspace:
    """Span of t* times the degree-(d-1) basis inside the degree-d piece."""
    lower = space.bases.get(d - 1, [])
    if not lower:
        return Subspace(space.layouts[d].total, [])
    src, dst = space.layouts[d - 1], space.layouts[d]
    vecs = [
        multiply_section(sheaf, src, dst, v, var)
        for v in lower
        for var in range(sheaf.n)
    ]
    return Subspace(dst.total, vecs)


def projective_cover(
    sheaf: GammaSheaf, image: SectionSpace, d_max: int
) -> tuple[list[int], list[tuple[int, Vector]]]:
    """Minimal generators of an image module, with their canonical lifts.

    In each degree the new generators are the reduced-echelon coset
    representatives of image_d modulo t* . image_{d-1}.
    """
    gen_degrees: list[int] = []
    lifts: list[tuple[int, Vector]] = []
    for d in range(d_max + 1):
        basis = image.bases[d]
        if not basis:
            continue
        old = _degree_span(sheaf, image, d)
        residues = []
        for v in basis:
            r = old.reduce(v)
            if r:
                dense = [Fraction(0)] * image.layouts[d].total
                for j, c in r.items():
                    dense[j] = c
                residues.append(tuple(dense))
        reps = Subspace(image.layouts[d].total, residues)
        for rep in reps.basis_vectors():
            gen_degrees.append(d)
            lifts.append((d, rep))
    return gen_degrees, lifts


def _kl_degree_bound(g: MomentGraph, x: int, top: int) -> int:
    return max((g.ranks[top] - g.ranks[x] - 1) // 2, 0)


def canonical_sheaf(
    g: MomentGraph,
    degree_bound: int | None = None,
    algorithm: str = "sections",
    extra_degree_check: bool = False,
    threads: int = 1,
    path_cap: int = 10_000,
) -> GammaSheaf:
    """The canonical sheaf, built from the top vertex downwards.

    algorithm chooses how the boundary image at each vertex is computed:
    'sections' solves the section space above the vertex (always exact),
    'planar' intersects the planar images (exact for graphs of projective
    origin), 'polygon' keeps only the path-transport relations (an upper
    approximation unless the finite-two-orbit criterion holds).
    """
    if algorithm not in ("sections", "planar", "polygon"):
        raise ValidationError(f"unknown image algorithm {algorithm!r}")
    top = g.unique_maximal()
    if degree_bound is None and not g.schubert_origin:
        raise ValidationError(
            "generic graphs need an explicit degree bound; only Schubert "
            "graphs carry a proven one"
        )
    sheaf = GammaSheaf(graph=g, canonical=True)
    sheaf.vertex_modules[top] = GradedFreeModule((0,))
    order = sorted(
        (v for v in range(g.n_vertices) if v != top),
        key=lambda v: (-g.ranks[v], g.labels[v]),
    )
    for x in order:
        for k in g.up[x]:
            e = g.edges[k]
            upper_module = sheaf.vertex_modules[e.upper]
            quotient = QuotientBasis(LinearForm([Fraction(c) for c in e.direction]))
            sheaf.edge_modules[k] = EdgeModule(upper_module, quotient)
            sheaf.rho[(e.upper, k)] = _identity_rho(upper_module.rank, g.dim_t)
        bound = degree_bound if degree_bound is not None else _kl_degree_bound(g, x, top)
        probe = bound + 1 if extra_degree_check else bound
        if algorithm == "sections":
            image = boundary_image(sheaf, x, probe, threads)
        elif algorithm == "planar":
            image = planar_image(sheaf, x, probe, threads)
        else:
            image = polygon_image(sheaf, x, probe, path_cap)
        gens, lifts = projective_cover(sheaf, image, probe)
        if extra_degree_check and g.schubert_origin and any(
            d == bound + 1 for d in gens
        ):
            raise ConsistencyError(
                f"generator beyond the KL degree bound at vertex {g.labels[x]}"
            )
        if extra_degree_check:
            gens = [d for d in gens if d <= bound]
            lifts = [(d, v) for d, v in lifts if d <= bound]
        sheaf.vertex_modules[x] = GradedFreeModule(tuple(gens))
        _install_lift_rho(sheaf, x, lifts)
    if g.schubert_origin:
        for v in range(g.n_vertices):
            if sum(1 for d in sheaf.vertex_modules[v].gens if d == 0) != 1:
                raise ConsistencyError(
                    f"stalk at {g.labels[v]} does not have a unique degree-0 generator"
                )
    return sheaf


def _install_lift_rho(
    sheaf: GammaSheaf, x: int, lifts: list[tuple[int, Vector]]
) -> None:
    """Split each generator lift into per-edge polynomial columns."""
    g = sheaf.graph
    for k in g.up[x]:
        em = sheaf.edge_modules[k]
        egens = em.module.gens
        entries = [[{} for _ in lifts] for _ in egens]
        for i, (dg, vec) in enumerate(lifts):
            layout = section_layout(
                sheaf, select(g, SubgraphSelector.up_edges(x)), dg
            )
            off, _ = layout.slot("e", k)
            for j, eg in enumerate(egens):
                basis = em.quotient.basis(dg - eg)
                entries[j][i] = poly_from_coeffs(basis, vec[off : off + len(basis)])
                off += len(basis)
        sheaf.rho[(x, k)] = RhoMap(tuple(tuple(row) for row in entries))


# ---------------------------------------------------------------------------
# outputs


def stalk_poincare(sheaf: GammaSheaf, x: int) -> KLPolynomial:
    """Generator-degree generating polynomial of the stalk at x."""
    return KLPolynomial.from_degree_counts(sheaf.vertex_modules[x].gens)


def stalk_table_csv(sheaf: GammaSheaf) -> str:
    """Poincare table (x, top, P) for every vertex, diffable against the
    Hecke oracle's table."""
    g = sheaf.graph
    top = g.unique_maximal()
    rows = [
        (g.labels[x], g.labels[top], stalk_poincare(sheaf, x))
        for x in range(g.n_vertices)
    ]
    return poincare_csv(rows)


def global_hilbert(sheaf: GammaSheaf, d_max: int, threads: int = 1) -> list[int]:
    """Dimensions of the global sections modulo t* times sections, i.e. the
    ungraded-coefficient cohomology of the underlying variety."""
    secs = sections(sheaf, SubgraphSelector.whole(), d_max, threads)
    out = []
    for d in range(d_max + 1):
        span = _degree_span(sheaf, secs, d)
        out.append(len(secs.bases[d]) - span.dim)
    return out


# ---------------------------------------------------------------------------
# V-paths and transports


def _assert_identity_upper(sheaf: GammaSheaf, v: int, k: int) -> None:
    rho = sheaf.rho[(v, k)]
    rank = sheaf.vertex_modules[v].rank
    one = poly_const(sheaf.n, 1)
    for j in range(rank):
        for i in range(rank):
            expected = one if i == j else {}
            if rho.entries[j][i] != expected:
                raise ValidationError(
                    "transport requires quotient (identity) restriction maps "
                    "on upper incidences; found a non-identity map"
                )


def _v_allowed_edges(sheaf: GammaSheaf, span: Subspace) -> set[int]:
    return {
        k
        for k, e in enumerate(sheaf.graph.edges)
        if span.contains([Fraction(c) for c in e.direction])
    }


def _increasing_paths(
    g: MomentGraph, start: int, goal: int, allowed: set[int], cap: int
) -> tuple[list[tuple[int, ...]], bool]:
    """All increasing edge paths start -> goal inside the allowed edge set,
    up to cap paths; the flag reports truncation."""
    paths: list[tuple[int, ...]] = []
    truncated = False
    stack: list[tuple[int, tuple[int, ...]]] = [(start, ())]
    while stack:
        v, trail = stack.pop()
        if v == goal:
            if len(paths) >= cap:
                truncated = True
                break
            paths.append(trail)
            continue
        for k in g.up[v]:
            if k in allowed and g.leq(g.edges[k].upper, goal):
                stack.append((g.edges[k].upper, trail + (k,)))
    return paths, truncated


def _transport_entries(
    sheaf: GammaSheaf, quotient: LinearQuotient, start: int, path: Sequence[int]
) -> list[list[Poly]]:
    """Entries (over A_V) of the composite transport M_start -> M_end along
    an increasing path; inverts the identity upper restrictions."""
    rank = sheaf.vertex_modules[start].rank
    one = poly_const(sheaf.n, 1)
    entries: list[list[Poly]] = [
        [one if i == j else {} for i in range(rank)] for j in range(rank)
    ]
    v = start
    for k in path:
        e = sheaf.graph.edges[k]
        if e.lower != v:
            raise ValidationError("path is not increasing from the start vertex")
        _assert_identity_upper(sheaf, e.upper, k)
        rho = sheaf.rho[(v, k)]
        step = [
            [quotient.reduce(p) for p in row] for row in rho.entries
        ]
        entries = [
            [
                _poly_dot(step_row, [entries[t][i] for t in range(len(entries))])
                for i in range(rank)
            ]
            for step_row in step
        ]
        v = e.upper
    return entries


def _poly_dot(row: Sequence[Poly], col: Sequence[Poly]) -> Poly:
    acc: Poly = {}
    for a, b in zip(row, col):
        if a and b:
            acc = poly_add(acc, poly_mul(a, b))
    return acc


@dataclass
class VPathTransport:
    """The induced map (M_x)_V -> (M_y)_V along V-paths."""

    x: int
    y: int
    quotient: LinearQuotient
    entries: list[list[Poly]]
    path_independent: bool
    truncated: bool

    def degree_matrix(self, sheaf: GammaSheaf, d: int) -> QMatrix:
        return _quotient_module_matrix(
            sheaf,
            self.quotient,
            sheaf.vertex_modules[self.x].gens,
            sheaf.vertex_modules[self.y].gens,
            self.entries,
            d,
        )


def _quotient_module_matrix(
    sheaf: GammaSheaf,
    quotient: LinearQuotient,
    src_gens: Sequence[int],
    dst_gens: Sequence[int],
    entries: Sequence[Sequence[Poly]],
    d: int,
) -> QMatrix:
    """Degree-d matrix of a polynomial-entry map between free A_V-modules."""
    cols = []
    src_dim = sum(quotient.dim(d - g) for g in src_gens)
    dst_dim = sum(quotient.dim(d - g) for g in dst_gens)
    for i, dg in enumerate(src_gens):
        for mono in quotient.basis(d - dg).exponents:
            col = [Fraction(0)] * dst_dim
            off = 0
            for j, eg in enumerate(dst_gens):
                tgt = quotient.basis(d - eg)
                p = entries[j][i]
                if p:
                    prod = quotient.reduce(poly_mul(p, {mono: Fraction(1)}))
                    for pos, c in enumerate(poly_to_coeffs(tgt, prod)):
                        col[off + pos] += c
                off += len(tgt)
            cols.append(tuple(col))
    return QMatrix.from_columns(cols, dst_dim)


def vpath_map(
    sheaf: GammaSheaf,
    x: int,
    y: int,
    v_span: Sequence[Sequence[Fraction]],
    path_cap: int = 10_000,
) -> VPathTransport:
    """Transport (M_x)_V -> (M_y)_V along V-paths (all edge directions in V),
    checking independence of the chosen path up to path_cap paths."""
    g = sheaf.graph
    span = Subspace(g.dim_t, [[Fraction(c) for c in w] for w in v_span])
    if span.dim == 0:
        raise ValidationError("V must be a nonzero subspace")
    quotient = LinearQuotient(
        [LinearForm(w) for w in span.basis_vectors()]
    )
    allowed = _v_allowed_edges(sheaf, span)
    paths, truncated = _increasing_paths(g, x, y, allowed, path_cap)
    if not paths:
        raise ValidationError(
            f"no V-path from {g.labels[x]} to {g.labels[y]} inside the subspace"
        )
    transports = [_transport_entries(sheaf, quotient, x, p) for p in paths]
    independent = all(t == transports[0] for t in transports[1:])
    return VPathTransport(x, y, quotient, transports[0], independent, truncated)


def monotonicity_check(
    sheaf: GammaSheaf, x: int, y: int, path_cap: int = 1
) -> dict[int, bool]:
    """Surjectivity, degree by degree, of the transport of reduced stalks
    from x up to y (with V the whole of t*).  One path suffices: the
    transport is path-independent, which vpath_map can verify separately."""
    g = sheaf.graph
    if not g.leq(x, y):
        raise ValidationError("monotonicity_check requires x <= y")
    basis = [
        [Fraction(int(i == j)) for j in range(g.dim_t)] for i in range(g.dim_t)
    ]
    transport = vpath_map(sheaf, x, y, basis, path_cap=path_cap)
    src = sheaf.vertex_modules[x].gens
    dst = sheaf.vertex_modules[y].gens
    out: dict[int, bool] = {}
    for d in sorted(set(dst)):
        rows = [j for j, eg in enumerate(dst) if eg == d]
        cols = [i for i, dg in enumerate(src) if dg == d]
        block = [
            [
                transport.entries[j][i].get(tuple([0] * sheaf.n), Fraction(0))
                for i in cols
            ]
            for j in rows
        ]
        m = QMatrix.from_dense(block) if cols else QMatrix(len(rows), 0, [{} for _ in rows])
        out[d] = matrix_rank(m) == len(rows)
    return out


# ---------------------------------------------------------------------------
# polygon relations (path-transport upper bound for the boundary image)


def polygon_image(
    sheaf: GammaSheaf, x: int, d_max: int, path_cap: int = 10_000
) -> SectionSpace:
    """Subspace of M(U_x) cut out by the path-transport relations only: for
    every pair of upward edges, transports into any common upper vertex
    modulo the span of the two directions must agree (over all V-paths).

    Contains the boundary image always; equals it when the finite-two-orbit
    criterion holds at x.
    """
    g = sheaf.graph
    target = select(g, SubgraphSelector.up_edges(x))
    up = dangling_edges(g, target)
    layouts = {d: section_layout(sheaf, target, d) for d in range(d_max + 1)}
    rows_by_degree: dict[int, list[dict[int, Fraction]]] = {d: [] for d in range(d_max + 1)}

    for a in range(len(up)):
        for b in range(a + 1, len(up)):
            k1, k2 = up[a], up[b]
            d1 = [Fraction(c) for c in g.edges[k1].direction]
            d2 = [Fraction(c) for c in g.edges[k2].direction]
            span = Subspace(g.dim_t, [d1, d2])
            quotient = LinearQuotient([LinearForm(w) for w in span.basis_vectors()])
            allowed = _v_allowed_edges(sheaf, span)
            starts = {
                k1: g.edges[k1].upper,
                k2: g.edges[k2].upper,
            }
            # enumerate V-paths from x with first edge k1 or k2, grouped by target
            by_target: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
            truncated = False
            for k in (k1, k2):
                y0 = starts[k]
                reach = [
                    t
                    for t in range(g.n_vertices)
                    if g.leq(y0, t)
                ]
                for t in reach:
                    paths, trunc = _increasing_paths(g, y0, t, allowed, path_cap)
                    truncated = truncated or trunc
                    for p in paths:
                        by_target.setdefault(t, []).append((k, p))
            if truncated:
                raise ResourceCapError("polygon path enumeration exceeded cap")
            for t, tagged in sorted(by_target.items()):
                if len(tagged) < 2:
                    continue
                mats = []
                for k, p in tagged:
                    entries = _transport_entries(sheaf, quotient, starts[k], p)
                    mats.append((k, entries))
                for d in range(d_max + 1):
                    layout = layouts[d]
                    deg_mats = []
                    for k, entries in mats:
                        red = _edge_to_quotient_matrix(sheaf, k, quotient, d)
                        tr = _quotient_module_matrix(
                            sheaf,
                            quotient,
                            sheaf.vertex_modules[starts[k]].gens,
                            sheaf.vertex_modules[t].gens,
                            entries,
                            d,
                        )
                        deg_mats.append((k, _qmat_mul(tr, red)))
                    first_k, first_m = deg_mats[0]
                    for other_k, other_m in deg_mats[1:]:
                        off1, _ = layout.slot("e", first_k)
                        off2, _ = layout.slot("e", other_k)
                        for r in range(first_m.nrows):
                            row: dict[int, Fraction] = {}
                            for c, val in first_m.rows[r].items():
                                row[off1 + c] = row.get(off1 + c, Fraction(0)) + val
                            for c, val in other_m.rows[r].items():
                                nv = row.get(off2 + c, Fraction(0)) - val
                                if nv:
                                    row[off2 + c] = nv
                                else:
                                    row.pop(off2 + c, None)
                            if row:
                                rows_by_degree[d].append(row)

    bases = {}
    for d in range(d_max + 1):
        layout = layouts[d]
        bases[d] = kernel_basis(
            QMatrix(len(rows_by_degree[d]), layout.total, rows_by_degree[d])
        )
    return SectionSpace(target, layouts, bases)


def _edge_to_quotient_matrix(
    sheaf: GammaSheaf, k: int, quotient: LinearQuotient, d: int
) -> QMatrix:
    """Reduction (M_L)_d -> (M_L / V M_L)_d, identifying the latter with the
    V-reduction of the upper stalk (same generators)."""
    em = sheaf.edge_modules[k]
    gens = em.module.gens
    src_dim = sheaf.edge_piece_dim(k, d)
    dst_dim = sum(quotient.dim(d - g) for g in gens)
    cols = []
    for j, eg in enumerate(gens):
        for mono in em.quotient.basis(d - eg).exponents:
            col = [Fraction(0)] * dst_dim
            off = sum(quotient.dim(d - g) for g in gens[:j])
            reduced = quotient.reduce({mono: Fraction(1)})
            tgt = quotient.basis(d - eg)
            for pos, c in enumerate(poly_to_coeffs(tgt, reduced)):
                col[off + pos] += c
            cols.append(tuple(col))
    assert len(cols) == src_dim
    return QMatrix.from_columns(cols, dst_dim)


def _qmat_mul(a: QMatrix, b: QMatrix) -> QMatrix:
    rows: list[dict[int, Fraction]] = []
    for r in a.rows:
        row: dict[int, Fraction] = {}
        for k, val in r.items():
            for c, bval in b.rows[k].items():
                nv = row.get(c, Fraction(0)) + val * bval
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
        rows.append(row)
    return QMatrix(a.nrows, b.ncols, rows)


# ---------------------------------------------------------------------------
# planar algorithm


def planar_image(
    sheaf: GammaSheaf, x: int, d_max: int, threads: int = 1
) -> SectionSpace:
    """Intersection over all 2-planes H (with more than one edge above x in
    the H-component) of the pullbacks of the planar boundary images; equals
    the boundary image for graphs of projective origin."""
    g = sheaf.graph
    target = select(g, SubgraphSelector.up_edges(x))
    layouts = {d: section_layout(sheaf, target, d) for d in range(d_max + 1)}
    family = planar_family(g, x)
    rows_by_degree: dict[int, list[dict[int, Fraction]]] = {
        d: [] for d in range(d_max + 1)
    }
    for plane in family:
        secs = sections(sheaf, plane.subgraph, d_max, threads)
        sub_target = Subgraph((), plane.up_edges)
        for d in range(d_max + 1):
            sub_layout = section_layout(sheaf, sub_target, d)
            if sub_layout.total == 0:
                continue
            projected = [
                _project_to_dangling(secs.layouts[d], v) for v in secs.bases[d]
            ]
            image = Subspace(sub_layout.total, projected)
            ann = image.annihilator()
            if ann.dim == 0:
                continue
            layout = layouts[d]
            for functional in ann.rows:
                row: dict[int, Fraction] = {}
                for col, val in functional.items():
                    kind, k, inner = _locate(sub_layout, col)
                    off, _ = layout.slot(kind, k)
                    row[off + inner] = row.get(off + inner, Fraction(0)) + val
                if row:
                    rows_by_degree[d].append(row)
    bases = {}
    for d in range(d_max + 1):
        layout = layouts[d]
        bases[d] = kernel_basis(
            QMatrix(len(rows_by_degree[d]), layout.total, rows_by_degree[d])
        )
    return SectionSpace(target, layouts, bases)


def _locate(layout: Layout, col: int) -> tuple[str, int, int]:
    for pos in range(len(layout.components) - 1, -1, -1):
        if col >= layout.offsets[pos]:
            kind, idx = layout.components[pos]
            return kind, idx, col - layout.offsets[pos]
    raise IndexError(col)


# ---------------------------------------------------------------------------
# purity verification


@dataclass
class PurityViolation:
    vertex: int
    axiom: int
    degree: int | None
    detail: str


@dataclass
class PurityReport:
    ok: bool
    checked_vertices: int
    violations: list[PurityViolation]

    @property
    def first_violation(self) -> PurityViolation | None:
        return self.violations[0] if self.violations else None


def verify_pure(
    sheaf: GammaSheaf, degree_bound: int | None = None, threads: int = 1
) -> PurityReport:
    """Check the pure-sheaf axioms degreewise: (1) stalk freeness is
    structural in this model, (2) every downward edge carries the quotient
    of its upper stalk, (3) the stalk restriction and the sections above
    have the same image in M(U_x)."""
    g = sheaf.graph
    top = g.unique_maximal()
    violations: list[PurityViolation] = []
    for x in range(g.n_vertices):
        if degree_bound is not None:
            bound = degree_bound
        elif g.schubert_origin:
            bound = _kl_degree_bound(g, x, top)
        else:
            raise ValidationError("generic graphs need an explicit degree bound")
        for k in g.down[x]:
            em = sheaf.edge_modules[k]
            if em.module.gens != sheaf.vertex_modules[x].gens:
                violations.append(
                    PurityViolation(
                        x, 2, None,
                        f"edge {k} module differs from the quotient of the "
                        f"stalk at {g.labels[x]}",
                    )
                )
                continue
            for d in range(bound + 1):
                m = rho_degree_matrix(sheaf, x, k, d)
                if matrix_rank(m) != sheaf.edge_piece_dim(k, d):
                    violations.append(
                        PurityViolation(
                            x, 2, d,
                            f"edge {k} restriction from {g.labels[x]} is not "
                            "the quotient map in degree "
                            f"{d}",
                        )
                    )
                    break
        if not g.up[x]:
            continue
        image = boundary_image(sheaf, x, bound, threads)
        for d in range(bound + 1):
            layout = image.layouts[d]
            cols = []
            for i, dg in enumerate(sheaf.vertex_modules[x].gens):
                for mono in monomial_basis(sheaf.n, d - dg).exponents:
                    vec = [Fraction(0)] * layout.total
                    for k in g.up[x]:
                        m = rho_degree_matrix(sheaf, x, k, d)
                        col_idx = _vertex_coord_index(sheaf, x, d, i, mono)
                        off, _ = layout.slot("e", k)
                        for r in range(m.nrows):
                            c = m.rows[r].get(col_idx)
                            if c:
                                vec[off + r] += c
                    cols.append(tuple(vec))
            stalk_image = Subspace(layout.total, cols)
            section_image = image.subspace(d)
            if stalk_image != section_image:
                violations.append(
                    PurityViolation(
                        x, 3, d,
                        f"images of the stalk at {g.labels[x]} and of the "
                        f"sections above it differ in degree {d}",
                    )
                )
                break
    return PurityReport(not violations, g.n_vertices, violations)


def _vertex_coord_index(
    sheaf: GammaSheaf, v: int, d: int, gen: int, mono: tuple[int, ...]
) -> int:
    off = 0
    gens = sheaf.vertex_modules[v].gens
    for i, dg in enumerate(gens):
        basis = monomial_basis(sheaf.n, d - dg)
        if i == gen:
            return off + basis.index(mono)
        off += len(basis)
    raise IndexError(gen)


# ---------------------------------------------------------------------------
# rigidity


def rigidity_check(sheaf: GammaSheaf) -> bool:
    """True when the only graded sheaf endomorphism commuting with every
    restriction and vanishing on the top stalk is zero, i.e. endomorphisms
    fixing the top stalk are exactly the identity.

    The identity always solves the commutation system, so rigidity is the
    triviality of the homogeneous solution space with the top block pinned
    to zero.
    """
    g = sheaf.graph
    top = g.unique_maximal()

    unknowns: list[tuple[str, int, int, int, tuple[int, ...]]] = []
    index: dict[tuple[str, int, int, int, tuple[int, ...]], int] = {}

    def entry_monomials(kind: str, idx: int, j: int, i: int) -> tuple[tuple[int, ...], ...]:
        if kind == "v":
            gens = sheaf.vertex_modules[idx].gens
            deg = gens[i] - gens[j]
            return monomial_basis(sheaf.n, deg).exponents if deg >= 0 else ()
        em = sheaf.edge_modules[idx]
        gens = em.module.gens
        deg = gens[i] - gens[j]
        return em.quotient.basis(deg).exponents if deg >= 0 else ()

    def add_unknowns(kind: str, idx: int, rank: int) -> None:
        for j in range(rank):
            for i in range(rank):
                for mono in entry_monomials(kind, idx, j, i):
                    key = (kind, idx, j, i, mono)
                    index[key] = len(unknowns)
                    unknowns.append(key)

    for v in range(g.n_vertices):
        if v != top:
            add_unknowns("v", v, sheaf.vertex_modules[v].rank)
    for k in range(len(g.edges)):
        add_unknowns("e", k, sheaf.edge_modules[k].module.rank)

    rows: list[dict[int, Fraction]] = []
    for (v, k), rho in sorted(sheaf.rho.items()):
        em = sheaf.edge_modules[k]
        nv = sheaf.vertex_modules[v].rank
        ne = em.module.rank
        # commutation row, entry (j, i): sum_t rho[j][t] phi_v[t][i]
        #                              - sum_s phi_e[j][s] rho[s][i] = 0
        for j in range(ne):
            for i in range(nv):
                sym: dict[tuple[int, ...], dict[int, Fraction]] = {}

                def accumulate(p: Poly, kind: str, idx: int, jj: int, ii: int,
                               sign: int) -> None:
                    if kind == "v" and idx == top:
                        return  # pinned to zero
                    for mono in entry_monomials(kind, idx, jj, ii):
                        u = index[(kind, idx, jj, ii, mono)]
                        term = em.quotient.reduce(poly_mul(p, {mono: Fraction(1)}))
                        for m2, c in term.items():
                            sym.setdefault(m2, {})
                            nc = sym[m2].get(u, Fraction(0)) + sign * c
                            if nc:
                                sym[m2][u] = nc
                            else:
                                sym[m2].pop(u, None)

                for t in range(nv):
                    if rho.entries[j][t]:
                        accumulate(rho.entries[j][t], "v", v, t, i, 1)
                for s in range(ne):
                    if rho.entries[s][i]:
                        accumulate(rho.entries[s][i], "e", k, j, s, -1)
                for mono in sorted(sym):
                    row = {u: c for u, c in sym[mono].items() if c}
                    if row:
                        rows.append(row)

    m = QMatrix(len(rows), len(unknowns), rows)
    return len(kernel_basis(m)) == 0


# ---------------------------------------------------------------------------
# serialization


def sheaf_dump(sheaf: GammaSheaf) -> dict:
    """JSON document: generator degrees per vertex and edge, the edge forms,
    and the rho matrices as polynomial strings in the surviving variables."""
    g = sheaf.graph
    doc: dict = {"dim_t": g.dim_t, "vertices": [], "edges": [], "rho": []}
    for v in range(g.n_vertices):
        doc["vertices"].append(
            {
                "id": g.labels[v],
                "generator_degrees": list(sheaf.vertex_modules[v].gens),
            }
        )
    for k, e in enumerate(g.edges):
        em = sheaf.edge_modules[k]
        doc["edges"].append(
            {
                "lower": g.labels[e.lower],
                "upper": g.labels[e.upper],
                "alpha": [str(Fraction(c)) for c in e.direction],
                "generator_degrees": list(em.module.gens),
            }
        )
    for (v, k), rho in sorted(sheaf.rho.items()):
        doc["rho"].append(
            {
                "vertex": g.labels[v],
                "edge": k,
                "matrix": [[poly_str(p) for p in row] for row in rho.entries],
            }
        )
    return doc
