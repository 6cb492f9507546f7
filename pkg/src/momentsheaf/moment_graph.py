"""Moment graphs: a finite graph with a vertex partial order and a direction
line in t* for each edge, plus builders from Bruhat intervals, subgraph
selectors, and JSON/DOT serialization.

A graph built from a Weyl group interval carries `schubert_origin=True`;
only for those does the sheaf layer derive Kazhdan-Lusztig degree bounds
automatically.  Generic loaded graphs are fully supported but require an
explicit degree bound downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

from .coxeter import WeylElement, WeylGroup, bruhat_leq, is_minimal_rep, mat_vec, minimal_coset_reps
from .errors import ValidationError
from .exactalg import Subspace, primitive_integer

Q = Fraction

Direction = tuple[int, ...]


class Edge(NamedTuple):
    lower: int
    upper: int
    direction: Direction


class Subgraph(NamedTuple):
    """A subset of vertices and edges; edges may dangle (miss endpoints)."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...]


@dataclass(frozen=True)
class SubgraphSelector:
    """Names one of the subgraphs the sheaf layer needs.

    kinds: whole | above(x) | above_punctured(x) | up_edges(x) |
    down_edges(x) | interval(x,y) | planar(x,H with two spanning vectors).
    """

    kind: str
    x: int | None = None
    y: int | None = None
    h: tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None = None

    @staticmethod
    def whole() -> "SubgraphSelector":
        return SubgraphSelector("whole")

    @staticmethod
    def above(x: int) -> "SubgraphSelector":
        return SubgraphSelector("above", x=x)

    @staticmethod
    def above_punctured(x: int) -> "SubgraphSelector":
        return SubgraphSelector("above_punctured", x=x)

    @staticmethod
    def up_edges(x: int) -> "SubgraphSelector":
        return SubgraphSelector("up_edges", x=x)

    @staticmethod
    def down_edges(x: int) -> "SubgraphSelector":
        return SubgraphSelector("down_edges", x=x)

    @staticmethod
    def interval(x: int, y: int) -> "SubgraphSelector":
        return SubgraphSelector("interval", x=x, y=y)

    @staticmethod
    def planar(x: int, h: Sequence[Sequence[Fraction]]) -> "SubgraphSelector":
        v1, v2 = (tuple(Fraction(c) for c in v) for v in h)
        return SubgraphSelector("planar", x=x, h=(v1, v2))


@dataclass
class MomentGraph:
    """Finite moment graph with order stored as a reachability bitmatrix."""

    dim_t: int
    labels: tuple[str, ...]
    edges: tuple[Edge, ...]
    leq_bits: tuple[int, ...]  # bit j of leq_bits[i] set iff i <= j
    ranks: tuple[int, ...]
    schubert_origin: bool = False
    up: list[list[int]] = field(default_factory=list, repr=False)
    down: list[list[int]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise ValidationError("duplicate vertex ids")
        if len(self.leq_bits) != n or len(self.ranks) != n:
            raise ValidationError("order/rank tables have the wrong size")
        for i in range(n):
            if not (self.leq_bits[i] >> i) & 1:
                raise ValidationError("order is not reflexive")
            for j in range(n):
                if i != j and self.comparable(i, j) and self.leq(i, j) and self.leq(j, i):
                    raise ValidationError("order has a cycle")
        for i in range(n):
            for j in range(n):
                if i != j and self.leq(i, j) and self.ranks[i] >= self.ranks[j]:
                    raise ValidationError(
                        "vertex ranks must strictly increase along the order "
                        f"({self.labels[i]} vs {self.labels[j]})"
                    )
        seen_pairs = set()
        normalized = []
        for k, e in enumerate(self.edges):
            if e.lower == e.upper:
                raise ValidationError(f"edge {k} is a loop")
            if not self.leq(e.lower, e.upper) or self.leq(e.upper, e.lower):
                raise ValidationError(
                    f"edge {self.labels[e.lower]}--{self.labels[e.upper]} joins "
                    "order-incomparable or misordered vertices"
                )
            pair = (e.lower, e.upper)
            if pair in seen_pairs:
                raise ValidationError(f"duplicate edge {pair}")
            seen_pairs.add(pair)
            if all(c == 0 for c in e.direction):
                raise ValidationError(f"edge {pair} has zero direction")
            if len(e.direction) != self.dim_t:
                raise ValidationError(f"edge {pair} direction has wrong dimension")
            normalized.append(Edge(e.lower, e.upper, primitive_integer(e.direction)))
        self.edges = tuple(normalized)
        self.up = [[] for _ in range(n)]
        self.down = [[] for _ in range(n)]
        for k, e in enumerate(self.edges):
            self.up[e.lower].append(k)
            self.down[e.upper].append(k)

    # -- order queries --------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    def leq(self, i: int, j: int) -> bool:
        return bool((self.leq_bits[i] >> j) & 1)

    def less(self, i: int, j: int) -> bool:
        return i != j and self.leq(i, j)

    def comparable(self, i: int, j: int) -> bool:
        return self.leq(i, j) or self.leq(j, i)

    def vertex(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as exc:
            raise ValidationError(f"unknown vertex {label!r}") from exc

    def maximal_vertices(self) -> list[int]:
        n = self.n_vertices
        return [
            i
            for i in range(n)
            if all(not self.less(i, j) for j in range(n))
        ]

    def unique_maximal(self) -> int:
        tops = self.maximal_vertices()
        if len(tops) != 1:
            raise ValidationError(
                f"graph has {len(tops)} maximal vertices; the canonical-sheaf "
                "construction requires exactly one"
            )
        return tops[0]

    def covers(self) -> list[tuple[int, int]]:
        """Cover relations (transitive reduction of the order)."""
        n = self.n_vertices
        out = []
        for i in range(n):
            for j in range(n):
                if not self.less(i, j):
                    continue
                between = self.leq_bits[i] & self._geq_bits(j) & ~(1 << i) & ~(1 << j)
                if between == 0:
                    out.append((i, j))
        return out

    def _geq_bits(self, j: int) -> int:
        out = 0
        for i in range(self.n_vertices):
            if self.leq(i, j):
                out |= 1 << i
        return out

    def toporder(self) -> list[int]:
        """A linear extension of the order (by size of the down-set)."""
        sizes = [bin(self._down_set(i)).count("1") for i in range(self.n_vertices)]
        return sorted(range(self.n_vertices), key=lambda i: (sizes[i], i))

    def _down_set(self, i: int) -> int:
        return self._geq_bits(i)


def poset_ranks(leq_bits: Sequence[int], n: int) -> tuple[int, ...]:
    """Longest-chain rank; strictly monotone along the order."""
    sizes = sorted(range(n), key=lambda i: bin(_downset(leq_bits, n, i)).count("1"))
    rank = [0] * n
    for i in sizes:
        below = [j for j in range(n) if j != i and (leq_bits[j] >> i) & 1]
        rank[i] = 1 + max((rank[j] for j in below), default=-1)
    return tuple(rank)


def _downset(leq_bits: Sequence[int], n: int, i: int) -> int:
    out = 0
    for j in range(n):
        if (leq_bits[j] >> i) & 1:
            out |= 1 << j
    return out


# ---------------------------------------------------------------------------
# Schubert builder


def schubert_moment_graph(
    W: WeylGroup, w: WeylElement, J: tuple[int, ...] = ()
) -> MomentGraph:
    """Moment graph of the Schubert variety indexed by w in G/P_J.

    Vertices are the minimal coset representatives y in W^J with y <= w;
    y and z are joined when z = Ry (as cosets) for a reflection R, with
    direction spanned by the difference of the orbit points y(v), z(v)
    for v = the sum of the fundamental weights off J.
    """
    J = tuple(sorted(set(J)))
    if not is_minimal_rep(W, w, J):
        raise ValidationError(
            f"{w.word_str()} is not a minimal coset representative for J={J}"
        )
    n = W.cartan.rank
    v = [Fraction(0)] * n
    for i in range(1, n + 1):
        if i not in J:
            v = [a + b for a, b in zip(v, W.cartan.fundamental_weights[i - 1])]
    reps = [y for y in minimal_coset_reps(W, J) if bruhat_leq(W, y, w)]
    points = [mat_vec(y.matrix, v) for y in reps]
    point_index = {p: i for i, p in enumerate(points)}
    if len(point_index) != len(reps):
        raise ValidationError("orbit points are not distinct; J-stabilizer mismatch")

    labels = tuple(y.word_str() for y in reps)
    ranks = tuple(y.length for y in reps)
    nv = len(reps)
    leq_bits = [0] * nv
    for i in range(nv):
        for j in range(nv):
            if bruhat_leq(W, reps[i], reps[j]):
                leq_bits[i] |= 1 << j

    edges = []
    seen = set()
    for i, p in enumerate(points):
        for refl in W.reflections:
            q = mat_vec(refl.element.matrix, p)
            if q == p:
                continue
            j = point_index.get(q)
            if j is None:
                continue
            pair = (min(i, j), max(i, j))
            if pair in seen:
                continue
            seen.add(pair)
            lo, hi = (i, j) if reps[i].length < reps[j].length else (j, i)
            direction = primitive_integer([a - b for a, b in zip(p, q)])
            edges.append(Edge(lo, hi, direction))
    edges.sort(key=lambda e: (e.lower, e.upper))

    g = MomentGraph(
        dim_t=n,
        labels=labels,
        edges=tuple(edges),
        leq_bits=tuple(leq_bits),
        ranks=ranks,
        schubert_origin=True,
    )
    if g.unique_maximal() != reps.index(w):
        raise ValidationError("top vertex is not the requested word")
    return g


# ---------------------------------------------------------------------------
# subgraph selection


def select(g: MomentGraph, sel: SubgraphSelector) -> Subgraph:
    """Exact vertex and edge subsets for a selector."""
    n = g.n_vertices

    def check_vertex(x: int | None) -> int:
        if x is None or not 0 <= x < n:
            raise ValidationError(f"unknown vertex index {x}")
        return x

    if sel.kind == "whole":
        return Subgraph(tuple(range(n)), tuple(range(len(g.edges))))
    if sel.kind == "above":
        x = check_vertex(sel.x)
        verts = tuple(j for j in range(n) if g.less(x, j))
        vset = set(verts)
        return Subgraph(
            verts,
            tuple(k for k, e in enumerate(g.edges) if e.lower in vset and e.upper in vset),
        )
    if sel.kind == "above_punctured":
        x = check_vertex(sel.x)
        base = select(g, SubgraphSelector.above(x))
        extra = tuple(sorted(set(base.edges) | set(g.up[x])))
        return Subgraph(base.vertices, extra)
    if sel.kind == "up_edges":
        x = check_vertex(sel.x)
        return Subgraph((), tuple(g.up[x]))
    if sel.kind == "down_edges":
        x = check_vertex(sel.x)
        return Subgraph((), tuple(g.down[x]))
    if sel.kind == "interval":
        x = check_vertex(sel.x)
        y = check_vertex(sel.y)
        verts = tuple(j for j in range(n) if g.leq(x, j) and g.leq(j, y))
        vset = set(verts)
        return Subgraph(
            verts,
            tuple(k for k, e in enumerate(g.edges) if e.lower in vset and e.upper in vset),
        )
    if sel.kind == "planar":
        x = check_vertex(sel.x)
        if sel.h is None:
            raise ValidationError("planar selector needs a 2-plane")
        h = Subspace(g.dim_t, [sel.h[0], sel.h[1]])
        if h.dim != 2:
            raise ValidationError("planar selector needs two independent vectors")
        return _planar_slice(g, x, h)
    raise ValidationError(f"unknown selector kind {sel.kind!r}")


def _h_edges(g: MomentGraph, h: Subspace) -> list[int]:
    return [
        k
        for k, e in enumerate(g.edges)
        if h.contains([Fraction(c) for c in e.direction])
    ]


def _component(g: MomentGraph, x: int, edge_ids: Iterable[int]) -> set[int]:
    adj: dict[int, list[int]] = {}
    for k in edge_ids:
        e = g.edges[k]
        adj.setdefault(e.lower, []).append(e.upper)
        adj.setdefault(e.upper, []).append(e.lower)
    seen = {x}
    todo = [x]
    while todo:
        i = todo.pop()
        for j in adj.get(i, ()):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return seen


def _planar_slice(g: MomentGraph, x: int, h: Subspace) -> Subgraph:
    """The subgraph above x of the x-component of the H-direction graph,
    together with its U_x edges (dangling)."""
    h_edges = _h_edges(g, h)
    comp = _component(g, x, h_edges)
    verts = tuple(sorted(j for j in comp if g.less(x, j)))
    vset = set(verts)
    edges = [
        k for k in h_edges if g.edges[k].lower in vset and g.edges[k].upper in vset
    ]
    edges += [k for k in h_edges if k in set(g.up[x])]
    return Subgraph(verts, tuple(sorted(set(edges))))


@dataclass(frozen=True)
class PlanarSlice:
    """One 2-plane H with the subgraphs the planar algorithm consumes."""

    basis: tuple[Direction, Direction]
    subgraph: Subgraph  # the punctured H-subgraph above x
    up_edges: tuple[int, ...]  # U_x edges with direction in H
    edge_count: int  # edges of the punctured H-subgraph, up edges included


def planar_family(g: MomentGraph, x: int) -> list[PlanarSlice]:
    """All 2-planes spanned by pairs of edge directions in the closure above
    x whose punctured subgraph above x has more than one edge.

    With a single edge (or none) the restriction onto the upward edge
    modules is automatically surjective, so such planes impose nothing.
    Counting must include the upward (dangling) edges: a 2-dimensional orbit
    family can close into a triangle over x, which has only one edge
    strictly above x but still constrains the two upward edge values.
    """
    if not 0 <= x < g.n_vertices:
        raise ValidationError(f"unknown vertex index {x}")
    closure = {j for j in range(g.n_vertices) if g.leq(x, j)}
    dirs = []
    seen_lines = set()
    for e in g.edges:
        if e.lower in closure and e.upper in closure:
            if e.direction not in seen_lines:
                seen_lines.add(e.direction)
                dirs.append(e.direction)
    planes: dict[tuple, Subspace] = {}
    for d1, d2 in combinations(dirs, 2):
        h = Subspace(g.dim_t, [[Fraction(c) for c in d1], [Fraction(c) for c in d2]])
        if h.dim != 2:
            continue
        key = tuple(primitive_integer(v) for v in h.basis_vectors())
        planes.setdefault(key, h)

    out = []
    for key in sorted(planes):
        h = planes[key]
        sub = _planar_slice(g, x, h)
        if len(sub.edges) <= 1:
            continue
        up = tuple(k for k in sub.edges if k in set(g.up[x]))
        out.append(PlanarSlice(key, sub, up, len(sub.edges)))
    return out


def finite_two_orbit_test(g: MomentGraph, x: int) -> bool:
    """True iff every three distinct edges at x going up span a
    3-dimensional space of directions (then polygon relations cut out the
    boundary image exactly)."""
    if not 0 <= x < g.n_vertices:
        raise ValidationError(f"unknown vertex index {x}")
    dirs = [g.edges[k].direction for k in g.up[x]]
    if len(dirs) <= 2:
        return True
    for triple in combinations(dirs, 3):
        span = Subspace(g.dim_t, [[Fraction(c) for c in d] for d in triple])
        if span.dim != 3:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON and DOT serialization


def save_graph(g: MomentGraph) -> dict:
    """JSON document for a graph; rationals are canonical 'p/q' strings."""
    return {
        "dim_t": g.dim_t,
        "vertices": [
            {"id": g.labels[i], "rank": g.ranks[i]} for i in range(g.n_vertices)
        ],
        "order": {
            "covers": [
                [g.labels[i], g.labels[j]] for i, j in sorted(g.covers())
            ]
        },
        "edges": [
            {
                "lower": g.labels[e.lower],
                "upper": g.labels[e.upper],
                "direction": [str(Fraction(c)) for c in e.direction],
            }
            for e in g.edges
        ],
    }


def load_graph(doc: dict) -> MomentGraph:
    """Parse and validate a graph document (inverse of save_graph)."""
    try:
        dim_t = int(doc["dim_t"])
        vertex_docs = list(doc["vertices"])
        cover_docs = list(doc["order"]["covers"])
        edge_docs = list(doc["edges"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed graph document: missing {exc}") from exc
    if dim_t <= 0:
        raise ValidationError("dim_t must be positive")
    labels = []
    ranks_in = []
    for vd in vertex_docs:
        labels.append(str(vd["id"]))
        ranks_in.append(vd.get("rank"))
    if len(set(labels)) != len(labels):
        raise ValidationError("duplicate vertex ids")
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)

    adj = [0] * n  # strict covers as bitmask
    for lo, hi in cover_docs:
        if lo not in index or hi not in index:
            raise ValidationError(f"cover [{lo}, {hi}] references unknown vertices")
        adj[index[lo]] |= 1 << index[hi]

    # reflexive-transitive closure with cycle detection
    leq_bits = [0] * n
    state = [0] * n  # 0 unvisited, 1 on stack, 2 done

    def close(i: int) -> None:
        state[i] = 1
        acc = 1 << i
        for j in range(n):
            if (adj[i] >> j) & 1:
                if state[j] == 1:
                    raise ValidationError("order has a cycle")
                if state[j] == 0:
                    close(j)
                acc |= leq_bits[j]
        leq_bits[i] = acc
        state[i] = 2

    for i in range(n):
        if state[i] == 0:
            close(i)

    edges = []
    for ed in edge_docs:
        lo, hi = str(ed["lower"]), str(ed["upper"])
        if lo not in index or hi not in index:
            raise ValidationError(f"edge {lo}--{hi} references unknown vertices")
        direction = tuple(Fraction(str(c)) for c in ed["direction"])
        if len(direction) != dim_t:
            raise ValidationError(f"edge {lo}--{hi} has a direction of wrong length")
        if all(c == 0 for c in direction):
            raise ValidationError(f"edge {lo}--{hi} has zero direction")
        i, j = index[lo], index[hi]
        if not ((leq_bits[i] >> j) & 1) or i == j:
            raise ValidationError(
                f"edge {lo}--{hi} joins order-incomparable or misordered vertices"
            )
        edges.append(Edge(i, j, primitive_integer(direction)))

    if any(r is None for r in ranks_in):
        ranks = poset_ranks(leq_bits, n)
    else:
        ranks = tuple(int(r) for r in ranks_in)
    return MomentGraph(
        dim_t=dim_t,
        labels=tuple(labels),
        edges=tuple(edges),
        leq_bits=tuple(leq_bits),
        ranks=ranks,
        schubert_origin=False,
    )


def save_graph_json(g: MomentGraph) -> str:
    return json.dumps(save_graph(g), indent=2, sort_keys=True) + "\n"


def to_dot(g: MomentGraph) -> str:
    """DOT rendering: vertices grouped by poset rank, edges labelled with
    their direction vectors."""
    lines = ["digraph moment_graph {", "  rankdir=BT;", "  node [shape=ellipse];"]
    by_rank: dict[int, list[int]] = {}
    for i in range(g.n_vertices):
        by_rank.setdefault(g.ranks[i], []).append(i)
    for r in sorted(by_rank):
        ids = " ".join(f'"{g.labels[i]}";' for i in by_rank[r])
        lines.append(f"  {{ rank=same; {ids} }}")
    for e in g.edges:
        label = "(" + ",".join(str(c) for c in e.direction) + ")"
        lines.append(
            f'  "{g.labels[e.lower]}" -> "{g.labels[e.upper]}" [label="{label}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
