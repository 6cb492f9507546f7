"""Batch driver: build moment graphs, run the canonical construction, emit
tables and dumps, and run the verification suites.

Exit codes: 0 success, 1 verification mismatch (diff printed), 2 input
validation, 3 resource cap or internal consistency failure.  Identical
configurations produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .coxeter import (
    CartanDatum,
    WeylElement,
    WeylGroup,
    build_weyl_group,
    minimal_coset_reps,
)
from .errors import ConsistencyError, ResourceCapError, ValidationError
from .hecke_oracle import kl_polynomial, parabolic_kl
from .moment_graph import (
    MomentGraph,
    load_graph,
    save_graph_json,
    schubert_moment_graph,
    to_dot,
)
from .sheaf import (
    GammaSheaf,
    boundary_image,
    canonical_sheaf,
    global_hilbert,
    monotonicity_check,
    planar_image,
    sheaf_dump,
    stalk_poincare,
    stalk_table_csv,
    verify_pure,
)

COMMANDS = ("graph", "sheaf", "kl", "hilbert", "verify")


@dataclass
class RunConfig:
    """One resolved invocation: a graph source plus output options."""

    command: str
    family: str | None = None
    rank: int | None = None
    word: str | None = None
    parabolic: tuple[int, ...] = ()
    graph_path: str | None = None
    max_degree: int | None = None
    algorithm: str = "sections"
    allow_approximation: bool = False
    out_path: str | None = None
    dot_path: str | None = None
    threads: int = 1

    def validate(self) -> None:
        has_group = self.family is not None
        has_path = self.graph_path is not None
        if has_group == has_path:
            raise ValidationError(
                "specify exactly one input: --type (group) or --graph PATH"
            )
        if self.algorithm == "polygon" and not self.allow_approximation:
            raise ValidationError(
                "--algorithm polygon is an approximation in general; pass "
                "--allow-approximation to acknowledge"
            )
        if self.threads < 1:
            raise ValidationError("--threads must be at least 1")


def _parse_type(text: str) -> tuple[str, int | None]:
    text = text.strip()
    if not text:
        raise ValidationError("empty --type")
    family = text[0].upper()
    if len(text) > 1:
        try:
            return family, int(text[1:])
        except ValueError as exc:
            raise ValidationError(f"cannot parse rank from --type {text!r}") from exc
    return family, None


def _parse_parabolic(text: str) -> tuple[int, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(sorted({int(p) for p in text.split(",")}))
    except ValueError as exc:
        raise ValidationError(f"cannot parse --parabolic {text!r}") from exc


def parse_args(argv: list[str]) -> RunConfig:
    parser = argparse.ArgumentParser(
        prog="momentsheaf",
        description="canonical sheaves on moment graphs and KL polynomials",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--type", dest="family_spec",
                        help="group family and rank, e.g. A3, B2, G2")
    parser.add_argument("--rank", type=int, help="rank (with a bare family letter)")
    parser.add_argument("--word", default="longest",
                        help="simple-reflection index string like 2132, or 'longest'")
    parser.add_argument("--parabolic", default="",
                        help="comma-separated simple indices, e.g. '1,3'")
    parser.add_argument("--graph", dest="graph_path", help="path to a graph JSON file")
    parser.add_argument("--max-degree", dest="max_degree", type=int)
    parser.add_argument("--algorithm", choices=("sections", "planar", "polygon"),
                        default="sections")
    parser.add_argument("--allow-approximation", action="store_true")
    parser.add_argument("--out", dest="out_path")
    parser.add_argument("--dot", dest="dot_path")
    parser.add_argument("--threads", type=int, default=1)
    ns = parser.parse_args(argv)

    family = rank = None
    if ns.family_spec is not None:
        family, rank = _parse_type(ns.family_spec)
        if rank is None:
            rank = ns.rank
        if rank is None:
            raise ValidationError(f"--type {ns.family_spec!r} needs --rank")
    config = RunConfig(
        command=ns.command,
        family=family,
        rank=rank,
        word=ns.word,
        parabolic=_parse_parabolic(ns.parabolic),
        graph_path=ns.graph_path,
        max_degree=ns.max_degree,
        algorithm=ns.algorithm,
        allow_approximation=ns.allow_approximation,
        out_path=ns.out_path,
        dot_path=ns.dot_path,
        threads=ns.threads,
    )
    config.validate()
    return config


# ---------------------------------------------------------------------------
# graph resolution


@dataclass
class ResolvedInput:
    graph: MomentGraph
    group: WeylGroup | None = None
    top_word: WeylElement | None = None
    parabolic: tuple[int, ...] = ()


def _resolve_word(W: WeylGroup, word: str, J: tuple[int, ...]) -> WeylElement:
    if word == "longest":
        reps = minimal_coset_reps(W, J)
        return max(reps, key=lambda r: r.length)
    try:
        letters = [int(c) for c in word]
    except ValueError as exc:
        raise ValidationError(f"cannot parse word {word!r}") from exc
    element = W.element_of_word(letters)
    if element.length != len(letters):
        raise ValidationError(f"word {word!r} is not reduced")
    return element


def resolve_input(config: RunConfig) -> ResolvedInput:
    if config.graph_path is not None:
        try:
            with open(config.graph_path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read {config.graph_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON in {config.graph_path}: {exc}") from exc
        g = load_graph(doc)
        tops = g.maximal_vertices()
        if len(tops) > 1:
            # tolerated in the data model; sheaf-building commands will refuse
            sys.stderr.write(
                f"warning: graph has {len(tops)} maximal vertices; the "
                "canonical-sheaf construction needs exactly one\n"
            )
        return ResolvedInput(graph=g)
    datum = CartanDatum.build(config.family, config.rank)
    W = build_weyl_group(datum)
    w = _resolve_word(W, config.word, config.parabolic)
    g = schubert_moment_graph(W, w, config.parabolic)
    return ResolvedInput(graph=g, group=W, top_word=w, parabolic=config.parabolic)


def _require_degree_bound(config: RunConfig, g: MomentGraph) -> int | None:
    """Schubert graphs carry their own bound; loaded graphs need --max-degree."""
    if g.schubert_origin:
        return config.max_degree
    if config.max_degree is None:
        raise ValidationError(
            "a loaded graph carries no proven degree bound; pass --max-degree N"
        )
    return config.max_degree


def _vertex_element(W: WeylGroup, label: str) -> WeylElement:
    return W.element_of_word([] if label == "e" else [int(c) for c in label])


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_graph(config: RunConfig, resolved: ResolvedInput) -> int:
    g = resolved.graph
    _emit(save_graph_json(g), config.out_path)
    if config.dot_path is not None:
        _emit(to_dot(g), config.dot_path)
    return 0


def _build_sheaf(config: RunConfig, resolved: ResolvedInput) -> GammaSheaf:
    bound = _require_degree_bound(config, resolved.graph)
    return canonical_sheaf(
        resolved.graph,
        degree_bound=bound,
        algorithm=config.algorithm,
        threads=config.threads,
    )


def cmd_sheaf(config: RunConfig, resolved: ResolvedInput) -> int:
    sheaf = _build_sheaf(config, resolved)
    _emit(json.dumps(sheaf_dump(sheaf), indent=2, sort_keys=True) + "\n", config.out_path)
    return 0


def cmd_kl(config: RunConfig, resolved: ResolvedInput) -> int:
    sheaf = _build_sheaf(config, resolved)
    _emit(stalk_table_csv(sheaf), config.out_path)
    return 0


def cmd_hilbert(config: RunConfig, resolved: ResolvedInput) -> int:
    g = resolved.graph
    sheaf = _build_sheaf(config, resolved)
    d_max = config.max_degree
    if d_max is None:
        d_max = max(g.ranks)
    dims = global_hilbert(sheaf, d_max, threads=config.threads)
    lines = ["d,dim"] + [f"{d},{v}" for d, v in enumerate(dims)]
    _emit("\n".join(lines) + "\n", config.out_path)
    return 0


def cmd_verify(config: RunConfig, resolved: ResolvedInput) -> int:
    g = resolved.graph
    report_lines: list[str] = []
    failures: list[str] = []

    def record(name: str, ok: bool, detail: str = "") -> None:
        status = "pass" if ok else "FAIL"
        line = f"{name}: {status}" + (f" ({detail})" if detail else "")
        report_lines.append(line)
        if not ok:
            failures.append(line)

    sheaf = _build_sheaf(config, resolved)
    table = stalk_table_csv(sheaf)

    if resolved.group is not None:
        W = resolved.group
        top = resolved.top_word
        matches = 0
        total = 0
        diffs = []
        # sweep every Bruhat interval [e, z] below the top word: each gets
        # its own canonical sheaf, so all comparable KL pairs are compared
        top_label = g.labels[g.unique_maximal()]
        for z_label in g.labels:
            z = _vertex_element(W, z_label)
            if z_label == top_label:
                gz, shz = g, sheaf
            else:
                gz = schubert_moment_graph(W, z, resolved.parabolic)
                shz = canonical_sheaf(
                    gz, algorithm=config.algorithm, threads=config.threads
                )
            for v in range(gz.n_vertices):
                x = _vertex_element(W, gz.labels[v])
                if resolved.parabolic:
                    expected = parabolic_kl(W, resolved.parabolic, x, z)
                else:
                    expected = kl_polynomial(W, x, z)
                got = stalk_poincare(shz, v)
                total += 1
                if got == expected:
                    matches += 1
                else:
                    diffs.append(
                        f"  P({gz.labels[v]}, {z_label}): sheaf={got} oracle={expected}"
                    )
        record("oracle", matches == total, f"{matches}/{total} KL values match")
        report_lines.extend(diffs)

        mono_ok = True
        ineq_ok = True
        for x in range(g.n_vertices):
            for y in range(g.n_vertices):
                if not g.leq(x, y):
                    continue
                if not all(monotonicity_check(sheaf, x, y).values()):
                    mono_ok = False
                ex = _vertex_element(W, g.labels[x])
                ey = _vertex_element(W, g.labels[y])
                if resolved.parabolic:
                    px = parabolic_kl(W, resolved.parabolic, ex, top)
                    py = parabolic_kl(W, resolved.parabolic, ey, top)
                else:
                    px = kl_polynomial(W, ex, top)
                    py = kl_polynomial(W, ey, top)
                if not px.dominates(py):
                    ineq_ok = False
        record("monotonicity (transport surjective)", mono_ok)
        record("monotonicity (KL coefficientwise)", ineq_ok)

    purity = verify_pure(sheaf, degree_bound=config.max_degree, threads=config.threads)
    detail = ""
    if not purity.ok:
        v = purity.first_violation
        detail = f"axiom {v.axiom} at {g.labels[v.vertex]}"
    record("purity", purity.ok, detail)

    planar_ok = True
    top_vertex = g.unique_maximal()
    for x in range(g.n_vertices):
        if not g.up[x]:
            continue
        if config.max_degree is not None:
            bound = config.max_degree
        else:
            bound = max((g.ranks[top_vertex] - g.ranks[x] - 1) // 2, 0) + 1
        bi = boundary_image(sheaf, x, bound, threads=config.threads)
        pl = planar_image(sheaf, x, bound, threads=config.threads)
        for d in range(bound + 1):
            if bi.subspace(d) != pl.subspace(d):
                planar_ok = False
    record("planar image equals sections image", planar_ok)

    artifact = "\n".join(report_lines) + "\n" + table
    _emit(artifact, config.out_path)
    if failures:
        sys.stderr.write("\n".join(failures) + "\n")
        return 1
    return 0


def run(config: RunConfig) -> int:
    resolved = resolve_input(config)
    handler = {
        "graph": cmd_graph,
        "sheaf": cmd_sheaf,
        "kl": cmd_kl,
        "hilbert": cmd_hilbert,
        "verify": cmd_verify,
    }[config.command]
    return handler(config, resolved)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
        return run(config)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (ResourceCapError, ConsistencyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
