"""momentsheaf: exact intersection-cohomology sheaves on moment graphs.

The package computes the canonical sheaf on a moment graph (vertex modules
are free graded modules over Q[x1..xn], edges carry quotient rings along
their direction forms), reads off local and global equivariant intersection
cohomology, and cross-checks the resulting Kazhdan-Lusztig polynomials
against an independent Hecke-algebra recursion.
"""

from .coxeter import (
    CartanDatum,
    Reflection,
    WeylElement,
    WeylGroup,
    bruhat_leq,
    build_weyl_group,
    minimal_coset_reps,
    weyl_group,
)
from .errors import ConsistencyError, ResourceCapError, ValidationError
from .hecke_oracle import KLTable, kl_polynomial, parabolic_kl, r_polynomial
from .klpoly import KLPolynomial
from .moment_graph import (
    MomentGraph,
    SubgraphSelector,
    finite_two_orbit_test,
    load_graph,
    planar_family,
    save_graph,
    schubert_moment_graph,
    select,
    to_dot,
)
from .sheaf import (
    GammaSheaf,
    GradedFreeModule,
    RhoMap,
    SectionSpace,
    boundary_image,
    canonical_sheaf,
    global_hilbert,
    monotonicity_check,
    planar_image,
    polygon_image,
    rigidity_check,
    sections,
    sheaf_dump,
    stalk_poincare,
    stalk_table_csv,
    structure_sheaf,
    verify_pure,
    vpath_map,
)

__all__ = [
    "CartanDatum",
    "ConsistencyError",
    "GammaSheaf",
    "GradedFreeModule",
    "KLPolynomial",
    "KLTable",
    "MomentGraph",
    "Reflection",
    "ResourceCapError",
    "RhoMap",
    "SectionSpace",
    "SubgraphSelector",
    "ValidationError",
    "WeylElement",
    "WeylGroup",
    "boundary_image",
    "bruhat_leq",
    "build_weyl_group",
    "canonical_sheaf",
    "finite_two_orbit_test",
    "global_hilbert",
    "kl_polynomial",
    "load_graph",
    "minimal_coset_reps",
    "monotonicity_check",
    "parabolic_kl",
    "planar_family",
    "planar_image",
    "polygon_image",
    "r_polynomial",
    "rigidity_check",
    "save_graph",
    "schubert_moment_graph",
    "sections",
    "select",
    "sheaf_dump",
    "stalk_poincare",
    "stalk_table_csv",
    "structure_sheaf",
    "to_dot",
    "verify_pure",
    "vpath_map",
    "weyl_group",
]

__version__ = "0.1.0"
