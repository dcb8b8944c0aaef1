"""Cup-product obstructions to Stein, Milnor and holomorphic fillings."""

from .abelian import (
    QQ,
    ZZ,
    Coefficients,
    FpAbGroup,
    GroupMap,
    cokernel,
    elem_is_zero,
    group_from_relations,
    kernel_rank_over_field,
    map_is_surjective,
    smith_normal_form,
    zmod,
)
from .bundle import (
    CircleBundle,
    LineBundleCone,
    bundle_check,
    cone_exceptional_bound,
    cone_smoothability_check,
    euler_multiplication,
    gysin_cohomology,
)
from .catalog import evaluate, load_ring, parse, parse_class, render, serialize
from .gradedring import (
    GradedRing,
    RingClass,
    exterior_algebra,
    multiply,
    poincare_pairing_nondegenerate,
    rationalize,
    sphere,
    tensor_product,
    truncated_polynomial,
    validate,
)
from .obstruct import (
    TupleFamily,
    Verdict,
    cup_map_vanishes,
    enumerate_tuples,
    exceptional_dim_bound,
    holo_check,
    hyphom_check,
    milnor_check,
    min_homotopical_dim_bound,
    smoothability_check,
    stein_check,
)

__version__ = "0.1.0"
