"""Exact index and curvature computations for instanton moduli on Sasakian
5-manifolds: Dedekind sums, orbifold index formulas, equivariant
localization on Y^{p,q}, and the transverse curvature of the Y^{p,q} metric."""

from .dedekind import dedekind_sum, dedekind_sum_numeric
from .errors import (
    ComputationError,
    ConventionError,
    DegenerateMetric,
    InconsistentFormulas,
    InconsistentTopology,
    IntegralityWarning,
    MissingWeights,
    ModulidimError,
    NegativeH11,
    NonPolynomial,
    NotCoprime,
    NoWitness,
    QuasiRegularWarning,
    RationalizationFailed,
    Unsupported,
    ValidationError,
)
from .exact import (
    LaurentPoly,
    Rational,
    RationalFunction,
    eval_at_one,
    format_rational,
    parse_rational,
    rationalize,
    rf_add,
    rf_to_laurent,
)
from .geometry import (
    MetricParams,
    asd_eigenvalue_formulas,
    delta_fn,
    irreducibility_witness,
    transverse_curvature,
    verify_eigenforms,
)
from .localization import (
    ExpansionFactor,
    OrbitContribution,
    Polarization,
    Regularity,
    YpqParams,
    invariant_index,
    moduli_dimension,
    quasi_regularity,
    truncated_expansion_oracle,
    ypq_orbit_data,
)
from .orbifold import (
    BasicTopology,
    CyclicSingularity,
    Duality,
    ModuliDescriptorU1,
    cy_k3_dimension,
    fixed_point_term_adjoint_so3,
    fixed_point_term_general,
    flatness_obstruction,
    index_asd_bundle,
    index_general,
    signature_bookkeeping,
    u1_moduli_descriptor,
)

__version__ = "0.1.0"
