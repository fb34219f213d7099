"""Exact heights on elliptic curves over Q, with the machinery around them."""

__version__ = "0.1.0"

from .arith import (
    Place,
    Rational,
    ValuationVector,
    as_rational,
    factorize,
    factorize_rational,
    padic_valuation,
    rational_str,
    valuation_vector,
)
from .curves import ECPoint, INFINITY, ModelMap, ReductionData, TorsionData, WeierstrassCurve
from .heights import (
    HeightDecomposition,
    LocalHeight,
    canonical_height,
    canonical_height_doubling,
    canonical_height_localsum,
    height_bilinear,
    height_decomposition,
    local_height,
    local_height_arch,
    local_height_nonarch,
    naive_x_height,
)
from .torsor import (
    RigidifiedBundle,
    TorsorAugmentation,
    TorsorPoint,
    augment_torsor_point,
    fiber_act,
    tensor_points,
    torsor_global_height,
    torsor_local_height,
    torsor_places,
)
from .lattice import (
    Augmentation,
    MWBasis,
    ProductMWBasis,
    enumerate_quadratic_form,
    in_scaled_lattice,
    kummer_exponent,
)
from .machine import (
    BundleQuadruple,
    DegreeEstimate,
    DiagnosticReport,
    PlaneCurve,
    RationalMap,
    additivity_diagnostic,
    degree_ratio_diagnostic,
    estimate_map_degree,
    eval_map,
    map_negated,
    map_sum,
    parse_polynomial,
    weil_height,
)
from .config import Config, build_config
from .demjanenko import (
    DegreePairing,
    MDReport,
    degree_pairing_from_maps,
    det_asymptotic_check,
    height_pairing_matrix,
    md_bound,
    md_criterion,
    md_report,
)
from .errors import (
    BasisError,
    CurveError,
    DegreeEstimateError,
    DomainError,
    FactorizationIncomplete,
    HeightlabError,
    InputError,
    InsufficientRangeError,
    MapError,
    OutsideLatticeError,
    ParseError,
    PointError,
    ResourceError,
)
