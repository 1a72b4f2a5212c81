"""Certified attractor approximation and connectivity analysis for affine
iterated function systems, with the operator-norm constructions that
produce exact connectivity witnesses."""

from .connectivity import (
    FamilyGraph,
    IntersectionWitness,
    MembershipChain,
    Verdict,
    attach_witness,
    classify,
    family_graph,
    iterate_first_map,
    parse_verdict_line,
)
from .errors import DegenerateConstructionError, PreconditionError
from .geometry import (
    PointCloud,
    cloud,
    decimate,
    directed_distance,
    hausdorff_distance,
    min_distance,
)
from .ifs import (
    AffineContraction,
    AttractorApprox,
    IfsSystem,
    apply_map,
    attractor,
    bounding_radius,
    contraction,
    fixed_point,
    hutchinson,
)
from .operators import (
    CertifiedContraction,
    PolarFactors,
    SpectralProjection,
    SymmetricSpectrum,
    adjoint,
    corollary_217_residual,
    defect_operator,
    flip_identity_residual,
    high_defect_contraction,
    low_defect_contraction,
    numerical_rank,
    operator_norm,
    polar_decompose,
    spectral_projection,
    symmetric_eigen,
)
from .sw_family import (
    ExceptionalSubspace,
    GridSpec,
    SwConfig,
    SweepCell,
    SweepReport,
    WitnessBundle,
    annihilation_witness,
    build_ifs,
    connectivity_witness,
    distance_to_exceptional_union,
    exceptional_subspace,
    exceptional_subspaces,
    sw_config,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
