"""Attractors, Hutchinson measures, Kantorovich distances, Cuntz families and
the fixed POVM of an affine iterated function system, at desk scale."""

__version__ = "0.1.0"

from ._kernels import backend
from .errors import ConvergenceError, DomainError, PrecisionError
from .geometry import (
    AffineContraction,
    IFSystem,
    PointCloud,
    attractor,
    hausdorff_distance,
    hb_step,
    word_image,
)
from .intervals import IntervalUnion
from .measures import (
    DiscreteMeasure,
    TruncationFamily,
    hutchinson_measure,
    kravchenko_sequence,
    transfer_step,
    truncate_measure,
)
from .operators import (
    CuntzFamily,
    HilbertSpace,
    MatrixOperator,
    adjoint,
    build_f_family,
    build_t_family,
    coding_isometry,
    intertwining_defect,
    measurement_probs,
    operator_norm,
    word_projection,
)
from .povm import (
    CellPartition,
    LipDictionary,
    POVMTable,
    RhoEstimate,
    build_cylinder_pvm,
    dilation_check,
    lip_dictionary_generate,
    povm_fixpoint,
    povm_transfer,
    rho_estimate,
)
from .symbolic import (
    Cylinder,
    ShiftSpaceModel,
    bernoulli_mass,
    coding_point,
    coding_preimage,
    omega_metric,
    shift_in,
    shift_out,
)
from .transport import (
    LipPotential,
    kantorovich_h,
    kantorovich_h_cdf_oracle,
    lip_check,
    modified_kantorovich,
)
