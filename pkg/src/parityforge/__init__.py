"""parityforge: measurement-based preparation of squeezed, cat and GKP
states with displacements and parity measurements in a truncated Fock
space."""

from .analysis import (
    GkpFitReport,
    GridSpec,
    SqueezingReport,
    WignerGrid,
    approx_gkp_state,
    covariance_matrix,
    fidelity,
    fit_gkp,
    fit_squeezed,
    ground_state,
    parity_hamiltonian,
    quadrature_variance,
    squeezing_db,
    wigner,
)
from .channels import (
    LossModel,
    StepOutcome,
    apply_loss,
    loss_kraus,
    measure_project,
    measurement_cycle,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    EvenM,
    NotHermitian,
    TailOverflow,
    ZeroProbability,
)
from .fock import (
    MixedState,
    OperatorMatrix,
    PureState,
    SqueezeParameter,
    TruncationConfig,
    coherent_state,
    combine_displacements,
    displaced_parity,
    displacement_matrix,
    displacement_matrix_expm,
    dispersive_projectors,
    fock_state,
    kind_defect,
    ladder_matrices,
    parity_projectors,
    quadrature_matrix,
    squeeze_matrix,
    squeezed_vacuum,
    tail_mass,
    vacuum,
)
from .protocols import (
    CatSequence,
    DisplacementSequence,
    GkpSpec,
    RunLog,
    analytic_cat_m2,
    cat_lattice_sequence,
    linear_sequence,
    point_reflect,
    run_cat,
    run_gkp,
    run_squeezing,
    symmetric_sequence,
)

__version__ = "0.1.0"
