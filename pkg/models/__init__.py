from models.base import Direction, PhysicsModel, ScatteringResult, ScatteringSolver, SolverKind
from models.heterojunction import (
    DerivedParams,
    ModelParams,
    ProfileGrid,
    PTPhase,
    PTPhaseClassification,
    derive,
    effective_potential,
    mass_at,
    potential_at,
    pt_phase_classify,
    rho_of_z,
    sample_profile,
    symmetric_points,
    transformed_potential,
)
from models.analytic import (
    AnalyticSolver,
    InteriorBasisValue,
    interior_basis,
    match_and_scatter,
    wavefunction_trace,
    weighted_wronskian,
)
from models.transfer import (
    SliceStack,
    TransferMatrixSolver,
    TransferResult,
    richardson_check,
    transfer_scatter,
)
from models.observables import (
    PTCurrentTrace,
    SingularityReport,
    SolverChoice,
    SweepRow,
    flux_trace,
    generalized_unitarity,
    locate_spectral_singularity,
    phase_nonlinearity,
    pt_current_trace,
    sweep,
    transmission_scan,
)
from models.config import EnergyWindow, OutputKind, RunConfig, worker_count

__all__ = [
    "AnalyticSolver",
    "DerivedParams",
    "Direction",
    "EnergyWindow",
    "InteriorBasisValue",
    "ModelParams",
    "OutputKind",
    "PTCurrentTrace",
    "PTPhase",
    "PTPhaseClassification",
    "PhysicsModel",
    "ProfileGrid",
    "RunConfig",
    "ScatteringResult",
    "ScatteringSolver",
    "SingularityReport",
    "SliceStack",
    "SolverChoice",
    "SolverKind",
    "SweepRow",
    "TransferMatrixSolver",
    "TransferResult",
    "derive",
    "effective_potential",
    "flux_trace",
    "generalized_unitarity",
    "interior_basis",
    "locate_spectral_singularity",
    "mass_at",
    "match_and_scatter",
    "phase_nonlinearity",
    "potential_at",
    "pt_current_trace",
    "pt_phase_classify",
    "rho_of_z",
    "richardson_check",
    "sample_profile",
    "sweep",
    "symmetric_points",
    "transfer_scatter",
    "transformed_potential",
    "transmission_scan",
    "wavefunction_trace",
    "weighted_wronskian",
    "worker_count",
]
