"""Quantum phase quantization of symmetric one-dimensional oscillators.

The package computes bound-state energies of even polynomial wells three ways
and lets them be compared on equal footing:

* exact quantum phase functions obtained by quasilinearizing the complex
  Riccati equation for the phase/amplitude pair (``qlm``, ``spectrum``);
* semiclassical quantization at first order, at higher orders via contour
  quadrature of an exact differential-algebra recurrence (``diffalg``,
  ``semiclassical``), and with an Airy uniform phase;
* an independent finite-difference shooting solver used as ground truth
  (``oracle``).
"""

from .diffalg import (
    Branch,
    JetExpression,
    JetPoint,
    evaluate,
    jet_derivative,
    riccati_term,
    sigma_term,
)
from .errors import (
    BracketNotFound,
    ContourTooTight,
    EigenvaluePole,
    GammaPole,
    NoConvergence,
    NonPositiveEnergy,
    NonPositivePhaseDerivative,
    NotAnEigenvalue,
    OscPhaseError,
    OutsideAllowedRegion,
    PhasePole,
    PoleAtPoint,
    TailTooLarge,
    ZeroMomentumAtOrigin,
)
from .model import (
    SymmetricPotential,
    TurningPoints,
    classical_action,
    momentum_sq,
    total_action,
    turning_point,
)
from .qlm import (
    PhaseSolution,
    RiccatiField,
    milne_residual,
    project_field,
    qlm_solve,
    solution_grid,
    total_phase,
    trial_airy,
    trial_step,
)
from .semiclassical import (
    BoundaryCondition,
    BoundaryMethod,
    ErmakovParameters,
    Terminant,
    UniformPhase,
    airy_quantize,
    airy_uniform_phase,
    airy_xi0,
    bc_series,
    dunham_integral,
    dunham_quantize,
    nsc,
    sc_phase_ambiguity,
    wkb_quantize,
)
from .spectrum import (
    Eigenfunction,
    SpectrumTable,
    decadic_potential,
    eigenfunction,
    eigenvalue,
    lambda_sweep,
    oscillation_number_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "SymmetricPotential",
    "TurningPoints",
    "momentum_sq",
    "turning_point",
    "classical_action",
    "total_action",
    "Branch",
    "JetExpression",
    "JetPoint",
    "jet_derivative",
    "riccati_term",
    "sigma_term",
    "evaluate",
    "PhaseSolution",
    "RiccatiField",
    "milne_residual",
    "project_field",
    "qlm_solve",
    "solution_grid",
    "total_phase",
    "trial_airy",
    "trial_step",
    "BoundaryCondition",
    "BoundaryMethod",
    "ErmakovParameters",
    "Terminant",
    "UniformPhase",
    "airy_quantize",
    "airy_uniform_phase",
    "airy_xi0",
    "bc_series",
    "dunham_integral",
    "dunham_quantize",
    "nsc",
    "sc_phase_ambiguity",
    "wkb_quantize",
    "Eigenfunction",
    "SpectrumTable",
    "decadic_potential",
    "eigenfunction",
    "eigenvalue",
    "lambda_sweep",
    "oscillation_number_sweep",
    "OscPhaseError",
    "NonPositiveEnergy",
    "OutsideAllowedRegion",
    "PoleAtPoint",
    "ContourTooTight",
    "NoConvergence",
    "ZeroMomentumAtOrigin",
    "PhasePole",
    "NonPositivePhaseDerivative",
    "TailTooLarge",
    "BracketNotFound",
    "NotAnEigenvalue",
    "EigenvaluePole",
    "GammaPole",
    "__version__",
]
