"""Thermal Casimir free energy, pressure and entropy between parallel plates.

The package evaluates the Lifshitz free energy by Matsubara summation for a
set of interchangeable dielectric response models, audits the low-temperature
entropy of each model against the Nernst heat theorem and provides the
confidence-band bookkeeping used to compare theory with measured data.
"""

__version__ = "0.1.0"

from .errors import (
    LifshitzError,
    DomainError,
    RangeError,
    ConvergenceError,
    PrecisionError,
    ValidationError,
    CoverageError,
)
from .materials import (
    RelaxationLaw,
    ConductivityLaw,
    CarrierProfile,
    Oscillator,
    MaterialModel,
    oscillator,
    drude,
    plasma,
    dc_insulator,
    tabulated,
    perfect_conductor,
    eval_permittivity,
    static_permittivity,
    carrier_density,
    screening_kappa,
)
from .reflection import ReflectionPair, fresnel, zero_frequency_limit, modified_tm_zero
from .engine import (
    Geometry,
    SumSettings,
    FreeEnergyResult,
    Mode,
    matsubara_frequency,
    free_energy,
    pressure,
    entropy,
    classical_l0,
)
from .thermo import (
    EntropyCurve,
    NernstVerdict,
    zeta3,
    polylog3,
    drude_entropy_limit,
    dc_entropy_limit,
    nernst_scan,
    nernst_verdict,
    default_scan_grid,
)
from .compare import (
    ExperimentSet,
    TheoryBand,
    ExclusionReport,
    rescale_confidence,
    pfa_sphere_force,
    exclusion_test,
    synth_experiment,
)
