"""Numerical laboratory for radial singular solutions of the critical
sixth-order equation (-Lap)^3 u = c u^((n+6)/(n-6)) on the punctured space.

The logarithmic change of variables turns the radial equation into an
autonomous constant-coefficient sixth-order flow with a conserved energy;
this package constructs its bounded periodic orbits by two-parameter
shooting, audits every dimensional constant against independent
differentiation oracles, and reconstructs the singular profiles.
"""
from .constants import (
    C_MODES,
    OperatorSpec,
    ProblemParams,
    audit_coupling_constant,
    audit_report,
    derive_constants,
    equilibrium_amplitude,
    indicial_discriminant,
    indicial_polynomial,
    polyharmonic_power_law,
)
from .energy import (
    EnergyBreakdown,
    MonitorReport,
    auxiliary_summands,
    hamiltonian,
    hamiltonian_time_derivative,
    monitor_orbit,
    potential_well,
)
from .integrator import (
    Guards,
    IntegrationError,
    Orbit,
    State,
    Tolerances,
    integrate,
    integrate_backward,
    reflect_state,
    rhs,
)
from .profiles import (
    ConstantProfile,
    PowerLawProfile,
    ReconstructedProfile,
    SphericalProfile,
    TabulatedProfile,
    ef_inverse,
    ef_transform,
    homoclinic_jet,
    homoclinic_profile,
    kelvin_transform,
    kernel_positivity_sample,
    kernel_value,
    radial_polylaplacian,
    reconstruct,
    superharmonicity_check,
)
from .shooting import (
    Classification,
    PeriodicSolution,
    SeamBracket,
    ShootParams,
    classify,
    escape_radius,
    linearized_frequency,
    quotient_check,
    seam_search,
    solve_periodic,
    sweep,
)

__version__ = "0.1.0"
