"""Casimir-Lifshitz forces between planar stacks in and out of thermal equilibrium."""

__version__ = "0.1.0"

from .materials import (  # noqa: E402
    Drude, DrudeParams, IdealMirror, OpticalTable, Plasma, Tabulated, Vacuum, gold,
    ingest_optical_table, penetration_depth, permittivity_imag_axis, permittivity_real_axis,
    silicon,
)
from .optics import (  # noqa: E402
    HalfSpace, Overlayer, Polarization, TransverseKinematics, fresnel, ideal_mirror,
    normal_wavevector, reflection_amplitude,
)
from .lifshitz import (  # noqa: E402
    EquilibriumConfig, MatsubaraSpec, free_energy_per_area, matsubara_frequency,
    pressure_per_area, zero_frequency_term,
)
from .noneq import (  # noqa: E402
    NeqBreakdown, NeqQuadratureSpec, ThermalPair, bose_occupation, neq_antisymmetric_potential,
    neq_spectral_density, neq_total_potential,
)
from .apparatus import (  # noqa: E402
    ApparatusConfig, DeltaFResult, delta_F, filter_window_check, pfa_force, thermal_wavelength,
)
