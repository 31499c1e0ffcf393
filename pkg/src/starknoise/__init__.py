"""Statistical model of charge-trap-induced spectral diffusion of a quantum
emitter: telegraph trap ensembles, closed-form Stark-noise statistics,
occupancy-suppression models, Voigt lineshape synthesis, a Monte Carlo
verification engine and a spectroscopy fitting pipeline.
"""

from .analytics import (
    DEFAULT_GAMMA_LORENTZ_MEV,
    ShiftStatistics,
    SweepPoint,
    center_wavelength,
    energy_to_wavelength_shift,
    field_sweep,
    mean_shift,
    power_sweep,
    variance_shift,
    variance_shift_factored,
)
from .constants import CONSTANTS, GAUSSIAN_FWHM_FACTOR, PhysicalConstants, effective_bohr_radius
from .errors import ConfigError, DataParseError, DegenerateDataError
from .geometry import (
    FieldMoments,
    TrapGeometry,
    expected_annulus_moments,
    field_moments,
    kappa_hat_annulus,
    sample_trap_geometry,
    trap_field_magnitude,
)
from .fitting import (
    FitResult,
    MeasurementSeries,
    fit_double_voigt_splitting,
    fit_polarization,
    fit_saturation,
    fit_stark_polynomial,
    fit_suppression_field,
    fit_suppression_power,
    fit_voigt,
    fit_zeeman,
    zeeman_g_factors,
)
from .lineshape import (
    SpectrumRecord,
    VoigtParams,
    faddeeva,
    gaussian_profile,
    lorentzian_profile,
    synthesize_spectrum,
    voigt_fwhm_approx,
    voigt_profile,
    wavelength_view,
)
from .montecarlo import (
    ExactMoments,
    GeometrySpec,
    MCConfig,
    MCResult,
    brute_force_moments,
    mc_to_sweep_table,
    run_mc,
)
from .stark import (
    FieldConversion,
    LocalField,
    StarkResponse,
    local_field_from_voltage,
    mirror_visibility,
    stark_shift,
)
from .suppression import (
    CarrierGeneration,
    ElectricalSuppressionParams,
    MicroscopicOpticalRates,
    OpticalSuppressionParams,
    capture_coefficient,
    carrier_density,
    characteristic_field,
    effective_from_microscopic,
    generation_coefficient,
    occupancy_from_rates,
    occupancy_vs_field,
    occupancy_vs_power,
    release_rate_field,
    switching_time_from_rates,
)
from .telegraph import (
    OccupancySteadyState,
    TelegraphRates,
    TelegraphTrajectory,
    sample_stationary,
    sample_trajectory,
    steady_state,
)

__version__ = "0.1.0"
