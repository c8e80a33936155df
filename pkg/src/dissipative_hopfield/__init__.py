"""
Generalized Hopfield model of a dispersive, dissipative dielectric and the
quantum radiation created by a time-dependent medium-environment coupling G(t).

Modules:

- ``model``: medium constants and switching profiles with their Fourier transforms
- ``linear_response``: permittivity, damping, polariton bands, symplectic mode basis
- ``perturbative``: first-order Bogoliubov coefficients, spectra and yields
- ``exact``: non-perturbative per-k mode solver and Bogoliubov extraction
- ``lattice``: y-resolved environment lattice used to check the elimination
- ``correlations``: first-order photon-partner correlation maps
- ``cli``: scenario runner
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (  # noqa: F401
    ConstantOnWindow,
    DeltaNPulse,
    Gaussian,
    Lorentzian,
    MediumParams,
    Sampled,
    SpectralAmplitude,
    Step,
    SwitchingProfile,
    ZeroProfile,
    profile_fourier,
    profile_from_dict,
    profile_value,
    validate_params,
)
from .linear_response import (  # noqa: F401
    BandDispersion,
    HopfieldBasis,
    band_dispersion,
    band_frequencies,
    band_gap,
    band_weight,
    complex_wavenumber,
    damping_info,
    hopfield_diagonalize,
    kramers_kronig_real,
    permittivity,
)
from .perturbative import (  # noqa: F401
    FirstOrderCoeffs,
    SpectrumResult,
    YieldResult,
    convention_constant,
    delta_n_yield_closed_form,
    first_order_coeffs,
    lorentzian_yield_closed_form,
    spectrum_first_order,
    sudden_switch_cutoff_scan,
    total_yield,
)
from .exact import (  # noqa: F401
    DriveMode,
    ExactBogoliubov,
    ModeState,
    extract_bogoliubov,
    integrate_mode,
    occupation_exact,
    unitarity_defect,
)
from .lattice import LatticeConfig, compare_elimination, evolve_lattice_mode  # noqa: F401
from .correlations import (  # noqa: F401
    CorrelationMap,
    auto_correlation_first_order,
    cross_correlation_map,
    locate_peaks,
)
