"""CEP-dependent one-/three-photon interference in a driven F=1 spin."""

from .dynamics import (AmplitudePair, Trajectory, evolve_density, evolve_two_level,
                       liouville_rhs)
from .integrate import IntegrationError, IntegratorConfig
from .perturbation import (PathAmplitudes, PoleError, QuadratureError, c1_closed,
                           c1_quadrature, c3_closed, c3_quadrature, c_total)
from .pulse import (PulseParams, alpha_from_fwhm, field_amplitude, reference_pulse,
                    rabi_amplitudes, rabi_frequency)
from .scan import (Model, Peak, ScanGrid, Spectrum, TransmissionModel, excitation_signal,
                   find_peaks, phase_scan, spectrum, transmission_signal)
from .spin import (SpinSystem, hamiltonian, pumped_initial_state, upper_population,
                   zeeman_splitting)

__version__ = "0.1.0"
