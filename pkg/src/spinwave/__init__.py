"""Spin-wave product-state ansatz on a periodic spin-1/2 Heisenberg chain.

The ansatz energy is evaluated three ways (dense statevector, O(N) product
formula, simulated shots with readout mitigation) and compared with the
exact single-magnon dispersion.
"""
__version__ = "0.1.0"

from .core import (
    BlochAngles,
    ChainConfig,
    DomainError,
    InvariantViolation,
    ModeIndex,
    NTooSmall,
    OddN,
    SpinwaveError,
    UnsupportedSpin,
    cone_angle_exact,
    cone_angle_geometric,
    cone_angle_small,
    wavenumber,
)
from .ansatz import (
    CircuitSpec,
    ProductState,
    basis_magnitude,
    build_circuit,
    build_product_state,
    energy_closed_form,
    energy_factorized,
    expand,
    ground_amplitude,
    optimal_theta,
)
from .magnon import build_magnon_state, magnon_energy
from .dispersion import (
    DispersionPoint,
    cos_sum_identity,
    dispersion_curve,
    rms_error_bruteforce,
    rms_error_closed_form,
    rms_vs_reference,
    theory_dispersion,
)
from .sampling import NoiseModel, calibrate_readout, estimate_energy
