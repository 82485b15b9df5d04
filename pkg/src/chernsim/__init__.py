"""Dynamical and spectral Chern numbers of driven one- and two-qubit systems."""
__version__ = "0.1.0"

from .berry import ChernEstimate, QubitParams, chern_dynamical, chern_spectral, degeneracy_loci, monopole_count
from .controls import ControlVector, elliptic_ramp, meridian_ramp, two_qubit_ramp
from .propagator import adiabatic_prepare, propagate
from .units import MHZ, mhz, to_mhz

__all__ = [
    "ChernEstimate", "QubitParams", "chern_dynamical", "chern_spectral", "degeneracy_loci", "monopole_count",
    "ControlVector", "elliptic_ramp", "meridian_ramp", "two_qubit_ramp", "adiabatic_prepare", "propagate",
    "MHZ", "mhz", "to_mhz", "__version__",
]
