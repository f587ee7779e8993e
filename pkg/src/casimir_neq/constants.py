"""Physical constants (CODATA values as shipped with ``scipy.constants``)."""

import scipy
from scipy.constants import Boltzmann as K_B
from scipy.constants import c as C
from scipy.constants import e as _E
from scipy.constants import hbar as HBAR

#: 1 eV/hbar in rad/s.
EV_TO_RAD_S = _E / HBAR

CONSTANTS_VERSION = f"scipy.constants {scipy.__version__}"

__all__ = ["C", "HBAR", "K_B", "EV_TO_RAD_S", "CONSTANTS_VERSION"]
