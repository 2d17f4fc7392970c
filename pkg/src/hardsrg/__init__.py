"""Hard scaled relative graphs of LTI systems: regions, Nyquist checks and sampling."""

from .catalog import fixture
from .errors import SrgError
from .lti import StateSpace, TransferMatrix, classify, invert, poles, realize, transmission_zeros
from .nyquist import ContourSpec, closed_loop_stable_oracle, extended_srg_membership, nyquist_trace, winding_number
from .polynomials import Polynomial, RationalFunction
from .region import (
    AffineGains,
    AlphaGrid,
    FrequencyGrid,
    SrgRegion,
    build_region,
    distance_to_point,
    hard_radius_R,
    hard_radius_r,
    membership,
    mobius_inverse_membership,
    sigma_extrema,
    stability_report,
    transform,
)
from .sampling import SignalSpec, simulate, srg_sample, validate_inclusion

__version__ = "0.1.0"
