"""Classical emulation of eigenvalue processing with Chebyshev and Faber
history states."""

from .core import BlockEncoding, JordanSpec, build_from_jordan, cmod
from .cheby import ChebExpansion, exp_coeffs, erf_coeffs
from .histstate import HistoryState, PaddedSystem, build_padded_chebyshev, chebyshev_history
from .estimate import chebyshev_qpe, leading_eigenvalue_qpe, qeve
from .transform import TransformReport, prepare_ground, qevt, qevt_block, solve_diffeq
from .faber import FaberRegion, faber_coeffs, faber_history, faber_polys, qevt_faber, solve_diffeq_faber, special_region
from .fourier import FourierOracle, direct_fourier_coeffs, fourier_coeff_operator
from .analysis import crouzeix_check, numerical_range, pseudospectrum

__version__ = "0.1.0"
