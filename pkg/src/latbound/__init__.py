"""Bound states of two identical fermions and a third particle on the lattice torus.

Fiber dispersions, two-body determinant, Birman-Schwinger kernel and
Fredholm determinant for the three-body fiber, plus a dense
diagonalization oracle for cross-checks.
"""

from .dispersion import Band, Coupling, band_three_body, band_two_body, epsilon, three_body_dispersion, two_body_dispersion
from .errors import (BoundStateNotFound, BracketError, EvaluationError, InvalidArgument, PoleProximityError,
                     SideViolationError, SizeLimitError, SolverError)
from .three_body import (BoundState3, EssentialSpectrumReport, Z, band_spectrum_H, bs_matrix, channel_det,
                         eigenfunction3, essential_spectrum, fredholm_det, gap_states, solve_three_body, wrong_side_check)
from .torus import QuadGrid, TorusPoint, quad_integrate, wrap
from .two_body import BoundState2, band_spectrum_h, det2, dispersion_curve, eigenfunction2, solve_bound_state

__version__ = "0.1.0"
