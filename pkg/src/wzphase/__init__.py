"""Adiabatic U(2) geometric phases for three-level quantum systems with a
doubly degenerate energy level: closed-form degeneracy conditions,
eigenframes, connection one-forms, and holonomy integration, validated
against brute-force oracles."""

__version__ = "0.1.0"

from .connection import (ConnectionCoeffs, TangentSample, connection_forms,
                         fd_connection_oracle, pullback)
from .degeneracy import (Canonical, CaseLabel, ChartPoint, CubicCoeffs,
                         canonicalize, characteristic_coeffs, chart_coords,
                         classify, degenerate_spectrum, synthesize)
from .errors import (CaseTransitionError, ConfigError, NumericalError,
                     ValidationError, WzPhaseError)
from .hamiltonian import (MultipoleTensor, Params, gellmann_from_params,
                          matrix_from_params, multipole_matrix, multipole_params,
                          params_from_gellmann, params_from_matrix, shift_params,
                          spin1_operators)
from .holonomy import (ErrorReport, HolonomyResult, dynamical_phase,
                       path_ordered_exp, schrodinger_propagator, verify_adiabatic)
from .loops import (AngleSeries, CanonicalLoop, FourierSeries, Loop, LoopSample,
                    ParamsLoop, SampledLoop)
from .spectral import Frame, align_frames, eig3_oracle, frame

__all__ = [name for name in dir() if not name.startswith("_")]
