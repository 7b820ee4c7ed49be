"""Isoperimetric comparison geometry of submanifolds in space forms."""

from .ambient import AmbientSpace, extrinsic_distance, face_area
from .errors import CheegerLabError, DomainError, MeshError, NumericalError, SpecError
from .extrinsic import (cheeger_estimate, compute_profile, discrete_laplacian_check, divergence_audit,
                        monotonicity_report, verify_isoperimetric_inequality)
from .iso_comparison import (BoundingFunction, IsoComparisonSpace, check_balance, check_balanced_above,
                             check_balanced_below, cheeger_lower_value, cheeger_upper_value, construct_W,
                             load_constellation)
from .mesh import SampledSubmanifold, read_off, write_off
from .model_space import ModelSpace, SpaceForm, ball_volume, isoperimetric_quotient, sphere_volume
from .surfaces import generate_surface

__version__ = "0.1.0"
