"""Polyhedral and smooth approximation of boundary-represented norms."""
from .approx import (ApproxNorm, build_approx_norm, minimal_n, support_profile,
                     verify_elements, verify_sandwich)
from .core import Functional, evaluate, l1_norm, linear_combine
from .errors import (CapExceededError, DimensionMismatchError, InvalidNormError, LevelingError,
                     NormforgeError)
from .exposed import (ExposedPoint, decompose_Dnm, exposed_points, minimal_support_witness,
                      verify_lemma_geometry)
from .leveling import (LevelingDecomposition, convex_reconstruct, h_approx, j_approx,
                       lambda_weights, level_sequence)
from .normspec import (NormSpec, VertexSet, basis_constant_L, dual_norm, equivalence_ratio,
                       eval_norm, unit_ball_vertices)
from .smooth import SmoothNorm, choose_p, smooth_value_and_gradient

__version__ = "0.1.0"
