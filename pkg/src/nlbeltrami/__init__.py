"""Construction, solution and numerical verification of nonlinear Beltrami equations
``dbar f = H(z, d f)`` on desk-scale grids."""

__version__ = "0.1.0"

from .errors import (AliasingError, AnchorViolation, BeltramiError, DegenerateJacobian,
                     InvalidParameter, NoConvergence, NonFiniteValue, SingularPoint, ZeroOnTrace)
from .fields import GridSpec, SampledField, annulus, l2_norm, lp_norm, make_grid, region_mask, sample_map
from .derivatives import DistortionField, WirtingerPair, distortion, wirtinger
from .transforms import beurling, cauchy_solve, cutoff, spectral_grid
from .exact import (ExactMapId, MapKind, composed_bound, eval_exact, exact_pair, invert_exact, k_f,
                    k_g, parse_map, sample_exact, theoretical_distortions, wirtinger_exact)
from .kirszbraun import (AnchorSet, KirszbraunColumn, TabulatedField, WGrid, build_field,
                         counterexample_anchors, counterexample_k0, extend_at, lipschitz_audit,
                         minimax_center)
from .structures import (BeltramiStructure, ClosedFormBeltrami, KirszbraunBeltrami,
                         LinearBeltrami, imaginary_part_structure, segment_distance_structure,
                         windowed_linear, zero_structure)
from .solvers import (FlowFamily, InhomogeneousSolution, PathGamma, affine_fixed_point,
                      affine_solution, build_flow, change_of_variables, residual,
                      solve_inhomogeneous, transported_structure, truncation_sensitivity)
from .topology import (argument_increment, check_flow_conditions, circle_trace, growth_exponent,
                       modulus_crossing, modulus_ratio, winding_number)
