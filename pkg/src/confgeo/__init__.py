"""confgeo: decides whether a system of third-order ODEs
y_i''' = f_i(x, y, y', y'') is (locally) the equation of conformal geodesics
of some conformal structure, via exact differential invariants."""

__version__ = "0.1.0"

from .expr import (Constant, Expr, ExprError, PoleError, Power, Product,
                   Quotient, RationalForm, SamplePoint, Sum, VarId, Variable,
                   X, ZeroDenominatorError, const, eval_exact, is_zero,
                   is_zero_randomized, normalize, normalize_equal, p_,
                   partial, q_, random_expr, random_sample_point, serialize,
                   substitute, var, y_)
from .jet import (AffineChange, OdeSystem, affine_transform,
                  random_affine_change, total_derivative)
from .invariants import (QuadraticFormDecomposition, TensorField, h_fields,
                         i4_variants_agree, invariant_I2, invariant_I4,
                         invariant_W2, invariant_W3, match_I2_zero_form,
                         trace_free_matrix, trace_free_sym3)
from .connection import ConnectionCoeffs, connection_coefficients
from .conditions import (CheckConfig, ConditionResidual, CovariantDerivs,
                         Verdict, Witness, check_conformal,
                         commutator_bootstrap, condition_residuals,
                         covariant_derivatives, i4_det, i4_rank_assessment)
from .parser import (ParseError, SystemFile, load_system_file,
                     parse_expression, parse_system_source)
from .oracle import (OracleReport, OracleTrajectory, curvature_torsion,
                     integrate_system, numeric_circle_oracle)
from .cli import run_check

__all__ = [name for name in dir() if not name.startswith("_")]
