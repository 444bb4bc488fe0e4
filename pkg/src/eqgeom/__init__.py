"""Riemannian geometry of the equilibrium manifold of two-consumer exchange
economies, with geodesic equilibrium selection."""

from .economy import (EconomyModel, ManifoldPoint, basis_fields, constant_economy, embed,
                      economy_from_config, fold_economy, load_economy, make_economy,
                      tanh_sin_economy)
from .errors import (DegeneratePlaneError, DomainError, DomainExitError, EqGeomError,
                     NonConvergenceError, RefinementStallError, SingularMetricError,
                     StiffnessError, ValidationError)
from .geodesic import (BACKEND, GeodesicPath, TangentVector, exp_map, g_speed,
                       integrate_geodesic, log_map)
from .geometry import christoffel_at, curvature_at, metric_at, riemann_coefficients_at
from .oracle import FDConfig, christoffel_numeric, curvature_numeric, metric_numeric
from .selection import (find_equilibria, follow_endowment_path, perturb, project_tangent,
                        select, uniqueness_check)

__version__ = "0.1.0"
