"""Sector functionals on the sphere and steepest-descent curve analysis.

The package evaluates and minimizes the normalized first-moment functional
of spherical sectors over the dual-containing class, and tracks how the
mean width of a growing convex hull changes along self-expanding curves,
where the same functional controls the growth rate.
"""

from .sphere import (
    GreatArc,
    QuadratureGrid,
    SphericalPolygon,
    build_quadrature,
    geodesic_distance,
    projected_polygon_area,
    sphere_measure,
    unit_vector,
)
from .cones import (
    ConvexCone,
    NormalConeResult,
    Sector,
    cone_contains,
    cone_equal,
    dual_cone,
    in_class_c,
    is_constant_width,
    is_self_dual,
    normal_cone_at_vertex,
    spherical_hull,
    spherical_width_profile,
    tangent_cone_at_vertex,
)
from .phi import (
    PhiResult,
    capbody_width_gradient,
    phi,
    santalo_lower_bound,
    sector_first_moment,
)
from .minimize import (
    MinimizationProblem,
    MinimizationReport,
    blaschke_lebesgue_area,
    cap_family_sweep,
    distance_to_orthant,
    minimize_phi,
    self_dual_snap,
)
from .curves import (
    Ball,
    CurveClass,
    HullBody,
    HullTrace,
    PolylineCurve,
    angle_condition_check,
    build_hull_trace,
    dwds,
    generate_hat_curve,
    generate_log_spiral,
    hat_curve_scan,
    is_sdc,
    mean_width_polytope,
    orthant_exclusion_scan,
    polyline_descent_defect,
    psi,
    random_sdc_curve,
    reparameterize_by_width,
    search_max_psi,
    solve_spiral_omega,
    width_ratio_bound,
)

__version__ = "0.1.0"
