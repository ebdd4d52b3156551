"""shadowcurve: distance-projection curves on implicit hypersurfaces.

Construct the closest-point image of a straight segment on a smooth
implicit surface, decide numerically whether it is a geodesic, measure its
coplanarity with the segment, and audit the rotation invariant on surfaces
of revolution (in any ambient dimension up to 8).
"""

from .analysis import (CoplanarityReport, GeodesicReport, Theorem1Report,
                       coplanarity, geodesic_defect, integrate_geodesic,
                       theorem1_audit)
from .cylinder import (CylinderScenario, alpha_prime, is_trivial_geodesic_case,
                       point_T, point_Tprime)
from .errors import (ConvergenceError, DegenerateSurfaceError, DomainExitError,
                     InvalidInputError, OffSurfaceError, PreconditionError,
                     ShadowCurveError)
from .geometry import Frame, Surface, frame_at, project_tangential, wedge_norm3
from .projection import (ProjectionResult, Segment, closest_point,
                         contraction_audit, medial_clearance)
from .revolution import (CanalSurface, MeridianFrame, RevolutionSurface,
                         canal_from_segment, clairaut_invariants, make_profile,
                         meridian_at, meridian_reach_audit, tangency_check)
from .scenario import Scenario, generate_suite, load_scenario
from .shadow import (SampledCurve, build_shadow, derivatives,
                     speed_constancy_check)
from .surfaces import (Cylinder, Ellipsoid, GraphSurface, Sphere, Torus,
                       make_surface)

__version__ = "0.1.0"
