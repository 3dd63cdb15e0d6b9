"""Energy-minimizing and shortest paths around a smooth convex obstacle.

The package discretizes a curve joining two exterior points as a node chain,
minimizes the kinetic energy of the chain subject to staying outside the
obstacle, and verifies the structure the minimizer must have: straight free
parts, a single tangential contact run following a surface geodesic, and
curvature bounded by the obstacle's. A closed-form solver covers spheres,
and a grid scanner maps where the minimizer fails to be unique.
"""

from .analytic import (Multiplicity, SphereSolution, VisionBoundarySample,
                       solve_sphere, sphere_solution_to_curve, vision_boundary)
from .curve import DiscreteCurve, straight_line
from .errors import (ConfigError, DegenerateCurve, DegenerateGradient,
                     EmptyInput, InfeasibleEndpoints, InfeasiblePoint,
                     InsufficientData, NonConvergence, NotConstantSpeed,
                     NotTangent, TautPathError)
from .obstacle import (ConvexObstacle, Ellipsoid, ImplicitConvex, Region,
                       Sphere, obstacle_from_config)
from .optimizer import (BacktrackingArmijo, FixedStep, SolveConfig,
                        SolveResult, initial_curves, project_curve_feasible,
                        solve)
from .structure import (ElResidualProfile, StructureReport,
                        StructureTolerances, chord_clears_obstacle,
                        el_residual_profile, extract_coincidence,
                        verify_structure)
from .uniqueness import (Label, MinimizerCluster, ScanMap, cluster_minimizers,
                         estimate_dimension, hausdorff_distance, scan)

__version__ = "0.1.0"

__all__ = [
    "BacktrackingArmijo",
    "ConfigError",
    "ConvexObstacle",
    "DegenerateCurve",
    "DegenerateGradient",
    "DiscreteCurve",
    "ElResidualProfile",
    "Ellipsoid",
    "EmptyInput",
    "FixedStep",
    "ImplicitConvex",
    "InfeasibleEndpoints",
    "InfeasiblePoint",
    "InsufficientData",
    "Label",
    "MinimizerCluster",
    "Multiplicity",
    "NonConvergence",
    "NotConstantSpeed",
    "NotTangent",
    "Region",
    "ScanMap",
    "SolveConfig",
    "SolveResult",
    "Sphere",
    "SphereSolution",
    "StructureReport",
    "StructureTolerances",
    "TautPathError",
    "VisionBoundarySample",
    "chord_clears_obstacle",
    "cluster_minimizers",
    "el_residual_profile",
    "estimate_dimension",
    "extract_coincidence",
    "hausdorff_distance",
    "initial_curves",
    "obstacle_from_config",
    "project_curve_feasible",
    "scan",
    "solve",
    "solve_sphere",
    "sphere_solution_to_curve",
    "straight_line",
    "vision_boundary",
    "__version__",
]
