"""Subdivision-based embedding certificates and discrete curvature for Bezier surfaces."""

from .bezier import (BezierPatch, Closedness, ControlNet, classify_closedness, de_casteljau_eval, eval_surface,
                     patches_at_level, subdivide_grid, surface_derivatives)
from .cones import bounding_cone, injectivity_conditions
from .curvature import curvature_report, discrete_gauss_bonnet, theorem2_residual, theorem3_check
from .formats import dump_net, dumps_report, export_mesh, load_net, parse_net, save_net
from .intersect import Certificate, Verdict, hausdorff_distance, isotopy_certificate, self_intersections
from .mesh import TriMesh, control_mesh_at_level, topology, triangulate_net
from .pipeline import RunConfig, convergence_summary, run

__version__ = "0.1.0"
