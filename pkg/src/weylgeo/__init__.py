"""Numerical tools for Weyl geometry on 4-manifolds and surfaces inside them."""

from .expr import parse, to_string, evaluate, diff
from .geom import ChartedManifold4, metric_at, hodge_star2
from .weyl import WeylStructure, weyl_connection, riemann, gauge_transform, metricity_defect
from .hermitian import (AlmostHermitianStructure, kahler_form, lee_form, canonical_weyl, nijenhuis,
                        nabla_J, verify_identity_dwJN, verify_identity_weylJN)
from .surface import GridImmersion, TorusDomain, RectDomain, tension, weyl_mean_curvature
from .twistor import twistor_lift, holomorphicity_residual, count_indices, chern_number, webster_report
from .flow import run_flow, flow_step
from .catalog import get_entry, CATALOG

__version__ = "0.1.0"
