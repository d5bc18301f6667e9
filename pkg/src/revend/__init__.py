"""Numerical conformal type of ends of revolution in the space forms R^3, S^3 and H^3."""

__version__ = "0.1.0"

from .catalog import CATALOG_NAMES, NON_PARABOLIC, PARABOLIC, INCONCLUSIVE, catalog, catenoid_profile
from .criteria import (ConformalReport, centroid_test, classify_end, cone_test, horosphere_test,
                       iplus_test, nonparabolic_necessaries, parabolicity_test, stochastic_test,
                       sufficient_parabolic_test)
from .divergence import ClassifierConfig, DivergenceVerdict, Kind, TailModel, classify_integral
from .errors import (CurveFileError, DomainError, ExprError, QuadratureError, ReparamError,
                     RevendError)
from .geometry import (ArcCurve, EndSpec, Kappa, ParamCurve, arc_reparam, euclid_mean_curvature,
                       mesh, metric_factor, tangent_norm)
from .stochastic import DiffusionCfg, HitStats, escape_probe, exact_hitting, radial_drift, simulate_hitting
from .warp import WarpFn, centroid, cumulative, extend_warp, gauss_curvature, synthetic, warp_from_curve
