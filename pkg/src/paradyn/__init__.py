"""Numerical laboratory for parabolic dynamics of entire maps: local petal
theory, weighted expansion metrics, pullback approximants of the escaping-set
semiconjugacy, exponential dynamic rays, and Julia-set rendering."""

__version__ = "0.1.0"

from .errors import ParadynError
from .maps import EntireMap, OrbitSample, continue_branch
from .parabolic import (
    FatouChart,
    ParabolicGerm,
    SectorSpec,
    abel_residual,
    cascade_estimates,
    fatou_coordinate,
    fit_germ,
    make_chart,
    thin_repelling_sectors,
    thin_sector_inequalities,
    validated_radius,
)
from .metrics import (
    DensityValue,
    MetricConfig,
    comparison_densities,
    expansion_factor,
    omega_density,
    ramification_data,
    sigma_density,
)
from .semiconj import (
    PullbackState,
    RescalingChoice,
    choose_rescaling,
    convergence_report,
    pullback_level,
    run_pullback,
    verify_disjoint_type,
)
from .rays import ExternalAddress, RayPoint, itinerary, trace_ray
from .render import RenderJob, RenderResult, SectorTarget, Viewport, render, tile_scheduler
from .examples import example, example_germ, examples, run_battery, solve_a
