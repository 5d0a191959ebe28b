"""Filippov analysis of a sliding-mode controlled boost converter with a washout filter."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    FieldSide,
    ParameterError,
    Params,
    PhysicalParams,
    State,
    f_minus,
    f_plus,
    full_model,
    normalize,
)
from .filippov import (  # noqa: E402
    RegionKind,
    SigmaPoint,
    classify_sigma_point,
    lie_derivative,
    planar_sliding_field,
    sliding_field_3d,
)
from .singularities import (  # noqa: E402
    QKind,
    TwoFoldKind,
    cusp_point,
    jacobian_planar,
    pseudo_equilibrium,
    stability_quantities,
    tangency_lines,
    two_fold_point,
)
from .integrator import Event, Mode, SimConfig, TrajectorySegment, simulate  # noqa: E402
from .bifurcation import (  # noqa: E402
    BifurcationSet,
    CycleNotFound,
    LimitCycle,
    bifurcation_set,
    classify_region,
    diagram_sweep,
    find_limit_cycle,
    homoclinic_k,
    hopf_report,
)

__all__ = [
    "BifurcationSet", "CycleNotFound", "Event", "FieldSide", "LimitCycle", "Mode", "ParameterError",
    "Params", "PhysicalParams", "QKind", "RegionKind", "SigmaPoint", "SimConfig", "State",
    "TrajectorySegment", "TwoFoldKind", "bifurcation_set", "classify_region", "classify_sigma_point",
    "cusp_point", "diagram_sweep", "f_minus", "f_plus", "find_limit_cycle", "full_model",
    "homoclinic_k", "hopf_report", "jacobian_planar", "lie_derivative", "normalize",
    "planar_sliding_field", "pseudo_equilibrium", "simulate", "sliding_field_3d",
    "stability_quantities", "tangency_lines", "two_fold_point",
]
