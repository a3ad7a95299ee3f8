"""Eta invariants of conformally compact Einstein metrics with a Kahler compactification.

The package builds the explicit cohomogeneity-one Kahler metrics on line
bundles over Riemann surfaces, checks their structural identities
numerically and evaluates the eta invariant of the boundary by two routes.
"""

__version__ = "0.1.0"

from .ansatz import (  # noqa: E402
    BaseSurface,
    CalibrationResult,
    CompactificationSpec,
    build_metric,
    calibrate,
    companions,
    hat_kahler_form,
    kahler_form,
    scalar_constants,
)
from .errors import GeometryError  # noqa: E402
from .hirzebruch import (  # noqa: E402
    ClosedSurfaceSpec,
    a_from_topology,
    closed_eta_pipeline,
    hirzebruch_signature,
    tau0_from_tau1,
)
from .invariants import (  # noqa: E402
    EtaReport,
    dh_compare,
    dh_pushforward,
    eta_bounds,
    eta_curvature,
    eta_reduced,
    eta_report,
    signature_disk_bundle,
)
from .profiles import IntervalReport, QProfile, q_eval, solve_radius, validate_interval  # noqa: E402
from .tensor_lab import (  # noqa: E402
    ChartPoint,
    CurvatureBundle,
    MetricField,
    conformal_rescale,
    curvature_bundle,
    derived_scalars,
    level_set_shape,
    pontryagin_density,
    weyl_split,
)

__all__ = [
    "BaseSurface",
    "CalibrationResult",
    "ChartPoint",
    "ClosedSurfaceSpec",
    "CompactificationSpec",
    "CurvatureBundle",
    "EtaReport",
    "GeometryError",
    "IntervalReport",
    "MetricField",
    "QProfile",
    "a_from_topology",
    "build_metric",
    "calibrate",
    "closed_eta_pipeline",
    "companions",
    "conformal_rescale",
    "curvature_bundle",
    "derived_scalars",
    "dh_compare",
    "dh_pushforward",
    "eta_bounds",
    "eta_curvature",
    "eta_reduced",
    "eta_report",
    "hat_kahler_form",
    "hirzebruch_signature",
    "kahler_form",
    "level_set_shape",
    "pontryagin_density",
    "q_eval",
    "scalar_constants",
    "signature_disk_bundle",
    "solve_radius",
    "tau0_from_tau1",
    "validate_interval",
    "weyl_split",
]
