"""Explicit charts for the Kahler metrics on line bundles over Riemann surfaces.

The metric on ``L`` minus its zero section is written in the coordinates
``(x, y, tau, theta)``: ``(x, y)`` isothermal coordinates on the base,
``tau`` the moment map and ``theta`` the fiber angle.  Substituting
``dr / r = (abar / Q) dtau`` into the vertical block gives::

    g = w(tau) h + dtau^2 / Q(tau) + (Q(tau) / abar^2) (dtheta + mu)^2

with ``w = 1`` (case i) or ``w = 2 |tau - c|`` (case ii), ``h`` of constant
curvature ``kappa`` and ``d mu = p omega_h``.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np
from scipy import optimize

from .errors import (
    CalibrationError,
    DomainError,
    HypothesisViolationError,
    InvalidProfileError,
    OverconstrainedError,
    ProbeError,
)
from .profiles import QProfile, validate_interval
from .tensor_lab import (
    ChartPoint,
    MetricField,
    ScalarField,
    TwoFormField,
    conformal_rescale,
    curvature_bundle,
    exterior_derivative,
)

TWO_PI = 2.0 * math.pi
Q_FLOOR = 1e-10
EDGE = 0.02


@dataclass(frozen=True)
class BaseSurface:
    """Constant-curvature Riemann surface in the chart
    ``h = 4 (dx^2 + dy^2) / (1 + kappa (x^2 + y^2))^2``.

    ``kappa`` and ``area`` may be left as ``None`` in a calibration draft.
    """

    kappa: float = None
    area: float = None
    genus: int = None
    closed: bool = False

    def conformal_factor(self, x, y):
        D = 1.0 + self.kappa * (x * x + y * y)
        return 4.0 / (D * D)

    def potential(self, p, x, y):
        """``(mu_x, mu_y)`` for ``mu = 2 p (x dy - y dx) / (1 + kappa r^2)``."""
        D = 1.0 + self.kappa * (x * x + y * y)
        return -2.0 * p * y / D, 2.0 * p * x / D

    def chart_radius(self):
        k = abs(self.kappa or 0.0)
        return 0.5 / math.sqrt(max(k, 1.0))

    def sample_xy(self, rng):
        rad = self.chart_radius() * math.sqrt(rng.uniform(0.05, 1.0))
        ang = rng.uniform(0.0, TWO_PI)
        return rad * math.cos(ang), rad * math.sin(ang)

    def metric_field(self):
        def comps(X):
            H = self.conformal_factor(X[0], X[1])
            return [[H, 0.0], [0.0, H]]

        return MetricField.from_jets(comps, 2, name="h")

    def gauss_bonnet_residual(self):
        if not self.closed or self.genus is None:
            return 0.0
        return abs(self.kappa * self.area - TWO_PI * (2 - 2 * self.genus))


@dataclass(frozen=True)
class CompactificationSpec:
    """Recipe for ``(M, g, tau)``; unknowns are ``None`` until calibrated."""

    case: str
    profile: QProfile
    tau0: float
    c: float = None
    abar: float = None
    p: float = None
    bundle_degree: int = None
    base: BaseSurface = field(default_factory=BaseSurface)
    euler_number: int = None
    fiber_period: float = TWO_PI
    name: str = ""

    def __post_init__(self):
        if self.case not in ("i", "ii"):
            raise InvalidProfileError(f"case must be 'i' or 'ii', got {self.case!r}")
        if self.case == "ii" and self.c is None:
            raise InvalidProfileError("case ii needs the constant c")
        if self.case == "ii" and self.profile.family == "c" and self.profile.c != self.c:
            raise InvalidProfileError("profile constant c differs from spec c")
        if self.case == "ii" and self.profile.family == "b" and self.c != 0:
            raise InvalidProfileError("family b goes with c = 0")
        if self.case == "i" and self.profile.family != "a":
            raise InvalidProfileError("case i goes with family a")
        if self.abar == 0:
            raise InvalidProfileError("abar must be nonzero")

    @property
    def interval(self):
        return (0.0, float(self.tau0))

    @property
    def bounds(self):
        return tuple(sorted(self.interval))

    @property
    def side(self):
        """Sign of ``tau - c`` on the interval (case ii)."""
        if self.case == "i":
            return 1.0
        lo, hi = self.bounds
        if lo <= self.c <= hi:
            raise HypothesisViolationError(f"c = {self.c} lies in I0 = [{lo}, {hi}]")
        return 1.0 if lo > self.c else -1.0

    @property
    def l_const(self):
        return 1.0 if self.case == "i" else 2.0 * abs(self.c)

    @property
    def slope(self):
        """``w'(tau) = p / abar``."""
        return 0.0 if self.case == "i" else 2.0 * self.side

    @property
    def orientation(self):
        return 1 if self.abar > 0 else -1

    @property
    def fiber_measure(self):
        """Length of the fiber orbit measured in the moment-map normalization."""
        return self.fiber_period / abs(self.abar)

    @property
    def is_calibrated(self):
        return None not in (self.abar, self.p, self.base.kappa, self.base.area)

    def w(self, t):
        if self.case == "i":
            return 1.0
        return 2.0 * self.side * (t - self.c)


def _require_calibrated(spec):
    if not spec.is_calibrated:
        raise ProbeError("spec has unresolved constants; run calibrate first")


@lru_cache(maxsize=256)
def _interval_scale(profile, interval):
    return validate_interval(profile, interval).scale


def q_scale(spec):
    return _interval_scale(spec.profile, spec.interval)


def _tau_guard(spec):
    lo, hi = spec.bounds
    floor = Q_FLOOR * q_scale(spec)
    zero_end = spec.tau0

    def check(t):
        if not lo <= t <= hi or t == zero_end:
            raise DomainError(f"tau = {t} outside I0 = [{lo}, {hi}) for {spec.name or 'spec'}")
        if spec.profile(t) < floor:
            raise DomainError(f"Q({t}) below {floor:.3e}: chart degenerates at the zero section")

    return check


def build_metric(spec):
    """The Kahler metric ``g`` as a chart field, oriented by its complex structure."""
    _require_calibrated(spec)
    check = _tau_guard(spec)
    base, prof = spec.base, spec.profile
    inv_a2 = 1.0 / spec.abar**2
    p = spec.p

    def comps(X):
        x, y, t, _ = X
        check(t.val)
        H = base.conformal_factor(x, y)
        mx, my = base.potential(p, x, y)
        Q = prof.jet(t)
        wH = spec.w(t) * H
        f = Q * inv_a2
        fx, fy = f * mx, f * my
        return [
            [wH + fx * mx, fx * my, 0.0, fx],
            [fx * my, wH + fy * my, 0.0, fy],
            [0.0, 0.0, 1.0 / Q, 0.0],
            [fx, fy, 0.0, f],
        ]

    return MetricField.from_jets(comps, 4, orientation=spec.orientation, name="g")


def tau_field(spec=None):
    return ScalarField.coordinate(2)


def kahler_form(spec):
    """``omega = w omega_h + (1/abar) dtau ^ (dtheta + mu)``."""
    _require_calibrated(spec)
    base, a, p = spec.base, spec.abar, spec.p

    def comps(X):
        x, y, t, _ = X
        wH = spec.w(t) * base.conformal_factor(x, y)
        mx, my = base.potential(p, x, y)
        return [
            [0.0, wH, -mx / a, 0.0],
            [-wH, 0.0, -my / a, 0.0],
            [mx / a, my / a, 0.0, 1.0 / a],
            [0.0, 0.0, -1.0 / a, 0.0],
        ]

    return TwoFormField.from_jets(comps, 4, name="omega")


def hat_kahler_form(spec):
    """Kahler form of ``g / (tau - c)^2`` for the reversed orientation.

    With ``tau_hat = -1 / (tau - c)`` it reads
    ``(w / (tau - c)^2) omega_h - (1/abar) dtau_hat ^ (dtheta + mu)``.
    """
    _require_calibrated(spec)
    if spec.case != "ii":
        raise HypothesisViolationError("the opposite Kahler metric needs case ii")
    base, a, p, c = spec.base, spec.abar, spec.p, spec.c

    def comps(X):
        x, y, t, _ = X
        u = 1.0 / ((t - c) * (t - c))
        wH = spec.w(t) * u * base.conformal_factor(x, y)
        mx, my = base.potential(p, x, y)
        k = -u / a
        return [
            [0.0, wH, -k * mx, 0.0],
            [-wH, 0.0, -k * my, 0.0],
            [k * mx, k * my, 0.0, k],
            [0.0, 0.0, -k, 0.0],
        ]

    return TwoFormField.from_jets(comps, 4, name="omega_hat")


def _inverse_square_factor(shift, label):
    def fn(X):
        d = X[2] - shift
        if d.val == 0.0:
            raise DomainError(f"{label}: conformal factor blows up at tau = {shift}")
        return 1.0 / (d * d)

    return ScalarField.from_jets(fn, 4, name=label)


def companions(spec):
    """``(g_E, g_hat)`` with ``g_E = g / tau^2`` and ``g_hat = g / (tau - c)^2``.

    ``g_hat`` carries the reversed orientation, for which it is Kahler.  In
    case i only ``g_E`` exists and ``g_hat`` is ``None``.
    """
    g = build_metric(spec)
    g_E = conformal_rescale(g, _inverse_square_factor(0.0, "tau^-2"))
    g_E.name = "g_E"
    if spec.case != "ii":
        return g_E, None
    spec.side  # raises when c is inside I0
    g_hat = conformal_rescale(g, _inverse_square_factor(spec.c, "(tau-c)^-2")).flipped()
    g_hat.name = "g_hat"
    return g_E, g_hat


def probe_point(spec):
    r = spec.base.chart_radius() if spec.base.kappa is not None else 0.1
    return ChartPoint(0.37 * r, -0.21 * r, 0.5 * spec.tau0, 0.3)


def sample_points(spec, n, seed=0, edge=EDGE):
    """Random interior chart points, ``tau`` kept ``edge * |tau0|`` from both ends."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(n):
        x, y = spec.base.sample_xy(rng)
        t = spec.tau0 * rng.uniform(edge, 1.0 - edge)
        pts.append(ChartPoint(x, y, t, rng.uniform(0.0, TWO_PI)))
    return pts


@dataclass
class CalibrationResult:
    spec: CompactificationSpec
    einstein_constant: float
    base_curvature: float
    residuals: dict
    info: dict = field(default_factory=dict)

    def passed(self, thresholds=None):
        thresholds = thresholds or CALIBRATION_THRESHOLDS
        return all(self.residuals[k] < thresholds[k] for k in thresholds if k in self.residuals)


CALIBRATION_THRESHOLDS = {
    "einstein_tracefree": 1e-6,
    "einstein_constant_spread": 1e-6,
    "kahler_closedness": 1e-9,
    "chern_integrality": 1e-9,
    "base_curvature": 1e-8,
    "gauss_bonnet": 1e-9,
}


def _einstein_probe_value(spec, pt):
    g_E, _ = companions(spec)
    cb = curvature_bundle(g_E, pt)
    return float(cb.frame_tensor(cb.tracefree_ricci())[0, 0])


def _solve_kappa(spec, pt, trace):
    def phi(k):
        v = _einstein_probe_value(replace(spec, base=replace(spec.base, kappa=k)), pt)
        trace.append((k, v))
        return v

    lo, hi = -1.0, 1.0
    flo, fhi = phi(lo), phi(hi)
    while flo * fhi > 0:
        if hi > 1e6:
            raise CalibrationError("no sign change of the Einstein residual in kappa", trace)
        lo, hi = 4 * lo, 4 * hi
        flo, fhi = phi(lo), phi(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    return float(optimize.brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def smooth_abar(spec):
    """``abar`` closing the fiber circle smoothly at ``tau0`` with ``r -> 0`` there.

    Smoothness needs ``fiber_period * |Q'(tau0)| / (2 |abar|) = 2 pi``;
    ``r -> 0`` at ``tau0`` fixes the sign to ``-sign(tau0)``.
    """
    dq = spec.profile.derivatives(spec.tau0)[1]
    return -math.copysign(1.0, spec.tau0) * abs(dq) * spec.fiber_period / (4.0 * math.pi)


def cone_angle(spec):
    """Total angle around the zero section; ``2 pi`` when the metric closes smoothly."""
    dq = spec.profile.derivatives(spec.tau0)[1]
    return spec.fiber_period * abs(dq) / (2.0 * abs(spec.abar))


def calibrate(draft, n_samples=50, seed=0, rtol=1e-9):
    """Resolve ``abar``, ``p``, ``area`` and ``kappa`` and verify the result.

    Solves in order: Kahler closedness ``w' = p / abar``; Chern integrality
    ``p * area = fiber_period * degree``; the Einstein condition for
    ``g / tau^2`` by a bracketed root solve in ``kappa`` at a probe point.
    Fixed values that disagree with these relations raise
    :class:`OverconstrainedError`.
    """
    spec = draft
    report = validate_interval(spec.profile, spec.interval)
    if not report.positive_inside:
        raise InvalidProfileError("; ".join(report.messages))
    info = {"interval_report": report}

    abar, p = spec.abar, spec.p
    if spec.case == "i":
        if p not in (None, 0.0):
            raise OverconstrainedError(f"case i forces p = 0, got {p}")
        p = 0.0
        if abar is None:
            abar = smooth_abar(spec)
    else:
        slope = spec.slope
        if abar is None:
            abar = p / slope if p is not None else smooth_abar(spec)
        if p is None:
            p = slope * abar
        elif abs(p - slope * abar) > rtol * max(1.0, abs(p)):
            raise OverconstrainedError(f"closedness needs p = {slope * abar}, got {p}")
    if abar == 0:
        raise CalibrationError("abar resolved to zero (Q'(tau0) = 0?)")

    base = spec.base
    deg, area = spec.bundle_degree, base.area
    if p == 0.0:
        if deg not in (None, 0):
            raise OverconstrainedError("p = 0 needs a trivial bundle (degree 0)")
        deg = 0
        if area is None:
            raise OverconstrainedError("area cannot be inferred when p = 0; supply it")
    elif area is None:
        if deg is None:
            raise OverconstrainedError("need bundle_degree or area")
        area = spec.fiber_period * deg / p
        if area <= 0:
            raise OverconstrainedError(
                f"degree {deg} has the wrong sign for p = {p}: area would be {area}"
            )
    elif deg is None:
        d = p * area / spec.fiber_period
        deg = int(round(d))
    spec = replace(spec, abar=abar, p=p, bundle_degree=deg, base=replace(base, area=area))
    if spec.euler_number is None:
        spec = replace(spec, euler_number=deg)

    trace = []
    probe = probe_point(spec)
    if spec.base.kappa is None:
        kappa = _solve_kappa(spec, probe, trace)
        spec = replace(spec, base=replace(spec.base, kappa=kappa))
    info["kappa_trace"] = trace

    residuals = verify_calibration(spec, n_samples, seed)
    g_E, _ = companions(spec)
    lam = curvature_bundle(g_E, probe).scalar / 4.0
    info["cone_angle"] = cone_angle(spec)
    result = CalibrationResult(spec, lam, spec.base.kappa, residuals, info)
    if draft.base.kappa is not None and residuals["einstein_tracefree"] > CALIBRATION_THRESHOLDS["einstein_tracefree"]:
        raise OverconstrainedError(
            f"fixed kappa = {draft.base.kappa} is not Einstein: residual {residuals['einstein_tracefree']:.3e}"
        )
    return result


def verify_calibration(spec, n_samples=50, seed=0):
    g_E, _ = companions(spec)
    omega = kahler_form(spec)
    tf, lams, dw = [], [], []
    for pt in sample_points(spec, n_samples, seed):
        cb = curvature_bundle(g_E, pt)
        tf.append(np.linalg.norm(cb.frame_tensor(cb.tracefree_ricci())))
        lams.append(cb.scalar / 4.0)
        dw.append(np.max(np.abs(exterior_derivative(omega, pt))))
    h = spec.base.metric_field()
    rng = np.random.default_rng(seed + 1)
    kerr = max(
        abs(curvature_bundle(h, ChartPoint(*spec.base.sample_xy(rng))).scalar / 2.0 - spec.base.kappa)
        for _ in range(5)
    )
    chern = abs(spec.p * spec.base.area / spec.fiber_period - spec.bundle_degree)
    return {
        "einstein_tracefree": float(max(tf)),
        "einstein_constant_spread": float(max(lams) - min(lams)),
        "kahler_closedness": float(max(dw)),
        "chern_integrality": float(chern),
        "base_curvature": float(kerr),
        "gauss_bonnet": float(spec.base.gauss_bonnet_residual()),
    }


@dataclass
class ScalarConstants:
    a: float
    b: float
    residuals: dict


def scalar_curvatures(spec, pt, fields=None):
    """``(s_g, s_hat)`` at ``pt`` from the curvature of ``g`` and ``g_hat``."""
    g, g_hat = fields or (build_metric(spec), companions(spec)[1])
    s = curvature_bundle(g, pt).scalar
    s_hat = curvature_bundle(g_hat, pt).scalar if g_hat is not None else float("nan")
    return s, s_hat


def scalar_constants(spec, n_samples=50, seed=0, probe=None):
    """Constants ``a = s_g / tau`` and ``b = s_hat (tau - c) / tau``."""
    _require_calibrated(spec)
    probe = probe or probe_point(spec)
    t = probe.tau
    if abs(t) < 1e-8 * max(1.0, abs(spec.tau0)):
        raise ProbeError("probe too close to tau = 0")
    fields = (build_metric(spec), companions(spec)[1])
    s, s_hat = scalar_curvatures(spec, probe, fields)
    a = s / t
    b = s_hat * (t - spec.c) / t if spec.case == "ii" else float("nan")
    rs, rh = [], []
    for pt in sample_points(spec, n_samples, seed):
        si, shi = scalar_curvatures(spec, pt, fields)
        rs.append(abs(si - a * pt.tau) / abs(si))
        if spec.case == "ii":
            rh.append(abs(shi - b * pt.tau / (pt.tau - spec.c)) / abs(shi))
    res = {"s_g": float(max(rs)), "s_hat": float(max(rh)) if rh else 0.0}
    return ScalarConstants(float(a), float(b), res)
