"""Registry of named identities checked by ``verify``.

Every identity is registered once with the module it belongs to, a
threshold and a scope: ``model`` checks run once on metrics with known
curvature, ``spec`` checks on every calibrated spec, ``closed`` checks on
every closed-manifold case.  A row passes when ``residual <= threshold``.
Rows marked non-gating are reported but do not change the exit status.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import models
from .ansatz import (
    TWO_PI,
    build_metric,
    companions,
    hat_kahler_form,
    kahler_form,
    probe_point,
    sample_points,
    scalar_constants,
    verify_calibration,
)
from .errors import GeometryError, PoleError
from .hirzebruch import (
    a_from_topology,
    closed_eta_pipeline,
    hirzebruch_signature,
    tau0_from_tau1,
)
from .invariants import (
    CohomogeneityDomain,
    dh_compare,
    dh_pushforward,
    eta_integrand,
    eta_reduced,
    eta_report,
    signature_disk_bundle,
    spec_domain,
)
from .profiles import RadiusMap, aux_E, aux_F, validate_interval
from .tensor_lab import (
    ChartPoint,
    ScalarField,
    conformal_rescale,
    curvature_bundle,
    derived_scalars,
    exterior_derivative,
    finite_difference_residual,
    hermitian_residual,
    level_set_shape,
    pontryagin_density,
    riemann_symmetry_residual,
    volume_ratio,
)

TINY = 1e-300


@dataclass(frozen=True)
class Invariant:
    name: str
    module: str
    threshold: float
    scope: str
    fn: object = field(repr=False, compare=False)
    gating: bool = True
    description: str = ""


REGISTRY = []


def invariant(name, module, threshold, scope="spec", gating=True):
    def wrap(fn):
        REGISTRY.append(Invariant(name, module, threshold, scope, fn, gating, (fn.__doc__ or "").strip()))
        return fn

    return wrap


def _rel(x, ref, floor=1e-12):
    return abs(x - ref) / max(abs(ref), floor)


def _tau():
    return ScalarField.coordinate(2)


class SpecContext:
    """Lazily built fields and reports for one calibrated spec."""

    def __init__(self, spec, n_samples=50, seed=0, tol=1e-9, name=None):
        self.spec = spec
        self.n = n_samples
        self.seed = seed
        self.tol = tol
        self.name = name or spec.name or "spec"

    @cached_property
    def g(self):
        return build_metric(self.spec)

    @cached_property
    def comp(self):
        return companions(self.spec)

    @cached_property
    def points(self):
        return sample_points(self.spec, self.n, self.seed)

    @cached_property
    def curv(self):
        return [curvature_bundle(self.g, p) for p in self.points]

    @cached_property
    def curv_hat(self):
        return [curvature_bundle(self.comp[1], p) for p in self.points]

    @cached_property
    def derived(self):
        tau = _tau()
        return [derived_scalars(self.g, tau, p) for p in self.points]

    @cached_property
    def calibration(self):
        return verify_calibration(self.spec, self.n, self.seed)

    @cached_property
    def constants(self):
        return scalar_constants(self.spec, self.n, self.seed)

    @cached_property
    def report(self):
        return eta_report(self.spec, None, self.tol, constants=self.constants)


# ---- model metrics -------------------------------------------------------------------

_MODEL_POINT = ChartPoint(0.11, -0.07, 0.05, 0.13)


@invariant("flat_curvature_vanishes", "tensor-lab", 0.0, "model")
def _flat(_):
    """Flat chart: Riemann tensor and scalar curvature are exactly zero."""
    cb = curvature_bundle(models.flat(), _MODEL_POINT)
    return float(max(np.max(np.abs(cb.riemann)), abs(cb.scalar)))


@invariant("sphere_product_curvature", "tensor-lab", 1e-10, "model")
def _product(_):
    """Product of unit spheres: s = 4 and Ric = g."""
    g = models.sphere_product()
    cb = curvature_bundle(g, _MODEL_POINT)
    return max(abs(cb.scalar - 4.0) / 4.0, float(np.max(np.abs(cb.ricci - cb.metric)) / np.max(cb.metric)))


@invariant("constant_curvature_tensor", "tensor-lab", 1e-8, "model")
def _const_curv(_):
    """kappa = -1 chart: R = kappa (g g - g g) and both Weyl halves vanish."""
    g = models.constant_curvature(-1.0)
    cb = curvature_bundle(g, _MODEL_POINT)
    G = cb.metric
    model = -1.0 * (np.einsum("ac,bd->abcd", G, G) - np.einsum("ad,bc->abcd", G, G))
    r = np.max(np.abs(cb.riemann - model)) / np.max(np.abs(model))
    w = (cb.weyl_plus_norm_sq + cb.weyl_minus_norm_sq) / cb.scalar**2
    return float(max(r, w))


@invariant("riemann_symmetries_generic", "tensor-lab", 1e-9, "model")
def _sym_generic(_):
    """Riemann pair symmetries and first Bianchi on random perturbed metrics."""
    return max(
        riemann_symmetry_residual(curvature_bundle(models.random_perturbation(s), _MODEL_POINT).riemann)
        for s in range(3)
    )


@invariant("pontryagin_weyl_identity_generic", "tensor-lab", 1e-6, "model")
def _pont_generic(_):
    """tr(R^R) density = 2(|W+|^2 - |W-|^2) on product and perturbed metrics."""
    out = 0.0
    for g in (models.sphere_product(1.0, -0.5), *(models.random_perturbation(s) for s in range(3))):
        cb = curvature_bundle(g, _MODEL_POINT)
        d = 2 * (cb.weyl_plus_norm_sq - cb.weyl_minus_norm_sq)
        scale = max(cb.weyl_plus_norm_sq + cb.weyl_minus_norm_sq, TINY)
        out = max(out, abs(pontryagin_density(g, _MODEL_POINT) - d) / scale)
    return out


@invariant("orientation_flip_swaps_weyl", "tensor-lab", 0.0, "model")
def _flip(_):
    """Reversing orientation swaps |W+|^2 and |W-|^2 exactly."""
    g = models.random_perturbation(7)
    a = curvature_bundle(g, _MODEL_POINT)
    b = curvature_bundle(g.flipped(), _MODEL_POINT)
    return float(abs(a.weyl_plus_norm_sq - b.weyl_minus_norm_sq) + abs(a.weyl_minus_norm_sq - b.weyl_plus_norm_sq))


@invariant("flat_eta_zero", "invariant-integrals", 0.0, "model")
def _flat_eta(_):
    """W = 0 and sigma = 0 give eta = 0 exactly through the curvature route."""
    from .invariants import eta_curvature

    dom = CohomogeneityDomain(models.flat(), (0.0, 1.0), 1.0, [(0.1, 0.2, 0.3)], degenerate_end=False)
    return abs(eta_curvature(dom, 0))


@invariant("bounds_equality_cases", "invariant-integrals", 1e-12, "model")
def _bounds_eq(_):
    """Synthetic W- = 0 gives eta = lo; synthetic W+ = 0 gives eta = hi."""
    from .invariants import eta_bounds_from_weyl, eta_from_weyl

    out = 0.0
    for sigma in (-1, 0, 1):
        for w in (0.3, 17.0):
            lo, _ = eta_bounds_from_weyl(sigma, w, 0.0)
            _, hi = eta_bounds_from_weyl(sigma, 0.0, w)
            out = max(out, abs(eta_from_weyl(sigma, w, 0.0) - lo), abs(eta_from_weyl(sigma, 0.0, w) - hi))
    return out


@invariant("config_roundtrip", "cli-reporter", 0.0, "model")
def _config(ctx):
    """serialize(parse(text)) reparses to an equal config."""
    from .config import RunConfig, parse_config

    cfg = ctx if isinstance(ctx, RunConfig) else RunConfig()
    return float(parse_config(cfg.serialize()) != cfg)


# ---- tensor-lab on the ansatz ---------------------------------------------------------


@invariant("riemann_symmetries", "tensor-lab", 1e-9)
def _sym(ctx):
    """R_ijkl = -R_jikl = R_klij and first Bianchi at every sample."""
    return max(riemann_symmetry_residual(cb.riemann) for cb in ctx.curv)


@invariant("scalar_is_ricci_trace", "tensor-lab", 1e-10)
def _trace(ctx):
    """Scalar curvature equals the sum of frame sectional terms R_abab."""
    out = 0.0
    for cb in ctx.curv:
        Rf = cb.frame_tensor(cb.riemann)
        s = float(np.einsum("abab->", Rf))
        out = max(out, _rel(cb.scalar, s, 1e-12 * max(1.0, abs(s))))
    return out


@invariant("pontryagin_weyl_identity", "tensor-lab", 1e-6)
def _pont(ctx):
    """tr(R^R) density = 2(|W+|^2 - |W-|^2) for g and g_hat."""
    out = 0.0
    for g, cbs in ((ctx.g, ctx.curv), (ctx.comp[1], ctx.curv_hat)):
        for p, cb in zip(ctx.points, cbs):
            d = 2 * (cb.weyl_plus_norm_sq - cb.weyl_minus_norm_sq)
            scale = max(cb.weyl_plus_norm_sq + cb.weyl_minus_norm_sq, TINY)
            out = max(out, abs(pontryagin_density(g, p) - d) / scale)
    return out


@invariant("kahler_weyl_plus", "tensor-lab", 1e-6)
def _kahler_weyl_plus(ctx):
    """|W+|^2 = s^2/24 pointwise for the Kahler metric."""
    return max(_rel(cb.weyl_plus_norm_sq, cb.scalar**2 / 24.0) for cb in ctx.curv)


@invariant("derivatives_match_finite_differences", "tensor-lab", 1e-5)
def _fd(ctx):
    """Analytic metric derivatives agree with central differences."""
    return max(max(finite_difference_residual(ctx.g, p, abs(ctx.spec.tau0))) for p in ctx.points[:10])


@invariant("conformal_rescale_roundtrip", "tensor-lab", 1e-12)
def _roundtrip(ctx):
    """Rescaling by u then 1/u reproduces the components."""
    c = ctx.spec.c
    u = ScalarField.from_jets(lambda X: 1.0 + 0.3 * (X[2] - c) ** 2, 4, "u")
    v = ScalarField.from_jets(lambda X: 1.0 / (1.0 + 0.3 * (X[2] - c) ** 2), 4, "1/u")
    back = conformal_rescale(conformal_rescale(ctx.g, u), v)
    out = 0.0
    for p in ctx.points[:10]:
        G = ctx.g.components(p)
        out = max(out, float(np.max(np.abs(back.components(p) - G)) / np.max(np.abs(G))))
    return out


@invariant("pontryagin_conformal_invariance", "tensor-lab", 1e-6)
def _pont_conf(ctx):
    """Chart coefficient of tr(R^R) is unchanged from g to g_E."""
    out = 0.0
    for p, cb in zip(ctx.points[:10], ctx.curv):
        e = curvature_bundle(ctx.comp[0], p).pontryagin_density
        out = max(out, _rel(e, cb.pontryagin_density, 1e-12 * max(1.0, abs(cb.pontryagin_density))))
    return out


# ---- q-profiles -----------------------------------------------------------------------


@invariant("q_derivatives_match_finite_differences", "q-profiles", 1e-7)
def _qfd(ctx):
    """Q' and Q'' agree with central differences of Q and Q'."""
    prof, t0 = ctx.spec.profile, ctx.spec.tau0
    h = np.finfo(float).eps ** (1 / 3) * abs(t0)
    out = 0.0
    for t in np.linspace(0.05, 0.95, 11) * t0:
        q = [prof.derivatives(t + s * h) for s in (-1, 1)]
        d = prof.derivatives(t)
        out = max(out, _rel((q[1][0] - q[0][0]) / (2 * h), d[1], max(abs(d[0]), 1e-12)))
        out = max(out, _rel((q[1][1] - q[0][1]) / (2 * h), d[2], max(abs(d[1]), 1e-12)))
    return out


@invariant("family_c_closed_form", "q-profiles", 1e-12)
def _factor(ctx):
    """Q(c x) = (x - 1)(A E(x) + B F(x) + C) at x in {0, -1, 2}; x = 1 is a pole."""
    prof = ctx.spec.profile
    if prof.family != "c":
        return 0.0
    A, B, C = prof.constants
    c = prof.c
    out = 0.0
    for x in (0.0, -1.0, 2.0):
        ref = (x - 1) * (A * aux_E(x) + B * aux_F(x) + C)
        out = max(out, abs(prof(c * x) - ref) / max(1.0, abs(ref)))
    try:
        prof(c)
        out = max(out, 1.0)
    except PoleError:
        pass
    return out


@invariant("interval_validates", "q-profiles", 0.0)
def _interval(ctx):
    """Q > 0 inside I0, Q(0) != 0 and a simple zero at tau0."""
    return float(not validate_interval(ctx.spec.profile, ctx.spec.interval).ok)


@invariant("interval_validation_monotone", "q-profiles", 0.0)
def _monotone(ctx):
    """Sub-intervals of a positive interval validate positive."""
    t0 = ctx.spec.tau0
    subs = [(0.0, 0.5 * t0), (0.2 * t0, 0.9 * t0), (0.5 * t0, 0.999 * t0)]
    return float(not all(validate_interval(ctx.spec.profile, s).positive_inside for s in subs))


@invariant("radius_ode", "q-profiles", 1e-8)
def _radius(ctx):
    """d(log r)/dtau = abar/Q, differentiating the returned map."""
    s = ctx.spec
    rm = RadiusMap(s.profile, s.abar, s.interval, 0.5 * s.tau0, 1.0)
    h = 3e-4 * abs(s.tau0)
    f = rm.log_r
    out = 0.0
    for t in np.linspace(0.1, 0.9, 9) * s.tau0:
        d = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
        out = max(out, _rel(d, s.abar / s.profile(t)))
    return out


@invariant("radius_roundtrip", "q-profiles", 1e-9)
def _radius_inv(ctx):
    """tau_of_r(r_of_tau(tau)) = tau."""
    s = ctx.spec
    rm = RadiusMap(s.profile, s.abar, s.interval, 0.5 * s.tau0, 1.0)
    ts = np.linspace(0.05, 0.95, 10) * s.tau0
    return max(abs(rm.tau_of_r(rm.r_of_tau(t)) - t) / abs(s.tau0) for t in ts)


# ---- ansatz-metrics -------------------------------------------------------------------


@invariant("gradient_norm_is_Q", "ansatz-metrics", 1e-8)
def _grad(ctx):
    """|grad tau|^2 = Q(tau)."""
    return max(_rel(d[2], ctx.spec.profile(p.tau)) for p, d in zip(ctx.points, ctx.derived))


@invariant("laplacian_depends_on_tau_only", "ansatz-metrics", 1e-8)
def _lap(ctx):
    """Delta tau agrees at equal tau and different (x, y, theta)."""
    rng = np.random.default_rng(ctx.seed + 11)
    tau = _tau()
    out = 0.0
    for p in ctx.points[:10]:
        vals = []
        for _ in range(3):
            x, y = ctx.spec.base.sample_xy(rng)
            vals.append(derived_scalars(ctx.g, tau, ChartPoint(x, y, p.tau, rng.uniform(0, TWO_PI)))[1])
        out = max(out, (max(vals) - min(vals)) / max(np.max(np.abs(vals)), 1e-12))
    return float(out)


def _frame_norm(cb, t):
    return float(np.linalg.norm(cb.frame_tensor(t)))


@invariant("ricci_hessian", "ansatz-metrics", 1e-6)
def _ricci_hessian(ctx):
    """Trace-free part of Hess(tau) + (tau/2) Ric vanishes."""
    out = 0.0
    for p, cb, d in zip(ctx.points, ctx.curv, ctx.derived):
        M = d[0] + 0.5 * p.tau * cb.ricci
        tr = float(np.sum(np.linalg.inv(cb.metric) * M))
        tf = M - tr / 4.0 * cb.metric
        scale = max(_frame_norm(cb, d[0]), _frame_norm(cb, 0.5 * p.tau * cb.ricci), 1e-12)
        out = max(out, _frame_norm(cb, tf) / scale)
    return out


def _umbilic_rel(g, pt):
    sff, tfn = level_set_shape(g, _tau(), pt)
    return tfn / max(float(np.linalg.norm(sff)), 1e-12)


@invariant("boundary_umbilic", "ansatz-metrics", 1e-6)
def _umbilic_boundary(ctx):
    """The boundary level tau = 0 is totally umbilical."""
    return max(_umbilic_rel(ctx.g, p.replace(tau=0.0)) for p in ctx.points[:10])


@invariant("umbilic_all_levels", "ansatz-metrics", 1e-6, gating=False)
def _umbilic_interior(ctx):
    """Interior tau levels umbilical (informational: fails away from tau = 0)."""
    return max(_umbilic_rel(ctx.g, p) for p in ctx.points)


def _hat_expansion(ctx, p, cb, d):
    t, c = p.tau, ctx.spec.c
    return cb.scalar * (t - c) ** 2 + 6.0 * (t - c) * d[1] - 12.0 * ctx.spec.profile(t)


@invariant("hat_scalar_expansion", "ansatz-metrics", 1e-6)
def _hat_scalar(ctx):
    """s_hat = s (tau-c)^2 + 6 (tau-c) Delta tau - 12 Q."""
    return max(
        _rel(ch.scalar, _hat_expansion(ctx, p, cb, d))
        for p, cb, ch, d in zip(ctx.points, ctx.curv, ctx.curv_hat, ctx.derived)
    )


@invariant("hat_weyl_chain", "ansatz-metrics", 1e-6)
def _hat_chain(ctx):
    """|W-|^2_g (tau - c)^4 = s_hat^2 / 24."""
    c = ctx.spec.c
    return max(
        _rel(cb.weyl_minus_norm_sq * (p.tau - c) ** 4, ch.scalar**2 / 24.0)
        for p, cb, ch in zip(ctx.points, ctx.curv, ctx.curv_hat)
    )


@invariant("eta_integrand_collapse", "invariant-integrals", 1e-6)
def _collapse(ctx):
    """s^2 - (tau-c)^-4 (s_hat expansion)^2 = (a^2 - b^2 (tau-c)^-6) tau^2."""
    sc, c = ctx.constants, ctx.spec.c
    out = 0.0
    for p, cb, d in zip(ctx.points, ctx.curv, ctx.derived):
        lhs = cb.scalar**2 - (p.tau - c) ** -4 * _hat_expansion(ctx, p, cb, d) ** 2
        rhs = eta_integrand(p.tau, sc.a, sc.b, c)
        scale = max(abs(cb.scalar) ** 2, abs(rhs), 1e-12)
        out = max(out, abs(lhs - rhs) / scale)
    return out


@invariant("moment_map", "ansatz-metrics", 1e-10)
def _moment(ctx):
    """Contracting abar d/dtheta into omega gives -dtau."""
    om = kahler_form(ctx.spec)
    e = np.array([0.0, 0.0, 1.0, 0.0])
    return max(float(np.max(np.abs(ctx.spec.abar * om.components(p)[3] + e))) for p in ctx.points[:10])


@invariant("circle_symmetry", "ansatz-metrics", 0.0)
def _circle(ctx):
    """Components do not depend on theta."""
    return max(
        float(np.max(np.abs(ctx.g.components(p) - ctx.g.components(p.replace(theta=p[3] + 1.234)))))
        for p in ctx.points[:10]
    )


def _grid(spec, n=10):
    r = spec.base.chart_radius()
    xs = np.linspace(-r, r, n) / math.sqrt(2)
    ts = np.linspace(0.02, 0.98, n) * spec.tau0
    return [ChartPoint(x, y, t, 0.7) for x in xs for y in xs for t in ts]


@invariant("kahler_closedness", "ansatz-metrics", 1e-9)
def _closed(ctx):
    """max |d omega| on a 10 x 10 x 10 grid."""
    om = kahler_form(ctx.spec)
    return max(float(np.max(np.abs(exterior_derivative(om, p)))) for p in _grid(ctx.spec))


@invariant("kahler_compatibility", "ansatz-metrics", 1e-9)
def _hermitian(ctx):
    """g^-1 omega squares to -1 and omega^2/2 = vol_g."""
    om = kahler_form(ctx.spec)
    return max(
        max(hermitian_residual(ctx.g, om, p), abs(volume_ratio(ctx.g, om, p) - 1.0)) for p in ctx.points[:10]
    )


@invariant("hat_kahler", "ansatz-metrics", 1e-8)
def _hat_kahler(ctx):
    """omega_hat is closed and compatible with g_hat for the reversed orientation."""
    om = hat_kahler_form(ctx.spec)
    gh = ctx.comp[1]
    out = 0.0
    for p in ctx.points[:10]:
        scale = float(np.max(np.abs(om.components(p))))
        out = max(
            out,
            float(np.max(np.abs(exterior_derivative(om, p)))) / scale,
            hermitian_residual(gh, om, p),
            abs(volume_ratio(gh, om, p) - 1.0),
        )
    return out


@invariant("companion_scaling", "ansatz-metrics", 4e-16)
def _companion(ctx):
    """g_E = g / tau^2 componentwise."""
    out = 0.0
    for p in ctx.points[:10]:
        G = ctx.g.components(p)
        out = max(out, float(np.max(np.abs(ctx.comp[0].components(p) * p.tau**2 - G)) / np.max(np.abs(G))))
    return out


for _key, _thr in (
    ("einstein_tracefree", 1e-6),
    ("einstein_constant_spread", 1e-6),
    ("chern_integrality", 1e-9),
    ("base_curvature", 1e-8),
    ("gauss_bonnet", 1e-9),
):

    def _cal(ctx, key=_key):
        return ctx.calibration[key]

    _cal.__doc__ = f"Calibration residual {_key}."
    invariant(_key, "ansatz-metrics", _thr)(_cal)


@invariant("scalar_law_g", "ansatz-metrics", 1e-6)
def _sg(ctx):
    """s_g = a tau."""
    return ctx.constants.residuals["s_g"]


@invariant("scalar_law_hat", "ansatz-metrics", 1e-6)
def _sh(ctx):
    """s_hat = b tau / (tau - c)."""
    return ctx.constants.residuals["s_hat"]


@invariant("scalar_constant_two_point", "ansatz-metrics", 1e-7)
def _two_point(ctx):
    """a from two distinct points agrees."""
    a = ctx.constants.a
    p = probe_point(ctx.spec)
    q = p.replace(tau=0.8 * ctx.spec.tau0, x=-p[0])
    a2 = scalar_constants(ctx.spec, 1, ctx.seed, probe=q).a
    return _rel(a2, a)


@invariant("scalar_constants_nonzero", "ansatz-metrics", 0.0)
def _nonzero(ctx):
    """a != 0 and b != 0 (neither self-dual nor anti-self-dual)."""
    sc = ctx.constants
    return float(not (abs(sc.a) > 1e-8 and abs(sc.b) > 1e-8))


# ---- invariant-integrals ---------------------------------------------------------------


@invariant("route_agreement", "invariant-integrals", 1e-4)
def _routes(ctx):
    """|eta_reduced - eta_curvature| / max(1, |eta_reduced|)."""
    return ctx.report.route_relative


@invariant("bounds_containment", "invariant-integrals", 0.0)
def _bounds(ctx):
    """lo <= eta <= hi."""
    return float(not ctx.report.bounds_hold())


@invariant("scalar_bound_matches_lo", "invariant-integrals", 1e-5)
def _sbound(ctx):
    """For Kahler g the lower bound equals -(sigma + int s^2 / 288 pi^2)."""
    r = ctx.report
    return abs(r.scalar_bound - r.bound_lo) / max(1.0, abs(r.bound_lo))


@invariant("dh_pushforward", "invariant-integrals", 1e-4)
def _dh(ctx):
    """Direct volume integral vs pushforward for f in {1, t, t^2, eta integrand}."""
    sc, c = ctx.constants, ctx.spec.c
    fs = (lambda t: 1.0, lambda t: t, lambda t: t * t, lambda t: eta_integrand(t, sc.a, sc.b, c))
    return max(dh_compare(ctx.spec, f, ctx.tol) for f in fs)


@invariant("dh_first_moment", "invariant-integrals", 1e-10)
def _moment1(ctx):
    """Pushforward of t equals the closed-form first moment."""
    s = ctx.spec
    lo, hi = s.bounds
    F = lambda t: s.l_const * t**2 / 2 + s.slope * t**3 / 3  # noqa: E731
    ref = s.fiber_measure * s.base.area * (F(hi) - F(lo))
    return _rel(dh_pushforward(s, lambda t: t, 1e-12), ref)


@invariant("quadrature_convergence", "invariant-integrals", 1.0)
def _quad(ctx):
    """Halving the tolerance moves eta_reduced by less than 10x its error estimate."""
    sc = ctx.constants
    e1, err = eta_reduced(ctx.spec, ctx.report.sigma, sc.a, sc.b, ctx.tol, full_output=True)
    e2 = eta_reduced(ctx.spec, ctx.report.sigma, sc.a, sc.b, ctx.tol / 2)
    return abs(e1 - e2) / max(10.0 * err, 8 * np.finfo(float).eps * max(1.0, abs(e1)))


@invariant("kahler_weyl_integral", "invariant-integrals", 1e-5)
def _derd_int(ctx):
    """(1/12 pi^2) int |W+|^2 = (1/288 pi^2) int s^2."""
    return ctx.report.identity_residuals["kahler_weyl_integral"]


@invariant("weyl_routes_agree", "invariant-integrals", 1e-6)
def _weyl_routes(ctx):
    """Determinant-density and pushforward-density Weyl integrals agree."""
    return ctx.report.identity_residuals["weyl_direct_vs_reduced"]


@invariant("weyl_density_homogeneous", "invariant-integrals", 1e-8)
def _homog(ctx):
    """Weyl densities agree across base samples at equal tau."""
    return ctx.report.identity_residuals["weyl_homogeneity"]


@invariant("signature_rule", "invariant-integrals", 0.0)
def _sig(ctx):
    """sigma is the sign of the disk bundle's Euler number."""
    e = ctx.spec.euler_number
    return float(ctx.report.sigma != signature_disk_bundle(e) or ctx.report.sigma not in (-1, 0, 1))


# ---- hirzebruch-cases -------------------------------------------------------------------


@invariant("tau0_involution", "hirzebruch-cases", 1e-12, "closed")
def _invol(cc):
    """tau0_from_tau1 applied twice returns tau_1."""
    c, t1 = cc.spec.c, cc.spec.tau1
    return abs(tau0_from_tau1(c, tau0_from_tau1(c, t1)) - t1) / max(1.0, abs(t1))


@invariant("closing_slopes_match", "hirzebruch-cases", 1e-9, "closed")
def _slopes(cc):
    """|Q'(tau_1)| = |Q'(tau_0)|, so one abar closes both ends."""
    return cc.report.eta.identity_residuals["closing_slopes"]


@invariant("chern_number_consistent", "hirzebruch-cases", 1e-6, "closed")
def _chern(cc):
    """Gauss-Bonnet on the sphere base reproduces the supplied 2p."""
    n = float(cc.spec.chern_number)
    return abs(abs(cc.report.implied_chern_number) - n) / n


@invariant("signature_rules_agree", "hirzebruch-cases", 0.0, "closed")
def _sig_rules(cc):
    """Parity rule and Euler-number sign rule agree where both apply (odd p)."""
    bad = 0
    for p in range(3, 9):
        h = hirzebruch_signature(2 * p)
        if h != p % 2:
            bad += 1
        if p % 2 and h != signature_disk_bundle(p):
            bad += 1
    return float(bad + (not cc.report.signature_consistent))


@invariant("a_from_topology_matches", "hirzebruch-cases", 1e-4, "closed")
def _a_top(cc):
    """a from the pairing int s vol agrees with the curvature-derived a."""
    return _rel(cc.a_topological, cc.report.eta.a)


@invariant("a_from_topology_linear", "hirzebruch-cases", 0.0, "closed")
def _a_lin(cc):
    """a_from_topology is linear in the pairing."""
    s = cc.calibrated
    args = (s.c, s.slope, s.interval, s.fiber_measure * s.base.area)
    x = 1.7
    return abs(a_from_topology(2 * x, *args) - 2 * a_from_topology(x, *args))


class ClosedContext:
    def __init__(self, spec, n_samples=50, seed=0, tol=1e-9):
        self.spec = spec
        self.report = closed_eta_pipeline(spec, None, tol, n_samples, seed)
        self.calibrated = self.report.calibration.spec
        self.name = spec.name or "closed"
        self.n, self.seed, self.tol = n_samples, seed, tol

    @cached_property
    def a_topological(self):
        # pairing int_M s vol_g, integrated with curvature-derived s
        s = self.calibrated
        dom = spec_domain(s, n_samples=1, seed=self.seed)
        g = dom.metric
        from scipy import integrate

        def fn(t):
            pt = dom.point(dom.samples[0], t)
            return curvature_bundle(g, pt).scalar * dom.volume_density(pt)

        lo, hi = s.bounds
        # stay clear of the degenerate chart at tau0; the integrand is smooth there
        cut = 1e-6 * abs(s.tau0)
        a, b = (lo, hi - cut) if hi == s.tau0 else (lo + cut, hi)
        val, _ = integrate.quad(fn, a, b, epsabs=1e-12, epsrel=1e-12, limit=200)
        pairing = val * dom.transverse_measure
        return a_from_topology(pairing, s.c, s.slope, (a, b), s.fiber_measure * s.base.area)


# ---- driver ------------------------------------------------------------------------------


@dataclass
class Row:
    target: str
    invariant: str
    module: str
    residual: float
    threshold: float
    passed: bool
    gating: bool
    error: str = ""

    def as_dict(self):
        return {
            "target": self.target,
            "invariant": self.invariant,
            "module": self.module,
            "residual": self.residual,
            "threshold": self.threshold,
            "passed": self.passed,
            "gating": self.gating,
            "error": self.error,
        }


@dataclass
class VerificationTable:
    rows: list

    @property
    def ok(self):
        return all(r.passed for r in self.rows if r.gating)

    def failures(self):
        return [r for r in self.rows if not r.passed]


def _run(inv, target, ctx, thresholds):
    thr = thresholds.get(inv.name, inv.threshold)
    try:
        res = float(inv.fn(ctx))
        err = ""
    except GeometryError as exc:
        res, err = float("nan"), f"{type(exc).__name__}: {exc}"
    passed = bool(res <= thr)
    return Row(target, inv.name, inv.module, res, thr, passed, inv.gating, err)


def run_verification(specs, closed=(), n_samples=50, seed=0, tol=1e-9, thresholds=None, config=None):
    """Evaluate every registered invariant; returns a :class:`VerificationTable`."""
    thresholds = dict(thresholds or {})
    rows = []
    for inv in REGISTRY:
        if inv.scope == "model":
            rows.append(_run(inv, "models", config, thresholds))
    closed_ctx = [ClosedContext(c, n_samples, seed, tol) for c in closed]
    spec_ctx = [SpecContext(s, n_samples, seed, tol) for s in specs]
    spec_ctx += [SpecContext(cc.calibrated, n_samples, seed, tol, name=cc.name) for cc in closed_ctx]
    for ctx in spec_ctx:
        for inv in REGISTRY:
            if inv.scope != "spec":
                continue
            if inv.name == "gauss_bonnet" and not ctx.spec.base.closed:
                continue
            rows.append(_run(inv, ctx.name, ctx, thresholds))
    for cc in closed_ctx:
        for inv in REGISTRY:
            if inv.scope == "closed":
                rows.append(_run(inv, cc.name, cc, thresholds))
    return VerificationTable(rows)


def registry_names():
    return [inv.name for inv in REGISTRY]
