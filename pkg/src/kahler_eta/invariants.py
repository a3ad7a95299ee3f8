"""Signature, eta invariant by two routes, moment-map pushforward and bounds.

Sign convention: the eta invariant is

    eta = -sigma - (1 / 12 pi^2) * integral (|W_+|^2 - |W_-|^2) vol_g

and, for Kahler metrics with ``|W_+|^2 = s^2 / 24``, the reduced formula
carries the same ``-1 / 288 pi^2`` prefactor so that the two routes and the
Weyl bounds are mutually consistent.

Measure convention: integrating over the fiber circle (period
``fiber_period`` in ``theta``) and the base (area ``Vol_h``) pushes
``vol_g`` forward to ``(fiber_period / |abar|) Vol_h (l + (p / abar) t) dt``.
With ``abar = 1`` and a unit fiber measure this is ``Vol_h (l + p t) dt``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate

from .ansatz import TWO_PI, build_metric, scalar_constants
from .errors import DivergenceError, HypothesisViolationError
from .tensor_lab import ChartPoint, curvature_bundle

QUAD_TOL = 1e-9
RICHARDSON_EPS = (1e-3, 1e-4, 1e-5)
ETA_PREFACTOR = 1.0 / (288.0 * math.pi**2)
WEYL_PREFACTOR = 1.0 / (12.0 * math.pi**2)


def signature_disk_bundle(euler_number):
    """Signature of a disk bundle over a closed surface: the sign of its Euler number."""
    e = int(euler_number)
    return (e > 0) - (e < 0)


def eta_from_weyl(sigma, weyl_plus, weyl_minus):
    """Eta from the integrated Weyl norms ``int |W_+|^2`` and ``int |W_-|^2``."""
    return -sigma - WEYL_PREFACTOR * (weyl_plus - weyl_minus)


def eta_bounds_from_weyl(sigma, weyl_plus, weyl_minus):
    """``(lo, hi)`` with equality at ``lo`` when ``W_-`` vanishes and at ``hi`` when ``W_+`` does."""
    lo = -(sigma + WEYL_PREFACTOR * weyl_plus)
    hi = -(sigma - WEYL_PREFACTOR * weyl_minus)
    return lo, hi


# ---- reduced one-dimensional formula -------------------------------------------------


def eta_integrand(t, a, b, c):
    return (a * a - b * b * (t - c) ** -6) * t * t


def eta_reduced_value(sigma, a, b, c, l, p, interval, measure, tol=QUAD_TOL, full_output=False):
    """``-sigma - measure/(288 pi^2) * int_I (a^2 - b^2 (t-c)^-6) t^2 (l + p t) dt``."""
    lo, hi = sorted(interval)
    if lo <= c <= hi:
        raise HypothesisViolationError(f"c = {c} lies in I0 = [{lo}, {hi}]")
    val, err = integrate.quad(
        lambda t: eta_integrand(t, a, b, c) * (l + p * t), lo, hi, epsabs=tol, epsrel=tol, limit=200
    )
    eta = -sigma - ETA_PREFACTOR * measure * val
    if full_output:
        return eta, ETA_PREFACTOR * abs(measure) * err
    return eta


def eta_reduced(spec, sigma, a, b, tol=QUAD_TOL, full_output=False):
    if spec.case != "ii":
        raise HypothesisViolationError("the reduced formula needs case ii (opposite Kahler metric)")
    spec.side  # c not in I0
    return eta_reduced_value(
        sigma,
        a,
        b,
        spec.c,
        spec.l_const,
        spec.slope,
        spec.interval,
        spec.fiber_measure * spec.base.area,
        tol=tol,
        full_output=full_output,
    )


# ---- moment-map pushforward ----------------------------------------------------------


def dh_density(spec, t):
    return spec.fiber_measure * spec.base.area * (spec.l_const + spec.slope * t)


def dh_pushforward(spec, f, tol=QUAD_TOL):
    """``int_M f(tau) vol_g`` via the pushforward density on the moment interval."""
    lo, hi = spec.bounds
    val, _ = integrate.quad(lambda t: f(t) * dh_density(spec, t), lo, hi, epsabs=tol, epsrel=tol, limit=200)
    return val


@dataclass
class CohomogeneityDomain:
    """A region swept by ``tau`` whose transverse slices are all isometric.

    Integrals factor as ``transverse_measure * int density(tau) dtau`` where the
    density is sampled at the transverse points ``samples`` (``(x, y, theta)``)
    and divided by ``transverse_density`` (the coordinate density of the
    transverse measure at that point).
    """

    metric: object
    interval: tuple
    transverse_measure: float
    samples: list
    transverse_density: object = None
    degenerate_end: bool = True

    def point(self, sample, t):
        x, y, th = sample
        return ChartPoint(x, y, t, th)

    def volume_density(self, pt):
        g = self.metric.components(pt)
        d = math.sqrt(np.linalg.det(g))
        return d / self.transverse_density(pt) if self.transverse_density else d


def spec_domain(spec, n_samples=3, seed=7):
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(n_samples):
        x, y = spec.base.sample_xy(rng)
        samples.append((x, y, rng.uniform(0.0, TWO_PI)))
    base = spec.base
    return CohomogeneityDomain(
        metric=build_metric(spec),
        interval=spec.interval,
        transverse_measure=spec.fiber_period * base.area,
        samples=samples,
        transverse_density=lambda pt: base.conformal_factor(pt[0], pt[1]),
    )


def _integrate_to_degenerate_end(fn, start, end, degenerate, tol, eps=RICHARDSON_EPS):
    """Integral of ``fn`` over the segment between ``start`` and ``end`` (positive measure).

    When ``degenerate``, the segment is cut short of ``end`` and the result
    extrapolated in the cutoff.  Returns ``(value, error_estimate)``.
    """
    length = end - start
    sgn = 1.0 if length > 0 else -1.0
    a, b = sorted((start, end))
    if not degenerate:
        val, err = integrate.quad_vec(fn, a, b, epsabs=tol, epsrel=tol)
        return np.asarray(val), float(err)
    cuts = [end - sgn * e * abs(length) for e in eps]
    first, err = integrate.quad_vec(fn, *sorted((start, cuts[0])), epsabs=tol, epsrel=tol)
    vals = [np.asarray(first)]
    for c0, c1 in zip(cuts[:-1], cuts[1:]):
        piece, e2 = integrate.quad_vec(fn, *sorted((c0, c1)), epsabs=tol * 1e-3, epsrel=tol)
        vals.append(vals[-1] + np.asarray(piece))
        err += e2
    # integral as a function of the cutoff is smooth in eps; fit a quadratic and evaluate at 0
    e = np.asarray(eps) * abs(length)
    V = np.vander(e, len(e), increasing=True)
    coef = np.linalg.solve(V, np.stack(vals))
    extrap = coef[0]
    if not np.all(np.isfinite(extrap)):
        raise DivergenceError("integrand is not integrable at the degenerate end")
    drift = np.max(np.abs(extrap - vals[-1]))
    scale = max(1.0, float(np.max(np.abs(extrap))))
    if drift > 1e-2 * scale:
        raise DivergenceError(f"cutoff extrapolation drifts by {drift:.3e}")
    return extrap, float(err)


@dataclass
class WeylIntegrals:
    plus: float
    minus: float
    scalar_sq: float
    direct_vs_reduced: float
    homogeneity_spread: float
    error: float


def weyl_integrals(source, tol=QUAD_TOL):
    """Integrals of ``|W_+|^2``, ``|W_-|^2`` and ``s^2`` against ``vol_g``.

    ``source`` is a calibrated spec or a :class:`CohomogeneityDomain`.  The
    direct route averages the metric-determinant density over the transverse
    samples; for a spec, the reduced route repeats the integral with the
    pushforward density in place of the determinant, and the relative gap is
    reported as ``direct_vs_reduced``.
    """
    spec = None if isinstance(source, CohomogeneityDomain) else source
    dom = spec_domain(spec) if spec is not None else source
    spread = [0.0]

    def density(t):
        rows = []
        for smp in dom.samples:
            pt = dom.point(smp, t)
            cb = curvature_bundle(dom.metric, pt)
            rows.append((cb.weyl_plus_norm_sq, cb.weyl_minus_norm_sq, cb.scalar**2, dom.volume_density(pt)))
        rows = np.asarray(rows)
        vals = rows[:, :3] * rows[:, 3:4]
        mean = vals.mean(axis=0)
        dev = np.max(np.abs(vals - mean)) / max(np.max(np.abs(mean)), 1e-300)
        spread[0] = max(spread[0], float(dev))
        out = [*mean]
        if spec is not None:
            w = rows[0, :3] * dh_density(spec, t) / dom.transverse_measure
            out.extend(w)
        return np.asarray(out)

    start, end = dom.interval
    vals, err = _integrate_to_degenerate_end(density, start, end, dom.degenerate_end, tol)
    vals = vals * dom.transverse_measure
    if spec is not None:
        direct, reduced = vals[:3], vals[3:]
        gap = float(np.max(np.abs(direct - reduced)) / max(np.max(np.abs(direct)), 1e-300))
    else:
        direct, gap = vals, 0.0
    return WeylIntegrals(
        float(direct[0]), float(direct[1]), float(direct[2]), gap, spread[0], err * dom.transverse_measure
    )


def eta_curvature(source, sigma, tol=QUAD_TOL, integrals=None):
    """Eta from the 4-volume integral of the Weyl difference."""
    wi = integrals or weyl_integrals(source, tol)
    return eta_from_weyl(sigma, wi.plus, wi.minus)


def eta_bounds(source, sigma, tol=QUAD_TOL, integrals=None):
    wi = integrals or weyl_integrals(source, tol)
    return eta_bounds_from_weyl(sigma, wi.plus, wi.minus)


def scalar_lower_bound(sigma, scalar_sq_integral):
    """Lower bound ``-(sigma + (1/288 pi^2) int s^2)`` valid for Kahler ``g``."""
    return -(sigma + ETA_PREFACTOR * scalar_sq_integral)


def dh_direct(spec, f, tol=QUAD_TOL, domain=None):
    """``int_M f(tau) vol_g`` from the metric determinant, averaged over transverse samples."""
    dom = domain or spec_domain(spec)

    def fn(t):
        return np.array([f(t) * np.mean([dom.volume_density(dom.point(s, t)) for s in dom.samples])])

    lo, hi = spec.bounds
    val, _ = integrate.quad_vec(fn, lo, hi, epsabs=tol, epsrel=tol)
    return float(val[0]) * dom.transverse_measure


def dh_compare(spec, f, tol=QUAD_TOL):
    """Relative deviation between the direct volume integral and the pushforward."""
    push = dh_pushforward(spec, f, tol)
    direct = dh_direct(spec, f, tol)
    return abs(direct - push) / max(abs(push), 1e-300)


@dataclass
class EtaReport:
    sigma: int
    eta_reduced: float
    eta_curvature: float
    bound_lo: float
    bound_hi: float
    dh_residual: float
    identity_residuals: dict = field(default_factory=dict)
    a: float = float("nan")
    b: float = float("nan")
    weyl_plus_integral: float = float("nan")
    weyl_minus_integral: float = float("nan")
    scalar_bound: float = float("nan")
    quadrature_error: float = float("nan")
    notes: list = field(default_factory=list)

    @property
    def route_difference(self):
        return abs(self.eta_reduced - self.eta_curvature)

    @property
    def route_relative(self):
        return self.route_difference / max(1.0, abs(self.eta_reduced))

    def bounds_hold(self, slack=1e-9):
        return self.bound_lo - slack <= self.eta_reduced <= self.bound_hi + slack

    def as_dict(self):
        return {
            "sigma": self.sigma,
            "eta_reduced": self.eta_reduced,
            "eta_curvature": self.eta_curvature,
            "route_difference": self.route_difference,
            "bound_lo": self.bound_lo,
            "bound_hi": self.bound_hi,
            "scalar_bound": self.scalar_bound,
            "dh_residual": self.dh_residual,
            "a": self.a,
            "b": self.b,
            "weyl_plus_integral": self.weyl_plus_integral,
            "weyl_minus_integral": self.weyl_minus_integral,
            "quadrature_error": self.quadrature_error,
            "identity_residuals": dict(self.identity_residuals),
            "notes": list(self.notes),
        }


def eta_report(spec, sigma=None, tol=QUAD_TOL, constants=None):
    """Both eta routes, bounds and the pushforward check for a calibrated spec."""
    if sigma is None:
        sigma = signature_disk_bundle(spec.euler_number)
    sc = constants or scalar_constants(spec)
    eta_r, err_r = eta_reduced(spec, sigma, sc.a, sc.b, tol, full_output=True)
    wi = weyl_integrals(spec, tol)
    eta_c = eta_from_weyl(sigma, wi.plus, wi.minus)
    lo, hi = eta_bounds_from_weyl(sigma, wi.plus, wi.minus)
    f_eta = lambda t: eta_integrand(t, sc.a, sc.b, spec.c)  # noqa: E731
    dh = max(dh_compare(spec, f, tol) for f in (lambda t: 1.0, lambda t: t, f_eta))
    residuals = {
        "scalar_law_g": sc.residuals["s_g"],
        "scalar_law_hat": sc.residuals["s_hat"],
        "weyl_direct_vs_reduced": wi.direct_vs_reduced,
        "weyl_homogeneity": wi.homogeneity_spread,
        "kahler_weyl_integral": abs(WEYL_PREFACTOR * wi.plus - ETA_PREFACTOR * wi.scalar_sq)
        / max(ETA_PREFACTOR * wi.scalar_sq, 1e-300),
    }
    return EtaReport(
        sigma=sigma,
        eta_reduced=eta_r,
        eta_curvature=eta_c,
        bound_lo=lo,
        bound_hi=hi,
        dh_residual=dh,
        identity_residuals=residuals,
        a=sc.a,
        b=sc.b,
        weyl_plus_integral=wi.plus,
        weyl_minus_integral=wi.minus,
        scalar_bound=scalar_lower_bound(sigma, wi.scalar_sq),
        quadrature_error=err_r + WEYL_PREFACTOR * wi.error,
    )
