"""Closed-manifold cases: both ends of the moment interval are zero sections.

On the closed manifold the moment map ranges over ``I = [tau_1, tau_0]`` (in
either order) with ``Q`` vanishing simply at both ends.  The disk bundle
``M`` with boundary ``tau = 0`` sits over ``I0 = [0, tau_0]``.  The family-c
constants are fixed, up to scale, by ``Q(tau_0) = Q(tau_1) = 0``.

The relation between the Chern number and ``tau_1`` is not built in.  Given
``(c, tau_1)`` the pipeline computes the Chern number implied by
Gauss-Bonnet on a round sphere base and reports its mismatch with the
supplied ``2p``; :func:`tau1_for_chern_number` inverts that map numerically.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
import math

import numpy as np
from scipy import optimize

from .ansatz import TWO_PI, BaseSurface, CompactificationSpec, calibrate, scalar_constants, smooth_abar
from .errors import (
    ConventionError,
    DegeneratePairingError,
    HypothesisViolationError,
    InvalidProfileError,
    PoleError,
    ValidityError,
)
from .invariants import eta_report, signature_disk_bundle
from .profiles import QProfile, aux_E, aux_F, validate_interval


def tau0_from_tau1(c, tau1):
    """``tau_0 = c tau_1 / (tau_1 - c)``; the map is an involution."""
    if tau1 == c:
        raise PoleError(f"tau_1 = c = {c}")
    return c * tau1 / (tau1 - c)


def hirzebruch_signature(p_twice):
    """Signature of the disk bundle from the Chern number ``2p``: 0 for even ``p``, 1 for odd."""
    p_twice = int(p_twice)
    if p_twice < 3:
        raise ValidityError(f"Chern number 2p = {p_twice} < 3 has no interval containing tau = 0")
    if p_twice % 2:
        raise ConventionError(f"p = {p_twice}/2 is not an integer; the parity rule is ambiguous")
    return (p_twice // 2) % 2


def moment_integral(c, p, interval):
    """``int_I t (2|c| + p t) dt`` in closed form."""
    lo, hi = sorted(interval)
    l = 2.0 * abs(c)
    F = lambda t: l * t**2 / 2.0 + p * t**3 / 3.0  # noqa: E731
    return F(hi) - F(lo)


def a_from_topology(chern_pairing, c, p, interval, area_factor=1.0):
    """Scalar constant ``a`` from the pairing ``2 c_1 . [omega] = int s omega^2 / 2``.

    ``p`` is the slope of the pushforward density ``(2|c| + p t)`` and
    ``area_factor`` the transverse measure multiplying it (fiber measure
    times base area in the normalization of :mod:`kahler_eta.invariants`).
    """
    denom = area_factor * moment_integral(c, p, interval)
    if denom == 0.0:
        raise DegeneratePairingError("moment integral vanishes")
    return chern_pairing / denom


@dataclass(frozen=True)
class ClosedSurfaceSpec:
    c: float
    tau1: float
    p: Fraction
    chern_pairing: float = None
    constants: tuple = None
    hirzebruch: bool = True
    euler_number: int = None
    fiber_period: float = TWO_PI
    name: str = ""

    def __post_init__(self):
        if self.c == 0:
            raise InvalidProfileError("closed cases need c != 0")
        object.__setattr__(self, "p", Fraction(self.p).limit_denominator(10**6))
        if self.hirzebruch and 2 * self.p < 3:
            raise ValidityError(f"Chern number 2p = {2 * self.p} < 3")
        lo, hi = self.interval
        if lo <= self.c <= hi:
            raise HypothesisViolationError(f"c = {self.c} lies in I = [{lo}, {hi}]")
        if not lo < 0.0 < hi:
            raise HypothesisViolationError("I must contain tau = 0 in its interior")

    @property
    def tau0(self):
        return tau0_from_tau1(self.c, self.tau1)

    @property
    def interval(self):
        return tuple(sorted((self.tau1, self.tau0)))

    @property
    def chern_number(self):
        return 2 * self.p


def closed_profile(c, tau1):
    """Family-c profile vanishing at ``tau_1`` and ``tau_0``, positive at 0, scaled to unit norm."""
    tau0 = tau0_from_tau1(c, tau1)
    rows = np.array([[aux_E(t / c), aux_F(t / c), 1.0] for t in (tau0, tau1)])
    _, sv, vt = np.linalg.svd(rows)
    if sv[-1] < 1e-12 * sv[0]:
        raise InvalidProfileError("endpoint conditions do not determine the constants")
    v = vt[-1]
    prof = QProfile.family_c(*v, c)
    if prof(0.0) < 0:
        prof = prof.scaled(-1.0)
    return prof


def _profile(spec):
    if spec.constants is None:
        return closed_profile(spec.c, spec.tau1)
    return QProfile.family_c(*spec.constants, spec.c)


def _draft(spec, profile, degree):
    return CompactificationSpec(
        "ii",
        profile,
        spec.tau0,
        c=spec.c,
        bundle_degree=degree,
        base=BaseSurface(genus=0, closed=True),
        euler_number=spec.euler_number,
        fiber_period=spec.fiber_period,
        name=spec.name,
    )


def implied_chern_number(c, tau1, fiber_period=TWO_PI, n_samples=5):
    """Chern number for which a sphere base of curvature ``kappa`` satisfies Gauss-Bonnet.

    Computed from the calibrated Einstein ``kappa`` and the closing ``abar``:
    ``p_cal * (4 pi / kappa) / fiber_period``.  Sign follows ``p_cal``.
    """
    spec = ClosedSurfaceSpec(c, tau1, 2, hirzebruch=False, fiber_period=fiber_period)
    prof = _profile(spec)
    draft = _draft(spec, prof, None)
    p_cal = draft.slope * smooth_abar(draft)
    res = calibrate(replace(draft, bundle_degree=int(math.copysign(1, p_cal))), n_samples=n_samples)
    kappa = res.spec.base.kappa
    if kappa <= 0:
        return float("nan")
    return res.spec.p * 2.0 * TWO_PI / (kappa * fiber_period)


def tau1_for_chern_number(c, chern_number, bracket=None):
    """Solve ``|implied_chern_number(c, tau_1)| = chern_number`` for ``tau_1`` by bisection."""
    target = float(chern_number)

    def f(t1):
        v = implied_chern_number(c, t1)
        # kappa <= 0 lies beyond the pole where the implied number blows up
        return abs(v) - target if np.isfinite(v) else target

    if bracket is None:
        # tau_1 on the far side of 0 from c; scan outwards for a sign change
        sgn = -math.copysign(1.0, c)
        grid = sgn * abs(c) * np.geomspace(0.05, 200.0, 40)
        vals = [f(t) for t in grid]
        for t0, t1, v0, v1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if v0 * v1 < 0:
                bracket = (t0, t1)
                break
        else:
            raise HypothesisViolationError(f"no tau_1 gives Chern number {chern_number} for c = {c}")
    return float(optimize.brentq(f, *bracket, xtol=1e-13, rtol=1e-13))


@dataclass
class ClosedReport:
    spec: ClosedSurfaceSpec
    calibration: object
    eta: object
    sigma: int
    sigma_disk: int
    signature_consistent: bool
    implied_chern_number: float
    a_topological: float = float("nan")
    notes: list = field(default_factory=list)

    def as_dict(self):
        out = self.eta.as_dict()
        out.update(
            c=self.spec.c,
            tau1=self.spec.tau1,
            tau0=self.spec.tau0,
            p=str(self.spec.p),
            sigma_disk=self.sigma_disk,
            signature_consistent=self.signature_consistent,
            implied_chern_number=self.implied_chern_number,
            a_topological=self.a_topological,
        )
        out["notes"] = list(self.notes)
        return out


def closed_eta_pipeline(spec, sigma=None, tol=1e-9, n_samples=50, seed=0):
    """Calibrate the disk bundle over ``[0, tau_0]`` and compute its eta report."""
    prof = _profile(spec)
    rep = validate_interval(prof, (0.0, spec.tau0))
    far = validate_interval(prof, (0.0, spec.tau1))
    if not (rep.ok and far.ok):
        raise InvalidProfileError("; ".join(rep.messages + far.messages))
    draft = _draft(spec, prof, None)
    p_cal = draft.slope * smooth_abar(draft)
    degree = int(math.copysign(1, p_cal)) * int(spec.chern_number) if spec.chern_number.denominator == 1 else None
    if degree is None:
        raise ConventionError(f"Chern number {spec.chern_number} is not an integer")
    cal = calibrate(replace(draft, bundle_degree=degree), n_samples=n_samples, seed=seed)
    cspec = cal.spec
    notes = []

    sigma_disk = signature_disk_bundle(cspec.euler_number)
    sigma_h = None
    if spec.hirzebruch:
        try:
            sigma_h = hirzebruch_signature(int(spec.chern_number))
        except ConventionError as exc:
            notes.append(str(exc))
    # the two rules can only be compared where the parity rule gives a nonzero value
    consistent = True
    if sigma_h == 1:
        consistent = sigma_h == sigma_disk
    if sigma is None:
        sigma = sigma_h if sigma_h is not None else sigma_disk

    eta = eta_report(cspec, sigma, tol, constants=scalar_constants(cspec, n_samples, seed))
    kappa = cspec.base.kappa
    implied = cspec.p * 2.0 * TWO_PI / (kappa * cspec.fiber_period) if kappa > 0 else float("nan")
    dq0 = prof.derivatives(spec.tau0)[1]
    dq1 = prof.derivatives(spec.tau1)[1]
    eta.identity_residuals["closing_slopes"] = abs(abs(dq1) - abs(dq0)) / abs(dq0)
    eta.identity_residuals["gauss_bonnet"] = cal.residuals["gauss_bonnet"]
    if not np.isfinite(implied) or abs(abs(implied) - float(spec.chern_number)) > 1e-6 * float(spec.chern_number):
        notes.append(f"Gauss-Bonnet implies Chern number {implied:.12g}, supplied {spec.chern_number}")
    notes.append("density slope p/abar = 2 side(tau - c); supplied p enters only via the Chern number")

    a_top = float("nan")
    if spec.chern_pairing is not None:
        a_top = a_from_topology(
            spec.chern_pairing, spec.c, cspec.slope, cspec.interval, cspec.fiber_measure * cspec.base.area
        )
    eta.notes.extend(notes)
    return ClosedReport(spec, cal, eta, sigma, sigma_disk, consistent, implied, a_top, notes)

