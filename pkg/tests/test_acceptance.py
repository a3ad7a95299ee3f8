"""The fifteen acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated together in
the ``acceptance criteria`` section of the pytest summary.
"""

from pathlib import Path
import math
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from kahler_eta import models
from kahler_eta.ansatz import build_metric, calibrate, companions, kahler_form, sample_points
from kahler_eta.config import ClosedConfig
from kahler_eta.hirzebruch import closed_eta_pipeline, hirzebruch_signature
from kahler_eta.invariants import (
    CohomogeneityDomain,
    dh_compare,
    eta_bounds_from_weyl,
    eta_curvature,
    eta_from_weyl,
    eta_integrand,
    eta_reduced_value,
    signature_disk_bundle,
)
from kahler_eta.reference import reference_drafts
from kahler_eta.tensor_lab import (
    ChartPoint,
    ScalarField,
    curvature_bundle,
    derived_scalars,
    exterior_derivative,
    level_set_shape,
    pontryagin_density,
)

from oracles import eta_reduced_exact

N_POINTS = 50
POINT_SEED = 101  # independent of the calibration samples
TAU = ScalarField.coordinate(2)
DATA = Path(__file__).parent / "data"


def rel(x, ref, floor=1e-300):
    return abs(x - ref) / max(abs(ref), floor)


class Sampled:
    """Curvature of ``g``, ``g_E`` and ``g_hat`` at fresh random points of one spec."""

    def __init__(self, spec):
        self.spec = spec
        self.g = build_metric(spec)
        self.g_E, self.g_hat = companions(spec)
        self.points = sample_points(spec, N_POINTS, POINT_SEED)
        self.curv = [curvature_bundle(self.g, p) for p in self.points]
        self.curv_E = [curvature_bundle(self.g_E, p) for p in self.points]
        self.curv_hat = [curvature_bundle(self.g_hat, p) for p in self.points]


@pytest.fixture(scope="module")
def timed_calibrations():
    out = []
    for draft in reference_drafts():
        t = time.perf_counter()
        res = calibrate(draft, n_samples=N_POINTS)
        out.append((res, time.perf_counter() - t))
    return out


@pytest.fixture(scope="module")
def sampled(reference_specs):
    return [Sampled(s) for s in reference_specs]


def test_c01_einstein(timed_calibrations, criterion):
    specs = [r.spec for r, _ in timed_calibrations]
    assert all(s.case == "ii" and s.profile.family == "c" for s in specs)
    distinct = len({(round(s.p, 12), s.c) for s in specs}) >= 3
    worst_tf, worst_spread, worst_time = 0.0, 0.0, 0.0
    for (res, dt), s in zip(timed_calibrations, specs):
        g_E, _ = companions(s)
        tf, lam = [], []
        for p in sample_points(s, N_POINTS, POINT_SEED):
            cb = curvature_bundle(g_E, p)
            tf.append(np.linalg.norm(cb.frame_tensor(cb.tracefree_ricci())))
            lam.append(cb.scalar / 4.0)
        worst_tf = max(worst_tf, max(tf))
        worst_spread = max(worst_spread, max(lam) - min(lam))
        worst_time = max(worst_time, dt)
    ok = distinct and worst_tf < 1e-6 and worst_spread < 1e-6 and worst_time < 30.0
    criterion(
        1,
        ok,
        f"{len(specs)} specs, max |Ric0(g_E)| = {worst_tf:.2e}, Einstein constant spread = {worst_spread:.2e}, "
        f"slowest calibration {worst_time:.2f} s",
    )
    assert ok


def test_c02_kahler_closed(reference_specs, criterion):
    worst = 0.0
    for s in reference_specs:
        om = kahler_form(s)
        r = s.base.chart_radius()
        xs = np.linspace(-r, r, 10) / math.sqrt(2)
        ts = np.linspace(0.02, 0.98, 10) * s.tau0
        for x in xs:
            for y in xs:
                for t in ts:
                    worst = max(worst, float(np.max(np.abs(exterior_derivative(om, ChartPoint(x, y, t, 1.1))))))
    ok = worst < 1e-9
    criterion(2, ok, f"max |d omega| on 10x10x10 grids = {worst:.2e}")
    assert ok


@pytest.fixture(scope="module")
def constants(reference_reports):
    return {name: (r.a, r.b) for name, r in reference_reports.items()}


def test_c03_scalar_law(sampled, constants, criterion):
    worst = 0.0
    for S in sampled:
        a, b = constants[S.spec.name]
        c = S.spec.c
        for p, cb, ch in zip(S.points, S.curv, S.curv_hat):
            worst = max(worst, rel(a * p.tau, cb.scalar), rel(b * p.tau / (p.tau - c), ch.scalar))
    ok = worst < 1e-6
    criterion(3, ok, f"max relative deviation of s_g and s_hat from the laws = {worst:.2e}")
    assert ok


def test_c04_kahler_weyl_plus(sampled, criterion):
    worst = max(rel(cb.weyl_plus_norm_sq, cb.scalar**2 / 24.0) for S in sampled for cb in S.curv)
    ok = worst < 1e-6
    criterion(4, ok, f"max relative |W+|^2 vs s^2/24 = {worst:.2e}")
    assert ok


def test_c05_conformal_weyl_chain(sampled, criterion):
    worst = 0.0
    for S in sampled:
        c = S.spec.c
        for p, cb, ch in zip(S.points, S.curv, S.curv_hat):
            worst = max(worst, rel(cb.weyl_minus_norm_sq * (p.tau - c) ** 4, ch.scalar**2 / 24.0))
    ok = worst < 1e-6
    criterion(5, ok, f"max relative |W-|^2 (tau-c)^4 vs s_hat^2/24 = {worst:.2e}")
    assert ok


def test_c06_integrand_collapse(sampled, constants, criterion):
    worst = 0.0
    for S in sampled:
        a, b = constants[S.spec.name]
        for p, cb in zip(S.points, S.curv):
            lhs = 24.0 * (cb.weyl_plus_norm_sq - cb.weyl_minus_norm_sq)
            rhs = eta_integrand(p.tau, a, b, S.spec.c)
            worst = max(worst, abs(lhs - rhs) / max(cb.scalar**2, abs(rhs)))
    ok = worst < 1e-6
    criterion(6, ok, f"max relative gap between 24(|W+|^2-|W-|^2) and (a^2-b^2(t-c)^-6)t^2 = {worst:.2e}")
    assert ok


def test_c07_duistermaat_heckman(reference_specs, constants, criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for s in reference_specs:
        a, b = constants[s.name]
        fs = (lambda t: 1.0, lambda t: t, lambda t: eta_integrand(t, a, b, s.c))
        worst = max(worst, max(dh_compare(s, f) for f in fs))
    dt = time.perf_counter() - t0
    ok = worst < 1e-4 and dt < 120.0
    criterion(7, ok, f"max relative direct vs pushforward = {worst:.2e} in {dt:.1f} s")
    assert ok


def test_c08_route_agreement(reference_reports, closed_report, criterion):
    reps = list(reference_reports.values()) + [closed_report.eta]
    worst = max(r.route_difference / abs(r.eta_reduced) for r in reps)
    ok = worst < 1e-4
    criterion(8, ok, f"{len(reps)} specs, max |eta_curvature - eta_reduced| / |eta_reduced| = {worst:.2e}")
    assert ok


def test_c09_bounds(reference_reports, closed_report, criterion):
    reps = list(reference_reports.values()) + [closed_report.eta]
    contained = all(r.bound_lo <= r.eta_reduced <= r.bound_hi for r in reps)
    contained &= all(r.bound_lo <= r.eta_curvature <= r.bound_hi for r in reps)
    eq = 0.0
    rng = np.random.default_rng(9)
    for _ in range(20):
        sigma = int(rng.integers(-1, 2))
        w = float(rng.uniform(0.0, 500.0))
        lo, _ = eta_bounds_from_weyl(sigma, w, 0.0)
        _, hi = eta_bounds_from_weyl(sigma, 0.0, w)
        eq = max(eq, abs(eta_from_weyl(sigma, w, 0.0) - lo), abs(eta_from_weyl(sigma, 0.0, w) - hi))
    ok = contained and eq < 1e-12
    criterion(9, ok, f"containment on {len(reps)} specs: {contained}; synthetic equality gap = {eq:.1e}")
    assert ok


def test_c10_umbilicity(sampled, criterion):
    interior, boundary, rh = 0.0, 0.0, 0.0
    for S in sampled:
        for p, cb in zip(S.points, S.curv):
            interior = max(interior, level_set_shape(S.g, TAU, p)[1])
            boundary = max(boundary, level_set_shape(S.g, TAU, p.replace(tau=0.0))[1])
            hess = derived_scalars(S.g, TAU, p)[0]
            M = hess + 0.5 * p.tau * cb.ricci
            tf = M - np.sum(np.linalg.inv(cb.metric) * M) / 4.0 * cb.metric
            rh = max(rh, float(np.linalg.norm(cb.frame_tensor(tf))))
    ok = interior < 1e-6 and rh < 1e-6
    criterion(
        10,
        ok,
        f"interior tau-levels trace-free II = {interior:.2e} (boundary level {boundary:.1e}); "
        f"Ricci-Hessian trace-free = {rh:.2e}",
    )
    assert ok


def test_c11_pontryagin(sampled, criterion):
    metrics = [(S.g, S.points[:10]) for S in sampled]
    pts = [ChartPoint(0.11, -0.07, 0.05, 0.13), ChartPoint(-0.2, 0.1, 0.3, 0.4)]
    metrics.append((models.sphere_product(1.0, -0.5), pts))
    metrics += [(models.random_perturbation(seed), pts) for seed in range(3)]
    worst = 0.0
    for g, points in metrics:
        for p in points:
            cb = curvature_bundle(g, p)
            d = 2.0 * (cb.weyl_plus_norm_sq - cb.weyl_minus_norm_sq)
            worst = max(worst, abs(pontryagin_density(g, p) - d) / max(cb.weyl_plus_norm_sq + cb.weyl_minus_norm_sq, 1e-300))
    ok = worst < 1e-6
    criterion(11, ok, f"max relative tr(R^R) vs 2(|W+|^2-|W-|^2) = {worst:.2e} over {len(metrics)} metrics")
    assert ok


def test_c12_quadrature_oracle(criterion):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(10):
        a, b = rng.uniform(-3.0, 3.0, 2)
        sgn = rng.choice([-1.0, 1.0])
        c = sgn * rng.uniform(0.5, 3.0)
        # I0 = [0, tau0] on either side of 0 but never reaching c
        tau0 = -sgn * rng.uniform(0.2, 2.0) if rng.uniform() < 0.5 else sgn * abs(c) * rng.uniform(0.1, 0.9)
        p = 2.0 * (1.0 if tau0 * sgn < 0 else -1.0)
        sigma = int(rng.integers(-1, 2))
        measure = rng.uniform(0.5, 20.0)
        args = (sigma, a, b, c, 2 * abs(c), p, (0.0, tau0), measure)
        worst = max(worst, rel(eta_reduced_value(*args, tol=1e-13), eta_reduced_exact(*args)))
    ok = worst < 1e-10
    criterion(12, ok, f"max relative eta_reduced vs exact antiderivative = {worst:.2e} over 10 tuples")
    assert ok


@pytest.mark.slow
def test_c13_signature_rules(criterion):
    rows = []
    for p in range(3, 9):
        r = closed_eta_pipeline(ClosedConfig(p=p).spec(), n_samples=5)
        e = r.calibration.spec.euler_number
        rows.append((p, e, signature_disk_bundle(e), hirzebruch_signature(2 * p)))
    mismatched = [p for p, _, s, h in rows if s != h]
    ok = not mismatched
    table = ", ".join(f"p={p}: e={e} sign={s} parity={h}" for p, e, s, h in rows)
    criterion(13, ok, f"{table}; mismatch at p in {mismatched}")
    assert ok


def test_c14_flat_eta_zero(criterion):
    dom = CohomogeneityDomain(models.flat(), (0.0, 1.0), 1.0, [(0.1, 0.2, 0.3), (-0.4, 0.0, 2.0)], degenerate_end=False)
    eta = eta_curvature(dom, 0)
    ok = eta == 0.0
    criterion(14, ok, f"eta_curvature(flat, sigma = 0) = {eta!r}")
    assert ok


@pytest.mark.slow
def test_c15_verify_cli(tmp_path, criterion):
    exe = shutil.which("kahler-eta")
    cmd = [exe] if exe else [sys.executable, "-m", "kahler_eta.cli"]
    out = tmp_path / "verify.csv"
    t0 = time.perf_counter()
    proc = subprocess.run(
        cmd + ["verify", "--config", str(DATA / "reference.ini"), "--out", str(out)],
        capture_output=True,
        text=True,
        timeout=600,
    )
    dt = time.perf_counter() - t0
    rows = out.read_text().count("\n") - 1 if out.exists() else 0
    ok = proc.returncode == 0 and dt < 300.0
    criterion(15, ok, f"verify exit {proc.returncode} in {dt:.1f} s, {rows} rows")
    assert ok, proc.stderr


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
