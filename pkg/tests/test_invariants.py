from fractions import Fraction
import math

import numpy as np
import pytest

from kahler_eta import models
from kahler_eta.ansatz import CompactificationSpec, calibrate, scalar_constants
from kahler_eta.errors import DivergenceError, HypothesisViolationError
from kahler_eta.invariants import (
    CohomogeneityDomain,
    _integrate_to_degenerate_end,
    dh_compare,
    dh_pushforward,
    eta_bounds_from_weyl,
    eta_curvature,
    eta_from_weyl,
    eta_integrand,
    eta_reduced,
    eta_reduced_value,
    eta_report,
    signature_disk_bundle,
    weyl_integrals,
)
from kahler_eta.profiles import QProfile, find_endpoint_zero

from oracles import reduced_integral_exact

ETA_EXAMPLE = dict(sigma=0, a=1.0, b=1.0, c=-1.0, l=2.0, p=2.0, interval=(0.0, 0.5), measure=4 * math.pi)


@pytest.mark.parametrize("e, sigma", [(3, 1), (0, 0), (-2, -1), (7, 1)])
def test_signature_disk_bundle(e, sigma):
    assert signature_disk_bundle(e) == sigma


def test_reduced_integral_example_is_rational():
    # hand integration: 11/96 from the polynomial part, 1/54 from the rational part
    assert reduced_integral_exact(1, 1, -1, 2, 2, 0, Fraction(1, 2)) == Fraction(83, 864)


def test_eta_reduced_example():
    ref = -ETA_EXAMPLE["measure"] / (288 * math.pi**2) * 83 / 864
    val = eta_reduced_value(**ETA_EXAMPLE)
    assert val == pytest.approx(ref, rel=1e-12)


def test_eta_reduced_zero_constants():
    assert eta_reduced_value(1, 0.0, 0.0, -1.0, 2.0, 2.0, (0.0, 0.5), 3.0) == -1.0


def test_eta_reduced_rejects_c_in_interval():
    with pytest.raises(HypothesisViolationError):
        eta_reduced_value(0, 1.0, 1.0, 0.2, 0.4, 2.0, (0.0, 0.5), 1.0)


def test_eta_reduced_error_estimate():
    val, err = eta_reduced_value(**ETA_EXAMPLE, full_output=True)
    assert 0.0 <= err < 1e-12


def test_weyl_route_identities():
    for sigma in (-1, 0, 1):
        lo, hi = eta_bounds_from_weyl(sigma, 2.0, 0.5)
        assert lo <= eta_from_weyl(sigma, 2.0, 0.5) <= hi
        assert eta_from_weyl(sigma, 1.3, 0.0) == eta_bounds_from_weyl(sigma, 1.3, 0.0)[0]
        assert eta_from_weyl(sigma, 0.0, 1.3) == eta_bounds_from_weyl(sigma, 0.0, 1.3)[1]


def test_flat_eta_is_exactly_zero():
    dom = CohomogeneityDomain(models.flat(), (0.0, 1.0), 1.0, [(0.1, 0.2, 0.3)], degenerate_end=False)
    assert eta_curvature(dom, 0) == 0.0


def test_conformally_flat_domain_gives_minus_sigma():
    dom = CohomogeneityDomain(
        models.constant_curvature(-1.0), (0.05, 0.3), 2.0, [(0.1, 0.05, 0.0)], degenerate_end=False
    )
    wi = weyl_integrals(dom)
    assert abs(wi.plus) < 1e-20 and abs(wi.minus) < 1e-20
    assert eta_curvature(dom, 1, integrals=wi) == pytest.approx(-1.0, abs=1e-15)


def test_divergent_end_detected():
    with pytest.raises(DivergenceError):
        _integrate_to_degenerate_end(lambda t: np.array([1.0 / (1.0 - t)]), 0.0, 1.0, True, 1e-9)


def test_degenerate_end_extrapolation_is_accurate():
    # smooth integrand: the cutoff extrapolation reproduces the full integral
    val, _ = _integrate_to_degenerate_end(lambda t: np.array([math.cos(t)]), 0.0, 1.2, True, 1e-10)
    assert val[0] == pytest.approx(math.sin(1.2), rel=1e-12)


def test_reports_on_reference_suite(reference_reports):
    for name, rep in reference_reports.items():
        assert rep.route_relative < 1e-4, name
        assert rep.bounds_hold(), name
        assert rep.dh_residual < 1e-4, name
        assert abs(rep.scalar_bound - rep.bound_lo) < 1e-5 * max(1.0, abs(rep.bound_lo)), name
        assert rep.identity_residuals["kahler_weyl_integral"] < 1e-5


def test_report_dict_shape(reference_reports):
    d = reference_reports["sphere-base"].as_dict()
    for key in ("eta_reduced", "eta_curvature", "route_difference", "bound_lo", "bound_hi", "sigma"):
        assert key in d
    assert d["route_difference"] == abs(d["eta_reduced"] - d["eta_curvature"])


def test_eta_reduced_matches_exact_antiderivative_on_spec(sphere_spec, reference_reports):
    s = sphere_spec
    rep = reference_reports[s.name]
    exact = reduced_integral_exact(rep.a, rep.b, s.c, s.l_const, s.slope, *s.bounds)
    ref = -rep.sigma - s.fiber_measure * s.base.area / (288 * math.pi**2) * float(exact)
    assert eta_reduced(s, rep.sigma, rep.a, rep.b) == pytest.approx(ref, rel=1e-10)


def test_dh_total_volume_and_first_moment(sphere_spec):
    s = sphere_spec
    assert dh_compare(s, lambda t: 1.0) < 1e-4
    lo, hi = s.bounds
    F = lambda t: s.l_const * t**2 / 2 + s.slope * t**3 / 3  # noqa: E731
    ref = s.fiber_measure * s.base.area * (F(hi) - F(lo))
    assert dh_pushforward(s, lambda t: t, 1e-12) == pytest.approx(ref, rel=1e-10)


def test_integrand_is_even_in_b():
    assert eta_integrand(0.3, 2.0, 1.5, -1.0) == eta_integrand(0.3, 2.0, -1.5, -1.0)


@pytest.fixture(scope="module")
def anti_self_dual():
    """Scalar-flat Kahler case: ``a = 0`` so ``W_+`` vanishes identically."""
    prof = QProfile.family_c(1.0, -1.0, 0.0, 1.0)
    t0 = find_endpoint_zero(prof, 0.0, 1.0 - 1e-9)
    return calibrate(CompactificationSpec("ii", prof, t0, c=1.0, bundle_degree=1, name="asd")).spec


def test_anti_self_dual_hits_upper_bound(anti_self_dual):
    s = anti_self_dual
    sc = scalar_constants(s, n_samples=10)
    assert abs(sc.a) < 1e-10 and abs(sc.b) > 1.0
    rep = eta_report(s, constants=sc)
    assert rep.weyl_plus_integral < 1e-20
    assert rep.eta_curvature == pytest.approx(rep.bound_hi, abs=1e-12)
    assert rep.route_relative < 1e-4
