import math

import pytest

from kahler_eta.verification import REGISTRY, registry_names, run_verification


@pytest.fixture(scope="module")
def table(sphere_spec):
    return run_verification([sphere_spec], n_samples=10)


def test_registry_names_unique_and_cover_modules():
    names = registry_names()
    assert len(names) == len(set(names))
    modules = {inv.module for inv in REGISTRY}
    assert modules == {"tensor-lab", "q-profiles", "ansatz-metrics", "invariant-integrals", "hirzebruch-cases", "cli-reporter"}
    assert all(inv.description for inv in REGISTRY)


def test_gating_rows_pass(table):
    assert table.ok
    bad = [r for r in table.failures() if r.gating]
    assert not bad


def test_only_interior_umbilicity_fails(table):
    failing = {r.invariant for r in table.failures()}
    assert failing == {"umbilic_all_levels"}
    row = next(r for r in table.rows if r.invariant == "umbilic_all_levels")
    assert not row.gating and row.residual > 1e-3


def test_threshold_override_can_fail_a_row(sphere_spec):
    t = run_verification([sphere_spec], n_samples=5, thresholds={"gradient_norm_is_Q": 0.0})
    row = next(r for r in t.rows if r.invariant == "gradient_norm_is_Q")
    assert row.threshold == 0.0
    assert row.passed == (row.residual <= 0.0)


def test_rows_serialize(table):
    d = table.rows[0].as_dict()
    assert set(d) == {"target", "invariant", "module", "residual", "threshold", "passed", "gating", "error"}
    assert all(math.isfinite(r.residual) for r in table.rows)
