"""Reference drafts used by ``verify`` and the test-suite.

Each entry is a family-c profile on the case-ii side, chosen so that the
scalar constants ``a`` and ``b`` are both nonzero (neither self-dual nor
anti-self-dual) and the base curvature runs through all three signs.
The closed entry fixes ``tau_1`` so that Gauss-Bonnet on a round sphere
base reproduces Chern number ``2p = 6``.
"""

from dataclasses import dataclass
from functools import lru_cache

from .ansatz import CompactificationSpec, calibrate
from .hirzebruch import ClosedSurfaceSpec
from .profiles import QProfile, find_endpoint_zero


@dataclass(frozen=True)
class ReferenceDraft:
    name: str
    c: float
    constants: tuple
    bundle_degree: int

    def profile(self):
        return QProfile.family_c(*self.constants, self.c)

    def draft(self):
        prof = self.profile()
        stop = 10.0 * abs(self.c) if self.c < 0 else self.c * (1.0 - 1e-9)
        tau0 = find_endpoint_zero(prof, 0.0, stop)
        return CompactificationSpec(
            "ii", prof, tau0, c=self.c, bundle_degree=self.bundle_degree, name=self.name
        )


REFERENCE_DRAFTS = (
    ReferenceDraft("flat-base", -1.0, (1.0, 1.0, 0.0), -1),
    ReferenceDraft("sphere-base", -2.0, (0.0, 1.0, -1.0), -2),
    ReferenceDraft("hyperbolic-base", -0.5, (2.0, 1.0, 1.0), -3),
    ReferenceDraft("positive-c", 1.0, (0.0, -1.0, -1.0), 1),
)

# Chern number 6 on a round sphere base for c = -1
REFERENCE_CLOSED = ClosedSurfaceSpec(-1.0, 1.8454660914359224, 3, name="closed-p3")


def reference_drafts():
    return [r.draft() for r in REFERENCE_DRAFTS]


@lru_cache(maxsize=None)
def reference_calibrations(n_samples=50, seed=0):
    return tuple(calibrate(d, n_samples=n_samples, seed=seed) for d in reference_drafts())


def reference_suite(n_samples=50, seed=0):
    """Calibrated reference specs."""
    return [r.spec for r in reference_calibrations(n_samples, seed)]
