"""Model metrics with known curvature, for calibration and sanity checks."""

import numpy as np

from . import jets
from .tensor_lab import MetricField


def flat(dim=4, orientation=1):
    return MetricField.constant(np.eye(dim), orientation, name="flat")


def constant_curvature(kappa, dim=4, orientation=1):
    """``4 |dx|^2 / (1 + kappa |x|^2)^2``: sectional curvature ``kappa``."""

    def comps(X):
        D = 1.0 + kappa * sum(x * x for x in X)
        H = 4.0 / (D * D)
        return [[H if i == j else 0.0 for j in range(dim)] for i in range(dim)]

    return MetricField.from_jets(comps, dim, orientation, name=f"const({kappa})")


def sphere_product(k1=1.0, k2=1.0, orientation=1):
    """Product of two constant-curvature surfaces in stereographic charts."""

    def comps(X):
        x, y, u, v = X
        H1 = 4.0 / (1.0 + k1 * (x * x + y * y)) ** 2
        H2 = 4.0 / (1.0 + k2 * (u * u + v * v)) ** 2
        return [[H1, 0.0, 0.0, 0.0], [0.0, H1, 0.0, 0.0], [0.0, 0.0, H2, 0.0], [0.0, 0.0, 0.0, H2]]

    return MetricField.from_jets(comps, 4, orientation, name="product")


def random_perturbation(seed=0, amplitude=0.15, modes=3, orientation=1):
    """Identity plus a random trigonometric symmetric perturbation.

    Positive definite for ``amplitude * modes < 1 / 4``-ish; callers should
    stay near the origin.
    """
    rng = np.random.default_rng(seed)
    freq = rng.normal(size=(modes, 4))
    phase = rng.uniform(0, 2 * np.pi, size=modes)
    coef = rng.normal(size=(modes, 4, 4))
    coef = 0.5 * (coef + coef.transpose(0, 2, 1)) * amplitude / modes

    def comps(X):
        waves = [jets.sin(sum(freq[m, k] * X[k] for k in range(4)) + phase[m]) for m in range(modes)]
        out = []
        for i in range(4):
            row = []
            for j in range(4):
                e = 1.0 if i == j else 0.0
                for m in range(modes):
                    e = e + coef[m, i, j] * waves[m]
                row.append(e)
            out.append(row)
        return out

    return MetricField.from_jets(comps, 4, orientation, name=f"perturbed({seed})")
