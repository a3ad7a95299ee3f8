"""Chart-based numerical tensor calculus.

Metric and scalar fields are evaluated together with their exact first and
second partial derivatives (see :mod:`kahler_eta.jets`).  Curvature is
computed pointwise in the chart and then expressed in a Cholesky orthonormal
frame, where the Weyl tensor is split with the Hodge star.

Conventions
-----------
* ``R[a, b, c, d]`` is fully covariant with ``R[a, b, a, b] > 0`` on a round
  sphere; Ricci is ``Ric[b, d] = g^{ac} R[a, b, c, d]``.
* The Laplacian is the metric trace of the covariant Hessian (so it is
  nonnegative at a minimum of a convex function).
* Weyl norms are squared norms of ``W_+`` and ``W_-`` as endomorphisms of
  the bundle of 2-forms.  With this choice a Kahler metric has
  ``|W_+|^2 = s^2 / 24``, and the Pontryagin density below equals
  ``2 (|W_+|^2 - |W_-|^2)``.
* The Pontryagin density is the coefficient of ``sum_{ab} R_ab ^ R_ab``
  (the lowered-index curvature 2-forms in an orthonormal frame).
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import jets
from .errors import (
    DegenerateLevelSetError,
    DegenerateMetricError,
    DomainError,
    UnsupportedDimensionError,
)

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


@dataclass(frozen=True)
class ChartPoint:
    """A point ``(x, y, tau, theta)`` of a 4-chart, or ``(x, y)`` of a 2-chart."""

    coords: tuple

    def __init__(self, *coords):
        if len(coords) == 1 and np.ndim(coords[0]) == 1:
            coords = tuple(coords[0])
        object.__setattr__(self, "coords", tuple(float(c) for c in coords))

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)

    @property
    def tau(self):
        return self.coords[2]

    def replace(self, **kw):
        names = ("x", "y", "tau", "theta")
        c = list(self.coords)
        for k, v in kw.items():
            c[names.index(k)] = v
        return ChartPoint(*c)


def _as_point(pt):
    return pt if isinstance(pt, ChartPoint) else ChartPoint(pt)


def _jet_array(entries, n):
    """Pack a nested list of jets/numbers into value, gradient, Hessian arrays."""
    shape = np.shape(np.empty(np.shape(entries), dtype=object))
    val = np.empty(shape)
    grad = np.empty(shape + (n,))
    hess = np.empty(shape + (n, n))
    flat = np.empty(shape, dtype=object)
    flat[...] = entries if shape else entries
    for idx in np.ndindex(shape):
        e = flat[idx]
        if isinstance(e, jets.Jet):
            val[idx], grad[idx], hess[idx] = e.val, e.grad, e.hess
        else:
            val[idx], grad[idx], hess[idx] = float(e), 0.0, 0.0
    return val, grad, hess


class MetricField:
    """An immutable metric on a coordinate chart.

    ``evaluate(pt)`` returns ``(g, dg, ddg)`` with ``dg[i, j, k] = d_k g_ij``
    and ``ddg[i, j, k, l] = d_k d_l g_ij``.
    """

    def __init__(self, dim, evaluate, orientation=1, name="metric"):
        if dim not in (2, 4):
            raise UnsupportedDimensionError(f"dimension {dim} not supported")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        self.dim = dim
        self._evaluate = evaluate
        self.orientation = orientation
        self.name = name

    @classmethod
    def from_jets(cls, fn, dim, orientation=1, name="metric"):
        """Build from ``fn(coordinate_jets) -> nested list of components``."""

        def evaluate(pt):
            x = jets.Jet.variables(_as_point(pt).coords)
            return _jet_array(fn(x), dim)

        return cls(dim, evaluate, orientation, name)

    @classmethod
    def constant(cls, matrix, orientation=1, name="constant"):
        m = np.array(matrix, dtype=float)
        n = m.shape[0]
        dg = np.zeros((n, n, n))
        ddg = np.zeros((n, n, n, n))
        return cls(n, lambda pt: (m.copy(), dg, ddg), orientation, name)

    def evaluate(self, pt):
        pt = _as_point(pt)
        if len(pt) != self.dim:
            raise DomainError(f"{self.name}: expected {self.dim} coordinates")
        return self._evaluate(pt)

    def components(self, pt):
        return self.evaluate(pt)[0]

    def derivatives(self, pt):
        return self.evaluate(pt)[1:]

    def with_orientation(self, orientation):
        return MetricField(self.dim, self._evaluate, orientation, self.name)

    def flipped(self):
        return self.with_orientation(-self.orientation)


class ScalarField:
    """A smooth function on a chart; ``evaluate(pt) -> (f, df, ddf)``."""

    def __init__(self, dim, evaluate, name="f"):
        self.dim = dim
        self._evaluate = evaluate
        self.name = name

    @classmethod
    def from_jets(cls, fn, dim=4, name="f"):
        def evaluate(pt):
            x = jets.Jet.variables(_as_point(pt).coords)
            val, grad, hess = _jet_array(fn(x), dim)
            return float(val), grad, hess

        return cls(dim, evaluate, name)

    @classmethod
    def coordinate(cls, index, dim=4):
        return cls.from_jets(lambda x: x[index], dim, name=f"x{index}")

    def evaluate(self, pt):
        return self._evaluate(_as_point(pt))

    def __call__(self, pt):
        return self.evaluate(pt)[0]


@dataclass
class CurvatureBundle:
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    weyl_plus_norm_sq: float = float("nan")
    weyl_minus_norm_sq: float = float("nan")
    pontryagin_density: float = float("nan")
    frame: np.ndarray = field(default=None, repr=False)
    metric: np.ndarray = field(default=None, repr=False)

    def tracefree_ricci(self):
        n = self.metric.shape[0]
        return self.ricci - self.scalar / n * self.metric

    def frame_tensor(self, t):
        """Components of a covariant tensor in the orthonormal frame."""
        E = self.frame
        if t.ndim == 2:
            return E.T @ t @ E
        return np.einsum("abcd,ai,bj,ck,dl->ijkl", t, E, E, E, E, optimize=True)


def _inverse_and_frame(g):
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DegenerateMetricError("metric is singular or indefinite") from None
    if not np.all(np.isfinite(L)) or np.min(np.diag(L)) <= 1e-150:
        raise DegenerateMetricError("metric is singular")
    Linv = np.linalg.inv(L)
    return Linv.T @ Linv, Linv.T


def christoffel(g, dg, ginv=None):
    """Christoffel symbols ``Gamma[a, b, c]`` of the second kind."""
    if ginv is None:
        ginv = np.linalg.inv(g)
    lower = 0.5 * (dg + dg.transpose(0, 2, 1) - dg.transpose(2, 0, 1))
    return np.einsum("ad,dbc->abc", ginv, lower)


def riemann_tensor(g, dg, ddg, ginv=None):
    if ginv is None:
        ginv = np.linalg.inv(g)
    gam = christoffel(g, dg, ginv)
    # ddg[i, j, k, l] = d_k d_l g_ij
    second = 0.5 * (
        np.einsum("adbc->abcd", ddg)
        + np.einsum("bcad->abcd", ddg)
        - np.einsum("acbd->abcd", ddg)
        - np.einsum("bdac->abcd", ddg)
    )
    quad = np.einsum("ef,ebc,fad->abcd", g, gam, gam) - np.einsum("ef,ebd,fac->abcd", g, gam, gam)
    return second + quad


_PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))


def _two_form_bases():
    """Orthonormal bases of the self-dual and anti-self-dual 2-forms."""
    plus = np.zeros((3, 4, 4))
    minus = np.zeros((3, 4, 4))
    for k in range(3):
        (a, b), (c, d) = _PAIRS[k], _PAIRS[k + 3]
        for basis, sgn in ((plus, 1.0), (minus, -1.0)):
            basis[k, a, b], basis[k, b, a] = 1.0, -1.0
            basis[k, c, d], basis[k, d, c] = sgn, -sgn
    return plus / math.sqrt(2.0), minus / math.sqrt(2.0)


_LAMBDA_PLUS, _LAMBDA_MINUS = _two_form_bases()


def _levi_civita4():
    eps = np.zeros((4, 4, 4, 4))
    for perm in itertools.permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


_EPS4 = _levi_civita4()


def weyl_from_frame(Rf, ricf, s):
    """Weyl tensor in an orthonormal frame (dimension 4)."""
    d = np.eye(4)
    kn = (
        np.einsum("ac,bd->abcd", ricf, d)
        + np.einsum("bd,ac->abcd", ricf, d)
        - np.einsum("ad,bc->abcd", ricf, d)
        - np.einsum("bc,ad->abcd", ricf, d)
    )
    gg = np.einsum("ac,bd->abcd", d, d) - np.einsum("ad,bc->abcd", d, d)
    return Rf - 0.5 * kn + s / 6.0 * gg


def _weyl_norms(Wf, orientation):
    wp = 0.25 * np.einsum("iab,abcd,jcd->ij", _LAMBDA_PLUS, Wf, _LAMBDA_PLUS)
    wm = 0.25 * np.einsum("iab,abcd,jcd->ij", _LAMBDA_MINUS, Wf, _LAMBDA_MINUS)
    np_, nm = float(np.sum(wp * wp)), float(np.sum(wm * wm))
    return (np_, nm) if orientation == 1 else (nm, np_)


def _pontryagin_frame(Rf):
    return 0.25 * float(np.einsum("abcd,abef,cdef->", Rf, Rf, _EPS4, optimize=True))


def curvature_bundle(g, pt):
    """All curvature data of ``g`` at ``pt``.

    For 2-dimensional fields only the Riemann, Ricci and scalar curvature
    are filled in.
    """
    pt = _as_point(pt)
    G, dG, ddG = g.evaluate(pt)
    ginv, E = _inverse_and_frame(G)
    R = riemann_tensor(G, dG, ddG, ginv)
    ric = np.einsum("ac,abcd->bd", ginv, R)
    s = float(np.einsum("bd,bd->", ginv, ric))
    cb = CurvatureBundle(R, ric, s, frame=E, metric=G)
    if g.dim == 4:
        Rf = cb.frame_tensor(R)
        Wf = weyl_from_frame(Rf, cb.frame_tensor(ric), s)
        cb.weyl_plus_norm_sq, cb.weyl_minus_norm_sq = _weyl_norms(Wf, g.orientation)
        # chart coefficient: frame density times sqrt(det g); orientation-free
        cb.pontryagin_density = _pontryagin_frame(Rf) * math.sqrt(np.linalg.det(G))
    return cb


def weyl_split(g, pt):
    """``(|W_+|^2, |W_-|^2)`` at ``pt`` relative to ``g.orientation``."""
    if g.dim != 4:
        raise UnsupportedDimensionError("Weyl split needs dimension 4")
    cb = curvature_bundle(g, pt)
    return cb.weyl_plus_norm_sq, cb.weyl_minus_norm_sq


def pontryagin_density(g, pt):
    """Density of the Pontryagin 4-form against ``vol_g`` (oriented by ``g``)."""
    if g.dim != 4:
        raise UnsupportedDimensionError("Pontryagin density needs dimension 4")
    pt = _as_point(pt)
    G, dG, ddG = g.evaluate(pt)
    ginv, E = _inverse_and_frame(G)
    R = riemann_tensor(G, dG, ddG, ginv)
    Rf = np.einsum("abcd,ai,bj,ck,dl->ijkl", R, E, E, E, E, optimize=True)
    return g.orientation * _pontryagin_frame(Rf)


def derived_scalars(g, f, pt):
    """Covariant Hessian, Laplacian and squared gradient norm of ``f``."""
    pt = _as_point(pt)
    G, dG, _ = g.evaluate(pt)
    ginv, _ = _inverse_and_frame(G)
    _, df, ddf = f.evaluate(pt)
    gam = christoffel(G, dG, ginv)
    hess = ddf - np.einsum("cab,c->ab", gam, df)
    hess = 0.5 * (hess + hess.T)
    return hess, float(np.sum(ginv * hess)), float(df @ ginv @ df)


def level_set_shape(g, f, pt):
    """Second fundamental form of the level set of ``f`` through ``pt``.

    Returned in an orthonormal frame tangent to the level set, together with
    the Frobenius norm of its trace-free part (zero iff umbilic at ``pt``).
    """
    pt = _as_point(pt)
    hess, _, grad2 = derived_scalars(g, f, pt)
    _, df, _ = f.evaluate(pt)
    G = g.components(pt)
    if grad2 <= 1e-28 * max(1.0, float(np.max(np.abs(G)))):
        raise DegenerateLevelSetError("gradient vanishes; level set is not a hypersurface")
    _, E = _inverse_and_frame(G)
    # unit normal in frame components is E^T df / |df|
    nf = E.T @ df
    nf = nf / np.linalg.norm(nf)
    proj = np.eye(g.dim) - np.outer(nf, nf)
    w, V = np.linalg.eigh(proj)
    T = E @ V[:, w > 0.5]
    sff = T.T @ hess @ T / math.sqrt(grad2)
    sff = 0.5 * (sff + sff.T)
    k = sff.shape[0]
    tf = sff - np.trace(sff) / k * np.eye(k)
    return sff, float(np.linalg.norm(tf))


def conformal_rescale(g, factor):
    """The metric ``factor * g``; derivatives follow from the product rule."""

    def evaluate(pt):
        G, dG, ddG = g.evaluate(pt)
        u, du, ddu = factor.evaluate(pt)
        if not u > 0.0:
            raise DomainError(f"conformal factor {u!r} is not positive at {pt.coords}")
        dGu = u * dG + np.einsum("ij,k->ijk", G, du)
        ddGu = (
            u * ddG
            + np.einsum("ijk,l->ijkl", dG, du)
            + np.einsum("ijl,k->ijkl", dG, du)
            + np.einsum("ij,kl->ijkl", G, ddu)
        )
        return u * G, dGu, ddGu

    return MetricField(g.dim, evaluate, g.orientation, name=f"{factor.name}*{g.name}")


def finite_difference_residual(g, pt, scale=1.0):
    """Relative deviation of the analytic derivatives from central differences.

    Returns ``(first, second)``: the first derivatives are compared with
    differences of the components, the second with differences of the
    analytic first derivatives.
    """
    pt = _as_point(pt)
    G, dG, ddG = g.evaluate(pt)
    h = FD_STEP * scale
    n = g.dim
    fd1 = np.empty_like(dG)
    fd2 = np.empty_like(ddG)
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        Gp, dGp, _ = g.evaluate(ChartPoint(np.asarray(pt) + e))
        Gm, dGm, _ = g.evaluate(ChartPoint(np.asarray(pt) - e))
        fd1[:, :, k] = (Gp - Gm) / (2 * h)
        fd2[:, :, :, k] = (dGp - dGm) / (2 * h)
    r1 = np.max(np.abs(fd1 - dG)) / max(np.max(np.abs(dG)), np.max(np.abs(G)), 1e-300)
    r2 = np.max(np.abs(fd2 - ddG)) / max(np.max(np.abs(ddG)), np.max(np.abs(dG)), 1e-300)
    return float(r1), float(r2)


def riemann_symmetry_residual(R):
    """Max relative violation of pair antisymmetry, pair symmetry and Bianchi."""
    scale = max(float(np.max(np.abs(R))), 1e-300)
    anti = np.max(np.abs(R + R.transpose(1, 0, 2, 3)))
    pair = np.max(np.abs(R - R.transpose(2, 3, 0, 1)))
    bianchi = np.max(np.abs(R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)))
    return float(max(anti, pair, bianchi) / scale)


class TwoFormField:
    """A 2-form ``omega = 1/2 omega_ij dx^i ^ dx^j`` with first derivatives.

    ``evaluate(pt)`` returns ``(omega, domega)`` where ``domega[i, j, k]``
    is ``d_k omega_ij``.
    """

    def __init__(self, dim, evaluate, name="omega"):
        self.dim = dim
        self._evaluate = evaluate
        self.name = name

    @classmethod
    def from_jets(cls, fn, dim=4, name="omega"):
        def evaluate(pt):
            x = jets.Jet.variables(_as_point(pt).coords)
            val, grad, _ = _jet_array(fn(x), dim)
            return val, grad

        return cls(dim, evaluate, name)

    def evaluate(self, pt):
        return self._evaluate(_as_point(pt))

    def components(self, pt):
        return self.evaluate(pt)[0]


def exterior_derivative(form, pt):
    """Components ``(d omega)_ijk`` of the 3-form ``d omega`` at ``pt``."""
    _, d = form.evaluate(pt)
    # d[i, j, k] = d_k omega_ij
    return np.einsum("jki->ijk", d) + np.einsum("kij->ijk", d) + d


def pfaffian4(w):
    return float(w[0, 1] * w[2, 3] - w[0, 2] * w[1, 3] + w[0, 3] * w[1, 2])


def hermitian_residual(g, form, pt):
    """``max |omega g^-1 omega + g| / max |g|``: zero iff ``g^-1 omega`` squares to -1."""
    G = g.components(pt)
    w = form.components(pt)
    return float(np.max(np.abs(w @ np.linalg.solve(G, w) + G)) / np.max(np.abs(G)))


def volume_ratio(g, form, pt):
    """``(omega ^ omega / 2) / vol_g`` with ``vol_g`` oriented by ``g.orientation``."""
    G = g.components(pt)
    return pfaffian4(form.components(pt)) / (g.orientation * math.sqrt(np.linalg.det(G)))
