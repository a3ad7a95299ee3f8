"""The three rational families of ``Q(tau)`` and the tau <-> r diffeomorphism.

Family a (reducible case)::

    Q = -K tau^2 + (alpha tau^3 - beta / 2) / 3

Family b (case ii with c = 0)::

    Q = -K tau / 2 + alpha tau^3 - beta / 3

Family c (case ii with c != 0), with ``x = tau / c``::

    Q = (x - 1) (A E(x) + B F(x) + C),   F(x) = (x - 2) x^3 / (x - 1)^2,
                                          E(x) = x^2 - 1
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize

from . import jets
from .errors import DomainError, InvalidProfileError, PoleError

N_NODES = 1024
ROOT_XTOL = 1e-13


def aux_F(x):
    if x == 1.0:
        raise PoleError("F has a pole at x = 1")
    return (x - 2.0) * x**3 / (x - 1.0) ** 2


def aux_E(x):
    return x * x - 1.0


def _horner(coef, x):
    acc = 0.0
    for k in coef[::-1]:
        acc = acc * x + k
    return acc


@dataclass(frozen=True)
class QProfile:
    family: str
    constants: tuple
    c: float = 0.0
    _poly: Polynomial = field(init=False, repr=False, compare=False)
    _residue: float = field(init=False, repr=False, compare=False)
    _coefs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in ("a", "b", "c"):
            raise InvalidProfileError(f"unknown family {self.family!r}")
        if len(self.constants) != 3:
            raise InvalidProfileError("each family takes exactly three constants")
        object.__setattr__(self, "constants", tuple(float(k) for k in self.constants))
        if self.family == "c":
            if not self.c:
                raise InvalidProfileError("family c requires c != 0")
            A, B, C = self.constants
            # Q(x) = P(x) / (x - 1) = S(x) + P(1) / (x - 1)
            x = Polynomial([0.0, 1.0])
            P = (x - 1) ** 2 * (A * (x * x - 1) + C) + B * (x - 2) * x**3
            S, rem = divmod(P, Polynomial([-1.0, 1.0]))
            object.__setattr__(self, "_poly", S)
            object.__setattr__(self, "_residue", float(rem.coef[0]))
        else:
            if self.family == "b" and self.c:
                raise InvalidProfileError("family b corresponds to c = 0")
            K, alpha, beta = self.constants
            if self.family == "a":
                coef = [-beta / 6.0, 0.0, -K, alpha / 3.0]
            else:
                coef = [-beta / 3.0, -K / 2.0, 0.0, alpha]
            object.__setattr__(self, "_poly", Polynomial(coef))
            object.__setattr__(self, "_residue", 0.0)
        S = self._poly
        object.__setattr__(self, "_coefs", (S.coef, S.deriv(1).coef, S.deriv(2).coef))

    @classmethod
    def family_a(cls, K, alpha, beta):
        return cls("a", (K, alpha, beta))

    @classmethod
    def family_b(cls, K, alpha, beta):
        return cls("b", (K, alpha, beta))

    @classmethod
    def family_c(cls, A, B, C, c):
        return cls("c", (A, B, C), c)

    def scaled(self, factor):
        """The same profile multiplied by a constant."""
        return QProfile(self.family, tuple(factor * k for k in self.constants), self.c)

    def derivatives(self, tau):
        """``(Q, Q', Q'')`` at ``tau``."""
        c0, c1, c2 = self._coefs
        if self.family != "c":
            return _horner(c0, tau), _horner(c1, tau), _horner(c2, tau)
        c = self.c
        x = tau / c
        d = x - 1.0
        if abs(d) < 1e-14:
            raise PoleError(f"tau = {tau} is the pole tau = c of F")
        r = self._residue
        q0 = _horner(c0, x) + r / d
        q1 = (_horner(c1, x) - r / d**2) / c
        q2 = (_horner(c2, x) + 2.0 * r / d**3) / c**2
        return q0, q1, q2

    def __call__(self, tau):
        return self.derivatives(tau)[0]

    def jet(self, tau):
        """Compose with a jet (or plain float) in ``tau``."""
        if isinstance(tau, jets.Jet):
            return tau.chain(*self.derivatives(tau.val))
        return self(tau)


def q_eval(p, tau, order=0):
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    return p.derivatives(tau)[order]


@dataclass
class IntervalReport:
    interval: tuple
    positive_inside: bool
    q_at_zero: float
    boundary_regular: bool
    simple_zero_at_endpoint: bool
    q_prime_at_endpoint: float
    scale: float
    min_inside: float
    messages: list = field(default_factory=list)

    @property
    def ok(self):
        """All three conditions needed to close up over the zero section."""
        return self.positive_inside and self.boundary_regular and self.simple_zero_at_endpoint


def chebyshev_nodes(lo, hi, n=N_NODES):
    k = np.arange(n)
    x = np.cos((2 * k + 1) * np.pi / (2 * n))[::-1]
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x


def _safe_values(p, ts, order=0):
    out = np.empty_like(ts)
    for i, t in enumerate(ts):
        try:
            out[i] = p.derivatives(t)[order]
        except PoleError:
            out[i] = np.nan
    return out


def validate_interval(p, interval):
    """Check ``Q`` on ``interval = (boundary_end, zero_section_end)``.

    The first endpoint is where the boundary ``tau = 0`` is expected, the
    second is the candidate zero ``tau_0``.  Failures are reported, never
    raised.
    """
    start, end = (float(v) for v in interval)
    if start == end:
        raise ValueError("interval is degenerate")
    lo, hi = min(start, end), max(start, end)
    msgs = []
    nodes = chebyshev_nodes(lo, hi)
    q = _safe_values(p, nodes)
    scale = float(np.nanmax(np.abs(q))) if np.any(np.isfinite(q)) else 0.0
    positive = bool(np.all(np.isfinite(q)) and np.all(q > 0))
    if p.family == "c" and lo <= p.c <= hi:
        positive = False
        msgs.append(f"pole tau = c = {p.c} lies in the interval")
    min_inside = float(np.nanmin(q)) if np.any(np.isfinite(q)) else float("nan")
    if positive:
        # a dip below zero between nodes shows up as a sign change of Q'
        dq = _safe_values(p, nodes, 1)
        for i in np.nonzero(np.sign(dq[:-1]) * np.sign(dq[1:]) < 0)[0]:
            t = optimize.brentq(lambda s: p.derivatives(s)[1], nodes[i], nodes[i + 1], xtol=ROOT_XTOL)
            v = p(t)
            min_inside = min(min_inside, v)
            if v <= 0:
                positive = False
                msgs.append(f"Q dips to {v:.3e} at tau = {t:.15g}")
    else:
        msgs.append("Q is not positive on the open interval")

    q_zero = float("nan")
    regular = False
    if lo <= 0.0 <= hi:
        try:
            q_zero = float(p(0.0))
            regular = abs(q_zero) > 1e-12 * max(scale, 1e-300)
        except PoleError:
            pass
        if not regular:
            msgs.append("Q(0) = 0: tau = 0 is not a regular boundary level")
    else:
        msgs.append("interval does not contain tau = 0")

    try:
        q_end, dq_end, _ = p.derivatives(end)
    except PoleError:
        q_end, dq_end = float("nan"), float("nan")
    simple = bool(abs(q_end) < 1e-12 * max(scale, 1e-300) and abs(dq_end) > 1e-8 * max(scale, 1e-300))
    if not simple:
        msgs.append(f"no simple zero at tau0 = {end}: Q = {q_end:.3e}, Q' = {dq_end:.3e}")
    return IntervalReport(
        interval=(start, end),
        positive_inside=positive,
        q_at_zero=q_zero,
        boundary_regular=regular,
        simple_zero_at_endpoint=simple,
        q_prime_at_endpoint=float(dq_end),
        scale=scale,
        min_inside=min_inside,
        messages=msgs,
    )


def find_endpoint_zero(p, start, stop):
    """First zero of ``Q`` met when walking from ``start`` towards ``stop``.

    Uses the Chebyshev sampling and bisection refinement of
    :func:`validate_interval`; returns ``None`` when ``Q`` keeps its sign.
    """
    ts = chebyshev_nodes(min(start, stop), max(start, stop))
    if start > stop:
        ts = ts[::-1]
    ts = np.concatenate([[start], ts, [stop]])
    q = _safe_values(p, ts)
    for i in range(len(ts) - 1):
        if not (np.isfinite(q[i]) and np.isfinite(q[i + 1])):
            return None
        if q[i] == 0.0:
            return float(ts[i])
        if q[i] * q[i + 1] < 0:
            a, b = sorted((ts[i], ts[i + 1]))
            return float(optimize.brentq(p, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return None


class RadiusMap:
    """Monotone diffeomorphism ``tau -> r`` solving ``d(log r) = (abar / Q) d tau``."""

    GRID = 65

    def __init__(self, profile, abar, interval, tau_ref, r_ref, zero_guard=1e-8, rtol=1e-11):
        lo, hi = sorted(float(v) for v in interval)
        if not lo < tau_ref < hi:
            raise DomainError("tau_ref must be interior")
        if r_ref <= 0:
            raise DomainError("r_ref must be positive")
        if abar == 0:
            raise InvalidProfileError("abar must be nonzero")
        self.profile = profile
        self.abar = float(abar)
        self.interval = (lo, hi)
        self.tau_ref = float(tau_ref)
        self.r_ref = float(r_ref)
        self.rtol = rtol
        scale = validate_interval(profile, (lo, hi)).scale
        self._zero_end = []
        for e in (lo, hi):
            try:
                if abs(profile(e)) < 1e-10 * scale:
                    self._zero_end.append(e)
            except PoleError:
                self._zero_end.append(e)
        self.guard = zero_guard
        inner = chebyshev_nodes(lo, hi, self.GRID)
        if min(profile(t) for t in inner) <= 0:
            raise InvalidProfileError("Q must be positive inside the interval")
        self._grid = np.sort(np.append(inner, self.tau_ref))
        logs = np.empty_like(self._grid)
        i0 = int(np.searchsorted(self._grid, self.tau_ref))
        logs[i0] = math.log(self.r_ref)
        for i in range(i0 + 1, len(self._grid)):
            logs[i] = logs[i - 1] + self._integral(self._grid[i - 1], self._grid[i])
        for i in range(i0 - 1, -1, -1):
            logs[i] = logs[i + 1] - self._integral(self._grid[i], self._grid[i + 1])
        self._logs = logs

    @property
    def increasing(self):
        """True when ``abar / Q > 0``, i.e. ``r`` grows with ``tau``."""
        return self.abar > 0

    def _integral(self, a, b):
        val, _ = integrate.quad(lambda t: self.abar / self.profile(t), a, b, epsabs=1e-14, epsrel=self.rtol, limit=200)
        return val

    def _check(self, tau):
        lo, hi = self.interval
        if not lo < tau < hi:
            raise DomainError(f"tau = {tau} outside the open interval ({lo}, {hi})")
        for e in self._zero_end:
            if abs(tau - e) < self.guard:
                raise DomainError(f"tau = {tau} within {self.guard} of the zero section")

    def log_r(self, tau):
        self._check(tau)
        i = int(np.argmin(np.abs(self._grid - tau)))
        return float(self._logs[i] + self._integral(self._grid[i], tau))

    def r_of_tau(self, tau):
        return math.exp(self.log_r(tau))

    def dlogr_dtau(self, tau):
        self._check(tau)
        return self.abar / self.profile(tau)

    def tau_of_r(self, r):
        if r <= 0:
            raise DomainError("r must be positive")
        target = math.log(r)
        grid, logs = self._grid, self._logs
        if not self.increasing:
            grid, logs = grid[::-1], logs[::-1]
        k = int(np.searchsorted(logs, target))
        if 0 < k < len(grid):
            a, b = sorted((grid[k - 1], grid[k]))
        else:
            # beyond the outermost nodes: bracket against the guarded ends
            lo, hi = self.interval
            a = lo + (self.guard * 1.01 if lo in self._zero_end else 0.0)
            b = hi - (self.guard * 1.01 if hi in self._zero_end else 0.0)
            a, b = np.nextafter(a, hi), np.nextafter(b, lo)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                fa, fb = self.log_r(a) - target, self.log_r(b) - target
            if fa * fb > 0:
                raise DomainError(f"r = {r} is outside the image of the interval")
        return float(optimize.brentq(lambda t: self.log_r(t) - target, a, b, xtol=1e-12, rtol=1e-15))

    def __call__(self, tau):
        return self.r_of_tau(tau)


def solve_radius(p, abar, interval, tau_ref, r_ref):
    """Return ``(r_of_tau, tau_of_r)`` for the separable ODE."""
    m = RadiusMap(p, abar, interval, tau_ref, r_ref)
    return m.r_of_tau, m.tau_of_r
