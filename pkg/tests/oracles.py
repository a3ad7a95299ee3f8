"""Independent closed forms used as test oracles."""

from fractions import Fraction
import math


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def reduced_integral_exact(a, b, c, l, p, lo, hi):
    """``int_lo^hi (a^2 - b^2 (t-c)^-6) t^2 (l + p t) dt`` in exact rational arithmetic.

    The polynomial part integrates termwise; with ``u = t - c`` the rational
    part is ``sum_j k_j u^(j-6)`` for ``j <= 3``, so no logarithms appear.
    """
    a, b, c, l, p, lo, hi = (Fraction(v) for v in (a, b, c, l, p, lo, hi))

    def poly(t):
        return a * a * (l * t**3 / 3 + p * t**4 / 4)

    # t^2 (l + p t) as a polynomial in u = t - c
    k = _poly_mul(_poly_mul([c, Fraction(1)], [c, Fraction(1)]), [l + p * c, p])

    def rational(t):
        u = t - c
        return -b * b * sum(kj * u ** (j - 5) / (j - 5) for j, kj in enumerate(k))

    return poly(hi) - poly(lo) + rational(hi) - rational(lo)


def eta_reduced_exact(sigma, a, b, c, l, p, interval, measure):
    lo, hi = sorted(interval)
    val = reduced_integral_exact(a, b, c, l, p, lo, hi)
    return -sigma - measure / (288 * math.pi**2) * float(val)
