"""Special functions used by the conjugate-model bounds.

Self-contained implementations of the real Lambert W (both real branches)
and the unnormalized incomplete gamma functions, so the closed-form beta
profiles do not silently depend on library conventions.  The test suite
cross-checks them against scipy.
"""
from __future__ import annotations

import math

from .errors import DomainError

_E_INV = math.exp(-1.0)


def lambert_w(x: float, branch: str = "principal", tol: float = 1e-14) -> float:
    """Real Lambert W: solve w * exp(w) = x.

    ``branch='principal'`` (W0) is defined on [-1/e, inf); ``'minus_one'``
    (W_{-1}) on [-1/e, 0).  Halley iteration from a branch-appropriate seed.
    """
    if branch not in ("principal", "minus_one"):
        raise DomainError(f"unknown branch {branch!r}")
    if x < -_E_INV - 1e-15:
        raise DomainError(f"lambert_w undefined for x = {x} < -1/e")
    x = max(x, -_E_INV)
    if branch == "minus_one" and x >= 0.0:
        raise DomainError("minus_one branch needs x in [-1/e, 0)")
    if x == 0.0:
        return 0.0
    if abs(x + _E_INV) < 1e-300:
        return -1.0

    if branch == "principal":
        if x > math.e:
            lx = math.log(x)
            w = lx - math.log(lx)
        elif x > 0.0:
            w = x / (1.0 + x)
        else:
            # series about the branch point
            p = math.sqrt(2.0 * (math.e * x + 1.0))
            w = -1.0 + p - p * p / 3.0
    else:
        if x > -0.1:
            lx = math.log(-x)
            w = lx - math.log(-lx)
        else:
            p = math.sqrt(2.0 * (math.e * x + 1.0))
            w = -1.0 - p - p * p / 3.0

    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        w1 = w + 1.0
        denom = ew * w1 - (w + 2.0) * f / (2.0 * w1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if abs(dw) <= tol * (1.0 + abs(w)):
            break
    return w


def gammainc_lower(s: float, x: float, tol: float = 1e-15) -> float:
    """Unnormalized lower incomplete gamma: integral of t^{s-1} e^{-t}, 0..x."""
    if s <= 0.0:
        raise DomainError("gammainc_lower needs s > 0")
    if x < 0.0:
        raise DomainError("gammainc_lower needs x >= 0")
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return _lower_series(s, x, tol)
    return math.gamma(s) - _upper_cf(s, x, tol)


def gammainc_upper(s: float, x: float, tol: float = 1e-15) -> float:
    """Unnormalized upper incomplete gamma: integral of t^{s-1} e^{-t}, x..inf."""
    if s <= 0.0:
        raise DomainError("gammainc_upper needs s > 0")
    if x < 0.0:
        raise DomainError("gammainc_upper needs x >= 0")
    if x == 0.0:
        return math.gamma(s)
    if x < s + 1.0:
        return math.gamma(s) - _lower_series(s, x, tol)
    return _upper_cf(s, x, tol)


def _lower_series(s: float, x: float, tol: float) -> float:
    # gamma(s, x) = x^s e^{-x} sum_{k>=0} x^k / (s (s+1) ... (s+k))
    term = 1.0 / s
    total = term
    k = 0
    while abs(term) > tol * abs(total) and k < 10_000:
        k += 1
        term *= x / (s + k)
        total += term
    return total * math.exp(s * math.log(x) - x)


def _upper_cf(s: float, x: float, tol: float) -> float:
    # Gamma(s, x) = x^s e^{-x} / (x + 1 - s - 1(1-s)/(x+3-s- ...)), Lentz
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / (b if b != 0.0 else tiny)
    h = d
    for i in range(1, 10_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        d = 1.0 / (d if d != 0.0 else tiny)
        c = b + an / c
        if c == 0.0:
            c = tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            break
    return h * math.exp(s * math.log(x) - x)
