"""Decreasing beta-function families used in weak Poincare inequalities.

A beta function is a nonincreasing map (0, inf) -> [0, inf) vanishing at
infinity.  Families here are closed under summation (independent products),
the adjoint shift s -> s-1, and Monte Carlo mixing over a parameter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidSpecError

#: canonical ceiling: any centered f satisfies ||f||^2 <= ||f||_osc^2 / 4
DEFAULT_CAP = 0.25


def _as_array(s) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(arr <= 0.0):
        raise DomainError("beta functions are defined for s > 0 only")
    return arr


@dataclass(frozen=True)
class BetaSpec:
    """Base class; concrete families implement ``_eval`` on positive arrays."""

    def _eval(self, s: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def _cap_value(self) -> Optional[float]:
        return getattr(self, "cap", None)

    def __call__(self, s):
        arr = _as_array(s)
        out = self._eval(arr)
        cap = self._cap_value()
        if cap is not None:
            out = np.minimum(out, cap)
        if np.ndim(s) == 0:
            return float(out[0])
        return out


def beta_eval(spec: BetaSpec, s):
    """Evaluate ``spec`` at ``s`` (scalar or array), applying the cap."""
    return spec(s)


@dataclass(frozen=True)
class Indicator(BetaSpec):
    """SPI with constant gamma encoded as beta(s) = 1{s <= 1/gamma}.

    The unit height is part of the convention (its conjugate is v -> gamma*v),
    so the default cap does not apply to this family.
    """

    gamma: float
    cap: Optional[float] = None

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise InvalidSpecError("Indicator needs gamma > 0")

    def _eval(self, s):
        return np.where(s <= 1.0 / self.gamma, 1.0, 0.0)


@dataclass(frozen=True)
class PowerLaw(BetaSpec):
    """beta(s) = C * s**(-alpha), capped."""

    coefficient: float
    exponent: float
    cap: Optional[float] = DEFAULT_CAP

    def __post_init__(self):
        if not (self.coefficient > 0.0 and self.exponent > 0.0):
            raise InvalidSpecError("PowerLaw needs C > 0 and alpha > 0")

    def _eval(self, s):
        return self.coefficient * s ** (-self.exponent)


@dataclass(frozen=True)
class ExpLogSquare(BetaSpec):
    """beta(s) = c * exp(-(a*log(s) + b)^2) past its mode, c before it.

    The raw expression increases for s < exp(-b/a); the family is flattened
    there so the result is nonincreasing.
    """

    c: float
    a: float
    b: float = 0.0
    cap: Optional[float] = DEFAULT_CAP

    def __post_init__(self):
        if not (self.c > 0.0 and self.a > 0.0):
            raise InvalidSpecError("ExpLogSquare needs c > 0 and a > 0")

    def _eval(self, s):
        mode = np.exp(-self.b / self.a)
        val = self.c * np.exp(-((self.a * np.log(s) + self.b) ** 2))
        return np.where(s < mode, self.c, val)


@dataclass(frozen=True)
class Table(BetaSpec):
    """Piecewise-linear interpolation through ordered (s, value) knots.

    Constant extrapolation on both sides.  Knot values must be nonincreasing.
    """

    knots: tuple
    cap: Optional[float] = DEFAULT_CAP

    def __post_init__(self):
        if len(self.knots) == 0:
            raise InvalidSpecError("Table needs at least one knot")
        ss = [k[0] for k in self.knots]
        vv = [k[1] for k in self.knots]
        if any(b <= a for a, b in zip(ss, ss[1:])):
            raise InvalidSpecError("Table knots must have strictly increasing s")
        if any(b > a + 1e-15 for a, b in zip(vv, vv[1:])):
            raise InvalidSpecError("Table values must be nonincreasing")
        if any(v < 0.0 for v in vv):
            raise InvalidSpecError("Table values must be nonnegative")

    def _eval(self, s):
        ss = np.array([k[0] for k in self.knots])
        vv = np.array([k[1] for k in self.knots])
        return np.interp(s, ss, vv)


@dataclass(frozen=True)
class Sum(BetaSpec):
    """Sum of child beta functions (tensorization); cap disabled by default."""

    children: tuple
    cap: Optional[float] = None

    def __post_init__(self):
        if len(self.children) == 0:
            raise InvalidSpecError("Sum needs at least one child")

    def _eval(self, s):
        total = np.zeros_like(s)
        for child in self.children:
            total = total + np.asarray(child(s))
        return total


@dataclass(frozen=True)
class AdjointShift(BetaSpec):
    """beta_tilde(s) = beta(s - 1) for s > 1, else 1/4 (adjoint comparison)."""

    child: BetaSpec
    cap: Optional[float] = None

    def _eval(self, s):
        out = np.full_like(s, DEFAULT_CAP)
        mask = s > 1.0
        if np.any(mask):
            out[mask] = np.asarray(self.child(s[mask] - 1.0))
        return out


class MonteCarloMixture(BetaSpec):
    """Seeded average of a parametric child family over sampled parameters.

    Parameter draws are cached at construction, so evaluation is pure and
    deterministic for a fixed seed.
    """

    def __init__(
        self,
        make_child: Callable[[float], BetaSpec],
        param_sampler: Callable[[np.random.Generator], float],
        n_samples: int = 4096,
        seed: int = 0,
        cap: Optional[float] = DEFAULT_CAP,
    ):
        if n_samples < 1:
            raise InvalidSpecError("MonteCarloMixture needs n_samples >= 1")
        self.make_child = make_child
        self.n_samples = int(n_samples)
        self.seed = int(seed)
        self.cap = cap
        rng = np.random.default_rng(seed)
        self.params = tuple(param_sampler(rng) for _ in range(self.n_samples))
        self.children = tuple(make_child(p) for p in self.params)

    def _eval(self, s):
        total = np.zeros_like(s)
        for child in self.children:
            total = total + np.asarray(child(s))
        return total / self.n_samples

    def __call__(self, s):
        arr = _as_array(s)
        out = self._eval(arr)
        if self.cap is not None:
            out = np.minimum(out, self.cap)
        if np.ndim(s) == 0:
            return float(out[0])
        return out


def tensorize(children: Sequence[BetaSpec]) -> BetaSpec:
    """beta for an independent product chain: the raw sum of the child betas."""
    if len(children) == 0:
        raise InvalidSpecError("tensorize needs a nonempty list")
    return Sum(tuple(children), cap=None)


def adjoint_transform_beta(spec: BetaSpec) -> BetaSpec:
    """beta for T*T given one for TT* (or vice versa): shift by one, 1/4 early."""
    return AdjointShift(spec)
