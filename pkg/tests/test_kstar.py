import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpgibbs import (
    Clamped,
    Composite,
    GridKStar,
    Indicator,
    InvalidModeError,
    Linear,
    Power,
    PowerLaw,
    Table,
    UnboundedConjugateError,
    adjoint_transform,
    chain,
    compose_mwg,
    conjugate,
    scale,
)
from wpgibbs.beta import BetaSpec
from dataclasses import dataclass


@dataclass(frozen=True)
class _RawPower(BetaSpec):
    """Uncapped power law, forcing the numeric conjugation path."""

    coefficient: float
    exponent: float

    def _eval(self, s):
        return self.coefficient * s ** (-self.exponent)


@dataclass(frozen=True)
class _RawIndicator(BetaSpec):
    gamma: float

    def _eval(self, s):
        return np.where(s <= 1.0 / self.gamma, 1.0, 0.0)


def test_indicator_conjugate_is_linear():
    k = conjugate(Indicator(gamma=0.3))
    assert isinstance(k, Linear)
    assert k.slope == 0.3


def test_powerlaw_conjugate_closed_form():
    k = conjugate(PowerLaw(coefficient=1.0, exponent=1.0))
    assert isinstance(k, Power)
    # alpha=1, C=1: K*(v) = v^2/4
    assert k(0.2) == pytest.approx(0.01)
    assert k.exponent == 2.0
    assert k.coefficient == pytest.approx(0.25)


def test_numeric_conjugate_matches_linear():
    vg = np.geomspace(1e-4, 0.25, 100)
    k = conjugate(_RawIndicator(gamma=0.3), v_grid=vg)
    assert isinstance(k, GridKStar)
    err = np.max(np.abs(np.asarray(k(vg)) - 0.3 * vg))
    assert err <= 1e-6


def test_numeric_conjugate_matches_power():
    vg = np.geomspace(1e-2, 0.25, 100)
    k = conjugate(_RawPower(1.0, 1.0), v_grid=vg)
    exact = vg ** 2 / 4.0
    assert np.max(np.abs(np.asarray(k(vg)) - exact)) <= 1e-6


def test_unbounded_conjugate_raises():
    # beta hitting exactly zero at finite s makes u*(v - 0) unbounded
    dead = Table(knots=((1.0, 0.0),))
    with pytest.raises(UnboundedConjugateError):
        conjugate(dead)


def test_chain_linear_product():
    k = chain(Indicator(0.5), Indicator(0.4))
    assert isinstance(k, Linear)
    assert k.slope == pytest.approx(0.2)


def test_chain_inf_formula_agreement():
    # beta_chain(s) = inf{s1 b2(s/s1) + b1(s1)} for two raw power laws has
    # conjugate exactly K2* o K1* = v^4/64; check the numeric path agrees.
    @dataclass(frozen=True)
    class _Chained(BetaSpec):
        def _eval(self, s):
            out = np.empty_like(s)
            for i, si in enumerate(s):
                s1 = np.geomspace(1e-6, si, 4096)
                out[i] = np.min(s1 * (s1 / si) + 1.0 / s1)
            return out

    vg = np.geomspace(1e-2, 0.25, 50)
    numeric = conjugate(_Chained(), v_grid=vg)
    composed = chain(Power(0.25, 2.0), Power(0.25, 2.0))
    exact = np.asarray(composed(vg))
    assert np.allclose(exact, vg ** 4 / 64.0, rtol=1e-12)
    rel = np.abs(np.asarray(numeric(vg)) - exact) / exact
    assert np.max(rel) <= 1e-3


def test_scale_rules():
    assert scale(Linear(0.4), 3.0, 2.0).slope == pytest.approx(0.8)
    p = scale(Power(0.25, 2.0), 2.0, 3.0)
    # c1^(1-e) * c2 * coef = 2^-1 * 3 * 0.25
    assert p.coefficient == pytest.approx(0.375)
    assert p.exponent == 2.0
    # generic wrapper: K~(v) = c1 c2 K(v/c1)
    g = GridKStar(v_knots=(0.1, 0.2), values=(0.01, 0.04))
    s = scale(g, 2.0, 5.0)
    assert s(0.2) == pytest.approx(2.0 * 5.0 * g(0.1))


def test_adjoint_transform_half_argument():
    k = adjoint_transform(Linear(0.4))
    assert k(1.0) == pytest.approx(0.2)
    kp = adjoint_transform(Power(1.0, 2.0))
    # K~(v) = K(v/2)
    assert kp(0.2) == pytest.approx((0.1) ** 2)


def test_compose_mwg_full_all_linear():
    k = compose_mwg(Linear(0.5), Linear(0.5), Linear(0.5), mode="full")
    assert isinstance(k, Linear)
    assert k(0.25) == pytest.approx(0.25 / 32.0)
    assert k.slope == pytest.approx(0.5 ** 3 / 4.0)


def test_compose_mwg_order_symmetric_when_linear():
    a = compose_mwg(Linear(0.3), Linear(0.5), Linear(0.7), mode="full")
    b = compose_mwg(Linear(0.3), Linear(0.7), Linear(0.5), mode="full")
    assert a.slope == pytest.approx(b.slope)


def test_compose_mwg_strong():
    k = compose_mwg(Linear(0.8), Linear(0.5), Linear(0.5), mode="strong")
    # 2 * s1 * s2 * gamma/4
    assert k.slope == pytest.approx(2.0 * 0.5 * 0.5 * 0.8 / 4.0)
    with pytest.raises(InvalidModeError):
        compose_mwg(Power(0.25, 2.0), Linear(0.5), Linear(0.5), mode="strong")


def test_compose_mwg_joint_and_marginal():
    kj = compose_mwg(Linear(0.8), None, Linear(0.5), mode="joint_2mg")
    assert kj.slope == pytest.approx(0.8 * 0.5 / 4.0)
    assert kj.n_offset == 0
    km = compose_mwg(Linear(0.8), None, Linear(0.5), mode="marginal_2mg")
    assert km.n_offset == 1
    assert km(1.0) == pytest.approx(0.5 * 0.5 * 0.8)


def test_compose_mwg_bad_mode_and_missing_args():
    with pytest.raises(InvalidModeError):
        compose_mwg(Linear(1.0), Linear(1.0), Linear(1.0), mode="sideways")
    with pytest.raises(InvalidModeError):
        compose_mwg(Linear(1.0), None, Linear(1.0), mode="full")
    with pytest.raises(InvalidModeError):
        compose_mwg(None, Linear(1.0), Linear(1.0), mode="full")


def test_compose_mwg_clamps_oversized_component():
    big = Linear(3.0)  # K*(v) > v: not subunit-verified
    k = compose_mwg(Linear(0.5), Linear(0.5), big, mode="full")
    # clamped component behaves as min(3v, v) = v
    manual = compose_mwg(Linear(0.5), Linear(0.5), Linear(1.0), mode="full")
    assert k(0.2) == pytest.approx(manual(0.2))


def test_subunit_flag():
    assert Linear(0.9).subunit_verified
    assert not Linear(1.5).subunit_verified
    assert Clamped(Linear(1.5)).subunit_verified


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=1e-4, max_value=0.25),
    st.floats(min_value=1.01, max_value=3.0),
)
def test_kstar_structure_properties(v, factor):
    """K*(0)=0, nondecreasing, and K*(v)/v nondecreasing for each variant."""
    for k in (
        Linear(0.4),
        Power(0.25, 2.0),
        conjugate(PowerLaw(2.0, 0.5)),
        Composite(outer=Linear(0.5), inner=Power(1.0, 1.5), post_scale=2.0),
    ):
        assert k(0.0) == 0.0
        a, b = k(v), k(min(v * factor, 0.25))
        assert b >= a - 1e-12
        if a > 0:
            assert b / min(v * factor, 0.25) >= a / v - 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.05, max_value=1.0), st.floats(min_value=1e-3, max_value=0.25))
def test_conjugate_duality_inequality(gamma, v):
    """Fenchel-Young: u*v <= K(u) + K*(v) for the indicator pair."""
    k = conjugate(Indicator(gamma=gamma))
    for u in np.geomspace(1e-3, 1e3, 25):
        K_u = u * Indicator(gamma=gamma)(1.0 / u)
        assert u * v <= K_u + k(v) + 1e-9
