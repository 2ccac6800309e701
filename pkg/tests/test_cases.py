import math

import numpy as np
import pytest

from wpgibbs.cases import (
    B_UPPER_TAIL,
    C_RWM,
    C_XI,
    GAMMA_TAU_SCALED,
    GAMMA_XI_SCALED,
    BayesBeta2,
    BayesParams,
    NIGBeta1,
    NIGBeta2,
    NIGParams,
    OUBeta2,
    OUParams,
    bayes_beta2,
    bayes_crossover_sigma0_sq,
    bayes_rate_exponent,
    diffusion_beta2_indicator,
    nig_conditional_gaps,
    nig_envelope_exponents,
    nig_fixed_betas,
    nig_rate_exponent,
    nig_scaled_kstar,
    ou_beta2,
    ou_exp_log_square_envelope,
    ou_rate,
    ou_rate_coefficient,
)
from wpgibbs.errors import DomainError, InvalidSpecError


def test_global_constants():
    assert C_RWM == 1.972e-4
    assert C_XI == math.pi ** -2 * 2 ** -11
    assert GAMMA_XI_SCALED == (27.0 / 256.0) * C_XI
    assert GAMMA_TAU_SCALED == C_RWM / (2.0 * math.e)
    assert B_UPPER_TAIL == 2.0


def test_scaled_conditional_gaps_are_constants():
    p = NIGParams(beta_hyper=2.0, sigma_xi="scaled", sigma_tau="scaled")
    for xi, tau in ((0.0, 0.1), (0.7, 1.3), (5.0, 20.0)):
        g_xi, g_tau = nig_conditional_gaps(p, xi=xi, tau=tau)
        assert g_xi == GAMMA_XI_SCALED
        assert g_tau == GAMMA_TAU_SCALED


def test_fixed_conditional_gaps_formulas():
    p = NIGParams(beta_hyper=2.0, sigma_xi=0.5, sigma_tau=0.4)
    xi, tau = 0.7, 1.3
    g_xi, g_tau = nig_conditional_gaps(p, xi=xi, tau=tau)
    beta_xi = p.beta_hyper + xi ** 2 / 2.0
    assert g_xi == pytest.approx(
        C_XI * (beta_xi * 0.5) ** 6 / (beta_xi ** 2 * 0.25 + 1.0) ** 4, rel=1e-14
    )
    assert g_tau == pytest.approx(
        C_RWM * 0.16 * tau * math.exp(-2.0 * 0.16 * tau), rel=1e-14
    )


def test_scaled_worst_case_gaps_are_the_advertised_minima():
    # xi-refresh: c u^3/(u+1)^4 with u = beta_xi^2 sigma^2 maximised at u=3
    assert GAMMA_XI_SCALED == pytest.approx(C_XI * 3.0 ** 3 / 4.0 ** 4)
    # tau-refresh: c0 u exp(-2u) maximised at u = sigma^2 tau = 1/2 gives c0/(2e)
    assert GAMMA_TAU_SCALED == pytest.approx(C_RWM * 0.5 * math.exp(-1.0))


def test_scaled_kstar_slope():
    p = NIGParams(beta_hyper=2.0, gamma_dg=0.8)
    k = nig_scaled_kstar(p)
    assert k.slope == pytest.approx(GAMMA_TAU_SCALED * GAMMA_XI_SCALED * 0.8, rel=1e-14)
    assert k.slope == pytest.approx(5.217880169569244e-06 * 3.6272912899504215e-05 * 0.8)


def test_fixed_betas_shape():
    p = NIGParams(beta_hyper=2.0, sigma_xi=0.5, sigma_tau=0.5)
    s_grid = np.geomspace(1.0, 1e9, 200)
    b1 = np.array([nig_fixed_betas(s, p)[0] for s in s_grid])
    b2 = np.array([nig_fixed_betas(s, p)[1] for s in s_grid])
    for b in (b1, b2):
        assert np.all(b >= 0.0)
        assert np.all(b <= 0.25 + 1e-15)
        assert np.all(np.diff(b) <= 1e-12)
    # both tails actually decay
    assert b1[-1] < b1[0] or b1[0] == 0.25
    assert b2[-1] < 0.25


def test_fixed_beta1_below_validity_is_capped():
    p = NIGParams(beta_hyper=2.0, sigma_xi=0.5, sigma_tau=0.5)
    b1, b2 = nig_fixed_betas(1e-6, p)
    assert b1 == 0.25
    assert b2 == 0.25


def test_fixed_betas_require_matching_widths():
    p = NIGParams(beta_hyper=2.0, sigma_xi=0.5, sigma_tau=0.4)
    with pytest.raises(InvalidSpecError):
        nig_fixed_betas(10.0, p)


def test_nig_rate_exponent_regimes():
    fast = NIGParams(beta_hyper=2.0, sigma_xi=1.0, sigma_tau=1.0)
    assert nig_rate_exponent(fast) == pytest.approx(1.0 / 14.0)
    slow = NIGParams(beta_hyper=0.5, sigma_xi=1.0, sigma_tau=1.0)
    assert nig_rate_exponent(slow) == pytest.approx(0.5 / (4.0 * 0.5 + 10.0 * 1.0))


def test_nig_envelope_exponents():
    p = NIGParams(beta_hyper=2.0, sigma_xi=0.5, sigma_tau=0.5)
    e1, e2 = nig_envelope_exponents(p)
    assert e1 == pytest.approx(0.25)
    assert e2 == pytest.approx(min(0.5, 2.0 / (2.0 * 0.25)))
    wide = NIGParams(beta_hyper=0.1, sigma_xi=2.0, sigma_tau=2.0)
    assert nig_envelope_exponents(wide)[1] == pytest.approx(0.1 / 8.0)


def test_nig_beta_wrappers_match_functions():
    p = NIGParams(beta_hyper=2.0, sigma_xi=0.5, sigma_tau=0.5)
    for s in (10.0, 1e3, 1e6):
        assert NIGBeta1(params=p)(s) == nig_fixed_betas(s, p)[0]
        assert NIGBeta2(params=p)(s) == nig_fixed_betas(s, p)[1]


def _bayes_params(sigma0=0.1):
    rng = np.random.default_rng(7)
    X = rng.normal(size=(8, 2))
    Y = rng.normal(size=8)
    return BayesParams(a=2.0, b=1.0, X=X, Y=Y, sigma0=sigma0)


def test_bayes_posterior_quantities():
    p = _bayes_params()
    assert p.a_prime == pytest.approx(p.a + p.N / 2.0 - p.p / 2.0)
    gram = p.X.T @ p.X
    u = np.linalg.solve(gram, p.X.T @ p.Y)
    assert p.b_prime == pytest.approx(p.b + (p.Y @ p.Y - u @ gram @ u) / 2.0)
    assert p.b_prime >= p.b  # residual sum of squares is nonnegative
    w = np.linalg.eigvalsh(gram)
    assert p.eig_min == pytest.approx(w[0])
    assert p.eig_max == pytest.approx(w[-1])
    assert p.C1 == pytest.approx(1.0 / (C_RWM * p.eig_min * p.sigma0 ** 2))
    assert p.C2 == pytest.approx(2.0 * p.eig_max * p.p * p.sigma0 ** 2)


def test_bayes_beta2_shape_and_cap():
    p = _bayes_params()
    thresh = math.e * p.C1 * p.C2
    assert bayes_beta2(0.5 * thresh, p) == 0.25
    s_grid = np.geomspace(thresh, 1e4 * thresh, 100)
    vals = np.array([bayes_beta2(s, p) for s in s_grid])
    assert np.all(vals <= 0.25 + 1e-15)
    assert np.all(np.diff(vals) <= 1e-12)
    assert vals[-1] < vals[0]
    assert BayesBeta2(params=p)(s_grid[3]) == vals[3]


def test_bayes_beta2_tail_envelope():
    # the decay should eventually beat any power below the advertised exponent
    p = _bayes_params()
    rho = bayes_rate_exponent(p)
    s_lo, s_hi = 1e3 * math.e * p.C1 * p.C2, 1e6 * math.e * p.C1 * p.C2
    ratio = (bayes_beta2(s_hi, p) / bayes_beta2(s_lo, p))
    assert ratio <= (s_hi / s_lo) ** (-0.9 * rho)


def test_bayes_rate_exponent_and_crossover():
    p = _bayes_params(sigma0=0.05)
    assert bayes_rate_exponent(p) == pytest.approx(min(p.a_prime, p.b_prime / p.C2))
    cross = bayes_crossover_sigma0_sq(p)
    assert cross == pytest.approx(p.b_prime / (2.0 * p.a_prime * p.eig_max * p.p))
    small = _bayes_params(sigma0=math.sqrt(0.5 * cross))
    big = _bayes_params(sigma0=math.sqrt(2.0 * cross))
    assert bayes_rate_exponent(small) == pytest.approx(small.a_prime)
    assert bayes_rate_exponent(big) == pytest.approx(big.b_prime / big.C2)


def _ou_params(**kw):
    defaults = dict(
        mu0=0.5,
        tau0=1.0,
        times=(0.0, 0.5, 1.0),
        obs=(0.2, 0.1, 0.3),
        M=8,
    )
    defaults.update(kw)
    return OUParams(**defaults)


def test_ou_derived_quantities():
    p = _ou_params()
    assert p.T == pytest.approx(1.0)
    assert p.m == pytest.approx(p.mu0 + p.tau0 ** 2 * p.T / 2.0)
    obs = np.array(p.obs)
    dts = np.diff(np.array(p.times))
    eta = np.max(dts - obs[1:] ** 2 + obs[:-1] ** 2)
    assert p.eta == pytest.approx(eta)


def test_ou_beta2_shape():
    p = _ou_params()
    assert ou_beta2(0.5, p) == 0.25
    vals = np.array([ou_beta2(s, p) for s in np.geomspace(1.0, 1e8, 100)])
    assert np.all(np.diff(vals) <= 1e-12)
    assert vals[-1] < 1e-4
    assert OUBeta2(params=p)(10.0) == ou_beta2(10.0, p)


def test_ou_envelope_dominates_exact_curve():
    p = _ou_params(envelope_K=1.0)
    env = ou_exp_log_square_envelope(p)
    s_grid = np.geomspace(1.0, 1e8, 400)
    exact = np.array([ou_beta2(s, p) for s in s_grid])
    upper = np.array([env(s) for s in s_grid])
    assert np.all(upper + 1e-15 >= exact)
    # squared-log coefficient matches the advertised rate constant
    assert env.a ** 2 == pytest.approx(ou_rate_coefficient(p))
    assert ou_rate_coefficient(p) == pytest.approx(2.0 / (p.eta ** 2 * p.tau0 ** 2))


def test_diffusion_indicator_threshold():
    p = _ou_params()
    # theta = 0 gives unit potential increments, hence gamma exactly 1
    spec0 = diffusion_beta2_indicator(0.0, p)
    assert spec0.gamma == pytest.approx(1.0)
    theta = 0.8
    spec = diffusion_beta2_indicator(theta, p)
    obs = np.array(p.obs)
    dts = np.diff(np.array(p.times))
    g = np.exp(0.5 * theta * (dts - obs[1:] ** 2 + obs[:-1] ** 2))
    assert spec.gamma == pytest.approx(1.0 / np.max(g), rel=1e-14)


def test_ou_rate_validation():
    p = _ou_params()
    with pytest.raises(DomainError):
        ou_rate(10, p, delta=1.0)
    with pytest.raises(DomainError):
        ou_rate(1, p, delta=1.5)
    vals = [ou_rate(n, p, delta=1.5) for n in (2, 10, 100, 1000)]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    assert vals[0] <= 0.25


def test_param_validation():
    with pytest.raises(DomainError):
        NIGParams(beta_hyper=-1.0)
    with pytest.raises(DomainError):
        BayesParams(a=0.5, b=1.0, X=np.eye(3)[:, :2], Y=np.zeros(3), sigma0=0.1)
    with pytest.raises(DomainError):
        OUParams(mu0=0.0, tau0=1.0, times=(0.0, 1.0), obs=(0.1,), M=8)
