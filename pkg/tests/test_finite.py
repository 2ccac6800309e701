import numpy as np
import pytest

from wpgibbs.errors import DomainError, InvalidModeError
from wpgibbs.finite import (
    FiniteKernel,
    TestFunction,
    adjoint,
    dirichlet_form,
    l2_decay_exact,
    lazy_rwm_kernel,
    random_centered_functions,
    random_joint_model,
    spectral_gap,
    tensor_product_kernel,
    verify_bound_domination,
    verify_identities,
)


def _two_state(p=0.3, q=0.2):
    M = np.array([[1.0 - p, p], [q, 1.0 - q]])
    mu = np.array([q, p]) / (p + q)
    return FiniteKernel(matrix=M, mu=mu)


def test_two_state_closed_forms():
    p, q = 0.3, 0.2
    k = _two_state(p, q)
    assert spectral_gap(k) == pytest.approx(p + q)
    # f = indicator of state 0, centered; E(T, f) in closed form is
    # mu0 mu1 (p+q) |f(0)-f(1)|^2
    mu = k.mu
    f = np.array([1.0, 0.0]) - mu[0]
    assert dirichlet_form(k, f) == pytest.approx(mu[0] * mu[1] * (p + q))
    # exact decay: ||P^n f||^2 = (1-p-q)^(2n) ||f||^2
    norm_sq = float(mu @ f ** 2)
    decay = l2_decay_exact(k, f, n_max=5)
    expect = [(1.0 - p - q) ** (2 * n) * norm_sq for n in range(6)]
    assert np.allclose(decay, expect, atol=1e-14)


def test_identity_and_rank_one_gaps():
    mu = np.array([0.25, 0.75])
    ident = FiniteKernel(matrix=np.eye(2), mu=mu)
    assert spectral_gap(ident) == pytest.approx(0.0, abs=1e-12)
    refresh = FiniteKernel(matrix=np.tile(mu, (2, 1)), mu=mu)
    assert spectral_gap(refresh) == pytest.approx(1.0)


def test_test_function_caching_and_centering():
    mu = np.array([0.25, 0.75])
    f = TestFunction(values=np.array([1.0, 0.0]), mu=mu)
    assert f.mean == pytest.approx(0.25)
    assert f.norm_sq == pytest.approx(0.25)
    assert f.osc == pytest.approx(1.0)
    assert not f.centered
    assert f.center().centered


def test_adjoint_rules():
    k = _two_state()
    adj = adjoint(k)
    assert np.allclose(adj.matrix, k.matrix)  # reversible chain is self-adjoint
    # doubly stochastic, non-reversible: adjoint is the transpose
    M = np.array([[0.1, 0.6, 0.3], [0.3, 0.1, 0.6], [0.6, 0.3, 0.1]])
    mu = np.full(3, 1.0 / 3.0)
    k3 = FiniteKernel(matrix=M, mu=mu)
    assert np.allclose(adjoint(k3).matrix, M.T)
    assert np.allclose(adjoint(adjoint(k3)).matrix, M)


def test_spectral_gap_requires_reversibility():
    M = np.array([[0.1, 0.6, 0.3], [0.3, 0.1, 0.6], [0.6, 0.3, 0.1]])
    k = FiniteKernel(matrix=M, mu=np.full(3, 1.0 / 3.0))
    with pytest.raises(InvalidModeError):
        spectral_gap(k)
    g = spectral_gap(k, tt_star=True)
    assert 0.0 <= g <= 1.0 + 1e-12


def test_kernel_validation():
    mu = np.array([0.5, 0.5])
    with pytest.raises(DomainError):
        FiniteKernel(matrix=np.array([[0.5, 0.4], [0.5, 0.5]]), mu=mu)
    with pytest.raises(DomainError):
        # valid rows but mu is not stationary
        FiniteKernel(matrix=np.array([[0.9, 0.1], [0.5, 0.5]]), mu=mu)


def test_uncentered_function_rejected():
    k = _two_state()
    with pytest.raises(DomainError):
        l2_decay_exact(k, np.array([1.0, 0.0]), n_max=3)


def test_lazy_rwm_kernel_properties():
    rng = np.random.default_rng(0)
    pi = rng.dirichlet(np.ones(6))
    k = FiniteKernel(matrix=lazy_rwm_kernel(pi), mu=pi)
    assert k.is_reversible()
    assert np.all(np.diag(k.matrix) >= 0.5 - 1e-12)
    # lazy mixing makes the kernel positive semidefinite
    root = np.sqrt(pi)
    S = root[:, None] * k.matrix / root[None, :]
    assert np.min(np.linalg.eigvalsh(0.5 * (S + S.T))) >= -1e-12


def test_random_joint_model_operators():
    m = random_joint_model(seed=3, nx=4, ny=5)
    P = m.kernel("P")
    assert np.allclose(P.matrix, m.kernel("G1").matrix @ m.kernel("G2").matrix)
    g0, g1, g2 = m.component_gaps()
    assert 0.0 <= g0 <= 1.0 + 1e-12
    assert 0.0 < g1 <= 1.0 + 1e-12
    assert 0.0 < g2 <= 1.0 + 1e-12


def test_exact_slice_model_collapses():
    m = random_joint_model(seed=5, nx=3, ny=4, exact=True)
    assert np.allclose(m.kernel("P12").matrix, m.kernel("P").matrix, atol=1e-13)


def test_verify_identities_random_models():
    for seed in range(4):
        m = random_joint_model(seed=seed, nx=3, ny=4)
        report = verify_identities(m, trials=5, seed=seed)
        assert report.passed, report.to_text()
        assert report.worst_residual <= 1e-10


def test_verify_bound_domination():
    m = random_joint_model(seed=11, nx=3, ny=3)
    fs = random_centered_functions(m.mu, count=10, seed=1)
    result = verify_bound_domination(m, fs, n_max=50)
    assert result.passed, result.to_text()


def test_tensor_product_gap():
    pa = np.random.default_rng(1).dirichlet(np.ones(4))
    pb = np.random.default_rng(2).dirichlet(np.ones(5))
    a = FiniteKernel(matrix=lazy_rwm_kernel(pa), mu=pa)
    b = FiniteKernel(matrix=lazy_rwm_kernel(pb), mu=pb)
    prod = tensor_product_kernel(a, b)
    ga, gb, gp = spectral_gap(a), spectral_gap(b), spectral_gap(prod)
    assert gp == pytest.approx(min(ga, gb), abs=1e-10)
