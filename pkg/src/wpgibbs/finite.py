"""Dense finite-state oracle for the two-block sampler calculus.

Everything here is exact linear algebra on small state spaces: Dirichlet
forms, adjoints, spectral gaps, the assembled joint operators of a two-block
scan, and brute-force verification of every identity, comparison inequality,
and bound-domination claim the continuous theory asserts.

Joint states (x, y) are flattened as i = x * ny + y.  A scan step first
refreshes y given x (operator G1, or its Metropolised version H1), then x
given the new y (G2 / H2); operators act on functions by (Tf)(z) =
sum_z' T[z, z'] f(z').
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidModeError, InvalidSpecError

MAX_JOINT_STATES = 64 * 64
PMF_FLOOR = 1e-6


# ---------------------------------------------------------------------------
# kernels and test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteKernel:
    """Row-stochastic matrix with an explicit stationary distribution."""

    matrix: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.matrix, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        object.__setattr__(self, "matrix", T)
        object.__setattr__(self, "mu", mu)
        n = T.shape[0]
        if T.shape != (n, n) or mu.shape != (n,):
            raise DomainError("kernel matrix and stationary vector mismatch")
        if np.any(T < -1e-15):
            raise DomainError("kernel entries must be nonnegative")
        if np.max(np.abs(T.sum(axis=1) - 1.0)) > 1e-12:
            raise DomainError("kernel rows must sum to 1")
        if np.max(np.abs(mu @ T - mu)) > 1e-10:
            raise DomainError("mu is not stationary for this kernel")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def is_reversible(self, tol: float = 1e-10) -> bool:
        F = self.mu[:, None] * self.matrix
        return bool(np.max(np.abs(F - F.T)) <= tol)


@dataclass(frozen=True)
class TestFunction:
    """Function on the state space with cached mean, norm, and oscillation."""

    __test__ = False  # not a pytest collection target

    values: np.ndarray
    mu: np.ndarray
    mean: float = field(init=False)
    norm_sq: float = field(init=False)
    osc: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "mean", float(mu @ v))
        object.__setattr__(self, "norm_sq", float(mu @ v ** 2))
        object.__setattr__(self, "osc", float(v.max() - v.min()))

    @property
    def centered(self) -> bool:
        return abs(self.mean) <= 1e-12

    def center(self) -> "TestFunction":
        return TestFunction(self.values - self.mean, self.mu)


def dirichlet_form(k: FiniteKernel, f: np.ndarray) -> float:
    """<(I - T)f, f>_mu, cross-checked against the double-sum form."""
    f = np.asarray(f, dtype=float)
    if f.shape != (k.n,):
        raise DomainError("function dimension mismatch")
    inner = float(np.dot(k.mu * (f - k.matrix @ f), f))
    diff = f[:, None] - f[None, :]
    double = 0.5 * float(np.sum(k.mu[:, None] * k.matrix * diff ** 2))
    if abs(inner - double) > 1e-10 * max(1.0, abs(inner)):
        raise DomainError(
            f"Dirichlet-form cross-check failed: {inner} vs {double}"
        )
    return max(inner, 0.0)


def adjoint(k: FiniteKernel) -> FiniteKernel:
    """mu-adjoint kernel T*[y, x] = mu[x] T[x, y] / mu[y]."""
    if np.any(k.mu <= 0.0):
        raise DomainError("adjoint needs strictly positive stationary mass")
    T_star = (k.mu[:, None] * k.matrix).T / k.mu[:, None]
    return FiniteKernel(T_star, k.mu)


def l2_decay_exact(k: FiniteKernel, f: np.ndarray, n_max: int) -> np.ndarray:
    """Exact sequence ||T^n f||^2_mu for n = 0..n_max; f must be centered."""
    f = np.asarray(f, dtype=float)
    if abs(float(k.mu @ f)) > 1e-12:
        raise DomainError("l2_decay_exact needs a centered function")
    out = np.empty(n_max + 1)
    g = f.copy()
    for n in range(n_max + 1):
        out[n] = float(k.mu @ g ** 2)
        g = k.matrix @ g
    return out


def spectral_gap(k: FiniteKernel, tt_star: bool = False) -> float:
    """1 minus the second-largest eigenvalue in the mu-weighted geometry.

    Reversible kernels are symmetrized by mu^{1/2} conjugation; a
    non-reversible kernel is only accepted with ``tt_star=True``, which
    returns the right gap of T*T.
    """
    if np.any(k.mu <= 0.0):
        raise DomainError("spectral_gap needs strictly positive mass")
    if not k.is_reversible():
        if not tt_star:
            raise InvalidModeError(
                "kernel is not reversible; request the T*T gap explicitly"
            )
        ts = adjoint(k)
        prod = FiniteKernel(ts.matrix @ k.matrix, k.mu)
        return spectral_gap(prod)
    root = np.sqrt(k.mu)
    S = root[:, None] * k.matrix / root[None, :]
    vals = np.linalg.eigvalsh(0.5 * (S + S.T))
    return float(1.0 - np.sort(vals)[-2])


# ---------------------------------------------------------------------------
# joint two-block models
# ---------------------------------------------------------------------------


def lazy_rwm_kernel(pi: np.ndarray) -> np.ndarray:
    """Lazy random-walk Metropolis chain targeting pmf pi on a 1-d grid.

    Proposes +-1 steps (rejected at the boundary), Metropolis-corrected,
    then mixed half-and-half with the identity so the kernel is positive
    semidefinite, as the comparison theory assumes.
    """
    pi = np.asarray(pi, dtype=float)
    m = len(pi)
    M = np.zeros((m, m))
    for i in range(m):
        for j in (i - 1, i + 1):
            if 0 <= j < m:
                M[i, j] = 0.5 * min(1.0, pi[j] / pi[i])
        M[i, i] = 1.0 - M[i].sum()
    return 0.5 * np.eye(m) + 0.5 * M


class FiniteJointModel:
    """Two-block target pi(x, y) with exact and Metropolised scan operators.

    Attributes G1/G2 are the exact conditional refreshes of y|x and x|y;
    H1/H2 their per-slice Markov substitutes; P = G1 G2 the exact scan,
    P1 = H1 G2, P2 = G1 H2, P12 = H1 H2 the three Metropolis-within-Gibbs
    variants; P_X and P_X_bar the x-marginal chains of P and P2.
    """

    def __init__(
        self,
        joint: np.ndarray,
        h1_slices: Optional[Sequence[np.ndarray]] = None,
        h2_slices: Optional[Sequence[np.ndarray]] = None,
    ):
        Pi = np.asarray(joint, dtype=float)
        if Pi.ndim != 2 or np.any(Pi <= 0.0):
            raise InvalidSpecError("joint pmf must be a positive matrix")
        if Pi.size > MAX_JOINT_STATES:
            raise InvalidSpecError("joint state space too large for dense algebra")
        Pi = Pi / Pi.sum()
        self.joint = Pi
        self.nx, self.ny = Pi.shape
        self.mu = Pi.reshape(-1)  # state (x, y) at index x * ny + y
        self.marg_x = Pi.sum(axis=1)
        self.marg_y = Pi.sum(axis=0)
        self.cond_y_given_x = Pi / self.marg_x[:, None]
        self.cond_x_given_y = (Pi / self.marg_y[None, :]).T  # [y, x]

        if h1_slices is None:
            h1_slices = [lazy_rwm_kernel(self.cond_y_given_x[x]) for x in range(self.nx)]
        if h2_slices is None:
            h2_slices = [lazy_rwm_kernel(self.cond_x_given_y[y]) for y in range(self.ny)]
        self.h1_slices = [np.asarray(h, dtype=float) for h in h1_slices]
        self.h2_slices = [np.asarray(h, dtype=float) for h in h2_slices]

        nx, ny = self.nx, self.ny
        n = nx * ny
        G1 = np.zeros((n, n))
        G2 = np.zeros((n, n))
        H1 = np.zeros((n, n))
        H2 = np.zeros((n, n))
        for x in range(nx):
            for y in range(ny):
                i = x * ny + y
                G1[i, x * ny : (x + 1) * ny] = self.cond_y_given_x[x]
                H1[i, x * ny : (x + 1) * ny] = self.h1_slices[x][y]
                for xp in range(nx):
                    G2[i, xp * ny + y] = self.cond_x_given_y[y, xp]
                    H2[i, xp * ny + y] = self.h2_slices[y][x, xp]
        self.G1, self.G2, self.H1, self.H2 = G1, G2, H1, H2
        self.P = G1 @ G2
        self.P1 = H1 @ G2
        self.P2 = G1 @ H2
        self.P12 = H1 @ H2

        # x-marginal chains: refresh y from the slice, then move x
        A = self.cond_y_given_x  # [x, y]
        B = self.cond_x_given_y  # [y, x']
        self.P_X = A @ B
        self.P_X_bar = np.einsum("xy,yxz->xz", A, np.stack(self.h2_slices))

    def kernel(self, name: str) -> FiniteKernel:
        mats = {
            "G1": self.G1, "G2": self.G2, "H1": self.H1, "H2": self.H2,
            "P": self.P, "P1": self.P1, "P2": self.P2, "P12": self.P12,
        }
        if name == "P_X":
            return FiniteKernel(self.P_X, self.marg_x)
        if name == "P_X_bar":
            return FiniteKernel(self.P_X_bar, self.marg_x)
        return FiniteKernel(mats[name], self.mu)

    def component_gaps(self):
        """(gamma0, gamma1, gamma2): right gap of P*P and worst slice gaps."""
        g0 = spectral_gap(self.kernel("P"), tt_star=True)
        g1 = min(
            spectral_gap(FiniteKernel(h, self.cond_y_given_x[x]))
            for x, h in enumerate(self.h1_slices)
        )
        g2 = min(
            spectral_gap(FiniteKernel(h, self.cond_x_given_y[y]))
            for y, h in enumerate(self.h2_slices)
        )
        return g0, g1, g2


def random_joint_model(
    seed: int, nx: int = 4, ny: int = 4, exact: bool = False
) -> FiniteJointModel:
    """Random two-block model: Dirichlet(1) joint pmf floored at 1e-6.

    ``exact=True`` uses the exact conditional refreshes as H1/H2 (the
    degenerate case where every comparison collapses to equality).
    """
    rng = np.random.default_rng(seed)
    Pi = rng.dirichlet(np.ones(nx * ny)).reshape(nx, ny)
    Pi = np.maximum(Pi, PMF_FLOOR)
    Pi = Pi / Pi.sum()
    m = FiniteJointModel(Pi)
    if exact:
        h1 = [m.cond_y_given_x[x][None, :].repeat(ny, axis=0) for x in range(nx)]
        h2 = [m.cond_x_given_y[y][None, :].repeat(nx, axis=0) for y in range(ny)]
        return FiniteJointModel(Pi, h1_slices=h1, h2_slices=h2)
    return m


def random_centered_functions(
    mu: np.ndarray, count: int, seed: int
) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        f = rng.normal(size=len(mu))
        out.append(f - float(mu @ f))
    return out


def tensor_product_kernel(k1: FiniteKernel, k2: FiniteKernel) -> FiniteKernel:
    """Simultaneous independent product chain H1 (x) H2."""
    return FiniteKernel(np.kron(k1.matrix, k2.matrix), np.kron(k1.mu, k2.mu))


# ---------------------------------------------------------------------------
# verification reports
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    worst_residual: float
    tol: float
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.worst_residual <= self.tol


@dataclass
class Report:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst_residual(self) -> float:
        return max((c.worst_residual for c in self.checks), default=0.0)

    def add(self, name, residual, tol, seed=None):
        self.checks.append(CheckResult(name, float(residual), tol, seed))

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            seed = "" if c.seed is None else f"  seed={c.seed}"
            lines.append(
                f"{status}  {c.name}  worst_residual={c.worst_residual:.3e}"
                f"  tol={c.tol:.1e}{seed}"
            )
        lines.append("OVERALL " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _weighted_psd_min_eig(T: np.ndarray, mu: np.ndarray) -> float:
    root = np.sqrt(mu)
    S = root[:, None] * T / root[None, :]
    return float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])


def verify_identities(m: FiniteJointModel, trials: int = 20, tol: float = 1e-10,
                      seed: int = 0) -> Report:
    """Exhaustive dense check of the operator identities and comparisons."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    rep = Report()
    mu = m.mu
    kP = m.kernel("P")

    def E(T, f):
        return dirichlet_form(FiniteKernel(T, mu), f)

    # structural facts that need no test function
    rep.add("G1 idempotent", np.max(np.abs(m.G1 @ m.G1 - m.G1)), 1e-12, seed)
    rep.add("G2 idempotent", np.max(np.abs(m.G2 @ m.G2 - m.G2)), 1e-12, seed)
    rep.add(
        "P adjoint is G2 G1",
        np.max(np.abs(adjoint(kP).matrix - m.G2 @ m.G1)),
        1e-12,
        seed,
    )
    rep.add(
        "adjoint involution",
        np.max(np.abs(adjoint(adjoint(kP)).matrix - kP.matrix)),
        1e-12,
        seed,
    )
    for name in ("G1", "G2", "H1", "H2", "P", "P1", "P2", "P12"):
        T = m.kernel(name).matrix
        rep.add(f"stationarity of {name}", np.max(np.abs(mu @ T - mu)), tol, seed)
    for name in ("H1", "H2"):
        lam = _weighted_psd_min_eig(m.kernel(name).matrix, mu)
        rep.add(f"positivity of {name}", max(0.0, -lam), 1e-10, seed)

    pairs = {"P": (m.G1, m.G2), "P1": (m.H1, m.G2), "P2": (m.G1, m.H2),
             "P12": (m.H1, m.H2)}
    fs = random_centered_functions(mu, trials, seed)
    worst = {key: 0.0 for key in (
        "decomposition", "doubling", "positive-part", "adjoint-comparison",
        "marginal equality", "marginal lift", "oscillation contraction")}
    for f in fs:
        for name, (T1, T2) in pairs.items():
            T = T1 @ T2
            Ts = T2 @ T1  # components are self-adjoint
            lhs = E(Ts @ T, f)
            rhs = E(T2 @ T2, f) + E(T1 @ T1, T2 @ f)
            worst["decomposition"] = max(
                worst["decomposition"], abs(lhs - rhs))
            worst["doubling"] = max(worst["doubling"], lhs - 2.0 * E(T, f))
            worst["adjoint-comparison"] = max(
                worst["adjoint-comparison"], E(T @ Ts, T @ f) - lhs)
            osc = lambda v: v.max() - v.min()
            worst["oscillation contraction"] = max(
                worst["oscillation contraction"], osc(T @ f) - osc(f))
        for name in ("G1", "G2", "H1", "H2"):
            T = m.kernel(name).matrix
            worst["positive-part"] = max(
                worst["positive-part"], E(T, f) - E(T @ T, f))
        # cylinder functions: marginal Dirichlet form equality and the lift
        g = np.array([f[x * m.ny] for x in range(m.nx)])
        g = g - float(m.marg_x @ g)
        f_g = np.repeat(g, m.ny)
        kPX = m.kernel("P_X")
        lhs = dirichlet_form(
            FiniteKernel(adjoint(kP).matrix @ kP.matrix, mu), f_g)
        rhs = dirichlet_form(
            FiniteKernel(adjoint(kPX).matrix @ kPX.matrix, m.marg_x), g)
        worst["marginal equality"] = max(worst["marginal equality"], abs(lhs - rhs))
        # P f is constant on x-fibers; its x-function advances by P_X
        pf = kP.matrix @ f
        fiber = pf.reshape(m.nx, m.ny)
        worst["marginal lift"] = max(
            worst["marginal lift"],
            float(np.max(np.abs(fiber - fiber[:, :1]))),
            float(np.max(np.abs(np.repeat(m.P_X @ fiber[:, 0], m.ny)
                                - kP.matrix @ pf))),
        )
    for key, val in worst.items():
        rep.add(key, val, tol if key != "marginal lift" else 1e-12, seed)
    return rep


def verify_bound_domination(
    m: FiniteJointModel,
    f_set: Sequence[np.ndarray],
    n_max: int = 200,
    slack: float = 1e-9,
    mode: str = "full",
) -> Report:
    """Exact decay of the Metropolis-within-Gibbs scan vs the composed bound.

    Component SPI constants are exact spectral gaps (worst slice for the
    Metropolised refreshes, right gap of P*P for the exact scan); the
    composed rate function must dominate ||P12^n f||^2 / ||f||^2_osc for
    every supplied f and every n <= n_max.
    """
    from .kstar import Linear, compose_mwg
    from .rates import RateBound

    g0, g1, g2 = m.component_gaps()
    k = compose_mwg(Linear(g0), Linear(g1), Linear(g2), mode=mode)
    rb = RateBound(k)
    bounds = np.array([rb.rate_bound(n) for n in range(n_max + 1)])

    rep = Report()
    kern = m.kernel("P12")
    worst = -np.inf
    for f in f_set:
        f = np.asarray(f, dtype=float)
        f = f - float(m.mu @ f)
        osc_sq = (f.max() - f.min()) ** 2
        if osc_sq == 0.0:
            continue
        decay = l2_decay_exact(kern, f, n_max)
        worst = max(worst, float(np.max(decay / osc_sq - bounds)))
    rep.add(f"bound domination ({mode})", worst, slack)
    return rep
