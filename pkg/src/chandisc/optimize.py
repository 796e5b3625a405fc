"""Shared optimization machinery: Hermitian / unitary / pure-state
parametrizations, a multi-start Nelder-Mead driver, and the two measured
relative entropy estimators (variational program and direct PVM search).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .errors import OptimizerFailure
from .linalg import PSD_TOL, hermitian_eigen
from .quantum import DensityMatrix, Povm, basis_pvm


@dataclass
class OptimizerConfig:
    """Knobs for every numerical maximization in the library.

    All channel-divergence and measured-entropy values produced under this
    config are certified lower bounds; raising the budgets tightens them.
    """

    restarts: int = 16
    max_iters: int = 400
    xatol: float = 1e-8
    fatol: float = 1e-10
    cross_check_tol: float = 1e-4
    seed: int = 0
    pvm_restarts: int = 8
    # extra deterministic starting vectors for the input-state search
    extra_starts: list = field(default_factory=list)

    def scaled(self, restarts: int | None = None, max_iters: int | None = None) -> "OptimizerConfig":
        return OptimizerConfig(
            restarts=restarts if restarts is not None else self.restarts,
            max_iters=max_iters if max_iters is not None else self.max_iters,
            xatol=self.xatol,
            fatol=self.fatol,
            cross_check_tol=self.cross_check_tol,
            seed=self.seed,
            pvm_restarts=self.pvm_restarts,
            extra_starts=list(self.extra_starts),
        )


# ---------------------------------------------------------------------------
# Parametrizations
# ---------------------------------------------------------------------------


def hermitian_param_count(d: int) -> int:
    return d * d


def params_to_hermitian(theta: np.ndarray, d: int) -> np.ndarray:
    """Real vector of length d^2 -> Hermitian d x d matrix."""
    h = np.zeros((d, d), dtype=complex)
    idx = d
    h[np.diag_indices(d)] = theta[:d]
    for i in range(d):
        for j in range(i + 1, d):
            h[i, j] = theta[idx] + 1j * theta[idx + 1]
            h[j, i] = theta[idx] - 1j * theta[idx + 1]
            idx += 2
    return h


def hermitian_to_params(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    theta = np.empty(d * d)
    theta[:d] = np.real(np.diagonal(h))
    idx = d
    for i in range(d):
        for j in range(i + 1, d):
            theta[idx] = h[i, j].real
            theta[idx + 1] = h[i, j].imag
            idx += 2
    return theta


def hermitian_grad_to_params(g: np.ndarray) -> np.ndarray:
    """Gradient of f wrt the real parameters, given the matrix gradient G
    (Hermitian, df = Tr[G dH])."""
    d = g.shape[0]
    out = np.empty(d * d)
    out[:d] = np.real(np.diagonal(g))
    idx = d
    for i in range(d):
        for j in range(i + 1, d):
            out[idx] = 2.0 * g[i, j].real
            out[idx + 1] = 2.0 * g[i, j].imag
            idx += 2
    return out


def params_to_unitary(theta: np.ndarray, d: int, base: np.ndarray | None = None) -> np.ndarray:
    u = expm(1j * params_to_hermitian(theta, d))
    return u if base is None else u @ base


def params_to_pure_vector(theta: np.ndarray, d: int) -> np.ndarray:
    v = theta[:d] + 1j * theta[d:]
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        v = np.zeros(d, dtype=complex)
        v[0] = 1.0
        return v
    return v / nrm


def pure_vector_to_params(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag])


# ---------------------------------------------------------------------------
# Multi-start Nelder-Mead
# ---------------------------------------------------------------------------


def multistart_maximize(
    objective,
    dim: int,
    cfg: OptimizerConfig,
    starts: list[np.ndarray] | None = None,
    scale: float = 1.0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, float]:
    """Maximize objective(theta) with Nelder-Mead from several starts.

    Deterministic for a fixed cfg.seed; restarts are combined by max with
    the lowest restart index winning ties.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    pts = list(starts or [])
    while len(pts) < cfg.restarts:
        pts.append(scale * rng.standard_normal(dim))
    best_x, best_f = None, -math.inf
    failures = 0
    for x0 in pts:
        try:
            res = minimize(
                lambda t: -objective(t),
                np.asarray(x0, dtype=float),
                method="Nelder-Mead",
                options={
                    "maxiter": cfg.max_iters * dim,
                    "xatol": cfg.xatol,
                    "fatol": cfg.fatol,
                },
            )
        except (ValueError, FloatingPointError):
            failures += 1
            continue
        if -res.fun > best_f:
            best_f = -res.fun
            best_x = res.x
    if best_x is None:
        raise OptimizerFailure(f"all {failures} restarts failed")
    # one polishing pass from the incumbent
    res = minimize(
        lambda t: -objective(t),
        best_x,
        method="Nelder-Mead",
        options={"maxiter": cfg.max_iters * dim, "xatol": cfg.xatol * 0.1, "fatol": cfg.fatol * 0.1},
    )
    if -res.fun > best_f:
        best_f, best_x = -res.fun, res.x
    return best_x, best_f


# ---------------------------------------------------------------------------
# Measured relative entropy estimators
# ---------------------------------------------------------------------------


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """Classical KL in nats; +inf on support mismatch."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 1e-15
    if np.any(q[mask] <= 1e-300):
        return math.inf
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def _safe_log_state(rho: np.ndarray) -> np.ndarray:
    w, v = hermitian_eigen(rho)
    w = np.maximum(w, 1e-12)
    return (v * np.log(w)) @ v.conj().T


def variational_measured(
    rho0: np.ndarray, rho1: np.ndarray, gtol: float = 1e-10
) -> tuple[float, np.ndarray]:
    """Concave program sup_H Tr[rho0 H] + 1 - Tr[rho1 exp(H)].

    The optimum equals the measured relative entropy; any iterate gives a
    lower bound.  Returns (value in nats, optimal omega = exp(H)).
    """
    d = rho0.shape[0]

    def negf_and_grad(theta: np.ndarray):
        h = params_to_hermitian(theta, d)
        lam, u = np.linalg.eigh(h)
        lam = np.clip(lam, -200.0, 200.0)
        elam = np.exp(lam)
        b = u.conj().T @ rho1 @ u
        # divided differences of exp on the spectrum
        diff = lam[:, None] - lam[None, :]
        phi = np.where(
            np.abs(diff) > 1e-12,
            (elam[:, None] - elam[None, :]) / np.where(np.abs(diff) > 1e-12, diff, 1.0),
            0.5 * (elam[:, None] + elam[None, :]),
        )
        trace_exp = float(np.sum(np.real(np.diagonal(b)) * elam))
        f = float(np.trace(rho0 @ h).real) + 1.0 - trace_exp
        g = rho0 - u @ (b * phi) @ u.conj().T
        g = 0.5 * (g + g.conj().T)
        return -f, -hermitian_grad_to_params(g)

    theta0 = hermitian_to_params(_safe_log_state(rho0) - _safe_log_state(rho1))
    res = minimize(
        negf_and_grad,
        theta0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 2000, "gtol": gtol, "ftol": 1e-15},
    )
    res2 = minimize(
        negf_and_grad,
        np.zeros(d * d),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 2000, "gtol": gtol, "ftol": 1e-15},
    )
    if res2.fun < res.fun:
        res = res2
    h = params_to_hermitian(res.x, d)
    lam, u = np.linalg.eigh(h)
    omega = (u * np.exp(np.clip(lam, -200.0, 200.0))) @ u.conj().T
    return float(-res.fun), omega


def basis_kl(basis: np.ndarray, rho0: np.ndarray, rho1: np.ndarray) -> float:
    """Classical KL of the two outcome distributions in a rank-one PVM built
    from the columns of basis."""
    p = np.maximum(np.real(np.diagonal(basis.conj().T @ rho0 @ basis)), 0.0)
    q = np.maximum(np.real(np.diagonal(basis.conj().T @ rho1 @ basis)), 0.0)
    p = p / max(p.sum(), 1e-300)
    q = q / max(q.sum(), 1e-300)
    return kl_divergence(p, q)


# NM over the full unitary group is only worthwhile for small systems; above
# this dimension the search degrades to evaluating the candidate bases.
_PVM_SEARCH_MAX_DIM = 6


def pvm_search_measured(
    rho0: np.ndarray,
    rho1: np.ndarray,
    cfg: OptimizerConfig,
    extra_bases: list[np.ndarray] | None = None,
) -> tuple[float, Povm]:
    """Maximize the classical KL of the outcome distributions over rank-one
    PVMs, parametrized as exp(i H) applied to a reference basis.

    Candidate reference bases always include the eigenbasis of
    log rho0 - log rho1 (optimal in the commuting case) plus any caller
    supplied bases, e.g. the eigenbasis of the variational optimizer's omega
    (whose basis KL always dominates the variational value)."""
    d = rho0.shape[0]
    npar = hermitian_param_count(d)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x9E)))

    _, base = hermitian_eigen(_safe_log_state(rho0) - _safe_log_state(rho1))
    bases = [base, np.eye(d, dtype=complex)]
    if extra_bases:
        bases = list(extra_bases) + bases

    best_val, best_u = -math.inf, None
    for base_u in bases:
        val = basis_kl(base_u, rho0, rho1)
        if math.isfinite(val) and val > best_val:
            best_val, best_u = val, base_u

    if d <= _PVM_SEARCH_MAX_DIM:

        def obj(theta):
            val = basis_kl(params_to_unitary(theta, d, best_u), rho0, rho1)
            return val if math.isfinite(val) else -1e6

        starts = [np.zeros(npar)]
        for _ in range(max(cfg.pvm_restarts - 1, 1)):
            starts.append(0.5 * rng.standard_normal(npar))
        sub = cfg.scaled(restarts=len(starts))
        x, val = multistart_maximize(obj, npar, sub, starts=starts, rng=rng)
        if val > best_val:
            best_val = val
            best_u = params_to_unitary(x, d, best_u)
    return best_val, basis_pvm(best_u, label="measured-witness")
