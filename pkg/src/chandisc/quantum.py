"""States, channels and measurements for finite-dimensional systems.

Channels are stored as Kraus operator lists with a cached unit-trace Choi
state.  The Choi convention used throughout: J = (id (x) N)(|w><w|) with |w>
the *normalized* maximally entangled vector, so J is itself a density matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatchError,
    DimensionOverflowError,
    InvalidStateError,
    NormalizationError,
)
from .linalg import PSD_TOL, frob, hermitian_eigen, kron, kron_all, partial_trace

STATE_TOL = 1e-9
CHANNEL_TOL = 1e-8
POVM_TOL = 1e-8


@dataclass
class DensityMatrix:
    """Hermitian PSD unit-trace matrix; validated on construction."""

    mat: np.ndarray
    label: str | None = None
    dim: int = field(init=False)

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        m = linalg.check_square(self.mat)
        if frob(m - m.conj().T) > STATE_TOL * max(1.0, frob(m)):
            raise InvalidStateError("state is not Hermitian within tolerance")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if w[0] < -PSD_TOL:
            raise InvalidStateError(f"state has negative eigenvalue {w[0]:.3e}")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > STATE_TOL * 10:
            raise InvalidStateError(f"state trace {tr} differs from 1")
        self.mat = 0.5 * (m + m.conj().T)
        self.dim = m.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)


def pure_state(vec: np.ndarray, label: str | None = None) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), label=label)


def max_entangled_vector(d: int) -> np.ndarray:
    v = np.zeros(d * d, dtype=complex)
    for i in range(d):
        v[i * d + i] = 1.0
    return v / math.sqrt(d)


def max_entangled_state(d: int) -> DensityMatrix:
    return pure_state(max_entangled_vector(d), label=f"max-entangled({d})")


@dataclass
class QuantumChannel:
    """CPTP map held as a Kraus list; Choi state cached lazily."""

    kraus: list[np.ndarray]
    label: str | None = None
    in_dim: int = field(init=False)
    out_dim: int = field(init=False)
    _choi: np.ndarray | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        self.kraus = [np.asarray(k, dtype=complex) for k in self.kraus]
        if not self.kraus:
            raise InvalidStateError("channel needs at least one Kraus operator")
        out_dim, in_dim = self.kraus[0].shape
        for k in self.kraus:
            if k.shape != (out_dim, in_dim):
                raise DimensionMismatchError("Kraus operators have mixed shapes")
        acc = sum(k.conj().T @ k for k in self.kraus)
        if frob(acc - np.eye(in_dim)) > CHANNEL_TOL * in_dim:
            raise InvalidStateError(
                f"sum K^dag K deviates from identity by {frob(acc - np.eye(in_dim)):.3e}"
            )
        self.in_dim = in_dim
        self.out_dim = out_dim

    def apply_raw(self, mat: np.ndarray) -> np.ndarray:
        return sum(k @ mat @ k.conj().T for k in self.kraus)

    @property
    def choi(self) -> np.ndarray:
        if self._choi is None:
            self._choi = choi_from_kraus(self)
        return self._choi

    def choi_state(self) -> DensityMatrix:
        return DensityMatrix(self.choi, label=f"choi({self.label})")


@dataclass
class Povm:
    """Finite family of PSD effects summing to the identity."""

    effects: list[np.ndarray]
    label: str | None = None
    dim: int = field(init=False)
    is_pvm: bool = field(init=False)

    def __post_init__(self):
        self.effects = [np.asarray(e, dtype=complex) for e in self.effects]
        dim = self.effects[0].shape[0]
        acc = np.zeros((dim, dim), dtype=complex)
        for e in self.effects:
            if e.shape != (dim, dim):
                raise DimensionMismatchError("POVM effects have mixed shapes")
            if frob(e - e.conj().T) > POVM_TOL * max(1.0, frob(e)):
                raise InvalidStateError("POVM effect is not Hermitian")
            w = np.linalg.eigvalsh(0.5 * (e + e.conj().T))
            if w[0] < -1e-8:
                raise InvalidStateError(f"POVM effect has eigenvalue {w[0]:.3e}")
            acc += e
        if frob(acc - np.eye(dim)) > POVM_TOL * dim:
            raise InvalidStateError("POVM effects do not sum to identity")
        self.dim = dim
        self.is_pvm = all(frob(e @ e - e) <= 1e-8 * dim for e in self.effects)

    @property
    def outcome_count(self) -> int:
        return len(self.effects)


def basis_pvm(basis: np.ndarray, label: str | None = None) -> Povm:
    """Rank-one PVM from the columns of a unitary."""
    cols = [basis[:, i] for i in range(basis.shape[1])]
    return Povm([np.outer(c, c.conj()) for c in cols], label=label)


def apply_channel(ch: QuantumChannel, state: DensityMatrix, ancilla_dim: int = 1) -> DensityMatrix:
    """(id_R (x) ch)(state) for a state on R (x) A with |R| = ancilla_dim."""
    if state.dim != ancilla_dim * ch.in_dim:
        raise DimensionMismatchError(
            f"state dim {state.dim} != ancilla {ancilla_dim} * channel input {ch.in_dim}"
        )
    if ancilla_dim == 1:
        out = ch.apply_raw(state.mat)
    else:
        eye = np.eye(ancilla_dim)
        out = sum(
            (k_l := np.kron(eye, k)) @ state.mat @ k_l.conj().T for k in ch.kraus
        )
    return DensityMatrix(out)


def choi_from_kraus(ch: QuantumChannel) -> np.ndarray:
    """Unit-trace Choi state J = (id (x) ch)(|w><w|), |w> normalized."""
    d = ch.in_dim
    j = np.zeros((d * ch.out_dim, d * ch.out_dim), dtype=complex)
    for k in ch.kraus:
        # (I (x) K)|w> has components K[b,a]/sqrt(d) at index (a, b)
        vec = (k.T / math.sqrt(d)).reshape(-1)
        j += np.outer(vec, vec.conj())
    return j


def tensor_power_channel(ch: QuantumChannel, l: int, dim_cap: int = linalg.DIM_CAP) -> QuantumChannel:
    """l-fold tensor power; Kraus set is all l-fold products."""
    if l < 1:
        raise ValueError("l must be >= 1")
    if ch.in_dim**l > dim_cap or ch.out_dim**l > dim_cap:
        raise DimensionOverflowError(f"tensor power {l} exceeds dimension cap")
    if l == 1:
        return ch
    kraus = [np.array([[1.0 + 0j]])]
    for _ in range(l):
        kraus = [kron(a, k, dim_cap) for a in kraus for k in ch.kraus]
    return QuantumChannel(kraus, label=f"{ch.label}^(x){l}" if ch.label else None)


def outcome_distribution(
    ch: QuantumChannel, state: DensityMatrix, ancilla_dim: int, m: Povm
) -> np.ndarray:
    """Probability vector p_y = Tr[(id (x) ch)(state) m_y]."""
    if m.dim != ancilla_dim * ch.out_dim:
        raise DimensionMismatchError(
            f"POVM dim {m.dim} != ancilla {ancilla_dim} * channel output {ch.out_dim}"
        )
    out = apply_channel(ch, state, ancilla_dim)
    p = np.array([float(np.trace(out.mat @ e).real) for e in m.effects])
    p = np.clip(p, 0.0, 1.0)
    s = p.sum()
    if abs(s - 1.0) > 1e-8:
        raise NormalizationError(f"outcome probabilities sum to {s}")
    return p / s


@dataclass
class FinitenessReport:
    """Support inclusion and max-divergence for both channel orderings."""

    finite_01: bool
    finite_10: bool
    max_div_01: float  # D_max(n0||n1) in nats, inf when not finite
    max_div_10: float

    @property
    def both_finite(self) -> bool:
        return self.finite_01 and self.finite_10


def validate_channel_pair(n0: QuantumChannel, n1: QuantumChannel) -> FinitenessReport:
    """Check max_i D_max(N_i||N_{1-i}) < inf via Choi support inclusion."""
    if (n0.in_dim, n0.out_dim) != (n1.in_dim, n1.out_dim):
        raise DimensionMismatchError("channel pair has mismatched dimensions")
    from .divergences import max_div_states

    j0, j1 = n0.choi_state(), n1.choi_state()
    d01 = max_div_states(j0, j1)
    d10 = max_div_states(j1, j0)
    return FinitenessReport(
        finite_01=d01.is_finite,
        finite_10=d10.is_finite,
        max_div_01=d01.value,
        max_div_10=d10.value,
    )


# ---------------------------------------------------------------------------
# Channel zoo
# ---------------------------------------------------------------------------

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def identity_channel(d: int = 2) -> QuantumChannel:
    return QuantumChannel([np.eye(d, dtype=complex)], label=f"identity({d})")


def depolarizing_channel(p: float) -> QuantumChannel:
    """Qubit depolarizing: rho -> (1-p) rho + p I/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    kraus = [math.sqrt(1 - 3 * p / 4) * _PAULI["I"]]
    kraus += [math.sqrt(p / 4) * _PAULI[s] for s in ("X", "Y", "Z")]
    return QuantumChannel([k for k in kraus if frob(k) > 0], label=f"depolarizing({p})")


def amplitude_damping_channel(gamma: float) -> QuantumChannel:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)
    return QuantumChannel([k0, k1], label=f"amplitude-damping({gamma})")


def dephasing_channel(p: float) -> QuantumChannel:
    """Qubit phase flip with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    kraus = [math.sqrt(1 - p) * _PAULI["I"], math.sqrt(p) * _PAULI["Z"]]
    return QuantumChannel([k for k in kraus if frob(k) > 0], label=f"dephasing({p})")


def replacer_channel(sigma: DensityMatrix, in_dim: int | None = None) -> QuantumChannel:
    """rho -> Tr(rho) sigma; reduces channel discrimination to states."""
    if in_dim is None:
        in_dim = sigma.dim
    w, v = hermitian_eigen(sigma.mat)
    kraus = []
    for i, lam in enumerate(w):
        if lam <= PSD_TOL:
            continue
        for j in range(in_dim):
            k = math.sqrt(lam) * np.outer(v[:, i], np.eye(in_dim)[j])
            kraus.append(k)
    return QuantumChannel(kraus, label=f"replacer({sigma.label})")


def classical_channel(stochastic: np.ndarray) -> QuantumChannel:
    """Embed a column-stochastic matrix W[y, x] as a quantum channel.

    Diagonal inputs map to diagonal outputs with the classical transition law.
    """
    w = np.asarray(stochastic, dtype=float)
    ny, nx = w.shape
    if np.any(w < 0) or frob(w.sum(axis=0) - np.ones(nx)) > 1e-10:
        raise ValueError("matrix must be column-stochastic")
    kraus = []
    for y in range(ny):
        for x in range(nx):
            if w[y, x] > 0:
                k = np.zeros((ny, nx), dtype=complex)
                k[y, x] = math.sqrt(w[y, x])
                kraus.append(k)
    return QuantumChannel(kraus, label="classical")


def bernoulli_replacer(q: float) -> QuantumChannel:
    """Replacer channel whose fixed output is diag(q, 1-q)."""
    sigma = DensityMatrix(np.diag([q, 1 - q]).astype(complex), label=f"bern({q})")
    return replacer_channel(sigma)


# ---------------------------------------------------------------------------
# Random objects
# ---------------------------------------------------------------------------


def _ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_pure_state(dim: int, rng: np.random.Generator) -> DensityMatrix:
    return pure_state(_ginibre(dim, 1, rng).reshape(-1))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    g = _ginibre(dim, rank or dim, rng)
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(dim, dim, rng))
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_basis_pvm(dim: int, rng: np.random.Generator) -> Povm:
    return basis_pvm(random_unitary(dim, rng), label="random-pvm")


def random_channel(
    in_dim: int,
    out_dim: int | None = None,
    env_dim: int | None = None,
    rng: np.random.Generator | None = None,
) -> QuantumChannel:
    """Haar-random isometry into out (x) env, environment traced out.

    With env_dim >= in_dim * out_dim the Choi state is full rank almost
    surely, which is the default.
    """
    if rng is None:
        rng = np.random.default_rng()
    out_dim = out_dim or in_dim
    env_dim = env_dim or in_dim * out_dim
    iso, _ = np.linalg.qr(_ginibre(out_dim * env_dim, in_dim, rng))
    # Kraus operators K_e = (I (x) <e|) V with V viewed on out (x) env
    kraus = [iso.reshape(out_dim, env_dim, in_dim)[:, e, :] for e in range(env_dim)]
    return QuantumChannel([k for k in kraus if frob(k) > 1e-14], label="random")
