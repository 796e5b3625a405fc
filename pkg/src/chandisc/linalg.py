"""Dense complex matrix kernel: Hermitian eigendecompositions, matrix
functions, Kronecker products and partial traces.

Everything downstream (states, channels, divergences) sits on top of these
few routines, so the tolerances used here are the global numerical knobs of
the whole library.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

# Absolute eigenvalue tolerance used everywhere a PSD check or a support
# projection occurs.
PSD_TOL = 1e-9

# Hard cap on matrix dimension produced by kron / tensor powers.
DIM_CAP = 4096

HERMITICITY_RTOL = 1e-9

from .errors import (
    DimensionMismatchError,
    DimensionOverflowError,
    NegativeEigenvalueError,
    NonSquareError,
    NotHermitianError,
)


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def check_square(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {h.shape}")
    return h


def hermitian_eigen(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary of eigenvectors as columns).
    The input is symmetrized internally; a deviation from Hermiticity
    beyond tolerance raises NotHermitianError.
    """
    h = check_square(h)
    dev = frob(h - h.conj().T)
    if dev > HERMITICITY_RTOL * max(1.0, frob(h)):
        raise NotHermitianError(f"matrix deviates from Hermiticity by {dev:.3e}")
    hs = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(hs)
    return w, v


def matrix_function(
    h: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    support_only: bool = False,
    check_positive: bool = False,
) -> np.ndarray:
    """Apply a real scalar function to a Hermitian matrix via its spectrum.

    With support_only set, eigenvalues below PSD_TOL are mapped to 0 instead
    of being passed through f (support-projection convention for log and
    fractional powers of rank-deficient states).  check_positive raises
    NegativeEigenvalueError when an eigenvalue falls below -PSD_TOL.
    """
    w, v = hermitian_eigen(h)
    if check_positive and w[0] < -PSD_TOL:
        raise NegativeEigenvalueError(f"eigenvalue {w[0]:.3e} below -{PSD_TOL}")
    if support_only:
        fw = np.zeros_like(w)
        mask = w > PSD_TOL
        fw[mask] = f(w[mask])
    else:
        fw = f(np.maximum(w, 0.0) if check_positive else w)
    return (v * fw) @ v.conj().T


def kron(a: np.ndarray, b: np.ndarray, dim_cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product with a configurable dimension cap."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] * b.shape[0] > dim_cap or a.shape[1] * b.shape[1] > dim_cap:
        raise DimensionOverflowError(
            f"kron result {a.shape[0] * b.shape[0]}x{a.shape[1] * b.shape[1]} "
            f"exceeds cap {dim_cap}"
        )
    return np.kron(a, b)


def kron_all(mats: list[np.ndarray], dim_cap: int = DIM_CAP) -> np.ndarray:
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = kron(out, m, dim_cap)
    return out


def partial_trace(m: np.ndarray, dims: list[int], keep: list[int]) -> np.ndarray:
    """Trace out the tensor factors not listed in keep.

    dims lists the factor dimensions in tensor order; keep holds the indices
    of the factors to retain.  The result acts on the kept factors in their
    original order.
    """
    m = check_square(m)
    dims = list(dims)
    total = int(np.prod(dims))
    if total != m.shape[0]:
        raise DimensionMismatchError(
            f"product of dims {dims} is {total}, matrix dim is {m.shape[0]}"
        )
    keep = sorted(keep)
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatchError(f"keep indices {keep} out of range for {dims}")
    n = len(dims)
    t = m.reshape(dims + dims)
    traced = 0
    for i in range(n):
        if i not in keep:
            axis = i - traced
            t = np.trace(t, axis1=axis, axis2=axis + n - traced)
            traced += 1
    d_keep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def support_projector(h: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Projector onto the span of eigenvectors with eigenvalue above tol."""
    w, v = hermitian_eigen(h)
    cols = v[:, w > tol]
    return cols @ cols.conj().T


def support_contained(a: np.ndarray, b: np.ndarray, tol: float = PSD_TOL) -> bool:
    """Whether supp(a) is contained in supp(b), both Hermitian PSD."""
    pb = support_projector(b, tol)
    # a restricted to the kernel of b must vanish
    residual = a - pb @ a @ pb
    return frob(residual) <= 1e-7 * max(1.0, frob(a))
