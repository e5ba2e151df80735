"""Truncated Fock-space linear algebra.

States are 1-d complex arrays of length D over |0>..|D-1>; operators are dense
D x D complex arrays.  The truncation is explicit: ``a a^dag - a^dag a = I``
only holds on the first D-1 levels.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

from .errors import ContractViolation, InvalidDimension, InvalidResidue

__all__ = [
    "ladder_operators",
    "annihilation",
    "number_operator",
    "fock_state",
    "kerr_unitary",
    "mod_projector",
    "hermitian_eig",
    "matrix_exp",
    "displacement",
    "parity",
]


def annihilation(D: int) -> np.ndarray:
    if D < 2:
        raise InvalidDimension(f"truncation dimension must be >= 2, got {D}")
    return np.diag(np.sqrt(np.arange(1, D, dtype=float)), 1).astype(complex)


def number_operator(D: int) -> np.ndarray:
    return np.diag(np.arange(D, dtype=float)).astype(complex)


def ladder_operators(D: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(a, n)`` with ``<n-1|a|n> = sqrt(n)`` and ``n = diag(0..D-1)``."""
    a = annihilation(D)
    return a, number_operator(D)


def fock_state(n: int, D: int) -> np.ndarray:
    if not 0 <= n < D:
        raise InvalidDimension(f"|{n}> is outside the truncation D={D}")
    v = np.zeros(D, dtype=complex)
    v[n] = 1.0
    return v


def kerr_unitary(D: int, c: float) -> np.ndarray:
    """Diagonal unitary ``exp(i c n^2)``."""
    if D < 1:
        raise InvalidDimension(f"dimension must be >= 1, got {D}")
    n = np.arange(D, dtype=float)
    # reduce the phase mod 2pi before exponentiating; n^2 c gets large
    phase = np.mod(c * n * n, 2 * np.pi)
    return np.diag(np.exp(1j * phase))


def mod_projector(D: int, r: int, S: int) -> np.ndarray:
    """Projector onto Fock states with ``n = r (mod S)``."""
    if S < 1:
        raise InvalidResidue(f"modulus must be >= 1, got {S}")
    if not 0 <= r < S:
        raise InvalidResidue(f"residue {r} not in [0, {S})")
    return np.diag((np.arange(D) % S == r).astype(float)).astype(complex)


def parity(D: int) -> np.ndarray:
    return np.diag((-1.0) ** np.arange(D)).astype(complex)


def hermitian_eig(M: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises
    ------
    ContractViolation
        If ``M`` deviates from Hermitian by more than ``tol`` (max-abs).
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {M.shape}")
    dev = np.abs(M - M.conj().T).max() if M.size else 0.0
    if dev > tol:
        raise ContractViolation(f"matrix is not Hermitian (deviation {dev:.3e})")
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    return w[::-1].copy(), V[:, ::-1].copy()


def matrix_exp(M: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring, order-13 Pade)."""
    return la.expm(np.asarray(M))


def displacement(alpha: complex, D: int) -> np.ndarray:
    """Truncated ``D(alpha) = exp(alpha a^dag - alpha* a)``."""
    a = annihilation(D)
    return matrix_exp(alpha * a.conj().T - np.conj(alpha) * a)
