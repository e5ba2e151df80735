"""QEC matrix, Knill-Laflamme test, channel fidelity, effective qubit channels, Wigner grids."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre

from .channels import QuantumChannel, choi_from_kraus
from .codes import BosonicCode
from .errors import InvalidDimension

__all__ = [
    "QecMatrix",
    "qec_matrix",
    "qec_matrix_from_decomposition",
    "kl_check",
    "channel_fidelity",
    "channel_fidelity_direct",
    "pipeline_kraus",
    "pipeline_fidelity",
    "EffectiveQubitChannel",
    "effective_qubit_channel",
    "qubit_channel_from_choi",
    "wigner_grid",
    "wigner_integral",
    "write_wigner_csv",
]


def _kraus_stack(kraus):
    if isinstance(kraus, QuantumChannel):
        return kraus.kraus
    return np.asarray([np.asarray(K) for K in kraus], dtype=complex)


@dataclass(frozen=True)
class QecMatrix:
    """``entries[k, l, s, t] = <mu_s| E_k^dag E_l |mu_t>``."""

    entries: np.ndarray

    @property
    def k_max(self) -> int:
        return self.entries.shape[0] - 1

    def __getitem__(self, idx):
        return self.entries[idx]

    def hermiticity_error(self) -> float:
        M = self.entries
        return float(np.abs(M - M.transpose(1, 0, 3, 2).conj()).max())


def qec_matrix(code: BosonicCode, kraus, k_max: int | None = None) -> QecMatrix:
    """QEC matrix by direct inner products of the error words ``E_k |mu_s>``."""
    E = _kraus_stack(kraus)
    if k_max is not None:
        E = E[: k_max + 1]
    if E.shape[2] != code.dim:
        raise InvalidDimension(f"Kraus operators act on {E.shape[2]}, code lives in {code.dim}")
    W = np.einsum("kab,bs->kas", E, code.isometry)
    return QecMatrix(np.einsum("kas,lat->klst", W.conj(), W))


def qec_matrix_from_decomposition(code: BosonicCode, kraus, k_max: int | None = None) -> QecMatrix:
    """Same matrix from the ``(c_n, theta_n)`` double sum over Fock pairs ``(m, n)``."""
    E = _kraus_stack(kraus)
    if k_max is not None:
        E = E[: k_max + 1]
    c, th = code.decomposition()
    G = np.einsum("kam,lan->klmn", E.conj(), E)  # <m|E_k^dag E_l|n>
    # c_m^s c_n^t exp(i(theta_n^t - theta_m^s))
    amp = np.einsum("sm,tn->stmn", c, c) * np.exp(1j * (th[None, :, None, :] - th[:, None, :, None]))
    return QecMatrix(np.einsum("stmn,klmn->klst", amp, G))


def kl_check(M: QecMatrix, tol: float = 1e-9) -> tuple[bool, float]:
    """Largest deviation of any 2x2 block ``M[k, l]`` from ``c_kl I``.

    ``c_kl`` is the mean of the block diagonal.
    """
    B = M.entries
    c = 0.5 * (B[:, :, 0, 0] + B[:, :, 1, 1])
    dev = B - c[:, :, None, None] * np.eye(2)
    violation = float(np.abs(dev).max())
    return violation < tol, violation


def _check_qubit(ch):
    if ch.dim_in != 2 or ch.dim_out != 2:
        raise InvalidDimension(f"expected a qubit channel, got {ch.dim_in}->{ch.dim_out}")


def channel_fidelity(ch: QuantumChannel) -> float:
    """Entanglement fidelity ``sum_k |Tr K_k|^2 / 4``."""
    _check_qubit(ch)
    tr = np.einsum("kii->k", ch.kraus)
    return float(np.sum(np.abs(tr) ** 2) / 4)


def channel_fidelity_direct(ch: QuantumChannel) -> float:
    """``<Psi| (I (x) E)(|Psi><Psi|) |Psi>`` with ``Psi = (|00> + |11>)/sqrt 2``."""
    _check_qubit(ch)
    psi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    rho = np.outer(psi, psi.conj())
    out = np.zeros((4, 4), complex)
    for K in ch.kraus:
        IK = np.kron(np.eye(2), K)
        out += IK @ rho @ IK.conj().T
    return float(np.real(psi.conj() @ out @ psi))


def pipeline_kraus(code: BosonicCode, channel: QuantumChannel, recovery: QuantumChannel) -> np.ndarray:
    """All 2x2 Kraus products ``R_j E_k V`` of a 2 -> D -> D -> 2 pipeline."""
    if recovery.dim_out != 2:
        raise InvalidDimension(f"recovery must map to a qubit, got dim_out={recovery.dim_out}")
    if channel.dim_in != code.dim or recovery.dim_in != channel.dim_out:
        raise InvalidDimension("pipeline dimensions do not chain")
    F = np.einsum("kab,bs->kas", channel.kraus, code.isometry)
    K = np.einsum("jra,kas->jkrs", recovery.kraus, F)
    return K.reshape(-1, 2, 2)


def pipeline_fidelity(code: BosonicCode, channel: QuantumChannel, recovery: QuantumChannel) -> float:
    K = pipeline_kraus(code, channel, recovery)
    tr = np.einsum("kii->k", K)
    return float(np.sum(np.abs(tr) ** 2) / 4)


@dataclass(frozen=True)
class EffectiveQubitChannel:
    """Canonical Kraus operators of a qubit channel, sorted by probability.

    ``probs[i] = Tr[K_i^dag K_i] / 2``.  ``excess`` is True when more than
    four Choi eigenvalues exceed 1e-10 (only possible for non-qubit input).
    """

    kraus: np.ndarray
    probs: np.ndarray
    excess: bool = False

    @property
    def total_probability(self) -> float:
        return float(self.probs.sum())

    def as_channel(self) -> QuantumChannel:
        return QuantumChannel(self.kraus)


def _canonical_phase(K):
    flat = K.reshape(-1)
    z = flat[np.argmax(np.abs(flat))]
    if abs(z) == 0:
        return K
    return K * (abs(z) / z)


def qubit_channel_from_choi(X: np.ndarray) -> EffectiveQubitChannel:
    """Eigen-decompose a 4x4 Choi matrix into four canonical Kraus operators."""
    X = 0.5 * (X + X.conj().T)
    w, V = np.linalg.eigh(X)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    excess = int(np.sum(w > 1e-10)) > 4
    K = np.array([_canonical_phase(math.sqrt(max(lam, 0.0)) * V[:, i].reshape(2, 2))
                  for i, lam in enumerate(w)])
    probs = np.einsum("kab,kab->k", K.conj(), K).real / 2
    idx = np.argsort(-probs, kind="stable")
    return EffectiveQubitChannel(K[idx], probs[idx], excess)


def effective_qubit_channel(code: BosonicCode, channel: QuantumChannel,
                            recovery: QuantumChannel) -> EffectiveQubitChannel:
    """Effective qubit channel of decode o recovery o noise o encode.

    ``recovery`` must already include the decode step (map D -> 2).
    """
    K = pipeline_kraus(code, channel, recovery)
    X = choi_from_kraus(QuantumChannel(K)).matrix
    return qubit_channel_from_choi(X)


def _displacement_elements(beta: np.ndarray, D: int) -> np.ndarray:
    """Exact ``<m|D(beta)|n>`` for m, n < D at every point of ``beta``.

    Returns an array of shape ``beta.shape + (D, D)``.
    """
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    m = np.arange(D)[:, None]
    n = np.arange(D)[None, :]
    lo = np.minimum(m, n)
    d = np.abs(m - n)
    lf = np.array([math.lgamma(k + 1) for k in range(D)])
    # sqrt(lo!/hi!) |beta|^d exp(-|beta|^2/2) L_lo^(d)(|beta|^2)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(np.abs(beta))[..., None, None]
        powr = np.where(d == 0, 0.0, d * logr)
    mag = np.exp(0.5 * (lf[lo] - lf[np.maximum(m, n)]) + powr - 0.5 * x[..., None, None])
    lag = eval_genlaguerre(lo, d, x[..., None, None])
    phase = np.where(m >= n, 1.0, (-1.0) ** d)
    ang = np.angle(beta)[..., None, None]
    # m >= n: beta^d ; m < n: (-beta*)^d
    ph = np.exp(1j * ang * (m - n)) * phase
    return mag * lag * ph


def wigner_grid(rho: np.ndarray, q_range=(-5.0, 5.0), p_range=(-5.0, 5.0), n_points: int = 101):
    """Wigner function ``W = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag]``.

    ``alpha = (q + i p)/sqrt 2``.  Uses ``D(alpha) Pi D(alpha)^dag = D(2 alpha) Pi``
    with exact displacement matrix elements.

    Returns
    -------
    q, p : 1-d grids
    W : array of shape ``(len(q), len(p))``, ``W[i, j]`` at ``(q[i], p[j])``
    """
    rho = np.asarray(rho, dtype=complex)
    D = rho.shape[0]
    q = np.linspace(*q_range, n_points)
    p = np.linspace(*p_range, n_points)
    alpha = (q[:, None] + 1j * p[None, :]) / math.sqrt(2)
    par = (-1.0) ** np.arange(D)
    W = np.empty(alpha.shape)
    for i in range(alpha.shape[0]):
        Dm = _displacement_elements(2 * alpha[i], D)  # (n_p, D, D) as [m, n]
        # Tr[rho D Pi] = sum_{m,n} rho[n, m] <m|D|n> (-1)^n
        W[i] = np.real(np.einsum("nm,jmn,n->j", rho, Dm, par))
    return q, p, (2 / math.pi) * W


def wigner_integral(q, p, W) -> float:
    """Riemann sum of W over ``d^2 alpha = dq dp / 2``."""
    dq = q[1] - q[0]
    dp = p[1] - p[0]
    return float(W.sum() * dq * dp / 2)


def write_wigner_csv(path, q, p, W) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q", "p", "w"])
        for i, qi in enumerate(q):
            for j, pj in enumerate(p):
                w.writerow([f"{qi:.17g}", f"{pj:.17g}", f"{W[i, j]:.17g}"])
