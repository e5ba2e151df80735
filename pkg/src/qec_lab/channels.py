"""Quantum channels in Kraus and Choi form.

Conventions, fixed once for the whole package:

* Choi matrices are ordered output (x) input,
  ``X = sum_ij E(|i><j|) (x) |i><j|``, so a Kraus operator K contributes
  ``|K>><<K|`` with ``|K>> = K.reshape(-1)`` (row stacking).
  Trace preservation reads ``Tr_out X = I_in``.
* Superoperators act on column-stacked density matrices: ``A rho B`` maps to
  ``kron(B.T, A)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, InvalidDimension, InvalidRate, NotAChannel
from .fock import annihilation, hermitian_eig, kerr_unitary, matrix_exp, number_operator

__all__ = [
    "QuantumChannel",
    "ChoiMatrix",
    "identity_channel",
    "loss_channel",
    "kerr_channel",
    "joint_loss_kerr",
    "loss_kerr_generator",
    "choi_from_kraus",
    "kraus_from_choi",
    "choi_from_superoperator",
    "superoperator_from_kraus",
    "compose",
    "apply",
    "phase_rotation",
    "covariance_residual",
    "channel_to_json",
    "channel_from_json",
]

KRAUS_CUTOFF = 1e-12
TP_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QuantumChannel:
    """A CP map given by Kraus operators stacked as ``(count, dim_out, dim_in)``."""

    kraus: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kraus)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0:
            raise ContractViolation(f"Kraus stack must be (count, out, in), got {k.shape}")
        object.__setattr__(self, "kraus", _frozen(k))
        worst = float(np.linalg.eigvalsh(self.tp_deficit()).min())
        if worst < -TP_TOL:
            raise NotAChannel(f"sum K^dag K exceeds the identity by {-worst:.3e}")

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    def __len__(self):
        return self.kraus.shape[0]

    def __call__(self, rho):
        return apply(self, rho)

    def choi(self) -> "ChoiMatrix":
        return choi_from_kraus(self)

    def tp_deficit(self) -> np.ndarray:
        """``I - sum K^dag K``; PSD for trace-non-increasing maps."""
        s = np.einsum("koi,koj->ij", self.kraus.conj(), self.kraus)
        return np.eye(self.dim_in) - s

    def is_trace_preserving(self, tol: float = 1e-8) -> bool:
        return bool(np.abs(self.tp_deficit()).max() < tol)


@dataclass(frozen=True)
class ChoiMatrix:
    matrix: np.ndarray
    dim_in: int
    dim_out: int

    def __post_init__(self):
        m = _frozen(self.matrix)
        n = self.dim_in * self.dim_out
        if m.shape != (n, n):
            raise InvalidDimension(f"Choi matrix shape {m.shape} != {(n, n)}")
        object.__setattr__(self, "matrix", m)

    def partial_trace_out(self) -> np.ndarray:
        d_o, d_i = self.dim_out, self.dim_in
        return np.einsum("aiak->ik", self.matrix.reshape(d_o, d_i, d_o, d_i))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def distance(self, other: "ChoiMatrix") -> float:
        return float(np.abs(self.matrix - other.matrix).max())


def identity_channel(D: int) -> QuantumChannel:
    return QuantumChannel(np.eye(D)[None])


def choi_from_kraus(ch: QuantumChannel) -> ChoiMatrix:
    v = ch.kraus.reshape(len(ch), -1)
    return ChoiMatrix(v.T @ v.conj(), ch.dim_in, ch.dim_out)


def kraus_from_choi(X, dim_in: int | None = None, dim_out: int | None = None,
                    cutoff: float = KRAUS_CUTOFF) -> QuantumChannel:
    """Minimal Kraus decomposition from the Choi eigenvectors.

    Raises
    ------
    NotAChannel
        If the Choi matrix has an eigenvalue below -1e-8.
    """
    if isinstance(X, ChoiMatrix):
        dim_in, dim_out, X = X.dim_in, X.dim_out, X.matrix
    if dim_in is None or dim_out is None:
        raise InvalidDimension("dim_in and dim_out are required for a bare Choi array")
    w, V = hermitian_eig(np.asarray(X), tol=1e-8)
    if w[-1] < -1e-8:
        raise NotAChannel(f"Choi matrix has eigenvalue {w[-1]:.3e} < 0")
    keep = w > cutoff
    if not keep.any():
        keep[0] = True
    K = (V[:, keep] * np.sqrt(np.clip(w[keep], 0.0, None))).T
    return QuantumChannel(K.reshape(-1, dim_out, dim_in))


def superoperator_from_kraus(ch: QuantumChannel) -> np.ndarray:
    """Column-stacking superoperator ``sum_k conj(K) (x) K``."""
    K = ch.kraus
    n_out, n_in = ch.dim_out, ch.dim_in
    S = np.einsum("kab,kcd->acbd", K.conj(), K)
    return S.reshape(n_out * n_out, n_in * n_in)


def choi_from_superoperator(S: np.ndarray, dim_in: int, dim_out: int) -> ChoiMatrix:
    """Reshuffle a column-stacking superoperator into an out (x) in Choi matrix."""
    S4 = np.asarray(S).reshape(dim_out, dim_out, dim_in, dim_in)  # [c_o, r_o, c_i, r_i]
    X = np.einsum("qpji->piqj", S4).reshape(dim_out * dim_in, dim_out * dim_in)
    return ChoiMatrix(0.5 * (X + X.conj().T), dim_in, dim_out)


def compose(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    """``a o b`` (b acts first).

    Kraus products ``A_i B_j`` are returned directly while their number stays
    at most ``dim_in * dim_out``; beyond that the composition is re-extracted
    from its Choi matrix to keep the Kraus list minimal.
    """
    if a.dim_in != b.dim_out:
        raise InvalidDimension(f"cannot compose: {a.dim_in} != {b.dim_out}")
    count = len(a) * len(b)
    d_in, d_out = b.dim_in, a.dim_out
    if count <= d_in * d_out:
        K = np.einsum("iab,jbc->ijac", a.kraus, b.kraus).reshape(count, d_out, d_in)
        return QuantumChannel(K)
    # |A B>> = (A (x) I_in) |B>>
    Bv = b.kraus.reshape(len(b), b.dim_out, d_in)
    AB = np.einsum("iab,jbc->ijac", a.kraus, Bv) if count <= 4096 else None
    if AB is not None:
        v = AB.reshape(count, -1)
        X = v.T @ v.conj()
    else:
        Xb = choi_from_kraus(b).matrix.reshape(b.dim_out, d_in, b.dim_out, d_in)
        X = np.einsum("iab,bjck,idc->ajdk", a.kraus, Xb, a.kraus.conj(), optimize=True)
        X = X.reshape(d_out * d_in, d_out * d_in)
    return kraus_from_choi(0.5 * (X + X.conj().T), d_in, d_out)


def apply(ch: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise InvalidDimension(f"state shape {rho.shape} does not match dim_in={ch.dim_in}")
    return np.einsum("kab,bc,kdc->ad", ch.kraus, rho, ch.kraus.conj(), optimize=True)


def _check_rate(gamma):
    if not 0.0 <= gamma < 1.0:
        raise InvalidRate(f"loss rate must satisfy 0 <= gamma < 1, got {gamma}")


def loss_channel(gamma: float, D: int, k_max: int | None = None) -> QuantumChannel:
    """Excitation loss, ``E_k = sqrt(gamma^k / k!) (1-gamma)^(n/2) a^k``."""
    _check_rate(gamma)
    if k_max is None:
        k_max = D - 1
    if not 0 <= k_max <= D - 1:
        raise InvalidDimension(f"k_max must lie in [0, {D - 1}], got {k_max}")
    n = np.arange(D)
    ops = np.zeros((k_max + 1, D, D), dtype=complex)
    for k in range(k_max + 1):
        # <m-k| E_k |m> = sqrt(C(m,k) gamma^k (1-gamma)^(m-k))
        m = n[k:]
        with np.errstate(divide="ignore"):
            logc = (
                np.array([math.lgamma(x + 1) - math.lgamma(x - k + 1) - math.lgamma(k + 1) for x in m])
                + (k * math.log(gamma) if gamma > 0 else (0.0 if k == 0 else -np.inf))
                + (m - k) * math.log1p(-gamma)
            )
        ops[k, m - k, m] = np.exp(0.5 * logc)
    return QuantumChannel(ops)


def kerr_channel(Kt: float, D: int) -> QuantumChannel:
    """Unitary Kerr evolution ``exp(i Kt n^2 / 2)``."""
    return QuantumChannel(kerr_unitary(D, Kt / 2.0)[None])


def loss_kerr_generator(gamma: float, Kt: float, D: int) -> np.ndarray:
    """Column-stacking generator whose exponential is the joint loss+Kerr channel.

    ``L(rho) = i (Kt/2) [n^2, rho] + kappa (a rho a^dag - {n, rho}/2)``
    with ``kappa = -ln(1 - gamma)``.  The Hamiltonian sign makes the
    ``gamma = 0`` limit equal :func:`kerr_channel`.
    """
    _check_rate(gamma)
    a = annihilation(D)
    n = number_operator(D)
    n2 = n @ n
    I = np.eye(D)
    kappa = -math.log1p(-gamma)
    ham = 0.5j * Kt * (np.kron(I, n2) - np.kron(n2.T, I))
    diss = kappa * (np.kron(a.conj(), a) - 0.5 * (np.kron(I, n) + np.kron(n.T, I)))
    return ham + diss


def joint_loss_kerr(gamma: float, Kt: float, D: int, cutoff: float = KRAUS_CUTOFF) -> QuantumChannel:
    S = matrix_exp(loss_kerr_generator(gamma, Kt, D))
    return kraus_from_choi(choi_from_superoperator(S, D, D), cutoff=cutoff)


def phase_rotation(theta: float, D: int) -> np.ndarray:
    """``V_theta = exp(i theta n)``."""
    return np.diag(np.exp(1j * theta * np.arange(D)))


def covariance_residual(ch: QuantumChannel, theta: float, rho: np.ndarray) -> float:
    """``max|N(V rho V^dag) - V N(rho) V^dag|`` for the phase rotation V."""
    V = phase_rotation(theta, ch.dim_in)
    Vo = phase_rotation(theta, ch.dim_out)
    lhs = apply(ch, V @ rho @ V.conj().T)
    rhs = Vo @ apply(ch, rho) @ Vo.conj().T
    return float(np.abs(lhs - rhs).max())


def _mat_to_json(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def _mat_from_json(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def channel_to_json(ch: QuantumChannel) -> str:
    doc = {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [_mat_to_json(K) for K in ch.kraus],
    }
    return json.dumps(doc)


def channel_from_json(text: str) -> QuantumChannel:
    doc = json.loads(text)
    ch = QuantumChannel(np.array([_mat_from_json(K) for K in doc["kraus"]]))
    if (ch.dim_in, ch.dim_out) != (doc["dim_in"], doc["dim_out"]):
        raise InvalidDimension("Kraus shapes disagree with the declared dimensions")
    return ch
