"""Structured recoveries for ladder codes and the SDP-optimal recovery.

The one- and two-level recoveries map D -> D and are followed by
:func:`decoder` (D -> 2).  The optimal recovery is solved directly as a
D -> 2 map, so recovery and decoding are fused.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .channels import QuantumChannel, compose, kraus_from_choi, loss_channel
from .codes import BosonicCode
from .errors import ContractViolation, InvalidDimension, StructureViolation
from .fock import mod_projector
from .metrics import pipeline_fidelity
from .sdp import SdpResult, solve_choi_sdp, write_trace_csv

log = logging.getLogger(__name__)

__all__ = [
    "ErrorWordSet",
    "error_words",
    "check_ladder",
    "one_level_recovery",
    "two_level_recovery",
    "decoder",
    "recovery_fidelity",
    "recovery_objective",
    "functional_self_test",
    "OptimalRecovery",
    "solve_optimal_recovery",
    "optimal_recovery",
]

WORD_TOL = 1e-8


@dataclass(frozen=True)
class ErrorWordSet:
    """Normalized error words ``E_k |mu_s> / norm`` for ``k = 0..2S-1``.

    ``words[s, k]`` is a unit vector (or zero where ``norms[s, k] == 0``).
    """

    code: BosonicCode
    gamma: float
    words: np.ndarray
    norms: np.ndarray

    @property
    def S(self) -> int:
        return self.words.shape[1] // 2


def error_words(code: BosonicCode, S: int, gamma: float) -> ErrorWordSet:
    D = code.dim
    k_max = min(2 * S - 1, D - 1)
    E = loss_channel(gamma, D, k_max).kraus
    raw = np.einsum("kab,bs->ska", E, code.isometry)  # [s, k, a]
    words = np.zeros((2, 2 * S, D), complex)
    norms = np.zeros((2, 2 * S))
    nrm = np.linalg.norm(raw, axis=2)
    for s in range(2):
        for k in range(k_max + 1):
            if nrm[s, k] > WORD_TOL:
                norms[s, k] = nrm[s, k]
                words[s, k] = raw[s, k] / nrm[s, k]
    return ErrorWordSet(code, gamma, words, norms)


def check_ladder(code: BosonicCode, S: int, tol: float = 1e-12) -> None:
    """Require ket0 on ``n = 0 (mod 2S)`` and ket1 on ``n = S (mod 2S)``."""
    n = np.arange(code.dim)
    off0 = np.abs(code.ket0[n % (2 * S) != 0]).max(initial=0.0)
    off1 = np.abs(code.ket1[n % (2 * S) != S % (2 * S)]).max(initial=0.0)
    if max(off0, off1) > tol:
        raise StructureViolation(
            f"{code.label} is not supported on the mod-{2 * S} ladders (stray amplitude {max(off0, off1):.2e})"
        )


def _householder(u, v):
    """Unitary reflection that maps unit vector ``u`` to ``v`` (``<v|u>`` real)."""
    w = u - v
    nw = np.linalg.norm(w)
    D = u.size
    if nw < 1e-14:
        return np.eye(D, dtype=complex)
    w = w / nw
    return np.eye(D, dtype=complex) - 2 * np.outer(w, w.conj())


def one_level_recovery(code: BosonicCode, S: int, gamma: float) -> QuantumChannel:
    """R1: ``R_i = U_i Pi_{i mod S}`` for ``i = 0..S-1``.

    ``U_i`` is a unitary taking the error words in residue class i
    (``k = (S - i) mod S`` losses) back to the codewords.  It exchanges
    ``|mu_s^k>`` and ``|mu_s>`` for i != 0 and reflects ``|mu_s^0>`` onto
    ``|mu_s>`` for i = 0; everything else is left alone.
    """
    check_ladder(code, S)
    ew = error_words(code, S, gamma)
    D = code.dim
    kraus = []
    for i in range(S):
        k = (S - i) % S
        U = np.eye(D, dtype=complex)
        for s in range(2):
            if ew.norms[s, k] == 0:
                continue
            mu = code.codeword(s)
            w = ew.words[s, k]
            if i == 0:
                # the two reflections act on orthogonal ladders and commute
                U = _householder(w, mu) @ U
            else:
                U = U - np.outer(w, w.conj()) - np.outer(mu, mu.conj())
                U = U + np.outer(mu, w.conj()) + np.outer(w, mu.conj())
        kraus.append(U @ mod_projector(D, i, S))
    return QuantumChannel(np.array(kraus))


def two_level_recovery(code: BosonicCode, S: int, gamma: float) -> QuantumChannel:
    """R2: first-level and second-level restoring maps plus a completion.

    First level, k = 0..S-1: ``R_k = sum_s |mu_s><mu_s^k|``.
    Second level: ``R_{S+k} = sum_s |mu_sbar><nu_sbar^k|`` with
    ``nu_sbar^k`` the part of ``mu_sbar^{S+k}`` orthogonal to ``mu_s^k``.
    The completion ``I - sum P`` keeps everything else in place.
    """
    check_ladder(code, S)
    ew = error_words(code, S, gamma)
    D = code.dim
    kraus = []
    P_total = np.zeros((D, D), complex)
    for k in range(S):
        R = np.zeros((D, D), complex)
        for s in range(2):
            if ew.norms[s, k] == 0:
                continue
            w = ew.words[s, k]
            R += np.outer(code.codeword(s), w.conj())
            P_total += np.outer(w, w.conj())
        if np.abs(R).max() > 0:
            kraus.append(R)
    for k in range(S):
        R = np.zeros((D, D), complex)
        for s in range(2):
            sb = 1 - s
            if ew.norms[sb, S + k] == 0:
                continue
            hi = ew.words[sb, S + k]
            lo = ew.words[s, k]
            nu = hi - np.vdot(lo, hi) * lo
            nn = np.linalg.norm(nu)
            if nn < WORD_TOL:
                continue
            nu = nu / nn
            R += np.outer(code.codeword(sb), nu.conj())
            P_total += np.outer(nu, nu.conj())
        if np.abs(R).max() > 0:
            kraus.append(R)
    kraus.append(np.eye(D) - P_total)
    return QuantumChannel(np.array(kraus))


def decoder(code: BosonicCode) -> QuantumChannel:
    """D -> 2 decode ``rho -> V^dag rho V + Tr[Q rho] I/2`` with Q the code complement."""
    V = code.isometry
    D = code.dim
    Qw, Qv = np.linalg.eigh(np.eye(D) - V @ V.conj().T)
    comp = Qv[:, Qw > 0.5]
    kraus = [V.conj().T]
    for j in range(comp.shape[1]):
        for a in range(2):
            K = np.zeros((2, D), complex)
            K[a] = comp[:, j].conj() / np.sqrt(2)
            kraus.append(K)
    return QuantumChannel(np.array(kraus))


def recovery_fidelity(code: BosonicCode, channel: QuantumChannel, recovery: QuantumChannel) -> float:
    """Channel fidelity of a pipeline; D -> D recoveries are followed by :func:`decoder`."""
    if recovery.dim_out != 2:
        recovery = compose(decoder(code), recovery)
    return pipeline_fidelity(code, channel, recovery)


def _noisy_encoding(code, channel):
    if channel.dim_in != code.dim:
        raise InvalidDimension(f"channel acts on {channel.dim_in}, code lives in {code.dim}")
    return np.einsum("kab,bs->kas", channel.kraus, code.isometry)  # F_k = E_k V


def recovery_objective(F: np.ndarray) -> np.ndarray:
    """``C = sum_k |F_k^dag>><<F_k^dag| / 4`` so that ``Tr[C X_R]`` is the fidelity."""
    v = np.conj(np.transpose(F, (0, 2, 1))).reshape(F.shape[0], -1)
    return 0.25 * (v.T @ v.conj())


def _random_channel(rng, d_in, d_out):
    n_kraus = -(-d_in // d_out) + 1
    G = rng.normal(size=(n_kraus * d_out, d_in)) + 1j * rng.normal(size=(n_kraus * d_out, d_in))
    Q, _ = np.linalg.qr(G)
    return QuantumChannel(Q.reshape(n_kraus, d_out, d_in))


def functional_self_test(F: np.ndarray, C: np.ndarray, trials: int = 3, seed: int = 0,
                         tol: float = 1e-10) -> float:
    """Compare ``Tr[C X]`` with the directly evaluated fidelity on random CPTP maps."""
    rng = np.random.default_rng(seed)
    d_in = F.shape[1]
    worst = 0.0
    for _ in range(trials):
        R = _random_channel(rng, d_in, 2)
        v = R.kraus.reshape(len(R), -1)
        X = v.T @ v.conj()
        lin = float(np.real(np.vdot(C, X)))
        K = np.einsum("jra,kas->jkrs", R.kraus, F).reshape(-1, 2, 2)
        direct = float(np.sum(np.abs(np.einsum("kii->k", K)) ** 2) / 4)
        worst = max(worst, abs(lin - direct))
    if worst > tol:
        raise ContractViolation(f"fidelity functional disagrees with direct evaluation by {worst:.2e}")
    return worst


@dataclass
class OptimalRecovery:
    recovery: QuantumChannel
    fidelity: float
    sdp: SdpResult
    support_dim: int


def _support_basis(F, rel_cutoff=1e-14):
    S = np.einsum("kas,kbs->ab", F, F.conj())
    w, V = np.linalg.eigh(0.5 * (S + S.conj().T))
    keep = w > rel_cutoff * max(w[-1], 1e-300)
    return V[:, keep]


def solve_optimal_recovery(
    code: BosonicCode,
    channel: QuantumChannel,
    warm_start: QuantumChannel | None = None,
    tol: float = 1e-11,
    reduce_support: bool = True,
    self_test: bool = True,
    trace_path=None,
) -> OptimalRecovery:
    """Maximize the channel fidelity over all CPTP recoveries D -> 2.

    With ``reduce_support`` the SDP is posed on the range of
    ``sum_k F_k F_k^dag``; states outside that range never occur, and the
    returned map sends them to ``I/2``.
    """
    return _solve_from_F(_noisy_encoding(code, channel), warm_start, tol, reduce_support,
                         self_test, trace_path)


def _solve_from_F(F, warm_start=None, tol=1e-11, reduce_support=True, self_test=True,
                  trace_path=None, real=False):
    D = F.shape[1]
    B = _support_basis(F) if reduce_support else np.eye(D, dtype=complex)
    r = B.shape[1]
    Fr = np.einsum("ar,kas->krs", B.conj(), F)
    C = recovery_objective(Fr)
    if self_test:
        functional_self_test(Fr, C)
    X0 = None
    if warm_start is not None:
        Kw = np.einsum("jab,br->jar", warm_start.kraus, B)
        v = Kw.reshape(len(warm_start), -1)
        X0 = v.T @ v.conj()
    res = solve_choi_sdp(C, 2, r, tol=tol, record_trace=trace_path is not None, X0=X0, real=real)
    if trace_path is not None:
        write_trace_csv(res, trace_path)
    Kr = kraus_from_choi(res.X, r, 2).kraus
    K = np.einsum("jar,br->jab", Kr, B.conj())
    if r < D:
        comp = np.linalg.svd(np.eye(D) - B @ B.conj().T)[0][:, : D - r]
        extra = np.zeros((2 * (D - r), 2, D), complex)
        for j in range(D - r):
            for a in range(2):
                extra[2 * j + a, a] = comp[:, j].conj() / np.sqrt(2)
        K = np.concatenate([K, extra])
    rec = QuantumChannel(K)
    Kp = np.einsum("jra,kas->jkrs", rec.kraus, F).reshape(-1, 2, 2)
    fid = float(np.sum(np.abs(np.einsum("kii->k", Kp)) ** 2) / 4)
    return OptimalRecovery(rec, fid, res, r)


def optimal_recovery(code: BosonicCode, channel: QuantumChannel, D: int | None = None,
                     **kwargs) -> tuple[QuantumChannel, float]:
    """SDP-optimal recovery (decode folded in) and its fidelity."""
    if D is not None and D != code.dim:
        raise InvalidDimension(f"D={D} does not match the code dimension {code.dim}")
    out = solve_optimal_recovery(code, channel, **kwargs)
    return out.recovery, out.fidelity
