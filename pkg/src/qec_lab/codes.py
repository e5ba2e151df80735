"""Bosonic single-mode codes in a truncated Fock space.

A code is a pair of orthonormal logical codewords ``|mu_0>, |mu_1>``.  The
ladder families (binomial, cat and their sign-altered versions) put the two
codewords on disjoint Fock ladders ``n = 0 (mod 2S)`` and ``n = S (mod 2S)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import QuantumChannel
from .errors import InvalidCode, InvalidDimension, TruncationTooSmall
from .fock import kerr_unitary

__all__ = [
    "BosonicCode",
    "binomial_code",
    "sab_code",
    "cat_code",
    "sac_code",
    "sqrt17_code",
    "custom_code",
    "mean_photon",
    "encoding_channel",
    "default_dim",
    "cat_default_dim",
    "sign_alteration_unitary",
    "code_from_json",
]

NORM_TOL = 1e-10
TAIL_TOL = 1e-8


def _frozen_vec(v):
    v = np.array(v, dtype=complex).reshape(-1)
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class BosonicCode:
    """Logical codewords ``ket0``, ``ket1`` over Fock states ``|0>..|dim-1>``.

    Construction validates normalization and orthogonality; ``check_tail``
    additionally requires less than 1e-8 probability on the top two levels,
    which matters for codes whose exact support is infinite.
    """

    ket0: np.ndarray
    ket1: np.ndarray
    label: str = "custom"
    params: dict = field(default_factory=dict)
    check_tail: bool = False

    def __post_init__(self):
        k0, k1 = _frozen_vec(self.ket0), _frozen_vec(self.ket1)
        if k0.shape != k1.shape:
            raise InvalidCode(f"codeword lengths differ: {k0.size} vs {k1.size}")
        for name, k in (("ket0", k0), ("ket1", k1)):
            if abs(np.linalg.norm(k) - 1.0) > NORM_TOL:
                raise InvalidCode(f"{name} is not normalized (norm {np.linalg.norm(k):.12f})")
        ov = abs(np.vdot(k0, k1))
        if ov > NORM_TOL:
            raise InvalidCode(f"codewords are not orthogonal (|<0|1>| = {ov:.3e})")
        if self.check_tail:
            tail = max(self.tail(k0), self.tail(k1))
            if tail >= TAIL_TOL:
                raise TruncationTooSmall(
                    f"{self.label}: {tail:.2e} probability on the top two levels of D={k0.size}"
                )
        object.__setattr__(self, "ket0", k0)
        object.__setattr__(self, "ket1", k1)
        object.__setattr__(self, "params", dict(self.params))

    @staticmethod
    def tail(k):
        return float(np.sum(np.abs(k[-2:]) ** 2))

    @property
    def dim(self) -> int:
        return self.ket0.size

    @property
    def isometry(self) -> np.ndarray:
        """Encoding isometry ``V = |mu_0><0| + |mu_1><1|`` as a D x 2 array."""
        return np.stack([self.ket0, self.ket1], axis=1)

    def codeword(self, sigma: int) -> np.ndarray:
        return self.ket0 if sigma == 0 else self.ket1

    def projector(self) -> np.ndarray:
        V = self.isometry
        return V @ V.conj().T

    def decomposition(self):
        """Magnitudes ``c_n^sigma`` and phases ``theta_n^sigma`` of both codewords."""
        V = self.isometry
        return np.abs(V).T, np.angle(V).T

    def transformed(self, U: np.ndarray, label: str | None = None, **params) -> "BosonicCode":
        """Code with both codewords mapped by the unitary ``U``."""
        p = dict(self.params)
        p.update(params)
        return BosonicCode(U @ self.ket0, U @ self.ket1, label or self.label, p)

    def with_dim(self, D: int) -> "BosonicCode":
        """Zero-pad or truncate to dimension D; truncation must drop only zeros."""
        if D < self.dim and np.abs(self.isometry[D:]).max() > 0:
            raise TruncationTooSmall(f"{self.label} has support above D={D}")
        k0 = np.zeros(D, complex)
        k1 = np.zeros(D, complex)
        m = min(D, self.dim)
        k0[:m], k1[:m] = self.ket0[:m], self.ket1[:m]
        return BosonicCode(k0, k1, self.label, self.params)

    def to_json(self) -> str:
        doc = {
            "label": self.label,
            "dim": self.dim,
            "params": self.params,
            "ket0": [[float(z.real), float(z.imag)] for z in self.ket0],
            "ket1": [[float(z.real), float(z.imag)] for z in self.ket1],
        }
        return json.dumps(doc)


def code_from_json(text: str) -> BosonicCode:
    doc = json.loads(text)
    k0 = np.array([complex(re, im) for re, im in doc["ket0"]])
    k1 = np.array([complex(re, im) for re, im in doc["ket1"]])
    if k0.size != doc["dim"]:
        raise InvalidDimension("codeword length disagrees with the declared dim")
    return BosonicCode(k0, k1, doc.get("label", "custom"), doc.get("params", {}))


def default_dim(N: int, S: int) -> int:
    """Default truncation for binomial-type codes, ``N S + 2 S + 5``."""
    return N * S + 2 * S + 5


def _binomial_amplitudes(N, S, D, signed):
    if N < 1 or S < 1:
        raise InvalidCode(f"binomial code needs N, S >= 1, got N={N}, S={S}")
    if D is None:
        D = default_dim(N, S)
    if D <= N * S:
        raise TruncationTooSmall(f"D={D} must exceed N*S={N * S}")
    k0 = np.zeros(D, complex)
    k1 = np.zeros(D, complex)
    pref = 2.0 ** (-(N - 1) / 2)
    for p in range(N + 1):
        c = pref * math.sqrt(math.comb(N, p))
        if p % 2 == 0:
            k0[p * S] = c * ((-1) ** (p // 2) if signed else 1)
        else:
            k1[p * S] = c
    return k0, k1


def binomial_code(N: int, S: int, D: int | None = None) -> BosonicCode:
    """bin(N, S): ``2^{-(N-1)/2} sqrt(C(N,p))`` on ``|pS>``, p even / odd."""
    k0, k1 = _binomial_amplitudes(N, S, D, signed=False)
    return BosonicCode(k0, k1, f"bin({N},{S})", {"N": N, "S": S})


def sab_code(N: int, S: int, D: int | None = None) -> BosonicCode:
    """Sign-altered binomial code: ket0 picks up ``(-1)^{p/2}`` on ``|pS>``."""
    k0, k1 = _binomial_amplitudes(N, S, D, signed=True)
    return BosonicCode(k0, k1, f"sab({N},{S})", {"N": N, "S": S})


def sign_alteration_unitary(D: int, S: int) -> np.ndarray:
    """``U_S = exp(i pi n^2 / (2S)^2)``, taking bin to sab and cat to sac."""
    return kerr_unitary(D, math.pi / (2 * S) ** 2)


def _cat_ladder(alpha, n0, S, n_max):
    """Unnormalized ``alpha^n / sqrt(n!)`` on ``n = n0 + 2 m S``, computed in logs."""
    n = np.arange(n0, n_max, 2 * S)
    logs = n * math.log(alpha) - 0.5 * np.array([math.lgamma(x + 1) for x in n])
    return n, logs


def _cat_amplitudes(alpha, S, D, signed):
    if alpha <= 0:
        raise InvalidCode(f"cat amplitude must be positive, got {alpha}")
    if S < 1:
        raise InvalidCode(f"S must be >= 1, got {S}")
    if D is None:
        D = cat_default_dim(alpha, S)
    # normalize over a ladder long enough that the neglected terms underflow
    n_big = max(D, int(alpha * alpha + 40 * alpha + 60))
    kets = []
    tails = []
    for n0 in (0, S):
        n, logs = _cat_ladder(alpha, n0, S, n_big)
        logs = logs - logs.max()
        w = np.exp(2 * logs)
        amp = np.sqrt(w / w.sum())
        if signed and n0 == 0:
            amp = amp * (-1.0) ** np.arange(amp.size)
        inside = n < D
        tails.append(float(np.sum(amp[n >= D - 2] ** 2)))
        k = np.zeros(D, complex)
        k[n[inside]] = amp[inside]
        kets.append(k / np.linalg.norm(k))
    return kets[0], kets[1], max(tails), D


def cat_default_dim(alpha: float, S: int, tol: float = 1e-10) -> int:
    """Smallest D, scanning up from ``ceil(alpha^2 + 8 alpha + 10)``, with ladder tail < tol."""
    D = math.ceil(alpha * alpha + 8 * alpha + 10)
    while True:
        n_big = max(D, int(alpha * alpha + 40 * alpha + 60))
        worst = 0.0
        for n0 in (0, S):
            n, logs = _cat_ladder(alpha, n0, S, n_big)
            w = np.exp(2 * (logs - logs.max()))
            worst = max(worst, float(w[n >= D - 2].sum() / w.sum()))
        if worst < tol:
            return D
        D += 1


def cat_code(alpha: float, S: int, D: int | None = None) -> BosonicCode:
    """Cat code spanned by ``|C_alpha^0>`` and ``|C_alpha^S>``."""
    k0, k1, tail, D = _cat_amplitudes(alpha, S, D, signed=False)
    if tail >= TAIL_TOL:
        raise TruncationTooSmall(f"cat({alpha},{S}) tail {tail:.2e} at D={D}")
    return BosonicCode(k0, k1, f"cat({alpha:g},{S})", {"alpha": float(alpha), "S": S})


def sac_code(alpha: float, S: int, D: int | None = None) -> BosonicCode:
    """Sign-altered cat code: ``(-1)^m`` on the ``|2mS>`` ladder of ket0."""
    k0, k1, tail, D = _cat_amplitudes(alpha, S, D, signed=True)
    if tail >= TAIL_TOL:
        raise TruncationTooSmall(f"sac({alpha},{S}) tail {tail:.2e} at D={D}")
    return BosonicCode(k0, k1, f"sac({alpha:g},{S})", {"alpha": float(alpha), "S": S})


def sqrt17_code(D: int = 6) -> BosonicCode:
    """The single-loss code on ``{|0>,|3>}`` and ``{|1>,|4>}``."""
    if D < 6:
        raise InvalidDimension(f"sqrt17 code needs D >= 6, got {D}")
    r = math.sqrt(17)
    k0 = np.zeros(D, complex)
    k1 = np.zeros(D, complex)
    k0[0], k0[3] = math.sqrt(7 - r), math.sqrt(r - 1)
    k1[1], k1[4] = math.sqrt(9 - r), -math.sqrt(r - 3)
    return BosonicCode(k0 / math.sqrt(6), k1 / math.sqrt(6), "sqrt17", {})


def custom_code(amps0, amps1, label: str = "custom", params: dict | None = None) -> BosonicCode:
    """Normalize two amplitude lists into a code; they must be orthogonal."""
    a0 = np.asarray(amps0, dtype=complex).reshape(-1)
    a1 = np.asarray(amps1, dtype=complex).reshape(-1)
    if a0.size != a1.size:
        raise InvalidCode(f"amplitude lists differ in length: {a0.size} vs {a1.size}")
    n0, n1 = np.linalg.norm(a0), np.linalg.norm(a1)
    if n0 == 0 or n1 == 0:
        raise InvalidCode("codewords must be nonzero")
    a0, a1 = a0 / n0, a1 / n1
    if abs(np.vdot(a0, a1)) >= 1e-8:
        raise InvalidCode(f"codewords are not orthogonal (|<0|1>| = {abs(np.vdot(a0, a1)):.3e})")
    # remove the sub-threshold overlap so the strict invariant holds
    a1 = a1 - np.vdot(a0, a1) * a0
    a1 /= np.linalg.norm(a1)
    return BosonicCode(a0, a1, label, params or {})


def mean_photon(code: BosonicCode) -> float:
    """``Tr[n (|mu_0><mu_0| + |mu_1><mu_1|) / 2]``."""
    n = np.arange(code.dim)
    return float(0.5 * np.sum(n * (np.abs(code.ket0) ** 2 + np.abs(code.ket1) ** 2)))


def encoding_channel(code: BosonicCode) -> QuantumChannel:
    return QuantumChannel(code.isometry[None])
