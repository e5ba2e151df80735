"""Multi-qubit codeword algebra: Shor/Steane families and their sign-altered variants.

Basis strings list qubit 1 first, so ``"100000000"`` has qubit 1 excited.
All checks run on dense 2^n state vectors (n <= 9 here).
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidCode

__all__ = [
    "NQubitState",
    "PauliString",
    "DampingMonomial",
    "CODE_NAMES",
    "build_code",
    "shor_prime_main_text",
    "apply_op",
    "detectable",
    "correctable_set",
    "stabilizer_check",
    "single_qubit_paulis",
    "enumerate_errors",
    "census",
    "write_census_csv",
    "CODE_STABILIZERS",
]

PROP_TOL = 1e-10
CODE_NAMES = ("shor", "shor'", "shor''", "steane", "stn'")


@dataclass(frozen=True)
class NQubitState:
    n: int
    amps: dict

    def __post_init__(self):
        for b in self.amps:
            if len(b) != self.n or set(b) - {"0", "1"}:
                raise InvalidCode(f"basis string {b!r} is not an {self.n}-bit string")

    def dense(self) -> np.ndarray:
        v = np.zeros(2 ** self.n, dtype=complex)
        for b, a in self.amps.items():
            v[int(b, 2)] += a
        return v

    def norm(self) -> float:
        return float(np.linalg.norm(self.dense()))

    @classmethod
    def from_terms(cls, terms, coeffs=None) -> "NQubitState":
        terms = [t.replace(" ", "") for t in terms]
        coeffs = [1.0] * len(terms) if coeffs is None else coeffs
        norm = math.sqrt(sum(abs(c) ** 2 for c in coeffs))
        return cls(len(terms[0]), {t: c / norm for t, c in zip(terms, coeffs)})


@dataclass(frozen=True)
class PauliString:
    letters: str
    phase: complex = 1.0

    def __post_init__(self):
        if set(self.letters) - set("IXYZ"):
            raise InvalidCode(f"invalid Pauli letters {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def __str__(self):
        return self.letters

    @classmethod
    def from_sites(cls, n: int, sites: dict) -> "PauliString":
        """``sites`` maps 1-based qubit index to a letter."""
        letters = ["I"] * n
        for q, c in sites.items():
            letters[q - 1] = c
        return cls("".join(letters))


@dataclass(frozen=True)
class DampingMonomial:
    """Product of ``sigma_- = |0><1|`` on the 1-based qubits in ``sites``."""

    n: int
    sites: frozenset

    def __post_init__(self):
        object.__setattr__(self, "sites", frozenset(self.sites))
        if not self.sites:
            raise InvalidCode("damping monomial needs at least one site")

    @property
    def weight(self) -> int:
        return len(self.sites)

    @property
    def letters(self) -> str:
        return "".join("L" if q + 1 in self.sites else "I" for q in range(self.n))

    def __str__(self):
        return self.letters


def _bit_masks(n):
    idx = np.arange(2 ** n)
    # qubit q (1-based) is bit n-q of the integer index
    return idx, [(idx >> (n - q)) & 1 for q in range(1, n + 1)]


def apply_op(op, vec: np.ndarray) -> np.ndarray:
    """Apply a Pauli string or damping monomial to a dense state vector."""
    n = op.n
    idx, bits = _bit_masks(n)
    out = np.asarray(vec, dtype=complex).copy()
    if isinstance(op, PauliString):
        flip = 0
        phase = np.ones(idx.size, dtype=complex)
        for q, c in enumerate(op.letters, start=1):
            b = bits[q - 1]
            if c in "XY":
                flip |= 1 << (n - q)
            if c == "Z":
                phase *= 1 - 2 * b
            elif c == "Y":
                # Y|0> = i|1>, Y|1> = -i|0>, phase set by the input bit
                phase *= np.where(b == 0, 1j, -1j)
        res = np.zeros_like(out)
        res[idx ^ flip] = phase * out
        return op.phase * res
    if isinstance(op, DampingMonomial):
        mask = 0
        for q in op.sites:
            mask |= 1 << (n - q)
        res = np.zeros_like(out)
        live = (idx & mask) == mask
        res[idx[live] ^ mask] = out[live]
        return res
    raise TypeError(f"unsupported operator {op!r}")


def _shor_blocks(signs_plus, signs_minus):
    plus_terms = ["000000000", "000111111", "111000111", "111111000"]
    minus_terms = ["111000000", "000111000", "000000111", "111111111"]
    return (NQubitState.from_terms(plus_terms, signs_plus),
            NQubitState.from_terms(minus_terms, signs_minus))


_STEANE0 = ["0000000", "1010101", "0110011", "1100110", "0001111", "1011010", "0111100", "1101001"]
_STEANE1 = ["1111111", "0101010", "1001100", "0011001", "1110000", "0100101", "1000011", "0010110"]


def build_code(name: str):
    """Codeword pair ``(|+> or |0>, |-> or |1>)`` of a named code.

    ``shor'`` uses the version whose stabilizers and logical operators are
    listed with it: the ``|+>`` word carries the signs, ``|->`` is Shor's.
    """
    if name == "shor":
        return _shor_blocks([1, 1, 1, 1], [1, 1, 1, 1])
    if name == "shor'":
        return _shor_blocks([1, -1, 1, -1], [1, 1, 1, 1])
    if name == "shor''":
        return _shor_blocks([1, 1, 1, 1], [1, 1, 1, -1])
    if name == "steane":
        return NQubitState.from_terms(_STEANE0), NQubitState.from_terms(_STEANE1)
    if name == "stn'":
        return (NQubitState.from_terms(_STEANE0),
                NQubitState.from_terms(_STEANE1, [-1, 1, 1, 1, 1, 1, 1, 1]))
    raise InvalidCode(f"unknown code {name!r}; expected one of {CODE_NAMES}")


def shor_prime_main_text():
    """The other presentation: ``|+> = |+_shor>``, signs ``(+,-,+,-)`` on ``|->``.

    It equals ``X^{(x)9}`` applied to :func:`build_code` ``("shor'")`` with the
    logical labels swapped (up to a global sign on one word).
    """
    minus = NQubitState.from_terms(["111000000", "000111000", "000000111", "111111111"], [1, -1, 1, -1])
    return build_code("shor")[0], minus


CODE_STABILIZERS = {
    "shor": ["ZZIIIIIII", "IZZIIIIII", "IIIZZIIII", "IIIIZZIII", "IIIIIIZZI", "IIIIIIIZZ",
             "XXXXXXIII", "IIIXXXXXX"],
    "shor'": ["ZZIIIIIII", "IZZIIIIII", "IIIZZIIII", "IIIIZZIII", "IIIIIIZZI", "IIIIIIIZZ",
              "XXXIIIXXX", "YXXYXXZII"],
}


def _words(code):
    return [w.dense() if isinstance(w, NQubitState) else np.asarray(w, complex) for w in code]


def _prop_identity(G):
    c = 0.5 * (G[0, 0] + G[1, 1])
    return complex(c), float(np.abs(G - c * np.eye(2)).max())


def detectable(code, E, tol: float = PROP_TOL):
    """``(flag, c)`` with ``G = <mu_s|E|mu_t> = c I`` tested to ``tol``."""
    w = _words(code)
    Ew = [apply_op(E, v) for v in w]
    G = np.array([[np.vdot(w[s], Ew[t]) for t in range(2)] for s in range(2)])
    c, dev = _prop_identity(G)
    return dev < tol, c


def correctable_set(code, errors, tol: float = PROP_TOL):
    """Check ``<mu_s|E^dag F|mu_t> ~ I`` for all pairs; returns ``(flag, worst violation)``."""
    w = _words(code)
    vecs = np.array([[apply_op(E, v) for v in w] for E in errors])  # [e, s, :]
    G = np.einsum("esx,ftx->efst", vecs.conj(), vecs)
    c = 0.5 * (G[:, :, 0, 0] + G[:, :, 1, 1])
    worst = float(np.abs(G - c[:, :, None, None] * np.eye(2)).max())
    return worst < tol, worst


def stabilizer_check(code, stabilizers, tol: float = 1e-12) -> bool:
    w = _words(code)
    for S in stabilizers:
        S = S if isinstance(S, PauliString) else PauliString(S)
        for v in w:
            if np.linalg.norm(apply_op(S, v) - v) >= tol:
                return False
    return True


def single_qubit_paulis(n: int, with_identity: bool = True):
    ops = [PauliString("I" * n)] if with_identity else []
    for q in range(1, n + 1):
        for c in "XYZ":
            ops.append(PauliString.from_sites(n, {q: c}))
    return ops


ALPHABETS = {"X-only": "X", "Y-only": "Y", "Z-only": "Z", "XY-hybrid": "XY", "damping": None}


def enumerate_errors(n: int, weight: int, alphabet: str):
    """All errors of exact ``weight`` over ``alphabet`` (see ``ALPHABETS``)."""
    if alphabet not in ALPHABETS:
        raise InvalidCode(f"unknown alphabet {alphabet!r}; expected one of {sorted(ALPHABETS)}")
    if not 0 < weight <= n:
        raise InvalidCode(f"weight must lie in [1, {n}], got {weight}")
    letters = ALPHABETS[alphabet]
    for sites in itertools.combinations(range(1, n + 1), weight):
        if letters is None:
            yield DampingMonomial(n, frozenset(sites))
            continue
        for combo in itertools.product(letters, repeat=weight):
            yield PauliString.from_sites(n, dict(zip(sites, combo)))


def census(code, weight: int, alphabet: str, tol: float = PROP_TOL) -> dict:
    """Count detectable and undetectable errors of one weight and alphabet."""
    w = _words(code)
    n = int(round(math.log2(w[0].size)))
    bad = []
    total = 0
    for E in enumerate_errors(n, weight, alphabet):
        total += 1
        if not detectable(w, E, tol)[0]:
            bad.append(str(E))
    return {
        "alphabet": alphabet,
        "weight": weight,
        "total": total,
        "detectable": total - len(bad),
        "undetectable": len(bad),
        "undetectable_ops": bad,
    }


def write_census_csv(path, rows, json_path=None) -> None:
    """Rows carry a ``code`` key in addition to :func:`census` output."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["code", "alphabet", "weight", "total", "detectable", "undetectable"])
        for r in rows:
            wr.writerow([r["code"], r["alphabet"], r["weight"], r["total"], r["detectable"], r["undetectable"]])
    if json_path is not None:
        doc = [{"code": r["code"], "alphabet": r["alphabet"], "weight": r["weight"],
                "undetectable": r["undetectable_ops"]} for r in rows]
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=2)
