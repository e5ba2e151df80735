"""Phase-space displacement algebra for square and sheared GKP lattices.

A displacement exponent ``(c_q, c_p)`` stands for ``exp(i (c_q q + c_p p))``
up to phase.  With ``[q, p] = i`` that operator shifts states by
``(dq, dp) = (-c_p, c_q)``.  Lattices are stored in shift coordinates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidLattice

__all__ = [
    "DisplacementExponent",
    "Lattice2D",
    "shear_conjugate",
    "gkp_stabilizers",
    "logical_lattice",
    "stabilizer_lattice",
    "shortest_vectors",
    "min_uncorrectable_shift",
    "gkp_report",
    "HEX_ALPHA2",
]

HEX_ALPHA2 = math.sqrt(3) * math.pi / 2


@dataclass(frozen=True)
class DisplacementExponent:
    c_q: float
    c_p: float

    def __post_init__(self):
        if not (math.isfinite(self.c_q) and math.isfinite(self.c_p)):
            raise InvalidLattice("displacement exponent must be finite")

    @property
    def shift(self) -> np.ndarray:
        return np.array([-self.c_p, self.c_q])

    @classmethod
    def from_shift(cls, dq: float, dp: float) -> "DisplacementExponent":
        return cls(dp, -dq)


@dataclass(frozen=True)
class Lattice2D:
    """Rows of ``generators`` are the basis vectors in (q-shift, p-shift)."""

    generators: np.ndarray

    def __post_init__(self):
        g = np.array(self.generators, dtype=float)
        if g.shape != (2, 2):
            raise InvalidLattice(f"expected two 2-vectors, got shape {g.shape}")
        if abs(np.linalg.det(g)) < 1e-12:
            raise InvalidLattice("lattice generators are linearly dependent")
        g.setflags(write=False)
        object.__setattr__(self, "generators", g)

    @property
    def area(self) -> float:
        return float(abs(np.linalg.det(self.generators)))

    def scaled(self, s: float) -> "Lattice2D":
        return Lattice2D(s * self.generators)

    def contains(self, v, tol: float = 1e-9) -> bool:
        c = np.linalg.solve(self.generators.T, np.asarray(v, float))
        return bool(np.all(np.abs(c - np.round(c)) < tol))


def shear_conjugate(e: DisplacementExponent, lam: float) -> DisplacementExponent:
    """Conjugate by ``exp(i lam q^2)``: ``p -> p - 2 lam q``, q unchanged."""
    return DisplacementExponent(e.c_q - 2 * lam * e.c_p, e.c_p)


def gkp_stabilizers(alpha: float):
    """``S1 = exp(-i p alpha)`` and ``S2 = exp(2 pi i q / alpha)``."""
    return DisplacementExponent(0.0, -alpha), DisplacementExponent(2 * math.pi / alpha, 0.0)


def logical_lattice(alpha: float, lam: float = 0.0) -> Lattice2D:
    """Logical shifts ``(alpha, 0)`` and ``(0, pi/alpha)``, optionally sheared by lam."""
    if alpha <= 0:
        raise InvalidLattice(f"alpha must be positive, got {alpha}")
    ops = (DisplacementExponent(0.0, -alpha), DisplacementExponent(math.pi / alpha, 0.0))
    return Lattice2D(np.array([shear_conjugate(o, lam).shift for o in ops]))


def stabilizer_lattice(logical: Lattice2D) -> Lattice2D:
    return logical.scaled(2.0)


def shortest_vectors(lat: Lattice2D, exclude: Lattice2D | None = None, radius: int | None = None,
                     rel_tol: float = 1e-9):
    """Brute-force shortest nonzero vectors of ``lat`` not lying in ``exclude``.

    Integer coefficients range over ``[-radius, radius]``; the default radius
    covers every vector shorter than the shortest generator.

    Returns
    -------
    length : float
    vectors : (m, 2) array of all vectors attaining it
    """
    G = lat.generators
    if radius is None:
        L = np.linalg.norm(G, axis=1).max()
        smin = np.linalg.svd(G, compute_uv=False).min()
        radius = int(math.ceil(L / smin)) + 1
    best = math.inf
    found = []
    for i, j in itertools.product(range(-radius, radius + 1), repeat=2):
        if i == 0 and j == 0:
            continue
        v = i * G[0] + j * G[1]
        if exclude is not None and exclude.contains(v):
            continue
        n = float(np.linalg.norm(v))
        if n < best * (1 - rel_tol):
            best, found = n, [v]
        elif n <= best * (1 + rel_tol):
            found.append(v)
    return best, np.array(found)


def min_uncorrectable_shift(lat: Lattice2D, stabilizer_sublattice: Lattice2D | None = None) -> float:
    """Length of the shortest logical displacement that is not a stabilizer."""
    if stabilizer_sublattice is None:
        stabilizer_sublattice = stabilizer_lattice(lat)
    return shortest_vectors(lat, stabilizer_sublattice)[0]


def gkp_report() -> dict:
    """Square (alpha^2 = pi) versus sheared (alpha^2 = sqrt(3) pi / 2) comparison."""
    sq = logical_lattice(math.sqrt(math.pi))
    a = math.sqrt(HEX_ALPHA2)
    hx = logical_lattice(a, math.pi / (4 * a * a))
    ls, vs = shortest_vectors(sq, stabilizer_lattice(sq))
    lh, vh = shortest_vectors(hx, stabilizer_lattice(hx))
    return {
        "square_min_shift": ls,
        "hex_min_shift": lh,
        "ratio": lh / ls,
        "shortest_vector_multiplicity": int(len(vh)),
        "square_multiplicity": int(len(vs)),
    }
