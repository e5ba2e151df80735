import math

import numpy as np
import pytest

from qec_lab.codes import (BosonicCode, binomial_code, cat_code, cat_default_dim, code_from_json,
                           custom_code, default_dim, encoding_channel, mean_photon, sab_code,
                           sac_code, sign_alteration_unitary, sqrt17_code)
from qec_lab.errors import InvalidCode, TruncationTooSmall
from qec_lab.fock import annihilation, number_operator


def test_binomial_examples():
    b = binomial_code(1, 1, 3)
    assert np.allclose(b.ket0, [1, 0, 0]) and np.allclose(b.ket1, [0, 1, 0])
    b = binomial_code(2, 2, 6)
    assert np.allclose(b.ket0, np.array([1, 0, 0, 0, 1, 0]) / math.sqrt(2))
    assert np.allclose(b.ket1, [0, 0, 1, 0, 0, 0])
    b = binomial_code(4, 3)
    assert abs(b.ket0[6] - 2 ** -1.5 * math.sqrt(6)) < 1e-15


def test_binomial_truncation():
    with pytest.raises(TruncationTooSmall):
        binomial_code(2, 2, 4)
    assert binomial_code(2, 2, 5).dim == 5
    assert binomial_code(3, 2).dim == default_dim(3, 2) == 15


def test_sab_examples():
    s = sab_code(2, 2, 6)
    assert np.allclose(s.ket0, np.array([1, 0, 0, 0, -1, 0]) / math.sqrt(2))
    assert np.allclose(s.ket1, binomial_code(2, 2, 6).ket1)
    s = sab_code(4, 3)
    assert np.sign(s.ket0[[0, 6, 12]].real).tolist() == [1, -1, 1]


@pytest.mark.parametrize("N,S", [(2, 2), (3, 2), (4, 3), (5, 2), (3, 4)])
def test_sign_alteration_identity(N, S):
    b, s = binomial_code(N, S), sab_code(N, S)
    U = sign_alteration_unitary(b.dim, S)
    assert np.linalg.norm(U @ b.ket0 - s.ket0) < 1e-12
    assert np.linalg.norm(U @ b.ket1 - np.exp(1j * math.pi / 4) * s.ket1) < 1e-12
    assert np.abs(np.abs(b.isometry) - np.abs(s.isometry)).max() < 1e-14


def test_cat_parity_and_norm():
    c = cat_code(2.0, 1)
    assert np.abs(c.ket0[1::2]).max() == 0
    assert abs(np.linalg.norm(c.ket0) - 1) < 1e-10
    assert np.abs(c.ket0[[n for n in range(c.dim) if n % 2]]).max() == 0


def _coherent(alpha, D):
    n = np.arange(D)
    logs = n * np.log(complex(alpha)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    return np.exp(-abs(alpha) ** 2 / 2 + logs)


def test_cat_against_coherent_states():
    alpha = 2.0
    c = cat_code(alpha, 1)
    D = c.dim
    plus = _coherent(alpha, D) + _coherent(-alpha, D)
    minus = _coherent(alpha, D) - _coherent(-alpha, D)
    plus /= np.linalg.norm(plus)
    minus /= np.linalg.norm(minus)
    a = annihilation(D)
    assert abs(np.vdot(plus, c.ket0)) > 1 - 1e-10
    assert abs(np.vdot(c.ket0, a @ c.ket1) - np.vdot(plus, a @ minus)) < 1e-10


@pytest.mark.parametrize("S", [1, 2, 3])
def test_cat_ladders(S):
    c = sac_code(1.5, S)
    n = np.arange(c.dim)
    assert np.abs(c.ket0[n % (2 * S) != 0]).max() == 0
    assert np.abs(c.ket1[n % (2 * S) != S]).max() == 0


def test_sac_signs_and_kerr_relation():
    s = sac_code(2.0, 1)
    amps = s.ket0[[0, 2, 4, 6]].real
    assert np.all(np.sign(amps) == [1, -1, 1, -1])
    for S in (1, 2):
        c, s = cat_code(2.0, S), sac_code(2.0, S)
        U = sign_alteration_unitary(c.dim, S)
        assert abs(np.vdot(s.ket0, U @ c.ket0)) ** 2 > 1 - 1e-10


def test_sac_overlap_decreases():
    vals = []
    for alpha in (1.0, 1.5, 2.0, 2.5):
        s = sac_code(alpha, 1)
        vals.append(abs(np.vdot(s.ket0, annihilation(s.dim) @ s.ket1)))
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_cat_tail_and_default_dim():
    D = cat_default_dim(2.0, 1)
    assert D >= math.ceil(4 + 16 + 10)
    with pytest.raises(TruncationTooSmall):
        cat_code(3.0, 1, D=12)


def test_sqrt17():
    q = sqrt17_code()
    a, n = annihilation(6), number_operator(6)
    r = (math.sqrt(17) - 1) / 2
    assert abs(np.vdot(q.ket0, n @ q.ket0) - r) < 1e-12
    assert abs(np.vdot(q.ket1, n @ q.ket1) - r) < 1e-12
    assert abs(np.vdot(q.ket0, n @ q.ket1)) < 1e-12
    assert abs(np.vdot(q.ket0, a @ q.ket1)) < 1e-12
    assert abs(np.linalg.norm(q.ket0) - 1) < 1e-15
    assert abs(mean_photon(q) - r) < 1e-12


def test_custom_code():
    c = custom_code([1, 0], [0, 1])
    assert c.dim == 2 and mean_photon(c) == 0.5
    c = custom_code([2, 0, 0], [0, 3, 0])
    assert np.allclose(c.ket0, [1, 0, 0]) and np.allclose(c.ket1, [0, 1, 0])
    with pytest.raises(InvalidCode):
        custom_code([1, 1], [1, 1])
    with pytest.raises(InvalidCode):
        custom_code([0, 0], [1, 0])


@pytest.mark.parametrize("N,S", [(2, 2), (4, 3), (3, 1)])
def test_mean_photon_binomial(N, S):
    assert abs(mean_photon(binomial_code(N, S)) - N * S / 2) < 1e-12


def test_encoding_channel():
    b = binomial_code(2, 2)
    ch = encoding_channel(b)
    V = ch.kraus[0]
    assert np.abs(V.conj().T @ V - np.eye(2)).max() < 1e-12
    assert np.allclose(V @ [1, 0], b.ket0)
    assert np.linalg.matrix_rank(ch.choi().matrix, tol=1e-10) == 1


def test_code_validation():
    with pytest.raises(InvalidCode):
        BosonicCode(np.array([1, 0]), np.array([1, 0]))
    with pytest.raises(InvalidCode):
        BosonicCode(np.array([2, 0]), np.array([0, 1]))


def test_code_json_round_trip():
    s = sab_code(3, 2)
    back = code_from_json(s.to_json())
    assert back.label == s.label and back.params == s.params
    assert np.allclose(back.isometry, s.isometry)


def test_with_dim():
    b = binomial_code(2, 2, 6)
    assert b.with_dim(10).dim == 10
    assert np.allclose(b.with_dim(10).with_dim(6).isometry, b.isometry)
    with pytest.raises(TruncationTooSmall):
        b.with_dim(4)
