import numpy as np
import pytest

from qec_lab.channels import QuantumChannel, compose, identity_channel, loss_channel
from qec_lab.codes import binomial_code, cat_code, sab_code, sqrt17_code
from qec_lab.errors import ContractViolation, InvalidDimension, StructureViolation
from qec_lab.metrics import effective_qubit_channel, pipeline_fidelity
from qec_lab.recovery import (decoder, error_words, functional_self_test, one_level_recovery,
                              optimal_recovery, recovery_fidelity, recovery_objective,
                              solve_optimal_recovery, two_level_recovery)
from qec_lab.recovery import _random_channel


def _no_recovery(code, gamma):
    return recovery_fidelity(code, loss_channel(gamma, code.dim), identity_channel(code.dim))


def test_error_words_unit_and_orthogonal():
    ew = error_words(sab_code(3, 2), 2, 0.1)
    for s in range(2):
        for k in range(4):
            assert abs(np.linalg.norm(ew.words[s, k]) - 1) < 1e-12
        for k in range(4):
            assert abs(np.vdot(ew.words[0, k], ew.words[1, k])) < 1e-10


def test_ladder_structure_required():
    with pytest.raises(StructureViolation):
        one_level_recovery(sqrt17_code(), 1 + 1, 0.1)


@pytest.mark.parametrize("make", [binomial_code, sab_code])
@pytest.mark.parametrize("N,S", [(2, 2), (3, 2), (4, 3)])
def test_structured_recoveries_cptp(make, N, S):
    code = make(N, S)
    for R in (one_level_recovery(code, S, 0.1), two_level_recovery(code, S, 0.1)):
        assert np.abs(R.tp_deficit()).max() < 1e-8
        for K in R.kraus:
            P = K.conj().T @ K
            assert np.abs(P @ P - P).max() < 1e-8


def test_one_level_beats_no_recovery():
    b = binomial_code(2, 2)
    f1 = recovery_fidelity(b, loss_channel(0.1, b.dim), one_level_recovery(b, 2, 0.1))
    assert f1 > _no_recovery(b, 0.1)


@pytest.mark.parametrize("N,S", [(2, 2), (3, 2), (4, 3), (3, 3)])
def test_one_level_reverses_low_losses(N, S):
    code = binomial_code(N, S)
    g = 0.05
    low = loss_channel(g, code.dim, S - 1)
    R = compose(decoder(code), one_level_recovery(code, S, g))
    from qec_lab.metrics import pipeline_kraus
    K = pipeline_kraus(code, low, R)
    # no logical leakage; the diagonals agree only to first order in gamma
    # because E_0 damps the two codewords differently
    for k in K:
        assert abs(k[0, 1]) < 1e-8 and abs(k[1, 0]) < 1e-8
        assert abs(abs(k[0, 0]) - abs(k[1, 1])) < 10 * g ** 2


def test_two_level_projectors_orthogonal():
    code = sab_code(4, 3)
    R = two_level_recovery(code, 3, 0.1)
    # Kraus ranges (R^dag R projectors) of the restoring maps are mutually orthogonal
    projs = [K.conj().T @ K for K in R.kraus[:-1]]
    for i, P in enumerate(projs):
        for Q in projs[i + 1:]:
            assert np.abs(P @ Q).max() < 1e-10


@pytest.mark.parametrize("gamma", [0.1, 0.25])
@pytest.mark.parametrize("N,S", [(2, 2), (3, 2), (4, 2), (3, 3), (4, 3), (2, 1)])
def test_recovery_ordering(N, S, gamma):
    for make in (binomial_code, sab_code):
        code = make(N, S)
        ch = loss_channel(gamma, code.dim)
        f1 = recovery_fidelity(code, ch, one_level_recovery(code, S, gamma))
        f2 = recovery_fidelity(code, ch, two_level_recovery(code, S, gamma))
        fo = solve_optimal_recovery(code, ch).fidelity
        assert fo >= f2 - 1e-7 and f2 >= f1 - 1e-7


def test_two_level_benefit_larger_for_sab():
    for N, S in [(3, 2), (4, 3), (5, 2)]:
        b, s = binomial_code(N, S), sab_code(N, S)
        fb = recovery_fidelity(b, loss_channel(0.1, b.dim), two_level_recovery(b, S, 0.1))
        fs = recovery_fidelity(s, loss_channel(0.1, s.dim), two_level_recovery(s, S, 0.1))
        assert fs >= fb


def test_decoder_is_cptp_and_inverts_encoding():
    code = sab_code(3, 2)
    dec = decoder(code)
    assert dec.dim_out == 2 and dec.is_trace_preserving(1e-12)
    f = pipeline_fidelity(code, identity_channel(code.dim), dec)
    assert abs(f - 1) < 1e-12


def test_optimal_identity_channel():
    code = binomial_code(2, 2)
    out = solve_optimal_recovery(code, identity_channel(code.dim))
    assert abs(out.fidelity - 1) < 1e-8


def test_optimal_table1_baseline_kt0():
    code = binomial_code(2, 2, 20)
    rec, f = optimal_recovery(code, loss_channel(0.1, 20), 20)
    assert rec.dim_out == 2 and rec.is_trace_preserving()
    assert abs((1 - f) / 1.8e-2 - 1) < 0.05


def test_optimal_dimension_mismatch():
    code = binomial_code(2, 2)
    with pytest.raises(InvalidDimension):
        optimal_recovery(code, loss_channel(0.1, code.dim), code.dim + 1)


def test_optimal_certificate_and_warm_start():
    code = sab_code(3, 2)
    ch = loss_channel(0.1, code.dim)
    cold = solve_optimal_recovery(code, ch)
    X = cold.recovery.choi()
    assert X.min_eigenvalue() > -1e-9
    assert np.abs(X.partial_trace_out() - np.eye(code.dim)).max() < 1e-9
    warm_from = compose(decoder(code), two_level_recovery(code, 2, 0.1))
    warm = solve_optimal_recovery(code, ch, warm_start=warm_from)
    assert abs(warm.fidelity - cold.fidelity) < 1e-7


def test_full_support_matches_reduced():
    code = binomial_code(2, 2)
    ch = loss_channel(0.1, code.dim)
    a = solve_optimal_recovery(code, ch).fidelity
    b = solve_optimal_recovery(code, ch, reduce_support=False).fidelity
    assert abs(a - b) < 1e-8


def test_functional_matches_direct_on_random_channels(rng):
    code = sab_code(2, 2)
    F = np.einsum("kab,bs->kas", loss_channel(0.1, code.dim).kraus, code.isometry)
    C = recovery_objective(F)
    assert functional_self_test(F, C, trials=20, seed=7) < 1e-10


def test_functional_self_test_detects_wrong_convention():
    code = sab_code(2, 2)
    F = np.einsum("kab,bs->kas", loss_channel(0.1, code.dim).kraus, code.isometry)
    C = recovery_objective(F)
    with pytest.raises(ContractViolation):
        functional_self_test(F, C.T.conj().T.T + 0.01 * np.eye(C.shape[0]))


def test_random_channel_is_cptp(rng):
    ch = _random_channel(rng, 7, 2)
    assert ch.is_trace_preserving(1e-12)


def test_cat_optimal_recovery_runs():
    code = cat_code(1.5, 1)
    ch = loss_channel(0.1, code.dim)
    f = solve_optimal_recovery(code, ch).fidelity
    assert f > recovery_fidelity(code, ch, identity_channel(code.dim))


def test_trace_csv(tmp_path):
    code = binomial_code(2, 2)
    path = tmp_path / "trace.csv"
    solve_optimal_recovery(code, loss_channel(0.1, code.dim), trace_path=path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,primal_residual,dual_residual,objective"
    assert len(lines) > 2
