import numpy as np
import pytest

from qec_lab.errors import ConvergenceFailure
from qec_lab.sdp import partial_trace_out, solve_choi_sdp


def _random_psd(rng, n, rank=None):
    G = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    return G @ G.conj().T


def test_trivial_objective_identity():
    # C = |Phi><Phi| / 4 on a 2 -> 2 map: the identity channel is optimal with value 1
    phi = np.eye(2).reshape(-1)
    res = solve_choi_sdp(np.outer(phi, phi) / 4, 2, 2)
    assert res.converged
    assert abs(res.objective - 1) < 1e-9


def test_feasibility_and_duality(rng):
    C = _random_psd(rng, 6, 2)
    res = solve_choi_sdp(C, 2, 3)
    X = res.X
    assert np.linalg.eigvalsh(X).min() > -1e-9
    assert np.abs(partial_trace_out(X, 2, 3) - np.eye(3)).max() < 1e-9
    assert abs(res.objective - res.dual_objective) < 1e-8 * max(1, abs(res.objective))


def test_real_restriction(rng):
    C = _random_psd(rng, 8, 3)
    full = solve_choi_sdp(C, 2, 4)
    real = solve_choi_sdp(C, 2, 4, real=True)
    assert np.abs(real.X.imag).max() == 0
    assert real.objective <= full.objective + 1e-8


def test_linear_constraint(rng):
    C = _random_psd(rng, 6, 2)
    A = np.diag(np.arange(6.0))
    free = solve_choi_sdp(C, 3, 2)
    cap = 0.5 * np.real(np.trace(A @ free.X))
    res = solve_choi_sdp(C, 3, 2, A=A, b=cap)
    assert np.real(np.trace(A @ res.X)) <= cap + 1e-8
    assert res.objective <= free.objective + 1e-9


def test_warm_start_same_optimum(rng):
    C = _random_psd(rng, 6, 2)
    cold = solve_choi_sdp(C, 2, 3)
    warm = solve_choi_sdp(C, 2, 3, X0=cold.X)
    assert abs(warm.objective - cold.objective) < 1e-8


def test_iteration_cap_raises(rng):
    C = _random_psd(rng, 8, 3)
    with pytest.raises(ConvergenceFailure) as err:
        solve_choi_sdp(C, 2, 4, max_iter=2)
    assert err.value.residuals is not None


def test_trace_recorded(rng):
    res = solve_choi_sdp(_random_psd(rng, 4, 1), 2, 2, record_trace=True)
    assert len(res.trace) == res.iterations
